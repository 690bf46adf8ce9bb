"""Co-speech gesture synthesis from text by gesture type.

Words are classified as Beat, Imagistic or No-Gesture; each run of words is
filled with real motion retrieved from a type-specific gesture library and
the pieces are merged into one clip timed to the speech.
"""

from .library import GestureLibrary, GestureRecord, LibraryConfig, build
from .motion import DEFAULT_SKELETON, MotionClip, Skeleton
from .pipeline import GenerationConfig, GenerationResult, TextModels, generate
from .series import ScalarSeries
from .signal import Waveform
from .text import EmbeddingTable, GestureType, LinearHead

__all__ = [
    "DEFAULT_SKELETON",
    "EmbeddingTable",
    "GenerationConfig",
    "GenerationResult",
    "GestureLibrary",
    "GestureRecord",
    "GestureType",
    "LibraryConfig",
    "LinearHead",
    "MotionClip",
    "ScalarSeries",
    "Skeleton",
    "TextModels",
    "Waveform",
    "build",
    "generate",
]

__version__ = "0.1.0"
