# Speech intensity and its keyframes; the speaking-rate model for text without audio.
import numpy as np

from gesture_synth.signal import Waveform, audio_keyframes, estimate_duration, intensity

rng = np.random.default_rng(0)
sr = 16000

# Synthetic "speech": a quiet noise floor with three stressed syllables.
x = 1e-3 * rng.standard_normal(3 * sr)
t = np.arange(x.size) / sr
for start, end in [(0.4, 0.7), (1.3, 1.5), (2.2, 2.6)]:
    i, j = int(start * sr), int(end * sr)
    x[i:j] += 0.5 * np.hanning(j - i) * np.sin(2 * np.pi * 180 * t[i:j])
audio = Waveform(sr, x)

# Frame-wise RMS level in dBFS (25 ms windows, 10 ms hop).
level = intensity(audio)
print(len(level), "intensity frames at", level.rate, "Hz")
print("quietest / loudest level: %.1f / %.1f dB" % (level.values.min(), level.values.max()))

# Keyframes are peaks of the smoothed level that stand 3 dB above the median.
for sigma in (0.02, 0.05, 0.10, 0.30):
    keys = audio_keyframes(audio, sigma=sigma)
    print(f"sigma {sigma:.2f} s -> keyframes at", [round(k, 2) for k in keys])

# A pure tone at full scale sits 3 dB below a constant signal.
tone = Waveform(sr, np.sin(2 * np.pi * 400 * np.arange(sr) / sr))
print("full-scale sine: %.4f dB" % intensity(tone).values.mean())

# Without audio, words are timed by a speaking-rate model (150 words per minute).
words = "it looks like a giant donut floating above the ocean".split()
total, spans = estimate_duration(words, rate_wpm=150)
print(f"{len(words)} words -> {total:.2f} s")
for w, (a, b) in zip(words, spans):
    print(f"  {w:<9} {a:5.2f} - {b:5.2f}")
