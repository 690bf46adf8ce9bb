# From text to typed word spans: tokenize, embed, classify, smooth and segment.
import numpy as np

from gesture_synth.fixtures import data_path
from gesture_synth.text import (
    EmbeddingTable,
    GestureType,
    LinearHead,
    embed,
    predict_types,
    segment_spans,
    select_imagistic_words,
    smooth_types,
    tokenize,
    train_head,
    type_probabilities,
)

table = EmbeddingTable.load(data_path("embeddings.txt"))
type_head = LinearHead.load(data_path("type_head.txt"))
selector = LinearHead.load(data_path("word_head.txt"))

text = "Well um it is really very important, and the ocean is a huge wave so tall it must rise up."
words = tokenize(text)
tokens = embed(words, table)
raw = predict_types(tokens, type_head)
probs = type_probabilities(tokens, type_head)
for w, lab, p in zip(words, raw, probs):
    print(f"  {w:<8} {lab.name:<10} " + " ".join(f"{x:.2f}" for x in p))

# A centered five-word majority vote removes isolated labels.
smooth = smooth_types(raw, window=5)
print("\nraw:   ", " ".join(l.name[0] for l in raw))
print("smooth:", " ".join(l.name[0] for l in smooth))

for span in segment_spans(smooth):
    chunk = tokens[span.start:span.end]
    line = f"[{span.start:>2},{span.end:>2}) {span.label.name:<10} {' '.join(words[span.start:span.end])}"
    if span.label is GestureType.Imagistic:
        picked = select_imagistic_words(chunk, selector)
        line += "   important: " + ", ".join(f"{words[i]} ({s:.2f})" for i, s in picked)
    print(line)

# Heads are plain linear models trained by full-batch gradient descent.
rng = np.random.default_rng(0)
centers = rng.normal(size=(3, 16)) * 2
y = rng.integers(0, 3, 300)
x = centers[y] + rng.normal(size=(300, 16))
losses = []
head = train_head(x, y, 3, lr=0.1, epochs=300, callback=lambda e, l: losses.append(l))
print(f"\ntraining loss {losses[0]:.3f} -> {losses[-1]:.3f}")
print("training accuracy %.3f" % np.mean(np.argmax(head.logits(x), axis=1) == y))
