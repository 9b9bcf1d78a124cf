"""Hand-built trigram model with add-k smoothing, for the ONION-style scan.

Vocabulary = training words + </s> + <unk>; histories padded with two <s>.
P(w | u v) = (c(u v w) + k) / (c(u v .) + k |V|). Perplexity is
exp(-log P(sentence + </s>) / (len + 1)).
"""
import math
from collections import Counter
from fractions import Fraction

CORPUS = [
    "returns the sum of the two values",
    "returns the number of items in the list",
    "checks if the value is valid",
    "adds the value to the total",
    "returns the total of the list",
    "checks if the list is empty",
    "computes the sum of the list",
    "updates the counter for each item",
    "returns true if the item is valid",
    "adds each item to the list",
]
K = Fraction(1, 10)


def train(sentences):
    vocab = set(w for s in sentences for w in s.split()) | {"</s>", "<unk>"}
    tri, hist = Counter(), Counter()
    for s in sentences:
        ids = ["<s>", "<s>"] + s.split() + ["</s>"]
        for i in range(2, len(ids)):
            tri[(ids[i - 2], ids[i - 1], ids[i])] += 1
            hist[(ids[i - 2], ids[i - 1])] += 1
    return vocab, tri, hist


VOCAB, TRI, HIST = train(CORPUS)


def prob(u, v, w):
    return (TRI[(u, v, w)] + K) / (HIST[(u, v)] + K * len(VOCAB))


def perplexity(words):
    ids = ["<s>", "<s>"] + [w if w in VOCAB else "<unk>" for w in words] + ["</s>"]
    lp = sum(math.log(prob(ids[i - 2], ids[i - 1], ids[i])) for i in range(2, len(ids)))
    return math.exp(-lp / (len(words) + 1))


def drops(words):
    base = perplexity(words)
    return base, [base - perplexity(words[:i] + words[i + 1:]) for i in range(len(words))]


if __name__ == "__main__":
    print("vocab", len(VOCAB))
    # sanity: distribution sums to one for a seen and an unseen history
    for h in [("the", "sum"), ("zzz", "yyy")]:
        print("sum", h, sum(prob(h[0], h[1], w) for w in VOCAB))
    clean = "returns the sum of the two values".split()
    once = "returns the sum cl of the two values".split()
    triple = "cl returns the sum cl of the two values cl".split()
    for name, s in [("clean", clean), ("once", once), ("triple", triple)]:
        base, d = drops(s)
        print(name, "ppl %.17g" % base)
        for w, x in zip(s, d):
            print("   %-8s %.17g" % (w, x))
