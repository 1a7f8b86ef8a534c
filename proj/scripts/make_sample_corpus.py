#!/usr/bin/env python3
"""Regenerates data/sample_corpus.jsonl.

The bundled corpus is synthetic pseudo-English: pronounceable words with a
Zipfian frequency profile, per-document topic vocabularies, and paragraph
structure. Topic words are rare under a global model, so scoring a document
shows the probability bursts the toolkit is built to measure, without
shipping any third-party text. Fully deterministic for a fixed seed.

Usage: python3 scripts/make_sample_corpus.py [out_path]
"""

import json
import random
import sys

SEED = 20240817
TARGET_BYTES = 2_200_000
MAX_DOCS = 1500

ONSETS = ["b", "br", "c", "ch", "cl", "d", "dr", "f", "fl", "g", "gr", "h", "j",
          "k", "l", "m", "n", "p", "pl", "pr", "qu", "r", "s", "sh", "sl", "sp",
          "st", "str", "t", "th", "tr", "v", "w"]
NUCLEI = ["a", "e", "i", "o", "u", "ai", "ea", "ee", "ie", "oa", "ou"]
CODAS = ["", "", "", "b", "ck", "d", "g", "l", "ll", "m", "n", "nd", "ng", "nt",
         "p", "r", "rd", "rn", "s", "st", "t", "th"]

FUNCTION_WORDS = [
    "the", "of", "and", "a", "to", "in", "is", "was", "it", "for", "on", "as",
    "with", "at", "by", "from", "that", "this", "are", "were", "an", "be",
    "or", "not", "but", "had", "has", "have", "they", "we", "its", "their",
    "which", "when", "while", "after", "before", "under", "over", "near",
    "then", "also", "more", "most", "some", "each", "into", "through",
]


def make_word(rng: random.Random) -> str:
    n_syllables = rng.choices([1, 2, 3, 4], weights=[30, 45, 20, 5])[0]
    word = ""
    for _ in range(n_syllables):
        word += rng.choice(ONSETS) + rng.choice(NUCLEI) + rng.choice(CODAS)
    return word


def build_vocab(rng: random.Random, size: int) -> list[str]:
    words: set[str] = set(FUNCTION_WORDS)
    out: list[str] = []
    while len(out) < size:
        w = make_word(rng)
        if w not in words and 2 <= len(w) <= 14:
            words.add(w)
            out.append(w)
    return out


def main() -> None:
    out_path = sys.argv[1] if len(sys.argv) > 1 else "data/sample_corpus.jsonl"
    rng = random.Random(SEED)

    content = build_vocab(rng, 3200)
    # Zipfian weights over the shared content vocabulary.
    common = content[:800]
    common_weights = [1.0 / (i + 2) ** 1.05 for i in range(len(common))]
    # Topic pools draw on the rarer tail, mostly disjoint between topics.
    tail = content[800:]
    rng.shuffle(tail)
    topics = [tail[i * 150:(i + 1) * 150] for i in range(16)]

    def sentence(words_from_topic, topic_share: float) -> str:
        length = rng.randint(6, 24)
        toks = []
        for _ in range(length):
            u = rng.random()
            if u < 0.38:
                toks.append(rng.choice(FUNCTION_WORDS))
            elif u < 0.38 + topic_share and words_from_topic:
                toks.append(rng.choice(words_from_topic))
            elif u < 0.97:
                toks.append(rng.choices(common, weights=common_weights)[0])
            else:
                toks.append(str(rng.randint(2, 2030)))
        if len(toks) > 9 and rng.random() < 0.4:
            cut = rng.randint(3, len(toks) - 3)
            toks[cut] = toks[cut] + ","
        text = " ".join(toks)
        text = text[0].upper() + text[1:]
        return text + rng.choices([".", ".", ".", "?", "!"])[0]

    docs = []
    total = 0
    doc_index = 0
    while total < TARGET_BYTES and doc_index < MAX_DOCS:
        n_topics = rng.choices([1, 2, 3], weights=[50, 35, 15])[0]
        pool = []
        for t in rng.sample(range(len(topics)), n_topics):
            pool.extend(topics[t])
        topic_share = rng.uniform(0.25, 0.45)

        n_paragraphs = rng.choices([1, 2, 3, 4, 6, 8], weights=[35, 25, 15, 12, 8, 5])[0]
        paragraphs = []
        for _ in range(n_paragraphs):
            n_sentences = rng.randint(2, 9)
            paragraphs.append(" ".join(sentence(pool, topic_share)
                                       for _ in range(n_sentences)))
        text = "\n\n".join(paragraphs)
        doc = {"id": f"doc{doc_index:05d}", "text": text}
        line = json.dumps(doc, ensure_ascii=True)
        docs.append(line)
        total += len(line) + 1
        doc_index += 1

    with open(out_path, "w", encoding="ascii") as f:
        for line in docs:
            f.write(line + "\n")
    print(f"wrote {len(docs)} documents, {total} bytes -> {out_path}")


if __name__ == "__main__":
    main()
