#!/usr/bin/env python3
# Copyright 2026-present the cog authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled corpora under data/. Output is deterministic."""

import argparse
import json
import random
from pathlib import Path

SYLLABLES = ["ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "be", "do", "fu", "ga",
             "he", "ji", "ko", "la", "mo", "nu", "pi", "ri", "se", "tu", "wa", "yo"]


def word(rng, used):
    while True:
        w = "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 3)))
        if w not in used:
            used.add(w)
            return w


def chains(rng, count, length, used):
    return [[word(rng, used) for _ in range(length)] for _ in range(count)]


def write(path, docs):
    with open(path, "w", encoding="utf-8") as f:
        for i, tokens in enumerate(docs):
            f.write(json.dumps({"id": i, "text": " ".join(tokens)}) + "\n")


def overfit(rng, n_chains, docs_per_chain, doc_len, stride):
    """Overlapping windows over chains of unique words. Windows start at
    multiples of the phrase length so every copy lines up the same way."""
    length = doc_len + stride * (docs_per_chain - 1)
    out = []
    for chain in chains(rng, n_chains, length, set()):
        for j in range(docs_per_chain):
            out.append(chain[j * stride: j * stride + doc_len])
    return out, length


def swap(rng, source_docs, n_docs, block):
    """New documents built from the same words: blocks of source text in a
    fresh order, so no document repeats a training document."""
    blocks = []
    for doc in source_docs:
        for i in range(0, len(doc) - block + 1, block):
            blocks.append(doc[i:i + block])
    seen = {tuple(d) for d in source_docs}
    out = []
    while len(out) < n_docs:
        picked = rng.sample(blocks, 4)
        doc = [w for b in picked for w in b]
        if tuple(doc) not in seen:
            seen.add(tuple(doc))
            out.append(doc)
    return out


def demo(rng, n_docs):
    """Sentences from a small phrase grammar; shared phrases recur across
    documents the way boilerplate does in real text."""
    subjects = ["the old harbour", "a quiet village", "the river trade", "the northern road",
                "a merchant family", "the city council", "the mountain pass", "a travelling monk"]
    verbs = ["grew rapidly during", "was rebuilt after", "declined sharply in", "was first recorded in",
             "became famous for", "was largely abandoned during", "flourished in"]
    objects = ["the long winter", "the wool markets", "the great flood", "the early autumn fairs",
               "the salt tax", "the second century", "the bridge dispute", "the harvest festival"]
    tails = ["according to local records .", "as the chronicles describe .", "and never fully recovered .",
             "despite repeated attempts at reform .", "which historians still debate .",
             ", drawing settlers from the coast ."]
    docs = []
    for _ in range(n_docs):
        sentences = []
        for _ in range(rng.randint(3, 5)):
            sentences.append(" ".join([rng.choice(subjects), rng.choice(verbs), rng.choice(objects),
                                       rng.choice(tails)]))
        docs.append(" ".join(sentences).split())
    return docs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rng = random.Random(20240601)
    docs, _ = overfit(rng, n_chains=10, docs_per_chain=5, doc_len=32, stride=8)
    write(out / "overfit50.jsonl", docs)
    write(out / "swap50.jsonl", swap(random.Random(7), docs, 50, 8))
    base = demo(random.Random(11), 200)
    write(out / "demo200.jsonl", base)
    write(out / "demo400.jsonl", base + demo(random.Random(12), 200))


if __name__ == "__main__":
    main()
