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
import json
from pathlib import Path

import pytest

import cog

DATA = Path(__file__).resolve().parents[2] / "data"


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "c.jsonl"
    texts = [
        "the cat sat on the mat .",
        "the dog sat on the log .",
        "a cat and a dog met on the mat .",
    ]
    path.write_text("".join(json.dumps({"id": i, "text": t}) + "\n" for i, t in enumerate(texts)))
    return path


def test_tokenizer_splits_punctuation():
    assert cog.split_surfaces("Hi, there!") == ["Hi", ",", "there", "!"]
    vocab = cog.Vocabulary()
    ids = cog.tokenize("a b a", vocab)
    assert ids[0] == ids[2] != ids[1]
    assert cog.detokenize(ids, vocab) == "a b a"


def test_frozen_vocabulary_maps_unknowns_to_zero():
    vocab = cog.Vocabulary()
    cog.tokenize("known", vocab)
    vocab.freeze()
    assert cog.tokenize("known unseen", vocab)[1] == 0


def test_segment_reconstructs_every_document(corpus_file):
    corpus = cog.ingest(str(corpus_file))
    seg = cog.segment(corpus, k=2, lmin=2, lmax=4, dim=8, seed=1)
    for i, s in enumerate(seg):
        assert cog.reconstruct(corpus, s) == corpus.doc(i).tokens


def test_train_index_generate_round_trip(corpus_file, tmp_path):
    corpus = cog.ingest(str(corpus_file))
    seg = cog.segment(corpus, k=2, lmin=2, lmax=4, dim=8, seed=1)
    result = cog.train_toy(corpus, seg, steps=5, lr=0.5, dim=8, seed=3, lmax=4)
    assert len(result.log) >= 1 and not result.diverged

    backend = cog.ToyBackend(result.params)
    index = cog.PhraseIndex.build(corpus, backend, lmax=4)
    index.save(str(tmp_path / "i.bin"))
    loaded = cog.PhraseIndex.load(str(tmp_path / "i.bin"))
    assert loaded.num_docs == 3

    out = cog.generate(loaded, backend, "the cat", max_new_tokens=12, seed=5)
    assert len(out.continuation) == 12
    assert sum(len(s.emitted) for s in out.steps) == 12
    again = cog.generate(loaded, backend, "the cat", max_new_tokens=12, seed=5)
    assert again.continuation == out.continuation

    nucleus = cog.generate(loaded, backend, "the cat", mode="nucleus", top_p=0.9, seed=5)
    assert len(nucleus.continuation) == 128


def test_metrics():
    assert cog.rep_n([1, 2, 3, 4], 2) == 0.0
    assert cog.rep_n([1, 1, 1, 1], 2) == pytest.approx(100 * 2 / 3)
    assert cog.diversity_from_reps(3.33, 0.69, 0.21) == pytest.approx(95.8, abs=0.05)


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(cog.DataError):
        cog.ingest(str(tmp_path / "missing.jsonl"))
    with pytest.raises(cog.UsageError):
        cog.segment(cog.ingest(str(DATA / "overfit50.jsonl")), lmin=5, lmax=2)
    assert issubclass(cog.DataError, cog.CogError)
