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
"""Phrase-copying text generation engine."""

from ._cog import (
    CogError,
    Corpus,
    DataError,
    PhraseIndex,
    ToyBackend,
    ToyParams,
    UsageError,
    Vocabulary,
    detokenize,
    diversity,
    diversity_from_reps,
    generate,
    ingest,
    reconstruct,
    rep_n,
    run_pipeline,
    segment,
    split_surfaces,
    tokenize,
    train_toy,
)

__all__ = [
    "CogError",
    "Corpus",
    "DataError",
    "PhraseIndex",
    "ToyBackend",
    "ToyParams",
    "UsageError",
    "Vocabulary",
    "detokenize",
    "diversity",
    "diversity_from_reps",
    "generate",
    "ingest",
    "reconstruct",
    "rep_n",
    "run_pipeline",
    "segment",
    "split_surfaces",
    "tokenize",
    "train_toy",
]
