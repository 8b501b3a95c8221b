"""Integration-module retrieval by cosine similarity.

Module docs are embedded with a hashed TF-IDF scheme: lowercase, split on
non-alphanumerics, each token hashed (sha1) into one of 4096 buckets, term
counts weighted by smoothed inverse document frequency over the registry
corpus, then L2-normalized. Everything is fixed constants, so rankings are
reproducible across runs and platforms. The embedder sits behind a small
interface so a provider-backed implementation can be swapped in.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DuplicateNameError, SchemaError

DIMENSION = 4096
DEFAULT_K = 3

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _bucket(token: str) -> int:
    digest = hashlib.sha1(token.encode("utf-8")).hexdigest()
    return int(digest[:8], 16) % DIMENSION


class HashedTfIdfEmbedder:
    """Deterministic local stand-in for a provider embedding endpoint."""

    def __init__(self):
        self._idf = np.ones(DIMENSION)

    def fit(self, corpus: list[str]) -> None:
        """Recompute IDF weights from the registry corpus."""
        n_docs = len(corpus)
        df = np.zeros(DIMENSION)
        for text in corpus:
            for b in sorted({_bucket(t) for t in tokenize(text)}):
                df[b] += 1.0
        self._idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0

    def embed(self, text: str) -> np.ndarray:
        """Unit vector for non-empty text, the zero vector otherwise."""
        vec = np.zeros(DIMENSION)
        for token in tokenize(text):
            vec[_bucket(token)] += 1.0
        vec *= self._idf
        norm = math.sqrt(float(vec @ vec))
        if norm == 0.0:
            return vec
        return vec / norm


@dataclass(frozen=True)
class ModuleDoc:
    name: str
    doc_text: str
    vector: np.ndarray

    def __post_init__(self):
        self.vector.flags.writeable = False


@dataclass(frozen=True)
class RetrievalQuery:
    text: str
    k: int = DEFAULT_K

    def __post_init__(self):
        if self.k < 1:
            raise SchemaError(f"k must be positive, got {self.k}")


class ModuleRegistry:
    """Single-writer doc store; queries are read-only and deterministic."""

    def __init__(self, embedder: HashedTfIdfEmbedder | None = None):
        self.embedder = embedder or HashedTfIdfEmbedder()
        self._docs: dict[str, ModuleDoc] = {}

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, name: str) -> bool:
        return name in self._docs

    def names(self) -> list[str]:
        return sorted(self._docs)

    def get(self, name: str) -> ModuleDoc:
        return self._docs[name]

    def add(self, name: str, doc_text: str) -> "ModuleRegistry":
        if name in self._docs:
            raise DuplicateNameError("module", name)
        self._docs[name] = ModuleDoc(name, doc_text, np.zeros(DIMENSION))
        self._reindex()
        return self

    def _reindex(self) -> None:
        # adding a doc shifts IDF weights, so every vector is recomputed
        texts = {name: d.doc_text for name, d in self._docs.items()}
        self.embedder.fit(list(texts.values()))
        self._docs = {
            name: ModuleDoc(name, text, self.embedder.embed(text))
            for name, text in texts.items()
        }

    def query(self, q: RetrievalQuery | str, k: int | None = None) -> list[tuple[str, float]]:
        """Top-k (name, cosine) descending; ties broken by name; k clipped."""
        if isinstance(q, str):
            q = RetrievalQuery(q, k if k is not None else DEFAULT_K)
        qvec = self.embedder.embed(q.text)
        scored = [
            (name, float(qvec @ doc.vector)) for name, doc in sorted(self._docs.items())
        ]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[: min(q.k, len(scored))]


def manual_load(registry: ModuleRegistry, path) -> ModuleRegistry:
    """Load one module-doc JSON file ({"name": ..., "doc": ...}) and index it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"cannot read module doc {path}: {e}") from None
    if "name" not in doc or "doc" not in doc:
        raise SchemaError(f"module doc {path} needs 'name' and 'doc' keys")
    return registry.add(str(doc["name"]), str(doc["doc"]))


def default_registry() -> ModuleRegistry:
    """Registry preloaded with the shipped integration-module docs."""
    registry = ModuleRegistry()
    doc_dir = Path(__file__).parent / "module_docs"
    for path in sorted(doc_dir.glob("*.json")):
        manual_load(registry, path)
    return registry


def load_directory(registry: ModuleRegistry, directory) -> ModuleRegistry:
    for path in sorted(Path(directory).glob("*.json")):
        manual_load(registry, path)
    return registry
