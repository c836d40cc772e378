"""Candidate pair generation with MinHash and banded locality-sensitive hashing.

Documents are shingled into word k-grams, sketched with per-permutation
minima, and indexed into band buckets tuned so the collision S-curve
1 - (1 - J^r)^b rises steepest near the configured similarity threshold.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BothEmpty, EmptyInput, IncompatibleSignatures, UnknownId
from .kernels import minhash_scan

DEFAULT_NUM_PERMS = 128
DEFAULT_SEED = 0


def _hash64(data: str) -> int:
    return int.from_bytes(hashlib.blake2b(data.encode("utf-8"), digest_size=8).digest(), "little")


def shingle(tokens: list[str], k: int = 3) -> set[int]:
    """64-bit hashes of all contiguous k-token windows.

    Sequences shorter than k hash as a single whole-sequence shingle.
    """
    if not tokens:
        raise EmptyInput("cannot shingle an empty token list")
    if k < 1:
        raise ValueError(f"shingle size must be >= 1, got {k}")
    if len(tokens) < k:
        return {_hash64(" ".join(tokens))}
    return {_hash64(" ".join(tokens[i : i + k])) for i in range(len(tokens) - k + 1)}


@lru_cache(maxsize=32)
def _perm_params(num_perms: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(np.random.PCG64(seed))
    mults = rng.integers(0, 2**64, size=num_perms, dtype=np.uint64) | np.uint64(1)
    adds = rng.integers(0, 2**64, size=num_perms, dtype=np.uint64)
    return mults, adds


@dataclass(frozen=True)
class MinHashSignature:
    num_perms: int
    seed: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.num_perms,):
            raise ValueError(
                f"signature has {self.values.shape[0]} values, expected {self.num_perms}"
            )

    def compatible(self, other: "MinHashSignature") -> bool:
        return self.num_perms == other.num_perms and self.seed == other.seed


def minhash(
    shingles: set[int], num_perms: int = DEFAULT_NUM_PERMS, seed: int = DEFAULT_SEED
) -> MinHashSignature:
    """Per-permutation minima over the shingle set; deterministic per seed."""
    if not shingles:
        raise EmptyInput("cannot sketch an empty shingle set")
    mults, adds = _perm_params(num_perms, seed)
    values = minhash_scan(np.fromiter(shingles, dtype=np.uint64, count=len(shingles)), mults, adds)
    return MinHashSignature(num_perms=num_perms, seed=seed, values=values)


def jaccard_estimate(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of agreeing signature positions."""
    if not a.compatible(b):
        raise IncompatibleSignatures(
            f"(num_perms={a.num_perms}, seed={a.seed}) vs (num_perms={b.num_perms}, seed={b.seed})"
        )
    return float(np.mean(a.values == b.values))


def exact_jaccard(a: set, b: set) -> float:
    """|a ∩ b| / |a ∪ b| — the brute-force reference the sketch estimates."""
    if not a and not b:
        raise BothEmpty("Jaccard of two empty sets is undefined")
    return len(a & b) / len(a | b)


def tune_bands(num_perms: int, threshold: float) -> tuple[int, int]:
    """Pick (bands, rows) with bands*rows = num_perms whose S-curve knee
    (1/b)^(1/r) lands nearest the threshold; ties prefer more rows."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    best: tuple[float, int, int] | None = None
    for b in range(1, num_perms + 1):
        if num_perms % b:
            continue
        r = num_perms // b
        gap = abs(threshold - (1.0 / b) ** (1.0 / r))
        if best is None or gap < best[0] or (gap == best[0] and r > best[2]):
            best = (gap, b, r)
    assert best is not None
    return best[1], best[2]


@dataclass(frozen=True)
class CandidateList:
    doc_id: int
    candidates: list[int]

    def to_json(self) -> dict:
        return {"doc_id": self.doc_id, "candidates": self.candidates}


@dataclass
class LshIndex:
    bands: int
    rows: int
    threshold: float
    num_perms: int
    seed: int
    buckets: dict[tuple[int, bytes], list[int]] = field(default_factory=dict)
    _keys: dict[int, list[tuple[int, bytes]]] = field(default_factory=dict)

    def doc_ids(self) -> list[int]:
        return sorted(self._keys)


def build_index(signatures: dict[int, MinHashSignature], threshold: float) -> LshIndex:
    """Hash every signature into its band buckets."""
    if not signatures:
        raise EmptyInput("no signatures to index")
    sigs = sorted(signatures.items())
    first = sigs[0][1]
    for _, sig in sigs:
        if not sig.compatible(first):
            raise IncompatibleSignatures("signatures disagree on num_perms or seed")
    bands, rows = tune_bands(first.num_perms, threshold)
    index = LshIndex(
        bands=bands, rows=rows, threshold=threshold, num_perms=first.num_perms, seed=first.seed
    )
    for doc_id, sig in sigs:
        keys = []
        for band in range(bands):
            key = (band, sig.values[band * rows : (band + 1) * rows].tobytes())
            index.buckets.setdefault(key, []).append(doc_id)
            keys.append(key)
        index._keys[doc_id] = keys
    return index


def query_candidates(index: LshIndex, doc_id: int) -> CandidateList:
    """All bucket co-members of a document, self excluded, ascending."""
    keys = index._keys.get(doc_id)
    if keys is None:
        raise UnknownId(f"document {doc_id} is not indexed")
    found: set[int] = set()
    for key in keys:
        found.update(index.buckets[key])
    found.discard(doc_id)
    return CandidateList(doc_id=doc_id, candidates=sorted(found))
