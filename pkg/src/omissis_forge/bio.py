"""BIO tagging of labeled sequences and corpus label statistics."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable

from .align import LabeledSequence, OMISSIS
from .errors import EmptyCorpus, InvariantViolation


class BioTag(IntEnum):
    O = 0
    B_OMISSIS = 1
    I_OMISSIS = 2

    @property
    def label(self) -> str:
        return ("O", "B-OMISSIS", "I-OMISSIS")[self.value]


@dataclass(frozen=True)
class BioDoc:
    tokens: list[str]
    tags: list[int]
    counts: tuple[int, int, int]
    doc_id: int | None = None

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise InvariantViolation("token/tag length mismatch")
        previous = BioTag.O
        for i, tag in enumerate(self.tags):
            if tag == BioTag.I_OMISSIS and previous == BioTag.O:
                raise InvariantViolation(f"dangling I-OMISSIS at position {i}")
            previous = BioTag(tag)
        observed = (
            self.tags.count(BioTag.O),
            self.tags.count(BioTag.B_OMISSIS),
            self.tags.count(BioTag.I_OMISSIS),
        )
        if observed != self.counts:
            raise InvariantViolation(f"counts {self.counts} do not match tags {observed}")

    def to_json(self) -> dict:
        return {"id": self.doc_id, "tokens": self.tokens, "tags": self.tags}

    @classmethod
    def from_json(cls, row: dict) -> "BioDoc":
        tags = [int(t) for t in row["tags"]]
        return cls(
            tokens=list(row["tokens"]),
            tags=tags,
            counts=(tags.count(0), tags.count(1), tags.count(2)),
            doc_id=None if row.get("id") is None else int(row["id"]),
        )


def to_bio(seq: LabeledSequence, doc_id: int | None = None, omissis_tag: str = OMISSIS) -> BioDoc:
    """Each maximal run of redacted labels becomes B then I...; the rest is O."""
    tags: list[int] = []
    in_run = False
    for _, label in seq.items:
        if label == omissis_tag:
            tags.append(BioTag.I_OMISSIS if in_run else BioTag.B_OMISSIS)
            in_run = True
        else:
            tags.append(BioTag.O)
            in_run = False
    counts = (tags.count(0), tags.count(1), tags.count(2))
    return BioDoc(tokens=seq.tokens(), tags=tags, counts=counts, doc_id=doc_id)


def omissis_positions(tags: list[int]) -> set[int]:
    """Positions covered by any redaction run (inverse of the run encoding)."""
    return {i for i, t in enumerate(tags) if t != BioTag.O}


@dataclass(frozen=True)
class LabelStats:
    doc_count: int
    totals: tuple[int, int, int]
    averages: tuple[float, float, float]

    @classmethod
    def from_totals(cls, totals: tuple[int, int, int], doc_count: int) -> "LabelStats":
        if doc_count <= 0:
            raise EmptyCorpus("label statistics need at least one document")
        return cls(
            doc_count=doc_count,
            totals=totals,
            averages=tuple(t / doc_count for t in totals),
        )

    def to_json(self) -> dict:
        names = ("O", "B-OMISSIS", "I-OMISSIS")
        return {
            "doc_count": self.doc_count,
            "totals": dict(zip(names, self.totals)),
            "averages": {n: round(a, 2) for n, a in zip(names, self.averages)},
        }


def label_stats(docs: Iterable[BioDoc]) -> LabelStats:
    """Per-tag totals and per-document averages over a corpus."""
    totals = [0, 0, 0]
    doc_count = 0
    for doc in docs:
        doc_count += 1
        for i in range(3):
            totals[i] += doc.counts[i]
    if doc_count == 0:
        raise EmptyCorpus("label statistics need at least one document")
    return LabelStats.from_totals(tuple(totals), doc_count)
