"""Resolve LSH candidates to unique partners via decision-number keys.

A decision number looks like "14270/C" or "1/2/Apple": digits and ASCII
letter groups joined by slashes. Keys are only guaranteed unique among
decisions of one issuing office, so any ambiguity is reported, never
guessed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .records import DocRecord

# Longest alternative first: at a shared start position the two-slash form
# wins and consumes the region.
KEY_RE = re.compile(r"\d+/\d+/[a-zA-Z]+|\d+/[a-zA-Z]+")


@dataclass(frozen=True)
class DecisionKey:
    raw: str
    office_scope: str | None = None


@dataclass(frozen=True)
class MatchPair:
    clear_id: int
    obf_id: int
    key: DecisionKey
    candidate_rank: int

    def to_json(self) -> dict:
        return {
            "clear_id": self.clear_id,
            "obf_id": self.obf_id,
            "key": self.key.raw,
            "candidate_rank": self.candidate_rank,
        }


@dataclass(frozen=True)
class NoMatch:
    clear_id: int
    reason: str

    def to_json(self) -> dict:
        return {"clear_id": self.clear_id, "reason": self.reason}


def extract_keys(text: str) -> list[DecisionKey]:
    """All decision keys in document order, non-overlapping."""
    return [DecisionKey(raw=m.group(0)) for m in KEY_RE.finditer(text)]


def _first_key(record: DocRecord) -> DecisionKey | None:
    keys = extract_keys(record.text)
    return keys[0] if keys else None


def resolve(clear: DocRecord, candidates: list[DocRecord]) -> MatchPair | NoMatch:
    """Accept the unique candidate whose first key equals the clear doc's."""
    if not candidates:
        return NoMatch(clear_id=clear.id, reason="no_candidates")
    clear_key = _first_key(clear)
    candidate_keys = [_first_key(c) for c in candidates]
    if clear_key is None or all(k is None for k in candidate_keys):
        return NoMatch(clear_id=clear.id, reason="no_key")
    hits = [
        (rank, cand)
        for rank, (cand, key) in enumerate(zip(candidates, candidate_keys))
        if key == clear_key
    ]
    if not hits:
        return NoMatch(clear_id=clear.id, reason="key_mismatch")
    if len(hits) > 1:
        return NoMatch(clear_id=clear.id, reason="ambiguous")
    rank, partner = hits[0]
    if partner.id == clear.id:
        return NoMatch(clear_id=clear.id, reason="self_candidate")
    return MatchPair(clear_id=clear.id, obf_id=partner.id, key=clear_key, candidate_rank=rank)


def resolve_corpus(
    resolutions: Iterable[MatchPair | NoMatch],
) -> tuple[list[MatchPair], list[NoMatch]]:
    """Split resolutions and drop pairs that would share a partner.

    Keys collide across issuing offices, so two clear documents can each
    uniquely match the same redacted one; keeping both would break the
    one-partner-per-document guarantee. Such collisions are reported.
    """
    pairs: list[MatchPair] = []
    unmatched: list[NoMatch] = []
    for res in resolutions:
        if isinstance(res, MatchPair):
            pairs.append(res)
        else:
            unmatched.append(res)
    by_obf: dict[int, list[MatchPair]] = {}
    for pair in pairs:
        by_obf.setdefault(pair.obf_id, []).append(pair)
    accepted: list[MatchPair] = []
    for group in by_obf.values():
        if len(group) == 1:
            accepted.append(group[0])
        else:
            unmatched.extend(
                NoMatch(clear_id=p.clear_id, reason="partner_conflict") for p in group
            )
    accepted.sort(key=lambda p: p.clear_id)
    unmatched.sort(key=lambda u: u.clear_id)
    return accepted, unmatched
