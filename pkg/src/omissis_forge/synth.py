"""Synthetic clear/redacted document pairs with known ground-truth tags.

Each document is filler text plus a handful of sentinel spans; the redacted
twin replaces every span with a single placeholder token. Sentinels are
unique within their document, so a correct aligner must recover the span
positions exactly. A decision key is planted in the header of both twins so
key-based pair resolution can run end to end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import OMISSIS, LabeledSequence
from .bio import BioDoc, to_bio
from .errors import InfeasibleSpec
from .records import DocRecord, Variant

HEADER_PREFIX = ("atto", "nr.")


def _letters(index: int) -> str:
    """0, 1, 2, ... -> A, B, ..., Z, AA, AB, ... (bijective base 26)."""
    out = []
    index += 1
    while index > 0:
        index, rem = divmod(index - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def decision_key_for(index: int) -> str:
    return f"{1000 + index}/{_letters(index)}"


@dataclass(frozen=True)
class SynthSpec:
    doc_count: int
    tokens_per_doc: tuple[int, int] = (200, 600)
    spans_per_doc: tuple[int, int] = (0, 20)
    span_length: tuple[int, int] = (1, 5)
    noise: str = "none"
    noise_rate: float = 0.0
    seed: int = 0
    window: int = 10
    filler_pool: int = 400

    def __post_init__(self):
        if self.doc_count < 1:
            raise InfeasibleSpec("doc_count must be >= 1")
        if self.noise not in ("none", "insert", "delete"):
            raise InfeasibleSpec(f"unknown noise kind {self.noise!r}")
        if self.tokens_per_doc[1] < self.tokens_per_doc[0]:
            raise InfeasibleSpec("tokens_per_doc range is inverted")


@dataclass(frozen=True)
class SynthPair:
    clear: DocRecord
    obf: DocRecord
    gold: BioDoc
    key: str


def _spread(rng: np.random.Generator, slack: int, cells: int) -> np.ndarray:
    if cells == 1:
        return np.array([slack], dtype=np.int64)
    return rng.multinomial(slack, np.full(cells, 1.0 / cells))


def _build_doc(
    rng: np.random.Generator, spec: SynthSpec, doc_index: int
) -> tuple[list[str], list[str], list[str], str]:
    """Returns (clear tokens, obf tokens, clear labels, key)."""
    n = int(rng.integers(spec.tokens_per_doc[0], spec.tokens_per_doc[1] + 1))
    key = decision_key_for(doc_index)
    header = list(HEADER_PREFIX) + [key]
    body_len = n - len(header)

    span_count = int(rng.integers(spec.spans_per_doc[0], spec.spans_per_doc[1] + 1))
    lengths = [
        int(rng.integers(spec.span_length[0], spec.span_length[1] + 1))
        for _ in range(span_count)
    ]
    total_span = sum(lengths)
    slack = body_len - total_span - max(span_count - 1, 0)
    if slack < 0:
        raise InfeasibleSpec(
            f"document {doc_index}: {span_count} spans of {total_span} tokens "
            f"exceed a body of {body_len}"
        )
    gaps = _spread(rng, slack, span_count + 1)
    # Interior gaps get one guaranteed filler so spans never touch.
    gaps = gaps.copy()
    if span_count > 1:
        gaps[1:-1] += 1

    def filler() -> str:
        return f"w{int(rng.integers(0, spec.filler_pool))}"

    clear: list[str] = list(header)
    labels: list[str] = list(header)
    obf: list[str] = list(header)
    for span_index in range(span_count):
        for _ in range(int(gaps[span_index])):
            tok = filler()
            clear.append(tok)
            labels.append(tok)
            obf.append(tok)
        for offset in range(lengths[span_index]):
            clear.append(f"X{doc_index}q{span_index}r{offset}")
            labels.append(OMISSIS)
        obf.append(OMISSIS)
    for _ in range(int(gaps[span_count])):
        tok = filler()
        clear.append(tok)
        labels.append(tok)
        obf.append(tok)

    if spec.noise != "none" and spec.noise_rate > 0:
        obf = _apply_noise(rng, obf, spec, header_len=len(header))
    return clear, obf, labels, key


def _apply_noise(
    rng: np.random.Generator, obf: list[str], spec: SynthSpec, header_len: int
) -> list[str]:
    placeholder_at = [i for i, t in enumerate(obf) if t == OMISSIS]

    def near_placeholder(i: int) -> bool:
        return any(abs(i - p) <= spec.window for p in placeholder_at)

    out: list[str] = []
    for i, tok in enumerate(obf):
        eligible = i >= header_len and tok != OMISSIS and not near_placeholder(i)
        if eligible and rng.random() < spec.noise_rate:
            if spec.noise == "delete":
                continue
            out.append(f"w{int(rng.integers(0, spec.filler_pool))}")
        out.append(tok)
    return out


def generate(spec: SynthSpec) -> list[SynthPair]:
    """Deterministic corpus of paired documents with gold tags."""
    children = np.random.SeedSequence(spec.seed).spawn(spec.doc_count)
    pairs: list[SynthPair] = []
    for doc_index, child in enumerate(children):
        rng = np.random.default_rng(child)
        clear_tokens, obf_tokens, labels, key = _build_doc(rng, spec, doc_index)
        seq = LabeledSequence(items=list(zip(clear_tokens, labels)))
        gold = to_bio(seq, doc_id=doc_index)
        pairs.append(
            SynthPair(
                clear=DocRecord(
                    id=doc_index,
                    filename=f"doc{doc_index:05d}_clear.txt",
                    text=" ".join(clear_tokens),
                    variant=Variant.CLEAR,
                ),
                obf=DocRecord(
                    id=spec.doc_count + doc_index,
                    filename=f"doc{doc_index:05d}_obf.txt",
                    text=" ".join(obf_tokens),
                    variant=Variant.OBFUSCATED,
                ),
                gold=gold,
                key=key,
            )
        )
    return pairs
