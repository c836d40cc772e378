"""Re-align clear and redacted token streams to recover per-token labels.

For each clear token the redacted stream is scanned over a bounded window
past the latest match. A hit labels the token as itself and advances the
cursor. Tokens whose total counts agree on both sides act as a rescue: they
keep their own label without moving the cursor. Everything else is labeled
with the redaction placeholder.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import EmptySequence
from .kernels import window_match

OMISSIS = "OMISSIS"


@dataclass(frozen=True)
class AlignConfig:
    window: int = 10
    omissis_tag: str = OMISSIS

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")


@dataclass(frozen=True)
class LabeledSequence:
    """Each clear token paired with either itself or the placeholder."""

    items: list[tuple[str, str]]

    def tokens(self) -> list[str]:
        return [t for t, _ in self.items]

    def labels(self) -> list[str]:
        return [l for _, l in self.items]

    def __len__(self) -> int:
        return len(self.items)


def tokenize_words(text: str) -> list[str]:
    """Split normalized text on single spaces; '' yields no tokens."""
    return text.split(" ") if text else []


def count_frequencies(tokens: list[str]) -> Counter:
    return Counter(tokens)


def common_counts(c_clear: Counter, c_obf: Counter) -> set[str]:
    """Tokens present on both sides with identical counts."""
    return {t for t, n in c_clear.items() if c_obf.get(t) == n}


def align(
    clear: list[str], obf: list[str], cfg: AlignConfig = AlignConfig()
) -> LabeledSequence:
    """Label every clear token as itself or as redacted.

    The window scan never matches the placeholder token itself, so a clear
    token can only be kept by a genuine counterpart. Output length always
    equals the clear length; consecutive clear tokens may map onto a single
    placeholder in the redacted stream.
    """
    if not clear or not obf:
        raise EmptySequence("both token sequences must be non-empty")

    ids: dict[str, int] = {cfg.omissis_tag: 0}
    for token in clear:
        ids.setdefault(token, len(ids))
    for token in obf:
        ids.setdefault(token, len(ids))

    common = common_counts(count_frequencies(clear), count_frequencies(obf))

    clear_ids = np.fromiter((ids[t] for t in clear), dtype=np.int64, count=len(clear))
    obf_ids = np.fromiter((ids[t] for t in obf), dtype=np.int64, count=len(obf))
    in_common = np.fromiter((t in common for t in clear), dtype=np.bool_, count=len(clear))

    keep = window_match(clear_ids, obf_ids, in_common, placeholder_id=0, window=cfg.window)
    return LabeledSequence(
        items=[(t, t if kept else cfg.omissis_tag) for t, kept in zip(clear, keep)]
    )
