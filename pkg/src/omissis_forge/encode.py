"""Model-ready encoding: subword ids, label alignment, chunking, padding.

Words decompose by greedy longest vocabulary match; every subword inherits
its word's label. Documents longer than the chunk budget split into hard
contiguous slices, each padded out with pad id 0 / ignore label -100 and an
attention mask keyed on the pad id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import jsonl
from .errors import (
    EmptyVocab,
    IndexOutOfRange,
    InputError,
    InvariantViolation,
    OverlongChunk,
    ShapeMismatch,
)

L_MAX = 512
IGNORE_LABEL = -100
PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
MAX_WORD_CHARS = 100


@dataclass
class SubwordVocab:
    token_to_id: dict[str, int]
    marker: str = "##"
    unk_token: str = UNK_TOKEN
    pad_token: str = PAD_TOKEN
    lowercase: bool = True

    def __post_init__(self):
        if not self.token_to_id:
            raise EmptyVocab("vocabulary has no tokens")
        ids = list(self.token_to_id.values())
        if len(set(ids)) != len(ids):
            raise InputError("vocabulary ids are not unique")
        if self.token_to_id.get(self.pad_token) != 0:
            raise InputError(f"pad token {self.pad_token!r} must have id 0")
        if self.unk_token not in self.token_to_id:
            raise InputError(f"unknown-token {self.unk_token!r} missing from vocabulary")

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return self.token_to_id[self.unk_token]

    def get(self, token: str) -> int | None:
        return self.token_to_id.get(token)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], **kwargs) -> "SubwordVocab":
        return cls(token_to_id={tok: i for i, tok in enumerate(tokens)}, **kwargs)

    @classmethod
    def load(cls, path: str | Path, **kwargs) -> "SubwordVocab":
        path = Path(path)
        if not path.exists():
            raise InputError(f"no such vocabulary file: {path}")
        # One token per line; the id is the line number.
        lines = path.read_text(encoding="utf-8").splitlines()
        mapping = {line: i for i, line in enumerate(lines)}
        if len(mapping) != len(lines):
            raise InputError(f"duplicate tokens in vocabulary file: {path}")
        return cls(token_to_id=mapping, **kwargs)

    def save(self, path: str | Path) -> None:
        ordered = sorted(self.token_to_id.items(), key=lambda kv: kv[1])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for token, _ in ordered:
                fh.write(token)
                fh.write("\n")


def vocab_for_words(words: Iterable[str], lowercase: bool = True) -> SubwordVocab:
    """Whole-word vocabulary over a corpus, with the reserved specials first."""
    seen = sorted({w.lower() if lowercase else w for w in words})
    specials = [PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN]
    return SubwordVocab.from_tokens(specials + [w for w in seen if w not in specials],
                                    lowercase=lowercase)


def subword_tokenize(words: list[str], vocab: SubwordVocab) -> tuple[list[int], list[int | None]]:
    """Greedy longest-match decomposition.

    Returns (ids, word_ids) where word_ids[i] is the index of the source
    word that produced subword i. Words with no matchable prefix become the
    unknown id.
    """
    ids: list[int] = []
    word_ids: list[int | None] = []
    for word_index, word in enumerate(words):
        token = word.lower() if vocab.lowercase else word
        if len(token) > MAX_WORD_CHARS:
            ids.append(vocab.unk_id)
            word_ids.append(word_index)
            continue
        pieces: list[int] = []
        start = 0
        bad = False
        while start < len(token):
            end = len(token)
            piece_id = None
            while start < end:
                piece = token[start:end]
                if start > 0:
                    piece = vocab.marker + piece
                piece_id = vocab.get(piece)
                if piece_id is not None:
                    break
                end -= 1
            if piece_id is None:
                bad = True
                break
            pieces.append(piece_id)
            start = end
        if bad:
            ids.append(vocab.unk_id)
            word_ids.append(word_index)
        else:
            ids.extend(pieces)
            word_ids.extend([word_index] * len(pieces))
    return ids, word_ids


def align_labels(word_ids: list[int | None], word_labels: list[int]) -> list[int]:
    """Spread word labels onto subwords; null word ids take the ignore value."""
    out: list[int] = []
    for wid in word_ids:
        if wid is None:
            out.append(IGNORE_LABEL)
        else:
            if not 0 <= wid < len(word_labels):
                raise IndexOutOfRange(f"word id {wid} outside 0..{len(word_labels) - 1}")
            out.append(word_labels[wid])
    return out


def chunk(ids: list[int], labels: list[int], l_max: int = L_MAX) -> list[tuple[list[int], list[int]]]:
    """Hard contiguous slices of at most l_max positions; the last may be short."""
    if len(ids) != len(labels):
        raise ShapeMismatch(f"{len(ids)} ids vs {len(labels)} labels")
    return [(ids[i : i + l_max], labels[i : i + l_max]) for i in range(0, len(ids), l_max)]


@dataclass(frozen=True)
class EncodedChunk:
    input_ids: list[int]
    attention_mask: list[int]
    token_type_ids: list[int]
    labels: list[int]
    doc_id: int
    chunk_index: int

    def __post_init__(self):
        n = len(self.input_ids)
        if not (len(self.attention_mask) == len(self.token_type_ids) == len(self.labels) == n):
            raise InvariantViolation("chunk field lengths disagree")
        for i in range(n):
            if (self.attention_mask[i] == 1) != (self.input_ids[i] != 0):
                raise InvariantViolation(f"mask/pad disagreement at position {i}")
            if self.attention_mask[i] == 0 and self.labels[i] != IGNORE_LABEL:
                raise InvariantViolation(f"padded position {i} carries a live label")
            if self.token_type_ids[i] != 0:
                raise InvariantViolation("token type ids must be all zero")

    def content_length(self) -> int:
        return sum(self.attention_mask)

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "chunk_index": self.chunk_index,
            "input_ids": self.input_ids,
            "attention_mask": self.attention_mask,
            "token_type_ids": self.token_type_ids,
            "labels": self.labels,
        }

    @classmethod
    def from_json(cls, row: dict) -> "EncodedChunk":
        return cls(
            input_ids=list(row["input_ids"]),
            attention_mask=list(row["attention_mask"]),
            token_type_ids=list(row["token_type_ids"]),
            labels=list(row["labels"]),
            doc_id=int(row["doc_id"]),
            chunk_index=int(row["chunk_index"]),
        )


def finalize_chunk(
    ids: list[int],
    labels: list[int],
    doc_id: int,
    chunk_index: int,
    l_max: int = L_MAX,
) -> EncodedChunk:
    """Pad ids with 0 and labels with -100 up to l_max; mask keys on pad id."""
    if len(ids) > l_max:
        raise OverlongChunk(f"chunk of {len(ids)} exceeds {l_max}")
    if len(ids) != len(labels):
        raise ShapeMismatch(f"{len(ids)} ids vs {len(labels)} labels")
    fill = l_max - len(ids)
    padded_ids = ids + [0] * fill
    padded_labels = labels + [IGNORE_LABEL] * fill
    mask = [1 if v != 0 else 0 for v in padded_ids]
    return EncodedChunk(
        input_ids=padded_ids,
        attention_mask=mask,
        token_type_ids=[0] * l_max,
        labels=padded_labels,
        doc_id=doc_id,
        chunk_index=chunk_index,
    )


def encode_document(
    tokens: list[str],
    tags: list[int],
    vocab: SubwordVocab,
    doc_id: int,
    l_max: int = L_MAX,
    reserve_special: bool = False,
) -> list[EncodedChunk]:
    """Full encoding of one tagged document into padded chunks.

    With reserve_special on, two positions per chunk are held back and each
    chunk is wrapped in the classifier/separator tokens (ignore-labeled).
    """
    if len(tokens) != len(tags):
        raise ShapeMismatch(f"{len(tokens)} tokens vs {len(tags)} tags")
    ids, word_ids = subword_tokenize(tokens, vocab)
    labels = align_labels(word_ids, tags)
    budget = l_max - 2 if reserve_special else l_max
    if budget < 1:
        raise InputError(f"chunk budget {budget} too small")
    chunks = []
    for index, (chunk_ids, chunk_labels) in enumerate(chunk(ids, labels, budget)):
        if reserve_special:
            cls_id = vocab.get(CLS_TOKEN)
            sep_id = vocab.get(SEP_TOKEN)
            if cls_id is None or sep_id is None:
                raise InputError("reserve_special needs [CLS] and [SEP] in the vocabulary")
            chunk_ids = [cls_id] + chunk_ids + [sep_id]
            chunk_labels = [IGNORE_LABEL] + chunk_labels + [IGNORE_LABEL]
        chunks.append(finalize_chunk(chunk_ids, chunk_labels, doc_id, index, l_max))
    return chunks


def write_dataset(path: str | Path, chunks: Iterable[EncodedChunk]) -> int:
    return jsonl.write_jsonl(path, (c.to_json() for c in chunks))


def read_dataset(path: str | Path) -> Iterator[EncodedChunk]:
    for row in jsonl.read_jsonl(path):
        yield EncodedChunk.from_json(row)
