"""Corpus ingestion: plain-text files into a normalized, id-addressed store.

Each document becomes one record (id, filename, text, variant) with the text
decoded defensively, Unicode-composed, stripped of control characters, and
whitespace-collapsed. Ids are assigned in sorted-filename order so two runs
over the same tree serialize byte-identically.
"""

from __future__ import annotations

import codecs
import re
import shlex
import subprocess
import unicodedata
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from . import jsonl
from .errors import InputError, InvariantViolation
from .kernels import thread_cap


class Variant(str, Enum):
    CLEAR = "clear"
    OBFUSCATED = "obfuscated"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class DocRecord:
    id: int
    filename: str
    text: str
    variant: Variant

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "filename": self.filename,
            "text": self.text,
            "variant": self.variant.value,
        }

    @classmethod
    def from_json(cls, row: dict) -> "DocRecord":
        return cls(
            id=int(row["id"]),
            filename=str(row["filename"]),
            text=str(row["text"]),
            variant=Variant(row.get("variant", "unknown")),
        )


@dataclass(frozen=True)
class IngestIssue:
    path: str
    reason: str

    def to_json(self) -> dict:
        return {"path": self.path, "reason": self.reason}


def _space_for_bad_bytes(exc: UnicodeDecodeError) -> tuple[str, int]:
    return " ", exc.end


codecs.register_error("omissis_forge_space", _space_for_bad_bytes)

# C0 and C1 control characters, minus tab and newline, plus DEL.
_CONTROL_RE = re.compile(r"[\x00-\x08\x0b-\x1f\x7f-\x9f]")
_WS_RUN_RE = re.compile(r"[ \t\r\n]+")


def clean_encoding(raw: bytes) -> str:
    """Decode arbitrary bytes to clean text.

    Invalid byte sequences become a single space, the result is normalized
    to composed form (NFC), and control characters other than tab/newline
    are dropped. Total: never raises.
    """
    text = raw.decode("utf-8", errors="omissis_forge_space")
    text = unicodedata.normalize("NFC", text)
    return _CONTROL_RE.sub("", text)


def normalize_whitespace(text: str) -> str:
    """Collapse every run of space/tab/CR/LF to one space and trim the ends."""
    return _WS_RUN_RE.sub(" ", text).strip(" ")


@dataclass
class CorpusStore:
    """Immutable-after-build, ordered collection of records."""

    records: list[DocRecord]
    manifest: dict[str, int]

    @classmethod
    def build(cls, records: Iterable[DocRecord]) -> "CorpusStore":
        ordered = sorted(records, key=lambda r: r.id)
        seen: set[int] = set()
        for rec in ordered:
            if rec.id in seen:
                raise InvariantViolation(f"duplicate record id {rec.id}")
            seen.add(rec.id)
        manifest = Counter(rec.variant.value for rec in ordered)
        return cls(records=ordered, manifest=dict(manifest))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[DocRecord]:
        return iter(self.records)

    def __getitem__(self, doc_id: int) -> DocRecord:
        lo, hi = 0, len(self.records)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.records[mid].id < doc_id:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.records) and self.records[lo].id == doc_id:
            return self.records[lo]
        raise KeyError(doc_id)

    def save(self, path: str | Path) -> None:
        jsonl.write_jsonl(path, (rec.to_json() for rec in self.records))

    @classmethod
    def load(cls, path: str | Path) -> "CorpusStore":
        return cls.build(DocRecord.from_json(row) for row in jsonl.read_jsonl(path))


def _read_source(path: Path, extractor_hooks: dict[str, str] | None) -> bytes:
    """Raw bytes of one document, via the extension hook when configured."""
    hook = (extractor_hooks or {}).get(path.suffix.lower())
    if hook is None:
        return path.read_bytes()
    argv = [part.replace("{path}", str(path)) for part in shlex.split(hook)]
    proc = subprocess.run(argv, capture_output=True, check=True)
    return proc.stdout


def ingest(
    paths: Iterable[str | Path],
    variant: Variant = Variant.UNKNOWN,
    extractor_hooks: dict[str, str] | None = None,
) -> tuple[CorpusStore, list[IngestIssue]]:
    """Read and normalize documents; ids run 0..n-1 in sorted-filename order.

    Unreadable or empty files are skipped and recorded as issues instead of
    aborting the run.
    """
    ordered = sorted(Path(p) for p in paths)

    def load_one(path: Path) -> tuple[Path, str | None, str | None]:
        try:
            raw = _read_source(path, extractor_hooks)
        except (OSError, subprocess.SubprocessError) as exc:
            return path, None, f"unreadable: {exc}"
        text = normalize_whitespace(clean_encoding(raw))
        if not text:
            return path, None, "empty document"
        return path, text, None

    if len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=min(thread_cap(), len(ordered))) as pool:
            loaded = list(pool.map(load_one, ordered))
    else:
        loaded = [load_one(p) for p in ordered]

    records: list[DocRecord] = []
    issues: list[IngestIssue] = []
    next_id = 0
    for path, text, problem in loaded:
        if problem is not None:
            issues.append(IngestIssue(path=str(path), reason=problem))
            continue
        records.append(DocRecord(id=next_id, filename=path.name, text=text, variant=variant))
        next_id += 1
    return CorpusStore.build(records), issues


def ingest_tree(
    root: str | Path,
    variant: Variant = Variant.UNKNOWN,
    extractor_hooks: dict[str, str] | None = None,
) -> tuple[CorpusStore, list[IngestIssue]]:
    """Ingest every regular file under a directory tree."""
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"not a directory: {root}")
    paths = sorted(p for p in root.rglob("*") if p.is_file())
    return ingest(paths, variant=variant, extractor_hooks=extractor_hooks)
