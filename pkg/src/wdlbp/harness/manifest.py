"""Dataset manifests.

One record per line::

    subject_id,path,split[,r1,c1,r2,c2,r3,c3,r4,c4]

``split`` is ``train`` or ``test``; the optional eight integers are four eye
corner (row, col) pairs in source-image pixels. Paths are relative to the
manifest's directory. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

SPLITS = ("train", "test")


class ManifestError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


@dataclass(frozen=True)
class Record:
    subject: str
    path: Path
    split: str
    eye_corners: Optional[Tuple[Tuple[int, int], ...]] = None


@dataclass(frozen=True)
class DatasetManifest:
    records: Tuple[Record, ...]
    source: Optional[Path] = None

    def split(self, name: str) -> List[Record]:
        return [r for r in self.records if r.split == name]

    @property
    def train(self) -> List[Record]:
        return self.split("train")

    @property
    def test(self) -> List[Record]:
        return self.split("test")

    def subjects(self, split: Optional[str] = None) -> List[str]:
        recs = self.records if split is None else self.split(split)
        return sorted({r.subject for r in recs})


def _parse_line(fields: List[str], lineno: int, base: Path, problems: List[str]):
    fields = [f.strip() for f in fields]
    if len(fields) not in (3, 11):
        problems.append(f"line {lineno}: expected 3 or 11 fields, got {len(fields)}")
        return None
    subject, rel, split = fields[:3]
    if not subject:
        problems.append(f"line {lineno}: empty subject id")
        return None
    if split not in SPLITS:
        problems.append(f"line {lineno}: bad split {split!r} (expected train or test)")
        return None
    corners = None
    if len(fields) == 11:
        try:
            vals = [int(v) for v in fields[3:]]
        except ValueError:
            problems.append(f"line {lineno}: eye corners must be integers")
            return None
        corners = tuple(zip(vals[0::2], vals[1::2]))
    path = Path(rel)
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        problems.append(f"line {lineno}: image not found: {path}")
        return None
    return Record(subject, path, split, corners)


def parse_manifest(text: str, base: Path = Path("."),
                   source: Optional[Path] = None) -> DatasetManifest:
    problems: List[str] = []
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = next(csv.reader(io.StringIO(stripped)))
        rec = _parse_line(fields, lineno, base, problems)
        if rec is not None:
            records.append(rec)

    train_subjects = {r.subject for r in records if r.split == "train"}
    for subject in sorted({r.subject for r in records if r.split == "test"} - train_subjects):
        problems.append(f"subject {subject!r} appears in test but not in train")
    if problems:
        raise ManifestError(problems)
    return DatasetManifest(tuple(records), source)


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return parse_manifest(text, path.parent, path)
    except ManifestError as exc:
        raise ManifestError([f"{path}: {p}" for p in exc.problems]) from None


def write_manifest(path, records: Sequence[Record]) -> None:
    path = Path(path)
    lines = ["# subject_id,path,split[,r1,c1,r2,c2,r3,c3,r4,c4]"]
    for rec in records:
        try:
            rel = rec.path.relative_to(path.parent)
        except ValueError:
            rel = rec.path
        fields = [rec.subject, rel.as_posix(), rec.split]
        if rec.eye_corners:
            fields += [str(v) for pair in rec.eye_corners for v in pair]
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
