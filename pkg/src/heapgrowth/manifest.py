"""Reproducibility manifests: what was run, with which seed, and what it wrote."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .io import write_json

MANIFEST_NAME = "manifest.json"


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    params: dict
    seed: int
    version: str = __version__
    timestamp: str = ""
    outputs: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)

    @classmethod
    def record(cls, command: str, params: dict, seed: int, out_dir: Path,
               data_files, figures=()) -> "RunManifest":
        out_dir = Path(out_dir)
        digests = {Path(p).name: sha256_file(p) for p in data_files}
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return cls(command, dict(params), int(seed), __version__, stamp,
                   dict(sorted(digests.items())), sorted(Path(p).name for p in figures))

    def save(self, out_dir: Path) -> Path:
        return write_json(Path(out_dir) / MANIFEST_NAME, asdict(self))

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**data)


@dataclass
class VerifyReport:
    missing: list = field(default_factory=list)
    modified: list = field(default_factory=list)
    not_reproduced: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.missing or self.modified or self.not_reproduced)

    def lines(self) -> list[str]:
        out = [f"missing: {n}" for n in self.missing]
        out += [f"digest mismatch (file changed on disk): {n}" for n in self.modified]
        out += [f"digest mismatch (rerun differs): {n}" for n in self.not_reproduced]
        return out or ["all outputs verified"]


def check_files(manifest: RunManifest, out_dir: Path) -> VerifyReport:
    rep = VerifyReport()
    for name, digest in manifest.outputs.items():
        p = Path(out_dir) / name
        if not p.exists():
            rep.missing.append(name)
        elif sha256_file(p) != digest:
            rep.modified.append(name)
    return rep


def compare_rerun(manifest: RunManifest, rerun_dir: Path, report: VerifyReport) -> VerifyReport:
    for name, digest in manifest.outputs.items():
        p = Path(rerun_dir) / name
        if not p.exists() or sha256_file(p) != digest:
            report.not_reproduced.append(name)
    return report
