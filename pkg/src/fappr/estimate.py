"""Sparse endpoint counts and their normalisation into PPR estimates."""
from __future__ import annotations

import gzip
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np


@dataclass
class EstimateStore:
    """Endpoint hit counts per (source, target); only positive counts are kept."""

    omega: int
    counts: Counter = field(default_factory=Counter)

    def record(self, s: int, t: int, times: int = 1) -> "EstimateStore":
        if times:
            self.counts[(s, t)] += times
        return self

    def record_many(self, sources: np.ndarray, targets: np.ndarray, n: int) -> "EstimateStore":
        keys, hits = np.unique(np.asarray(sources, dtype=np.int64) * n + targets, return_counts=True)
        for key, c in zip(keys.tolist(), hits.tolist()):
            self.counts[divmod(key, n)] += c
        return self

    def merge(self, other: "EstimateStore") -> "EstimateStore":
        if other.omega != self.omega:
            raise ValueError("cannot merge stores with different omega")
        self.counts.update(other.counts)
        return self

    def count(self, s: int, t: int) -> int:
        return self.counts.get((s, t), 0)

    def finalize(self, s: int, t: int) -> float:
        return self.count(s, t) / self.omega

    def by_source(self) -> dict[int, dict[int, int]]:
        rows: dict[int, dict[int, int]] = defaultdict(dict)
        for (s, t), c in self.counts.items():
            rows[s][t] = c
        return dict(rows)

    def row(self, s: int) -> dict[int, float]:
        return {t: c / self.omega for (src, t), c in self.counts.items() if src == s}

    def sources(self) -> list[int]:
        return sorted({s for s, _ in self.counts})

    def top_k(self, s: int, k: int) -> list[tuple[int, float]]:
        if k < 1:
            raise ValueError("k must be >= 1")
        ranked = sorted(self.row(s).items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked[:k]

    def to_dense(self, n: int) -> np.ndarray:
        out = np.zeros((n, n))
        for (s, t), c in self.counts.items():
            out[s, t] = c / self.omega
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, EstimateStore) and self.omega == other.omega and self.counts == other.counts


def top_k(store: EstimateStore, s: int, k: int) -> list[tuple[int, float]]:
    return store.top_k(s, k)


def format_score(x: float) -> str:
    return f"{x:.9g}"


def write_scores(
    rows: dict[int, dict[int, float]] | Iterable[tuple[int, dict[int, float]]],
    fh: IO[str],
    labels: Sequence[str] | None = None,
) -> None:
    """Write ``source<TAB>target<TAB>pi_hat`` sorted by source, score desc, target."""
    items = rows.items() if isinstance(rows, dict) else rows
    for s, row in sorted(items):
        for t, score in sorted(row.items(), key=lambda kv: (-kv[1], kv[0])):
            if score <= 0:
                continue
            src = labels[s] if labels else s
            dst = labels[t] if labels else t
            fh.write(f"{src}\t{dst}\t{format_score(score)}\n")


def write_store(store: EstimateStore, path, labels: Sequence[str] | None = None) -> None:
    rows = {s: {t: c / store.omega for t, c in row.items()} for s, row in store.by_source().items()}
    buf = io.StringIO()
    write_scores(rows, buf, labels)
    write_text(path, buf.getvalue())


def write_text(path, text: str) -> None:
    data = text.encode("utf-8")
    if str(path).endswith(".gz"):
        # fixed mtime keeps compressed output byte-reproducible
        data = gzip.compress(data, mtime=0)
    with open(path, "wb") as fh:
        fh.write(data)


def read_scores(path) -> dict[str, dict[str, float]]:
    """Parse a score TSV back into ``{source label: {target label: score}}``."""
    out: dict[str, dict[str, float]] = defaultdict(dict)
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            out[parts[0]][parts[1]] = float(parts[2])
    return dict(out)
