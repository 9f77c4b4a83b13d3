"""Ranking metrics comparing estimated PPR rankings against reference scores."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Mapping, Sequence


@dataclass(frozen=True)
class RankedList:
    source: object
    targets: tuple
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("ranked list contains duplicate targets")
        if len(self.targets) > self.k:
            object.__setattr__(self, "targets", tuple(self.targets[: self.k]))


def rank(scores: Mapping, k: int, source=None) -> RankedList:
    """Targets by descending score, ties broken by ascending target."""
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], _tie_key(kv[0])))
    return RankedList(source, tuple(t for t, v in ordered[:k] if v > 0), k)


def _tie_key(t):
    # numeric labels compare numerically, otherwise lexicographically
    try:
        return (0, int(t), "")
    except (TypeError, ValueError):
        return (1, 0, str(t))


def dcg(gains: Sequence[float]) -> float:
    return sum(g / math.log2(i + 2) for i, g in enumerate(gains))


def ndcg_at_k(estimated: RankedList, truth: Mapping) -> float:
    """Linear-gain NDCG: gain is the reference score, discount ``log2(position + 1)``."""
    if not truth:
        raise ValueError("NDCG is undefined for an empty reference")
    k = estimated.k
    ideal = sorted(truth.values(), reverse=True)[:k]
    idcg = dcg(ideal)
    if idcg <= 0:
        raise ValueError("NDCG is undefined when every reference score is zero")
    gains = [truth.get(t, 0.0) for t in estimated.targets[:k]]
    return dcg(gains) / idcg


def map_at_k(estimated: RankedList, relevant) -> float:
    """Average precision at k with binary relevance."""
    relevant = set(relevant)
    if not relevant:
        raise ValueError("average precision needs a non-empty relevant set")
    hits = 0
    total = 0.0
    for i, t in enumerate(estimated.targets[: estimated.k], start=1):
        if t in relevant:
            hits += 1
            total += hits / i
    return total / min(len(relevant), estimated.k)


def evaluate(
    estimated: Mapping[object, Mapping[object, float]],
    truth: Mapping[object, Mapping[object, float]],
    k: int,
) -> list[tuple[object, float, float]]:
    """Per-source ``(source, ndcg, map)`` over the sources present in ``truth``.

    Relevance for MAP is membership in the reference top-k.
    """
    out = []
    for s in sorted(truth, key=_tie_key):
        ref = truth[s]
        if not any(v > 0 for v in ref.values()):
            continue
        est = rank(estimated.get(s, {}), k, s)
        relevant = rank(ref, k, s).targets
        out.append((s, ndcg_at_k(est, ref), map_at_k(est, relevant)))
    return out


def write_report(rows: list[tuple[object, float, float]], fh: IO[str]) -> tuple[float, float]:
    fh.write("source\tndcg\tmap\n")
    for s, nd, ap in rows:
        fh.write(f"{s}\t{nd:.9g}\t{ap:.9g}\n")
    mean_nd = sum(r[1] for r in rows) / len(rows) if rows else 0.0
    mean_ap = sum(r[2] for r in rows) / len(rows) if rows else 0.0
    fh.write(f"mean\t{mean_nd:.9g}\t{mean_ap:.9g}\n")
    return mean_nd, mean_ap
