"""Alias tables and hierarchical alias trees for O(1) weighted selection."""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

import numpy as np

DEFAULT_BLOCK_SIZE = 4096
SPLITS = ("contiguous", "round_robin", "random")
_NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AliasTable:
    """Switch probabilities and aliases over ``elements``.

    ``alias[i]`` is a position into ``elements``, not an element id.
    """

    elements: tuple
    prob: np.ndarray
    alias: np.ndarray

    def __len__(self) -> int:
        return len(self.elements)

    def selection_probabilities(self) -> np.ndarray:
        """Probability that sampling returns each position.

        Evaluates ``p(e)/|S| + sum over e' with a(e') = e of (1 - p(e'))/|S|``.
        """
        size = len(self.prob)
        out = self.prob + np.bincount(self.alias, weights=1.0 - self.prob, minlength=size)
        return out / size

    def sample_index(self, rng: random.Random | np.random.Generator) -> int:
        u1, u2 = _uniform_pair(rng)
        i = min(int(u1 * len(self.prob)), len(self.prob) - 1)
        return i if u2 < self.prob[i] else int(self.alias[i])


def _uniform_pair(rng) -> tuple[float, float]:
    if isinstance(rng, np.random.Generator):
        u = rng.random(2)
        return float(u[0]), float(u[1])
    return rng.random(), rng.random()


def _check_distribution(r: Sequence[float]) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("alias construction needs at least one element")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise ValueError("probabilities must be positive and finite")
    if abs(r.sum() - 1.0) > _NORM_TOL:
        raise ValueError(f"probabilities sum to {r.sum()!r}, expected 1")
    return r


def _build_tables(r) -> tuple[np.ndarray, np.ndarray]:
    size = len(r)
    # plain floats: tree blocks are small and numpy scalar access dominates otherwise
    prob = [size * x for x in (r.tolist() if isinstance(r, np.ndarray) else r)]
    alias = list(range(size))
    # min-heaps keep the "smallest index first" pairing at O(log |S|) per pop
    small = [i for i, x in enumerate(prob) if x < 1.0]
    large = [i for i, x in enumerate(prob) if x > 1.0]
    heapq.heapify(small)
    heapq.heapify(large)
    while large and small:
        x = heapq.heappop(small)
        y = large[0]
        alias[x] = y
        prob[y] -= 1.0 - prob[x]
        if prob[y] <= 1.0:
            heapq.heappop(large)
            if prob[y] < 1.0:
                heapq.heappush(small, y)
    # rounding residue: whatever is left is within float error of 1
    for i in small + large:
        prob[i] = 1.0
    return np.array(prob), np.array(alias, dtype=np.int64)


def build_alias(weights: Sequence[tuple[Hashable, float]] | dict) -> AliasTable:
    """Build an alias table from ``(element, probability)`` pairs.

    Deficit and surplus elements are paired smallest index first, so the
    result is fully determined by the input order.
    """
    items = list(weights.items()) if isinstance(weights, dict) else list(weights)
    if not items:
        raise ValueError("alias construction needs at least one element")
    elements = tuple(e for e, _ in items)
    r = _check_distribution([p for _, p in items])
    prob, alias = _build_tables(r)
    prob.setflags(write=False)
    alias.setflags(write=False)
    return AliasTable(elements, prob, alias)


def sample_alias(table: AliasTable, rng) -> Any:
    return table.elements[table.sample_index(rng)]


@dataclass(frozen=True, eq=False)
class AliasBlock:
    """One node of an alias tree.

    ``table.elements`` holds leaf elements when ``children`` is None,
    otherwise positions into ``children``.
    """

    table: AliasTable
    children: tuple[AliasBlock, ...] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True, eq=False)
class AliasTree:
    root: AliasBlock
    block_size: int
    height: int
    size: int

    def blocks(self):
        """Yield every block, root first, in depth-first order."""
        stack = [self.root]
        while stack:
            block = stack.pop()
            yield block
            if block.children:
                stack.extend(reversed(block.children))

    def leaf_path_probabilities(self) -> dict:
        """Product of per-block selection probabilities along each root-to-leaf path."""
        out: dict = {}

        def walk(block: AliasBlock, acc: float) -> None:
            probs = block.table.selection_probabilities().tolist()
            for pos, elem in enumerate(block.table.elements):
                if block.is_leaf:
                    out[elem] = acc * probs[pos]
                else:
                    walk(block.children[elem], acc * probs[pos])

        walk(self.root, 1.0)
        return out


def _split(n_items: int, n_groups: int, how: str, rng: random.Random | None) -> list[list[int]]:
    if how == "contiguous":
        step = math.ceil(n_items / n_groups)
        return [list(range(i, min(i + step, n_items))) for i in range(0, n_items, step)]
    if how == "round_robin":
        return [list(range(g, n_items, n_groups)) for g in range(n_groups)]
    if how == "random":
        order = list(range(n_items))
        (rng or random.Random(0)).shuffle(order)
        step = math.ceil(n_items / n_groups)
        return [sorted(order[i:i + step]) for i in range(0, n_items, step)]
    raise ValueError(f"unknown split {how!r}; expected one of {SPLITS}")


def build_alias_tree(
    weights: Sequence[tuple[Hashable, float]] | dict,
    d: int = DEFAULT_BLOCK_SIZE,
    split: str = "contiguous",
    seed: int | None = None,
) -> AliasTree:
    """Recursively group elements into blocks of at most ``d`` and alias each level.

    Groups of a level become the weighted items of the level above, with
    weight equal to the summed probability of their members.
    """
    if d < 2:
        raise ValueError(f"block size d must be >= 2, got {d}")
    items = list(weights.items()) if isinstance(weights, dict) else list(weights)
    if not items:
        raise ValueError("alias construction needs at least one element")
    r = _check_distribution([p for _, p in items])
    rng = random.Random(seed) if split == "random" else None

    leaves = [e for e, _ in items]
    level_blocks: list[AliasBlock] | None = None
    level_r = r
    height = 0
    while True:
        height += 1
        n_items = len(level_r)
        if n_items <= d:
            root = _make_block(level_r, leaves, level_blocks)
            break
        groups = _split(n_items, math.ceil(n_items / d), split, rng)
        next_blocks = []
        next_r = np.empty(len(groups))
        values = level_r.tolist()
        for g, members in enumerate(groups):
            member_r = [values[i] for i in members]
            mass = math.fsum(member_r)
            next_r[g] = mass
            local = [x / mass for x in member_r]
            if level_blocks is None:
                block = _make_block(local, [leaves[i] for i in members], None)
            else:
                block = _make_block(local, None, [level_blocks[i] for i in members])
            next_blocks.append(block)
        level_blocks = next_blocks
        level_r = next_r / next_r.sum()
    return AliasTree(root=root, block_size=d, height=height, size=len(leaves))


def _make_block(r: np.ndarray, leaves, children) -> AliasBlock:
    prob, alias = _build_tables(r)
    prob.setflags(write=False)
    alias.setflags(write=False)
    if children is None:
        return AliasBlock(AliasTable(tuple(leaves), prob, alias))
    return AliasBlock(AliasTable(tuple(range(len(children))), prob, alias), tuple(children))


def sample_alias_tree(tree: AliasTree, rng) -> Any:
    block = tree.root
    while True:
        pos = block.table.sample_index(rng)
        if block.is_leaf:
            return block.table.elements[pos]
        block = block.children[pos]
