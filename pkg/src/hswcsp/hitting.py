"""Minimum-cost hitting vectors over a pool of core vectors.

A vector hits the pool when no core dominates it, i.e. for every core it is
strictly above the core in at least one component. The search works in
level-index space: raising component i above a core's level only ever
targets the next level up, and siblings in the branch tree are capped at
the core's level so the subtrees partition the solution space (split by the
first component that ends up above the core).
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

from .model import SearchAborted


class PoolSaturatedError(RuntimeError):
    """Some core has every component at its maximum level; nothing hits it."""


class HittingProblem:
    """Per-function level sets plus a pool of cores, index-encoded.

    Dominated cores (componentwise <= another core) are dropped at build
    time; hitting the dominating core hits them for free. Kept cores stay
    in first-appearance order.
    """

    def __init__(
        self,
        levels: Sequence[Sequence[int]],
        pool: Iterable[Sequence[int]] = (),
    ):
        self.levels = tuple(tuple(ls) for ls in levels)
        if not self.levels:
            raise ValueError("need at least one function")
        for ls in self.levels:
            if not ls or any(a >= b for a, b in zip(ls, ls[1:])):
                raise ValueError(f"levels {ls} must be nonempty strictly ascending")
        self.m = len(self.levels)
        self.max_idx = tuple(len(ls) - 1 for ls in self.levels)
        self._index_of = [{c: i for i, c in enumerate(ls)} for ls in self.levels]

        raw: list[tuple[int, ...]] = []
        seen: set[tuple[int, ...]] = set()
        for k in pool:
            k = tuple(k)
            if len(k) != self.m:
                raise ValueError(f"core {k} has length {len(k)}, expected {self.m}")
            try:
                idx = tuple(self._index_of[i][c] for i, c in enumerate(k))
            except KeyError:
                raise ValueError(f"core {k} uses a cost that is not a level") from None
            if idx not in seen:
                seen.add(idx)
                raw.append(idx)
        self.cores = tuple(
            k
            for k in raw
            if not any(k2 != k and all(a <= b for a, b in zip(k, k2)) for k2 in raw)
        )
        # components that can still be raised above the core; empty == unhittable
        self.core_raisable = tuple(
            tuple(i for i in range(self.m) if k[i] < self.max_idx[i])
            for k in self.cores
        )
        self.saturated = any(not r for r in self.core_raisable)

    @classmethod
    def _from_indices(
        cls, levels: tuple[tuple[int, ...], ...], idx_cores: Iterable[tuple[int, ...]]
    ) -> "HittingProblem":
        # internal fast path: cores already index-encoded, dominated cores
        # tolerated (they are implied, just redundant), no validation
        p = cls.__new__(cls)
        p.levels = levels
        p.m = len(levels)
        p.max_idx = tuple(len(ls) - 1 for ls in levels)
        p._index_of = None
        p.cores = tuple(dict.fromkeys(idx_cores))
        p.core_raisable = tuple(
            tuple(i for i in range(p.m) if k[i] < p.max_idx[i]) for k in p.cores
        )
        p.saturated = any(not r for r in p.core_raisable)
        return p

    def vector_at(self, idx: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.levels[i][t] for i, t in enumerate(idx))

    def min_cost(self) -> int:
        return sum(ls[0] for ls in self.levels)


def _make_stop_poll(should_stop: Callable[[], bool] | None) -> Callable[[], None]:
    # polling a clock at every node costs more than the node; sample it
    if should_stop is None:
        return lambda: None
    calls = 0

    def poll() -> None:
        nonlocal calls
        calls += 1
        if calls & 255 == 1 and should_stop():
            raise SearchAborted("hitting search interrupted")

    return poll


def _branch_search(
    p: HittingProblem,
    bound: float,
    first_only: bool,
    should_stop: Callable[[], bool] | None,
) -> tuple[int, tuple[int, ...]] | None:
    """Best (or first) hitting vector with cost strictly below `bound`.

    Returns (cost, level-index tuple) or None. Branches on an unhit core
    with the fewest raise options, cheapest increment first. Nodes carry a
    packing bound: cores whose raise options are pairwise disjoint cannot
    share a raise, so their cheapest raises are owed additively (and any
    single core's cheapest raise is owed regardless).
    """
    levels, cores, m, max_idx = p.levels, p.cores, p.m, p.max_idx
    raisable = p.core_raisable
    ncores = len(cores)
    v = [0] * m
    caps = list(max_idx)
    hitcnt = [0] * ncores
    best = bound
    best_vec: tuple[int, ...] | None = None
    poll = _make_stop_poll(should_stop)

    def node(cost: int) -> bool:
        nonlocal best, best_vec
        poll()
        if cost >= best:
            return False
        pick = None
        pick_opts: list[int] | None = None
        owed = 0  # additive packing bound over claimed components
        single = 0
        packed = 0
        for ci in range(ncores):
            if hitcnt[ci]:
                continue
            k = cores[ci]
            opts = []
            mask = 0
            cheapest = -1
            for i in raisable[ci]:
                if k[i] < caps[i]:
                    opts.append(i)
                    mask |= 1 << i
                    d = levels[i][k[i] + 1] - levels[i][v[i]]
                    if cheapest < 0 or d < cheapest:
                        cheapest = d
            if not opts:
                return False  # nothing can hit this core under the caps
            if cheapest > single:
                single = cheapest
            if not mask & packed:
                owed += cheapest
                packed |= mask
            if pick_opts is None or len(opts) < len(pick_opts):
                pick, pick_opts = k, opts
        if pick_opts is None:
            best = cost
            best_vec = tuple(v)
            return True
        if cost + (owed if owed > single else single) >= best:
            return False
        pick_opts.sort(key=lambda i: (levels[i][pick[i] + 1] - levels[i][v[i]], i))
        saved_caps = []
        done = False
        for i in pick_opts:
            t = pick[i] + 1
            if t <= caps[i]:
                delta = levels[i][t] - levels[i][v[i]]
                old = v[i]
                v[i] = t
                touched = []
                for ci, k in enumerate(cores):
                    if old <= k[i] < t:
                        hitcnt[ci] += 1
                        touched.append(ci)
                found = node(cost + delta)
                v[i] = old
                for ci in touched:
                    hitcnt[ci] -= 1
                if found and first_only:
                    done = True
                    break
            saved_caps.append((i, caps[i]))
            caps[i] = min(caps[i], pick[i])
        for i, c in reversed(saved_caps):
            caps[i] = c
        return done

    node(p.min_cost())
    if best_vec is None:
        return None
    return int(best), best_vec


def _lex_min_at_cost(
    p: HittingProblem, target: int, should_stop: Callable[[], bool] | None
) -> tuple[int, ...]:
    """Lexicographically least level-index hitter of cost exactly `target`.

    Fixes components left to right at the lowest level that still lets the
    remaining components complete a hitter within the budget; each check is
    a first-solution branch-and-bound on the reduced suffix problem.
    `target` must be the optimal hitting cost.
    """
    levels, cores, m, max_idx = p.levels, p.cores, p.m, p.max_idx
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + levels[i][0]

    def completable(start: int, unhit: list[int], slack: int) -> bool:
        if not unhit:
            return True
        if start == m:
            return False
        reduced = HittingProblem._from_indices(
            levels[start:], [cores[ci][start:] for ci in unhit]
        )
        if reduced.saturated:
            return False
        found = _branch_search(
            reduced, suffix[start] + slack + 1, first_only=True, should_stop=should_stop
        )
        return found is not None

    fixed: list[int] = []
    spent = 0
    unhit = list(range(len(cores)))
    for pos in range(m):
        for t in range(max_idx[pos] + 1):
            slack = target - spent - levels[pos][t] - suffix[pos + 1]
            if slack < 0:
                break
            still = [ci for ci in unhit if cores[ci][pos] >= t]
            if completable(pos + 1, still, slack):
                fixed.append(t)
                spent += levels[pos][t]
                unhit = still
                break
        else:
            raise AssertionError("no hitter at the proven optimal cost")
    assert not unhit and spent == target
    return tuple(fixed)


def min_cost_hitting_vector(
    p: HittingProblem,
    prune_at: float | int | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> tuple[int, ...] | None:
    """Cheapest vector hitting every core, as a tuple of costs.

    Ties go to the lexicographically smallest level-index tuple. With
    `prune_at` set, returns None as soon as it is proven that no hitting
    vector costs strictly less than it. Raises PoolSaturatedError when no
    hitting vector exists at all.
    """
    if p.saturated:
        raise PoolSaturatedError("a pooled core sits at every maximum level")
    bound = math.inf if prune_at is None else prune_at
    found = _branch_search(p, bound, first_only=False, should_stop=should_stop)
    if found is None:
        return None
    cost, _ = found
    return p.vector_at(_lex_min_at_cost(p, cost, should_stop))


def cost_bounded_hitting_vector(
    p: HittingProblem,
    ub: float | int,
    should_stop: Callable[[], bool] | None = None,
) -> tuple[int, ...] | None:
    """Some vector hitting every core with cost strictly below ub, else None.

    No optimality claim; the search leans toward cheap levels and stops at
    the first feasible leaf. A saturated pool yields None.
    """
    if p.saturated:
        return None
    found = _branch_search(p, ub, first_only=True, should_stop=should_stop)
    if found is None:
        return None
    return p.vector_at(found[1])
