"""Anytime driver loops over a shared core pool.

Three entry points. hs_lb repeatedly takes a minimum-cost hitting vector
of the pool (its cost is a lower bound), asks the oracle, and either
records a solution or grows and pools a new core. hs_ub asks only for
some hitting vector cheaper than the incumbent; when none exists the
incumbent is proven optimal. hs_lub runs both loops over one pool, so
each feeds on the other's cores and bounds.

Bounds and cores live in a CorePool guarded by one lock; every bound
change is stamped into a trace. Long searches poll a halt predicate at
node/conflict granularity, so time limits and cross-worker termination
take effect mid-search.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from .core_grow import maximal_core
from .hitting import (
    HittingProblem,
    PoolSaturatedError,
    cost_bounded_hitting_vector,
    min_cost_hitting_vector,
)
from .model import INF, SearchAborted, Wcsp, cost_of_vector
from .sat_oracle import SatOracle
from .wcsp_io import TraceEvent

__all__ = [
    "OPTIMAL",
    "TIMEOUT",
    "INFEASIBLE",
    "CorePool",
    "TraceRecorder",
    "SolveResult",
    "seed_disjoint_cores",
    "hs_lb",
    "hs_ub",
    "hs_lub",
]

OPTIMAL = "OPTIMAL"
TIMEOUT = "TIMEOUT"
INFEASIBLE = "INFEASIBLE"

# worker step outcomes
_CONTINUE = "continue"
_FINISHED = "finished"
_SATURATED = "saturated"


class TraceRecorder:
    """Collects timestamped trace events, optionally forwarding each one.

    Timestamps use a monotonic clock anchored at construction. Thread-safe;
    the sink is called under the recorder's lock, so it sees events in
    recorded order.
    """

    def __init__(self, sink: Callable[[TraceEvent], None] | None = None):
        self._t0 = time.monotonic()
        self._lock = threading.Lock()
        self._sink = sink
        self.events: list[TraceEvent] = []

    def record(self, kind: str, value: int, source: str) -> None:
        ms = int((time.monotonic() - self._t0) * 1000)
        event = TraceEvent(ms, kind, value, source)
        with self._lock:
            self.events.append(event)
            if self._sink is not None:
                self._sink(event)


class CorePool:
    """Shared pool of cores plus the current bounds.

    cores only grow, lb only rises, ub only falls; revision counts core
    appends so workers can cheaply notice news. best_witness is the
    assignment behind the last accepted ub (its evaluated total is <= ub,
    since bound updates may carry vector costs). All mutation happens
    under one lock and is stamped into the recorder, so a trace is a
    faithful serialization of bound history.
    """

    def __init__(self, recorder: TraceRecorder | None = None):
        self._lock = threading.Lock()
        self.recorder = recorder
        self.cores: list[tuple[int, ...]] = []
        self._seen: set[tuple[int, ...]] = set()
        self.lb: int = 0
        self.ub: int | float = INF
        self.best_witness: tuple[int, ...] | None = None
        self.revision = 0

    def _record(self, kind: str, value: int, source: str) -> None:
        if self.recorder is not None:
            self.recorder.record(kind, value, source)

    def snapshot(self) -> list[tuple[int, ...]]:
        with self._lock:
            return list(self.cores)

    def bounds(self) -> tuple[int, int | float]:
        with self._lock:
            return self.lb, self.ub

    def add_core(self, core: tuple[int, ...], source: str) -> bool:
        """Append a core unless an identical one is already pooled."""
        core = tuple(core)
        with self._lock:
            if core in self._seen:
                return False
            self._seen.add(core)
            self.cores.append(core)
            self.revision += 1
            self._record("CORE", len(self.cores), source)
            return True

    def raise_lb(self, value: int, source: str) -> bool:
        with self._lock:
            if value <= self.lb:
                return False
            self.lb = value
            self._record("LB", value, source)
            return True

    def offer_ub(self, value: int, witness: tuple[int, ...], source: str) -> bool:
        with self._lock:
            if value >= self.ub:
                return False
            self.ub = value
            self.best_witness = witness
            self._record("UB", value, source)
            return True


class _PoolSink:
    """BoundSink view of a pool for one worker's growth calls."""

    def __init__(self, pool: CorePool, source: str):
        self._pool = pool
        self._source = source

    @property
    def ub(self) -> int | float:
        return self._pool.ub

    def offer_ub(self, value: int, witness: tuple[int, ...]) -> None:
        self._pool.offer_ub(value, witness, self._source)


@dataclass(frozen=True)
class SolveResult:
    status: str  # OPTIMAL / TIMEOUT / INFEASIBLE
    optimum: int | None
    lb: int
    ub: int | float
    witness: tuple[int, ...] | None
    cores_used: int
    iterations: dict[str, int]
    wall_ms: float
    trace: tuple[TraceEvent, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if self.status == OPTIMAL:
            assert self.optimum is not None and self.lb == self.ub == self.optimum
        else:
            assert self.optimum is None


class _Worker:
    def __init__(
        self, w: Wcsp, pool: CorePool, oracle: SatOracle, halt: Callable[[], bool]
    ):
        self.w = w
        self.pool = pool
        self.oracle = oracle
        self.halt = halt
        self.levels = w.levels_per_function()
        self.iterations = 0

    def _probe(self, h: tuple[int, ...]) -> str:
        """Shared tail of both loops: oracle on h, then solution or core."""
        pool = self.pool
        if pool.lb >= pool.ub:
            return _FINISHED
        verdict = self.oracle.solve_under_vector(h, should_stop=self.halt)
        self.iterations += 1
        if verdict.satisfiable:
            assert verdict.witness is not None
            pool.offer_ub(cost_of_vector(h), verdict.witness, self.source)
        else:
            grown = maximal_core(
                self.oracle, h, _PoolSink(pool, self.source), should_stop=self.halt
            )
            pool.add_core(grown, self.source)
        return _CONTINUE

    def step(self) -> str:
        raise NotImplementedError


class _LbWorker(_Worker):
    name = "lb"
    source = "LB_WORKER"

    def step(self) -> str:
        pool = self.pool
        lb, ub = pool.bounds()
        if lb >= ub:
            return _FINISHED
        problem = HittingProblem(self.levels, pool.snapshot())
        try:
            h = min_cost_hitting_vector(
                problem,
                prune_at=None if ub == INF else ub,
                should_stop=self.halt,
            )
        except PoolSaturatedError:
            return _SATURATED
        if h is None:
            # nothing hits the pool below ub, so ub is the optimum
            pool.raise_lb(int(ub), self.source)
            return _FINISHED
        pool.raise_lb(cost_of_vector(h), self.source)
        return self._probe(h)


class _UbWorker(_Worker):
    name = "ub"
    source = "UB_WORKER"

    def step(self) -> str:
        pool = self.pool
        lb, ub = pool.bounds()
        if lb >= ub:
            return _FINISHED
        problem = HittingProblem(self.levels, pool.snapshot())
        h = cost_bounded_hitting_vector(problem, ub, should_stop=self.halt)
        if h is None:
            if ub == INF:
                # only a saturated pool fails under an infinite budget
                return _SATURATED
            pool.raise_lb(int(ub), self.source)
            return _FINISHED
        return self._probe(h)


def seed_disjoint_cores(
    w: Wcsp,
    pool: CorePool,
    oracle: SatOracle | None = None,
    backend: str = "cdcl",
    should_stop: Callable[[], bool] | None = None,
) -> int:
    """Pre-fill the pool with cores whose below-maximum components are
    pairwise disjoint, then raise lb by their additive increments.

    Probe loop: components already marked used sit at their maximum level,
    everything else at its minimum. A SAT probe ends seeding (its witness
    total is offered as an upper bound); an UNSAT probe is grown into a
    maximal core, pooled, and every component of it still below maximum is
    marked used, so later probes can only blame fresh components.

    Because the below-maximum sets are disjoint, any vector hitting all
    seeded cores pays, per core, at least the cheapest next-level increment
    over that core's below-maximum components, on top of the sum of all
    minimum levels. That sum is pushed as a lower bound with source SEED.
    Returns the number of cores added.
    """
    if oracle is None:
        oracle = SatOracle(w, backend=backend)
    mins, maxs = w.min_vector(), w.max_vector()
    used: set[int] = set()
    added: list[tuple[int, ...]] = []
    sink = _PoolSink(pool, "SEED")
    while True:
        probe = tuple(maxs[i] if i in used else mins[i] for i in range(w.m))
        verdict = oracle.solve_under_vector(probe, should_stop=should_stop)
        if verdict.satisfiable:
            assert verdict.witness is not None
            pool.offer_ub(w.evaluate(verdict.witness).total, verdict.witness, "SEED")
            break
        grown = maximal_core(oracle, probe, sink, should_stop=should_stop)
        pool.add_core(grown, "SEED")
        added.append(grown)
        fresh = {i for i in range(w.m) if grown[i] < maxs[i]} - used
        if not fresh:
            break  # nothing left to separate on; avoid re-probing forever
        used |= fresh

    if added:
        bump = sum(mins)
        for core in added:
            increments = [
                next_level - mins[i]
                for i, (f, level) in enumerate(zip(w.cost_functions, core))
                for next_level in [_level_above(f.levels, level)]
                if next_level is not None
            ]
            bump += min(increments, default=0)
        pool.raise_lb(bump, "SEED")
    return len(added)


def _level_above(levels: tuple[int, ...], level: int) -> int | None:
    j = levels.index(level)
    return levels[j + 1] if j + 1 < len(levels) else None


def _run_alternating(workers: list[_Worker], halt: Callable[[], bool]) -> str | None:
    """Single-thread round-robin over the workers; deterministic."""
    while True:
        for worker in workers:
            if halt():
                return None
            try:
                outcome = worker.step()
            except SearchAborted:
                return None
            if outcome != _CONTINUE:
                return outcome


def _run_threaded(
    workers: list[_Worker],
    halt: Callable[[], bool],
    stop_event: threading.Event,
    jitter_seed: int | None,
) -> tuple[str | None, list[tuple[str, BaseException]]]:
    outcomes: dict[str, str] = {}
    errors: list[tuple[str, BaseException]] = []

    def run(worker: _Worker, rng: random.Random | None) -> None:
        try:
            while not halt():
                if rng is not None:
                    time.sleep(rng.random() * 1e-3)
                outcome = worker.step()
                if outcome != _CONTINUE:
                    outcomes[worker.name] = outcome
                    if outcome == _SATURATED:
                        stop_event.set()
                    return
        except SearchAborted:
            pass
        except BaseException as exc:  # propagated to the caller after join
            errors.append((worker.name, exc))
            stop_event.set()

    threads = []
    for k, worker in enumerate(workers):
        rng = random.Random(jitter_seed * 1021 + k) if jitter_seed is not None else None
        t = threading.Thread(
            target=run, args=(worker, rng), name=f"hs-{worker.name}", daemon=True
        )
        threads.append(t)
        t.start()
    for t in threads:
        t.join()
    if _SATURATED in outcomes.values():
        return _SATURATED, errors
    return None, errors


def _solve(
    w: Wcsp,
    enable_lb: bool,
    enable_ub: bool,
    pool: CorePool | None,
    time_limit: float | None,
    seed_disjoint: bool,
    backend: str,
    trace: Callable[[TraceEvent], None] | None,
    threaded: bool,
    jitter_seed: int | None,
) -> SolveResult:
    t0 = time.monotonic()
    deadline = None if time_limit is None else t0 + time_limit
    recorder = TraceRecorder(trace)
    if pool is None:
        pool = CorePool(recorder)
    else:
        pool.recorder = recorder
    stop_event = threading.Event()

    def halt() -> bool:
        return (
            stop_event.is_set()
            or (deadline is not None and time.monotonic() >= deadline)
            or pool.lb >= pool.ub
        )

    workers: list[_Worker] = []
    infeasible = False
    errors: list[tuple[str, BaseException]] = []
    try:
        if not halt():
            shared_oracle = SatOracle(w, backend=backend)
            if not shared_oracle.solve_csp(should_stop=halt).satisfiable:
                infeasible = True
            else:
                if seed_disjoint:
                    seed_disjoint_cores(w, pool, shared_oracle, should_stop=halt)
                if enable_lb:
                    oracle = SatOracle(w, backend=backend) if threaded else shared_oracle
                    workers.append(_LbWorker(w, pool, oracle, halt))
                if enable_ub:
                    oracle = SatOracle(w, backend=backend) if threaded else shared_oracle
                    workers.append(_UbWorker(w, pool, oracle, halt))
                if threaded:
                    outcome, errors = _run_threaded(
                        workers, halt, stop_event, jitter_seed
                    )
                else:
                    outcome = _run_alternating(workers, halt)
                if outcome == _SATURATED:
                    infeasible = True
    except SearchAborted:
        pass

    for name, exc in errors:
        raise RuntimeError(f"{name} worker died: {exc!r}") from exc

    lb, ub = pool.bounds()
    assert lb <= ub
    if infeasible:
        status, optimum = INFEASIBLE, None
    elif lb == ub and ub < INF:
        status, optimum = OPTIMAL, int(ub)
        recorder.record("DONE", optimum, "MAIN")
    else:
        status, optimum = TIMEOUT, None
    return SolveResult(
        status=status,
        optimum=optimum,
        lb=lb,
        ub=ub,
        witness=pool.best_witness,
        cores_used=len(pool.cores),
        iterations={worker.name: worker.iterations for worker in workers},
        wall_ms=(time.monotonic() - t0) * 1000,
        trace=tuple(recorder.events),
    )


def hs_lb(
    w: Wcsp,
    pool: CorePool | None = None,
    time_limit: float | None = None,
    seed_disjoint: bool = False,
    backend: str = "cdcl",
    trace: Callable[[TraceEvent], None] | None = None,
) -> SolveResult:
    """Lower-bound-driven loop: optimal hitting vectors, rising lb."""
    return _solve(
        w, True, False, pool, time_limit, seed_disjoint, backend, trace,
        threaded=False, jitter_seed=None,
    )


def hs_ub(
    w: Wcsp,
    pool: CorePool | None = None,
    time_limit: float | None = None,
    seed_disjoint: bool = False,
    backend: str = "cdcl",
    trace: Callable[[TraceEvent], None] | None = None,
) -> SolveResult:
    """Upper-bound-driven loop: any hitting vector under the incumbent."""
    return _solve(
        w, False, True, pool, time_limit, seed_disjoint, backend, trace,
        threaded=False, jitter_seed=None,
    )


def hs_lub(
    w: Wcsp,
    lb_cores: int = 1,
    ub_cores: int = 1,
    pool: CorePool | None = None,
    time_limit: float | None = None,
    seed_disjoint: bool = False,
    backend: str = "cdcl",
    trace: Callable[[TraceEvent], None] | None = None,
    deterministic: bool = False,
    jitter_seed: int | None = None,
) -> SolveResult:
    """Both loops sharing one pool, each consuming the other's cores and
    bounds.

    lb_cores/ub_cores are worker capacities; 0 disables that worker (the
    capacity split beyond on/off does not parallelize node expansion).
    deterministic runs the enabled workers as a single-thread round-robin
    with fixed tie-breaks instead of two threads; jitter_seed adds tiny
    seeded sleeps at iteration boundaries of threaded runs to vary the
    interleaving.
    """
    if lb_cores < 0 or ub_cores < 0:
        raise ValueError("worker capacities must be nonnegative")
    if lb_cores == 0 and ub_cores == 0:
        raise ValueError("at least one worker must have capacity")
    both = lb_cores > 0 and ub_cores > 0
    return _solve(
        w,
        lb_cores > 0,
        ub_cores > 0,
        pool,
        time_limit,
        seed_disjoint,
        backend,
        trace,
        threaded=both and not deterministic,
        jitter_seed=jitter_seed,
    )
