"""Growing an infeasible cost vector into a componentwise-maximal core.

A core stays a core when a component is raised and the induced CSP stays
UNSAT. Growth probes one single-level raise at a time, in repeated passes
over the components, cheapest next increment first, until a full pass
changes nothing. Every SAT probe met on the way is a solution vector, so
its cost goes to the bound sink as an upper-bound candidate, witness
attached.
"""

from __future__ import annotations

from typing import Callable, Protocol, Sequence

from .model import INF, SearchAborted, cost_of_vector
from .sat_oracle import SatOracle

__all__ = ["BoundSink", "RecordingSink", "maximal_core"]


class BoundSink(Protocol):
    """Where growth reports incidental upper-bound candidates."""

    @property
    def ub(self) -> float: ...

    def offer_ub(self, value: int, witness: tuple[int, ...]) -> None: ...


class RecordingSink:
    """Minimal BoundSink: keeps the best candidate and remembers every offer."""

    def __init__(self, ub: float = INF):
        self.ub = ub
        self.witness: tuple[int, ...] | None = None
        self.offers: list[tuple[int, tuple[int, ...]]] = []

    def offer_ub(self, value: int, witness: tuple[int, ...]) -> None:
        self.offers.append((value, witness))
        if value < self.ub:
            self.ub = value
            self.witness = witness


def maximal_core(
    oracle: SatOracle,
    h: Sequence[int],
    sink: BoundSink | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> tuple[int, ...]:
    """Grow the core h until every single-component raise is satisfiable.

    The result k dominates h, is itself a core, and no component of k can
    be raised one level without the induced CSP becoming satisfiable.
    Raising h when it is not a core is a caller bug and raises ValueError.

    Growth order: each pass visits the not-yet-settled components in
    increasing order of their next-level cost increment (ties by index),
    applying accepted raises immediately; passes repeat until one changes
    nothing. Once a component's raise probes SAT it is never probed again:
    later raises of other components only loosen the induced CSP, so the
    SAT outcome is final.

    SAT probes whose vector cost is already >= sink.ub still certify
    settledness but are not reported as candidates.
    """
    w = oracle.w
    funcs = w.cost_functions
    v = list(w.validate_vector(h))
    if oracle.solve_under_vector(v, should_stop=should_stop).satisfiable:
        raise ValueError(f"{tuple(h)} is not a core: the induced CSP is satisfiable")

    idx = [f.levels.index(c) for f, c in zip(funcs, v)]
    settled = [False] * len(v)
    while True:
        order = sorted(
            (funcs[i].levels[idx[i] + 1] - v[i], i)
            for i in range(len(v))
            if not settled[i] and idx[i] + 1 < len(funcs[i].levels)
        )
        if not order:
            return tuple(v)
        changed = False
        for _, i in order:
            if should_stop is not None and should_stop():
                raise SearchAborted("stopped during core growth")
            probe = list(v)
            probe[i] = funcs[i].levels[idx[i] + 1]
            verdict = oracle.solve_under_vector(probe, should_stop=should_stop)
            if verdict.satisfiable:
                settled[i] = True
                assert verdict.witness is not None
                probe_cost = cost_of_vector(probe)
                if sink is not None and probe_cost < sink.ub:
                    sink.offer_ub(probe_cost, verdict.witness)
            else:
                v[i] = probe[i]
                idx[i] += 1
                changed = True
        if not changed:
            return tuple(v)
