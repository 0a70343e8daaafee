"""Core data model: weighted CSP instances, cost vectors and their order.

A problem instance couples hard constraints (forbidden tuples) with table
cost functions over the same variables. Cost vectors live in the product of
the per-function level sets; the componentwise order on them is what the
whole solver is built on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

INF = float("inf")

_COST_LIMIT = 2**63  # keep sums comfortably inside 64 bits


class SearchAborted(RuntimeError):
    """Raised by long-running searches when a stop callback fires."""


def _check_scope(scope: Sequence[int], num_vars: int) -> tuple[int, ...]:
    scope = tuple(scope)
    if len(scope) == 0:
        raise ValueError("empty scope")
    if len(set(scope)) != len(scope):
        raise ValueError(f"repeated variable in scope {scope}")
    for x in scope:
        if not (0 <= x < num_vars):
            raise ValueError(f"scope variable {x} out of range")
    return scope


@dataclass(frozen=True)
class HardConstraint:
    """A set of forbidden value tuples over a variable scope."""

    scope: tuple[int, ...]
    forbidden: frozenset[tuple[int, ...]]

    def forbids(self, assignment: Sequence[int]) -> bool:
        return tuple(assignment[x] for x in self.scope) in self.forbidden


@dataclass(frozen=True)
class CostFunction:
    """Dense table cost function.

    `table` maps every value tuple of the scope to a nonnegative integer
    cost. `levels` is the ascending tuple of distinct sub-top costs; entries
    clamped to the instance top are dead weight kept only so the table stays
    dense (a matching hard constraint forbids those tuples).
    """

    scope: tuple[int, ...]
    table: dict[tuple[int, ...], int]
    levels: tuple[int, ...]

    def cost(self, assignment: Sequence[int]) -> int:
        return self.table[tuple(assignment[x] for x in self.scope)]

    @property
    def min_level(self) -> int:
        return self.levels[0]

    @property
    def max_level(self) -> int:
        return self.levels[-1]


class Evaluation(NamedTuple):
    total: int
    per_function: tuple[int, ...]
    feasible: bool


@dataclass(frozen=True)
class Wcsp:
    """A weighted CSP instance.

    Invariants are validated at construction: at least one cost function,
    every domain nonempty, scopes in range without repeats, tables dense
    with nonnegative costs, levels consistent with tables. Use
    :meth:`Wcsp.build` to construct from raw tables; it lifts costs at or
    above `top` into hard constraints first.
    """

    num_vars: int
    domains: tuple[int, ...]
    hard_constraints: tuple[HardConstraint, ...]
    cost_functions: tuple[CostFunction, ...]
    top: int
    name: str = "wcsp"

    def __post_init__(self) -> None:
        if self.num_vars < 1:
            raise ValueError("instance needs at least one variable")
        if len(self.domains) != self.num_vars:
            raise ValueError("domain list length != num_vars")
        if any(d < 1 for d in self.domains):
            raise ValueError("every domain must have at least one value")
        if self.top < 1:
            raise ValueError("top must be a positive integer")
        if len(self.cost_functions) < 1:
            raise ValueError("instance needs at least one cost function")
        for hc in self.hard_constraints:
            scope = _check_scope(hc.scope, self.num_vars)
            for t in hc.forbidden:
                self._check_tuple(scope, t)
        max_sum = 0
        for f in self.cost_functions:
            scope = _check_scope(f.scope, self.num_vars)
            full = 1
            for x in scope:
                full *= self.domains[x]
            if len(f.table) != full:
                raise ValueError(
                    f"table over scope {scope} is not dense "
                    f"({len(f.table)} of {full} tuples)"
                )
            sub_top = set()
            for t, c in f.table.items():
                self._check_tuple(scope, t)
                if not isinstance(c, int) or c < 0:
                    raise ValueError(f"negative or non-integer cost {c!r}")
                if c >= _COST_LIMIT:
                    raise ValueError(f"cost {c} exceeds the 64-bit budget")
                if c < self.top:
                    sub_top.add(c)
            if not sub_top:
                raise ValueError(
                    f"function over scope {scope} has no sub-top cost; "
                    "it should have been lifted to a hard constraint"
                )
            if f.levels != tuple(sorted(sub_top)):
                raise ValueError(f"levels {f.levels} do not match table")
            max_sum += f.levels[-1]
        if max_sum >= _COST_LIMIT:
            raise ValueError("sum of maximum levels exceeds the 64-bit budget")

    def _check_tuple(self, scope: tuple[int, ...], t: tuple[int, ...]) -> None:
        if len(t) != len(scope):
            raise ValueError(f"tuple {t} does not match scope arity {len(scope)}")
        for x, v in zip(scope, t):
            if not (0 <= v < self.domains[x]):
                raise ValueError(f"value {v} out of domain for variable {x}")

    @classmethod
    def build(
        cls,
        num_vars: int,
        domains: Sequence[int],
        functions: Iterable[tuple[Sequence[int], dict[tuple[int, ...], int]]],
        hard: Iterable[tuple[Sequence[int], Iterable[tuple[int, ...]]]] = (),
        top: int = 1,
        name: str = "wcsp",
    ) -> "Wcsp":
        """Normalize raw tables into an instance.

        Table entries with cost >= top become forbidden tuples of a new hard
        constraint on the same scope and are clamped to exactly top in the
        table. A function whose every sub-top cost is 0 and that has at
        least one lifted tuple is ingested as a pure hard constraint.
        """
        hcs = [
            HardConstraint(tuple(scope), frozenset(map(tuple, tuples)))
            for scope, tuples in hard
        ]
        fns = []
        for scope, table in functions:
            scope = tuple(scope)
            lifted = frozenset(t for t, c in table.items() if c >= top)
            sub_top = {c for c in table.values() if c < top}
            if lifted and sub_top <= {0}:
                hcs.append(HardConstraint(scope, lifted))
                continue
            if lifted:
                hcs.append(HardConstraint(scope, lifted))
                table = {t: (top if c >= top else c) for t, c in table.items()}
            else:
                table = dict(table)
            fns.append(CostFunction(scope, table, tuple(sorted(sub_top))))
        return cls(num_vars, tuple(domains), tuple(hcs), tuple(fns), top, name)

    @property
    def m(self) -> int:
        return len(self.cost_functions)

    def levels_per_function(self) -> tuple[tuple[int, ...], ...]:
        return tuple(f.levels for f in self.cost_functions)

    def min_vector(self) -> tuple[int, ...]:
        return tuple(f.min_level for f in self.cost_functions)

    def max_vector(self) -> tuple[int, ...]:
        return tuple(f.max_level for f in self.cost_functions)

    def assignments(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(d) for d in self.domains))

    def validate_assignment(self, a: Sequence[int]) -> tuple[int, ...]:
        a = tuple(a)
        if len(a) != self.num_vars:
            raise ValueError(f"assignment length {len(a)} != {self.num_vars}")
        for x, v in enumerate(a):
            if not (0 <= v < self.domains[x]):
                raise ValueError(f"value {v} out of domain for variable {x}")
        return a

    def validate_vector(self, v: Sequence[int]) -> tuple[int, ...]:
        v = tuple(v)
        if len(v) != self.m:
            raise ValueError(f"vector length {len(v)} != m={self.m}")
        for f, c in zip(self.cost_functions, v):
            if c not in f.levels:
                raise ValueError(f"{c} is not a level of function {f.scope}")
        return v

    def cost_of_vector(self, v: Sequence[int]) -> int:
        return sum(self.validate_vector(v))

    def evaluate(self, a: Sequence[int]) -> Evaluation:
        """Total cost, per-function costs, and feasibility of an assignment.

        Infeasible means some hard constraint forbids it or some table entry
        sits at top; per-function costs are reported raw either way.
        """
        a = self.validate_assignment(a)
        per = tuple(f.cost(a) for f in self.cost_functions)
        feasible = all(c < self.top for c in per) and not any(
            hc.forbids(a) for hc in self.hard_constraints
        )
        return Evaluation(sum(per), per, feasible)


def leq(u: Sequence[int], v: Sequence[int]) -> bool:
    """Componentwise u <= v; u is then dominated by v."""
    if len(u) != len(v):
        raise ValueError("vector length mismatch")
    return all(a <= b for a, b in zip(u, v))


def hits(u: Sequence[int], pool: Iterable[Sequence[int]]) -> bool:
    """True iff no vector in the pool dominates u.

    Equivalently: for every k in the pool there is a component where u is
    strictly above k.
    """
    return not any(leq(u, k) for k in pool)


def cost_of_vector(v: Sequence[int]) -> int:
    """Sum of a cost vector's components."""
    return sum(v)
