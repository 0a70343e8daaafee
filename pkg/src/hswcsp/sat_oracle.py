"""CNF oracle answering "is this cost vector a solution vector?".

Direct encoding: one boolean per (variable, value) with exactly-one
clauses, one unconditional clause per hard-forbidden tuple, and per cost
function one assumption selector per non-minimum level. Asserting selector
s(i, j) forbids every tuple of function i costing exactly levels[j], so
asserting the selectors of all levels strictly above v_i enforces
f_i <= v_i. With no assumptions the formula is satisfiable exactly when
the hard constraints alone are.

Backends are pluggable: anything with new_var/add_clause/solve/model_value
(the default CDCL solver, or the naive chronological-backtracking one kept
for differential testing).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from .cdcl import CdclSolver
from .model import SearchAborted, Wcsp


class BudgetExhausted(RuntimeError):
    """The solver hit its conflict budget before reaching a verdict."""


@dataclass(frozen=True)
class OracleVerdict:
    satisfiable: bool
    witness: tuple[int, ...] | None

    def __post_init__(self) -> None:
        assert (self.witness is not None) == self.satisfiable


class SatBackend(Protocol):
    def new_var(self) -> int: ...

    def add_clause(self, lits) -> bool: ...

    def solve(
        self,
        assumptions: Sequence[int] = (),
        conflict_budget: int | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> bool | None: ...

    def model_value(self, var: int) -> bool: ...


class NaiveSolver:
    """Chronological backtracking over the same clause set.

    Exists to cross-check the CDCL solver, so it stays dumb on purpose:
    one static pure-literal pass (gets the unasserted selectors out of the
    way), then depth-first search in variable order with violation checks
    against the occurrence lists. Conflict budgets are ignored; a budget
    cannot be exhausted by a solver that counts no conflicts.
    """

    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.ok = True
        self.model: list[int] = []
        self._occur: list[list[list[int]]] | None = None

    def new_var(self) -> int:
        self.nvars += 1
        self._occur = None
        return self.nvars

    def add_clause(self, lits) -> bool:
        lits = sorted(set(lits), key=abs)
        if any(-l in lits for l in lits):
            return True
        if not lits:
            self.ok = False
            return False
        self.clauses.append(list(lits))
        self._occur = None
        return True

    def _occurrences(self) -> list[list[list[int]]]:
        if self._occur is None:
            occ: list[list[list[int]]] = [[] for _ in range(self.nvars + 1)]
            for c in self.clauses:
                for l in c:
                    occ[abs(l)].append(c)
            self._occur = occ
        return self._occur

    def solve(
        self,
        assumptions: Sequence[int] = (),
        conflict_budget: int | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> bool | None:
        if not self.ok:
            return False
        assign = [0] * (self.nvars + 1)
        for lit in assumptions:
            v, s = abs(lit), (1 if lit > 0 else -1)
            if assign[v] == -s:
                return False
            assign[v] = s

        pos = bytearray(self.nvars + 1)
        neg = bytearray(self.nvars + 1)
        for c in self.clauses:
            for l in c:
                if l > 0:
                    pos[l] = 1
                else:
                    neg[-l] = 1
        for v in range(1, self.nvars + 1):
            if assign[v] == 0 and not (pos[v] and neg[v]):
                assign[v] = 1 if pos[v] else -1

        def violated(c: list[int]) -> bool:
            for l in c:
                if (assign[l] if l > 0 else -assign[-l]) != -1:
                    return False
            return True

        if any(violated(c) for c in self.clauses):
            return False

        occ = self._occurrences()
        order = [v for v in range(1, self.nvars + 1) if assign[v] == 0]

        def dfs(i: int) -> bool:
            if should_stop is not None and should_stop():
                raise SearchAborted("naive sat search interrupted")
            if i == len(order):
                return True
            v = order[i]
            for s in (-1, 1):
                assign[v] = s
                if not any(violated(c) for c in occ[v]) and dfs(i + 1):
                    return True
            assign[v] = 0
            return False

        if dfs(0):
            self.model = list(assign)
            return True
        return False

    def model_value(self, var: int) -> bool:
        return self.model[var] == 1


class Encoding:
    """Variable numbering and clause lists for one instance.

    Owns the maps from (csp variable, value) to boolean ids and from
    (function, level index >= 1) to selector ids. Base clauses are the
    exactly-one groups plus hard-constraint forbids; guarded clauses tie
    each non-minimum-cost tuple to its level selector.
    """

    def __init__(self, w: Wcsp):
        self.w = w
        counter = itertools.count(1)
        self.value_var: list[list[int]] = [
            [next(counter) for _ in range(d)] for d in w.domains
        ]
        self.selector_var: list[dict[int, int]] = [
            {j: next(counter) for j in range(1, len(f.levels))}
            for f in w.cost_functions
        ]
        self.num_vars = next(counter) - 1

        self.base_clauses: list[list[int]] = []
        for x, d in enumerate(w.domains):
            vv = self.value_var[x]
            self.base_clauses.append(list(vv))
            for a in range(d):
                for b in range(a + 1, d):
                    self.base_clauses.append([-vv[a], -vv[b]])
        for hc in w.hard_constraints:
            for t in sorted(hc.forbidden):
                self.base_clauses.append(
                    [-self.value_var[x][val] for x, val in zip(hc.scope, t)]
                )

        self.guarded_clauses: list[list[int]] = []
        for i, f in enumerate(w.cost_functions):
            level_index = {c: j for j, c in enumerate(f.levels)}
            for t in sorted(f.table):
                c = f.table[t]
                j = level_index.get(c)
                if j is None or j == 0:
                    continue  # hard-forbidden or minimum level: no guard
                self.guarded_clauses.append(
                    [-self.selector_var[i][j]]
                    + [-self.value_var[x][val] for x, val in zip(f.scope, t)]
                )

    @property
    def num_selectors(self) -> int:
        return sum(len(s) for s in self.selector_var)

    def assumptions_for(self, v: Sequence[int]) -> list[int]:
        """Selector literals asserting f_i <= v_i for every function."""
        out = []
        for i, f in enumerate(self.w.cost_functions):
            vi = v[i]
            for j in range(1, len(f.levels)):
                if f.levels[j] > vi:
                    out.append(self.selector_var[i][j])
        return out

    def decode(self, model_value: Callable[[int], bool]) -> tuple[int, ...]:
        """Read a CSP assignment off a propositional model."""
        out = []
        for x, d in enumerate(self.w.domains):
            chosen = [a for a in range(d) if model_value(self.value_var[x][a])]
            assert len(chosen) == 1, f"variable {x} holds {len(chosen)} values"
            out.append(chosen[0])
        return tuple(out)

    def dimacs_base(self) -> str:
        """Base clauses only, for cross-checking with external tools."""
        lines = [f"p cnf {self.num_vars} {len(self.base_clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.base_clauses]
        return "\n".join(lines) + "\n"


_BACKENDS: dict[str, Callable[[], SatBackend]] = {
    "cdcl": CdclSolver,
    "naive": NaiveSolver,
}


class SatOracle:
    """An Encoding loaded into a backend, answering vector queries.

    Not thread-safe; build one per worker. The backend keeps learned
    clauses between calls, which is the whole point of the selector
    scheme.
    """

    def __init__(self, w: Wcsp, backend: str | Callable[[], SatBackend] = "cdcl"):
        self.w = w
        self.encoding = Encoding(w)
        factory = _BACKENDS[backend] if isinstance(backend, str) else backend
        self.solver: SatBackend = factory()
        for _ in range(self.encoding.num_vars):
            self.solver.new_var()
        for c in self.encoding.base_clauses:
            self.solver.add_clause(c)
        for c in self.encoding.guarded_clauses:
            self.solver.add_clause(c)

    def _run(
        self,
        assumptions: list[int],
        conflict_budget: int | None,
        should_stop: Callable[[], bool] | None,
    ) -> OracleVerdict:
        res = self.solver.solve(
            assumptions, conflict_budget=conflict_budget, should_stop=should_stop
        )
        if res is None:
            raise BudgetExhausted(f"no verdict within {conflict_budget} conflicts")
        if not res:
            return OracleVerdict(False, None)
        return OracleVerdict(True, self.encoding.decode(self.solver.model_value))

    def solve_csp(
        self,
        conflict_budget: int | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> OracleVerdict:
        """Feasibility of the hard constraints alone (no cost bounds)."""
        return self._run([], conflict_budget, should_stop)

    def solve_under_vector(
        self,
        v: Sequence[int],
        conflict_budget: int | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> OracleVerdict:
        """SAT iff v is a solution vector of the instance."""
        v = self.w.validate_vector(v)
        verdict = self._run(
            self.encoding.assumptions_for(v), conflict_budget, should_stop
        )
        if verdict.satisfiable:
            ev = self.w.evaluate(verdict.witness)
            assert ev.feasible and all(
                c <= vi for c, vi in zip(ev.per_function, v)
            ), "witness does not respect the queried bounds"
        return verdict
