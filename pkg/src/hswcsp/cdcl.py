"""Conflict-driven clause learning SAT solver with assumption support.

Self-contained MiniSat-style core: two-watched-literal propagation,
first-UIP conflict analysis, VSIDS decisions with phase saving, Luby
restarts, and activity-based learned-clause reduction. Literals are signed
integers (variable ids start at 1). Assumptions are enqueued as decisions
on their own levels, so learned clauses stay valid across calls and the
solver can be reused incrementally with different assumption sets.

solve() returns True (model available), False (unsatisfiable under the
given assumptions), or None when the conflict budget ran out.
"""

from __future__ import annotations

from heapq import heapify, heappush, heappop
from typing import Callable, Iterable, Sequence

from .model import SearchAborted


class _Clause:
    __slots__ = ("lits", "act", "learnt")

    def __init__(self, lits: list[int], learnt: bool):
        self.lits = lits
        self.act = 0.0
        self.learnt = learnt

    def __repr__(self) -> str:  # debugging aid
        return f"Clause({self.lits})"


def _luby(x: int) -> int:
    # the reluctant-doubling sequence 1 1 2 1 1 2 4 ... at 0-based index x
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


class CdclSolver:
    RESTART_BASE = 100
    VAR_DECAY = 0.95
    CLA_DECAY = 0.999

    def __init__(self) -> None:
        self.nvars = 0
        self.ok = True
        self.clauses: list[_Clause] = []
        self.learned: list[_Clause] = []
        self.watches: dict[int, list[_Clause]] = {}
        self.assigns: list[int] = [0]  # 1 true, -1 false, 0 unassigned
        self.level: list[int] = [0]
        self.reason: list[_Clause | None] = [None]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity: list[float] = [0.0]
        self.polarity: list[int] = [-1]
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.order: list[tuple[float, int]] = []
        self.seen = bytearray(1)
        self.model: list[int] = []
        self.max_learnts = 4000.0

    # --- variables and clauses ---

    def new_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self.assigns.append(0)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.polarity.append(-1)
        self.seen.append(0)
        self.watches[v] = []
        self.watches[-v] = []
        heappush(self.order, (0.0, v))
        return v

    def _value(self, lit: int) -> int:
        return self.assigns[lit] if lit > 0 else -self.assigns[-lit]

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a problem clause; call before or between solves (at level 0).
        Returns False once the formula is known unsatisfiable."""
        if not self.ok:
            return False
        assert not self.trail_lim, "clauses must be added at decision level 0"
        out: list[int] = []
        for lit in sorted(set(lits), key=abs):
            assert 1 <= abs(lit) <= self.nvars, f"unknown variable in literal {lit}"
            if -lit in set(out):
                return True  # tautology
            if self._value(lit) == 1 and self.level[abs(lit)] == 0:
                return True  # already satisfied forever
            if self._value(lit) == -1 and self.level[abs(lit)] == 0:
                continue  # permanently false literal drops out
            out.append(lit)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        c = _Clause(out, learnt=False)
        self.clauses.append(c)
        self.watches[out[0]].append(c)
        self.watches[out[1]].append(c)
        return True

    # --- trail ---

    def _enqueue(self, lit: int, reason: _Clause | None) -> None:
        v = abs(lit)
        self.assigns[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _backtrack(self, target: int) -> None:
        if len(self.trail_lim) <= target:
            return  # keep qhead: level-0 enqueues may still await propagation
        while len(self.trail_lim) > target:
            bound = self.trail_lim.pop()
            for lit in self.trail[bound:]:
                v = abs(lit)
                self.polarity[v] = self.assigns[v]
                self.assigns[v] = 0
                self.reason[v] = None
                heappush(self.order, (-self.activity[v], v))
            del self.trail[bound:]
        self.qhead = min(self.qhead, len(self.trail))

    # --- propagation ---

    def _propagate(self) -> _Clause | None:
        trail = self.trail
        assigns = self.assigns
        watches = self.watches
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            ws = watches[-p]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                lits = c.lits
                if lits[0] == -p:
                    lits[0] = lits[1]
                    lits[1] = -p
                first = lits[0]
                v0 = assigns[first] if first > 0 else -assigns[-first]
                if v0 == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if (assigns[lk] if lk > 0 else -assigns[-lk]) != -1:
                        lits[1] = lk
                        lits[k] = -p
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if v0 == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        return c
                    self._enqueue(first, c)
            del ws[j:]
        return None

    # --- conflict analysis ---

    def _bump_var(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for x in range(1, self.nvars + 1):
                self.activity[x] *= 1e-100
            self.var_inc *= 1e-100
        heappush(self.order, (-self.activity[v], v))

    def _bump_clause(self, c: _Clause) -> None:
        c.act += self.cla_inc
        if c.act > 1e20:
            for d in self.learned:
                d.act *= 1e-20
            self.cla_inc *= 1e-20

    def _analyze(self, confl: _Clause) -> tuple[list[int], int]:
        """First-UIP learned clause and the level to backjump to."""
        seen = self.seen
        level = self.level
        reason = self.reason
        trail = self.trail
        cur_level = len(self.trail_lim)
        learnt: list[int] = [0]
        touched: list[int] = []
        counter = 0
        p = 0
        idx = len(trail) - 1
        c = confl
        while True:
            if c.learnt:
                self._bump_clause(c)
            for q in c.lits[1:] if p else c.lits:
                vq = abs(q)
                if not seen[vq] and level[vq] > 0:
                    seen[vq] = 1
                    touched.append(vq)
                    self._bump_var(vq)
                    if level[vq] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(trail[idx])]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            vp = abs(p)
            seen[vp] = 0
            counter -= 1
            if counter == 0:
                break
            c = reason[vp]
            assert c is not None
        learnt[0] = -p
        for v in touched:
            seen[v] = 0
        if len(learnt) == 1:
            bt = 0
        else:
            # move the highest-level remaining literal to position 1
            hi = 1
            for k in range(2, len(learnt)):
                if level[abs(learnt[k])] > level[abs(learnt[hi])]:
                    hi = k
            learnt[1], learnt[hi] = learnt[hi], learnt[1]
            bt = level[abs(learnt[1])]
        return learnt, bt

    # --- learned clause management ---

    def _locked(self, c: _Clause) -> bool:
        lit = c.lits[0]
        return self.reason[abs(lit)] is c and self._value(lit) == 1

    def _reduce_db(self) -> None:
        self.learned.sort(key=lambda c: c.act)
        keep: list[_Clause] = []
        drop = len(self.learned) // 2
        for pos, c in enumerate(self.learned):
            if pos < drop and len(c.lits) > 2 and not self._locked(c):
                self.watches[c.lits[0]].remove(c)
                self.watches[c.lits[1]].remove(c)
            else:
                keep.append(c)
        self.learned = keep
        self.max_learnts *= 1.3

    # --- decisions ---

    def _pick_var(self) -> int | None:
        order = self.order
        assigns = self.assigns
        while order:
            _, v = heappop(order)
            if assigns[v] == 0:
                return v
        return None

    # --- main loop ---

    def solve(
        self,
        assumptions: Sequence[int] = (),
        conflict_budget: int | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> bool | None:
        if not self.ok:
            return False
        self._backtrack(0)
        # fresh heap per call; lazy duplicates would otherwise pile up
        self.order = [
            (-self.activity[v], v)
            for v in range(1, self.nvars + 1)
            if self.assigns[v] == 0
        ]
        heapify(self.order)
        conflicts = 0
        since_restart = 0
        restart_idx = 0
        limit = _luby(0) * self.RESTART_BASE
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                since_restart += 1
                if should_stop is not None and should_stop():
                    self._backtrack(0)
                    raise SearchAborted("sat search interrupted")
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, bt = self._analyze(confl)
                self._backtrack(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    c = _Clause(learnt, learnt=True)
                    c.act = self.cla_inc
                    self.learned.append(c)
                    self.watches[learnt[0]].append(c)
                    self.watches[learnt[1]].append(c)
                    self._enqueue(learnt[0], c)
                self.var_inc /= self.VAR_DECAY
                self.cla_inc /= self.CLA_DECAY
                if conflict_budget is not None and conflicts >= conflict_budget:
                    self._backtrack(0)
                    return None
                continue
            if since_restart >= limit:
                since_restart = 0
                restart_idx += 1
                limit = _luby(restart_idx) * self.RESTART_BASE
                self._backtrack(0)
                continue
            if len(self.learned) >= self.max_learnts + len(self.trail):
                self._reduce_db()
            lvl = len(self.trail_lim)
            if lvl < len(assumptions):
                p = assumptions[lvl]
                assert 1 <= abs(p) <= self.nvars, f"unknown assumption literal {p}"
                vp = self._value(p)
                if vp == 1:
                    self.trail_lim.append(len(self.trail))
                    continue
                if vp == -1:
                    self._backtrack(0)
                    return False
                self.trail_lim.append(len(self.trail))
                self._enqueue(p, None)
                continue
            v = self._pick_var()
            if v is None:
                self.model = list(self.assigns)
                self._backtrack(0)
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(v if self.polarity[v] > 0 else -v, None)

    def model_value(self, var: int) -> bool:
        return self.model[var] == 1
