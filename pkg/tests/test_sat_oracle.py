import itertools

import pytest

from hswcsp import (
    BudgetExhausted,
    Encoding,
    SatOracle,
    SearchAborted,
    Wcsp,
    generate,
)
from hswcsp.bruteforce import vector_is_solution
from hswcsp.sat_oracle import NaiveSolver

BACKENDS = ("cdcl", "naive")


def test_encoding_shape(fig1):
    enc = Encoding(fig1)
    # 6 value booleans + 2 selectors per function
    assert enc.num_vars == 10
    assert enc.num_selectors == 4
    # per domain: one at-least-one clause plus one pairwise exclusion
    assert len(enc.base_clauses) == 6
    # per function: one guard per tuple costing a non-minimum level
    assert len(enc.guarded_clauses) == 6
    assert all(len(c) == 3 for c in enc.guarded_clauses)


def test_assumptions_for(fig1):
    enc = Encoding(fig1)
    assert len(enc.assumptions_for((0, 0))) == 4
    assert len(enc.assumptions_for((5, 5))) == 2
    assert enc.assumptions_for((20, 20)) == []
    assert len(enc.assumptions_for((5, 20))) == 1


def test_dimacs_header(fig1):
    text = Encoding(fig1).dimacs_base()
    assert text.startswith("p cnf 10 6\n")
    assert text.strip().split("\n")[1].endswith(" 0")


@pytest.mark.parametrize("backend", BACKENDS)
def test_solve_csp(fig1, infeasible, backend):
    assert SatOracle(fig1, backend).solve_csp().satisfiable
    verdict = SatOracle(infeasible, backend).solve_csp()
    assert not verdict.satisfiable and verdict.witness is None


@pytest.mark.parametrize("backend", BACKENDS)
def test_fig1_vectors_all_classified(fig1, backend):
    oracle = SatOracle(fig1, backend)
    for v in itertools.product((0, 5, 20), repeat=2):
        assert oracle.solve_under_vector(v).satisfiable == vector_is_solution(fig1, v)


def test_witness_respects_bounds(fig1):
    oracle = SatOracle(fig1)
    verdict = oracle.solve_under_vector((20, 5))
    ev = fig1.evaluate(verdict.witness)
    assert ev.feasible
    assert all(c <= b for c, b in zip(ev.per_function, (20, 5)))


def test_vector_validation_propagates(fig1):
    with pytest.raises(ValueError, match="not a level"):
        SatOracle(fig1).solve_under_vector((0, 7))


def test_budget_exhaustion(fig1):
    oracle = SatOracle(fig1)
    with pytest.raises(BudgetExhausted):
        oracle.solve_under_vector((0, 0), conflict_budget=0)
    # an easy satisfiable query needs no conflicts at all
    assert oracle.solve_under_vector((20, 20), conflict_budget=0).satisfiable
    # the naive backend counts no conflicts, so budgets cannot bite
    naive = SatOracle(fig1, "naive")
    assert not naive.solve_under_vector((0, 0), conflict_budget=0).satisfiable


@pytest.mark.parametrize("backend", BACKENDS)
def test_should_stop_aborts(fig1, backend):
    oracle = SatOracle(fig1, backend)
    with pytest.raises(SearchAborted):
        oracle.solve_under_vector((0, 0), should_stop=lambda: True)


def test_incremental_reuse_stays_correct(fig1):
    """Learned clauses from earlier queries must not leak into later ones."""
    oracle = SatOracle(fig1)
    seq = [(0, 0), (20, 20), (5, 5), (0, 20), (5, 0), (20, 0), (0, 0), (20, 20)]
    for v in seq:
        assert oracle.solve_under_vector(v).satisfiable == vector_is_solution(fig1, v)


def test_naive_solver_basics():
    s = NaiveSolver()
    a, b = s.new_var(), s.new_var()
    assert s.add_clause([a, b])
    assert s.add_clause([-a, b])
    assert s.solve()
    assert s.model_value(b)
    # tautologies are dropped, empty clause kills the instance
    assert s.add_clause([a, -a])
    assert not s.add_clause([])
    assert not s.solve()


def test_naive_solver_assumption_conflict():
    s = NaiveSolver()
    a = s.new_var()
    s.add_clause([a])
    assert s.solve([a])
    assert not s.solve([-a])
    assert not s.solve([a, -a])


def test_differential_small_corpus():
    """CDCL and naive verdicts against brute force over random probes."""
    checked = 0
    for seed in range(40):
        w = generate(
            seed=seed,
            num_vars=2 + seed % 3,
            max_dom=2 + seed % 2,
            num_funcs=1 + seed % 3,
            cost_range=6,
            hard_density=0.3 if seed % 2 else 0.0,
        )
        oracles = [SatOracle(w, b) for b in BACKENDS]
        spaces = [f.levels for f in w.cost_functions]
        vectors = list(itertools.product(*spaces))[:: max(1, seed % 3)]
        for v in vectors[:8]:
            expected = vector_is_solution(w, v)
            for oracle in oracles:
                assert oracle.solve_under_vector(v).satisfiable == expected
            checked += 1
    assert checked >= 150
