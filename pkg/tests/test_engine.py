import math

import pytest

import hswcsp.engine as engine_mod
from hswcsp import (
    INF,
    INFEASIBLE,
    OPTIMAL,
    TIMEOUT,
    CorePool,
    SatOracle,
    SolveResult,
    TraceRecorder,
    Wcsp,
    generate,
    hs_lb,
    hs_lub,
    hs_ub,
    optimal_cost,
    seed_disjoint_cores,
)

ALGS = [
    ("hs_lb", hs_lb),
    ("hs_ub", hs_ub),
    ("hs_lub", lambda w, **kw: hs_lub(w, deterministic=True, **kw)),
]


def shape(result) -> list[tuple[str, int, str]]:
    return [(e.kind, e.value, e.source) for e in result.trace]


# ---------------------------------------------------------------- golden runs


def test_hs_lb_fig1_trace(fig1):
    r = hs_lb(fig1)
    assert r.status == OPTIMAL and r.optimum == 20
    assert shape(r) == [
        ("UB", 25, "LB_WORKER"),   # SAT probe met while growing (0,0)
        ("CORE", 1, "LB_WORKER"),  # the unique maximal core (5,5)
        ("LB", 20, "LB_WORKER"),   # cost of the next optimal hitter
        ("UB", 20, "LB_WORKER"),   # that hitter probes SAT
        ("DONE", 20, "MAIN"),
    ]
    assert r.iterations == {"lb": 2}
    assert r.cores_used == 1
    assert fig1.evaluate(r.witness).total <= 20


def test_hs_ub_fig1_trace(fig1):
    r = hs_ub(fig1)
    assert r.status == OPTIMAL and r.optimum == 20
    assert shape(r) == [
        ("UB", 25, "UB_WORKER"),
        ("CORE", 1, "UB_WORKER"),
        ("UB", 20, "UB_WORKER"),
        ("LB", 20, "UB_WORKER"),  # nothing hits the pool below 20
        ("DONE", 20, "MAIN"),
    ]
    assert r.iterations == {"ub": 2}
    assert r.cores_used == 1


def test_hs_lub_deterministic_fig1_trace(fig1):
    r = hs_lub(fig1, deterministic=True)
    assert r.status == OPTIMAL and r.optimum == 20
    # round-robin: lb grows the core, ub reuses it before lb probes again
    assert shape(r) == [
        ("UB", 25, "LB_WORKER"),
        ("CORE", 1, "LB_WORKER"),
        ("UB", 20, "UB_WORKER"),
        ("LB", 20, "LB_WORKER"),
        ("DONE", 20, "MAIN"),
    ]
    assert r.iterations == {"lb": 1, "ub": 1}
    assert r.cores_used == 1


def test_single_sided_lub_matches_the_pure_loops(fig1):
    lb_only = hs_lub(fig1, lb_cores=1, ub_cores=0)
    assert shape(lb_only) == shape(hs_lb(fig1))
    assert lb_only.iterations == {"lb": 2}
    ub_only = hs_lub(fig1, lb_cores=0, ub_cores=1)
    assert shape(ub_only) == shape(hs_ub(fig1))
    assert ub_only.iterations == {"ub": 2}


def test_two_blocks_optimum(two_blocks):
    for _, alg in ALGS:
        r = alg(two_blocks)
        assert r.status == OPTIMAL and r.optimum == 8
        assert two_blocks.evaluate(r.witness).total == 8


@pytest.mark.parametrize("kwargs", [{"lb_cores": -1}, {"ub_cores": -2}, {"lb_cores": 0, "ub_cores": 0}])
def test_lub_capacity_validation(fig1, kwargs):
    with pytest.raises(ValueError):
        hs_lub(fig1, **kwargs)


# ---------------------------------------------------------------- termination


def test_zero_time_limit_times_out_clean(fig1):
    r = hs_lb(fig1, time_limit=0)
    assert r.status == TIMEOUT and r.optimum is None
    assert (r.lb, r.ub) == (0, INF)
    assert r.trace == () and r.iterations == {} and r.cores_used == 0
    assert r.witness is None


def test_zero_time_limit_keeps_preset_bounds(fig1):
    pool = CorePool()
    pool.raise_lb(3, "MAIN")
    pool.offer_ub(7, (0, 1, 1), "MAIN")
    r = hs_ub(fig1, pool=pool, time_limit=0)
    assert r.status == TIMEOUT
    assert (r.lb, r.ub) == (3, 7)
    assert r.witness == (0, 1, 1)


def test_warm_restart_is_instant(fig1):
    pool = CorePool()
    first = hs_lb(fig1, pool=pool)
    assert first.status == OPTIMAL
    again = hs_ub(fig1, pool=pool)
    assert again.status == OPTIMAL and again.optimum == 20
    assert again.iterations == {} and shape(again) == [("DONE", 20, "MAIN")]
    assert again.witness == first.witness


@pytest.mark.parametrize("name, alg", ALGS)
def test_infeasible_instance(infeasible, name, alg):
    r = alg(infeasible)
    assert r.status == INFEASIBLE and r.optimum is None
    assert (r.lb, r.ub) == (0, INF)
    assert r.trace == () and r.witness is None


def test_bogus_saturated_pool_reports_infeasible(fig1):
    # a pooled core at every maximum level claims even the loosest vector
    # fails; the solver takes the pool at its word
    for alg in (hs_lb, hs_ub):
        pool = CorePool()
        pool.add_core((20, 20), "MAIN")
        assert alg(fig1, pool=pool).status == INFEASIBLE


# ---------------------------------------------------------------- seeding


def test_seeding_fig1_closes_the_gap(fig1):
    pool = CorePool()
    assert seed_disjoint_cores(fig1, pool) == 1
    assert pool.cores == [(5, 5)]
    assert (pool.lb, pool.ub) == (20, 20)


def test_seeded_solve_needs_no_iterations(fig1):
    r = hs_lb(fig1, seed_disjoint=True)
    assert r.status == OPTIMAL and r.optimum == 20
    assert r.iterations == {"lb": 0}
    assert shape(r) == [
        ("UB", 25, "SEED"),
        ("CORE", 1, "SEED"),
        ("UB", 20, "SEED"),
        ("LB", 20, "SEED"),
        ("DONE", 20, "MAIN"),
    ]


def test_seeded_two_blocks_trace(two_blocks):
    r = hs_lb(two_blocks, seed_disjoint=True)
    assert r.status == OPTIMAL and r.optimum == 8
    assert shape(r) == [
        ("UB", 12, "SEED"),
        ("CORE", 1, "SEED"),
        ("CORE", 2, "SEED"),
        ("UB", 10, "SEED"),
        ("LB", 8, "SEED"),
        ("UB", 8, "LB_WORKER"),
        ("DONE", 8, "MAIN"),
    ]
    assert r.iterations == {"lb": 1}
    assert r.cores_used == 2


def test_seeding_stops_at_a_sat_first_probe():
    # one function: the all-minimum vector is always satisfiable
    w = Wcsp.build(1, [2], [((0,), {(0,): 0, (1,): 5})], top=10, name="one")
    pool = CorePool()
    assert seed_disjoint_cores(w, pool) == 0
    assert pool.cores == [] and pool.lb == 0 and pool.ub == 0


def test_seeded_hs_ub_raises_lb_only_through_seeding(two_blocks):
    r = hs_ub(two_blocks, seed_disjoint=True)
    assert r.status == OPTIMAL and r.optimum == 8
    lb_events = [e for e in r.trace if e.kind == "LB"]
    assert all(e.source == "SEED" for e in lb_events)


# ---------------------------------------------------------------- small exacts


def test_single_level_function():
    w = Wcsp.build(1, [2], [((0,), {(0,): 3, (1,): 3})], top=10, name="flat")
    r = hs_lb(w)
    assert r.status == OPTIMAL and r.optimum == 3
    assert shape(r) == [("LB", 3, "LB_WORKER"), ("UB", 3, "LB_WORKER"), ("DONE", 3, "MAIN")]
    assert r.iterations == {"lb": 1}
    r = hs_ub(w)
    assert r.status == OPTIMAL and r.optimum == 3
    assert shape(r) == [("UB", 3, "UB_WORKER"), ("LB", 3, "UB_WORKER"), ("DONE", 3, "MAIN")]


def test_trace_timestamps_and_bound_monotonicity(two_blocks):
    for _, alg in ALGS:
        r = alg(two_blocks, seed_disjoint=True)
        stamps = [e.elapsed_ms for e in r.trace]
        assert stamps == sorted(stamps)
        lbs = [e.value for e in r.trace if e.kind == "LB"]
        ubs = [e.value for e in r.trace if e.kind == "UB"]
        cores = [e.value for e in r.trace if e.kind == "CORE"]
        assert lbs == sorted(lbs) and all(a < b for a, b in zip(lbs, lbs[1:]))
        assert ubs == sorted(ubs, reverse=True) and all(a > b for a, b in zip(ubs, ubs[1:]))
        assert cores == list(range(1, len(cores) + 1))


def test_trace_callback_sees_every_event_in_order(fig1):
    seen = []
    r = hs_lb(fig1, trace=seen.append)
    assert seen == list(r.trace)


# ---------------------------------------------------------------- threading


def test_threaded_lub_agrees_across_interleavings():
    w = generate(seed=42, num_vars=8, max_dom=2, num_funcs=12, cost_range=8)
    expected = optimal_cost(w)
    for jitter in range(5):
        r = hs_lub(w, time_limit=30, jitter_seed=jitter)
        assert r.status == OPTIMAL and r.optimum == expected
        assert w.evaluate(r.witness).total == expected


def test_threaded_worker_crash_surfaces(fig1, monkeypatch):
    def boom(*args, **kwargs):
        raise ValueError("boom")

    monkeypatch.setattr(engine_mod, "maximal_core", boom)
    with pytest.raises(RuntimeError, match="worker died"):
        hs_lub(fig1, time_limit=10)


def test_sequential_worker_crash_propagates_raw(fig1, monkeypatch):
    def boom(*args, **kwargs):
        raise ValueError("boom")

    monkeypatch.setattr(engine_mod, "maximal_core", boom)
    with pytest.raises(ValueError, match="boom"):
        hs_lb(fig1)


# ---------------------------------------------------------------- components


def test_core_pool_bookkeeping():
    pool = CorePool()
    assert pool.bounds() == (0, INF)
    assert pool.add_core((5, 5), "MAIN") and pool.revision == 1
    assert not pool.add_core((5, 5), "MAIN")
    assert pool.revision == 1 and pool.cores == [(5, 5)]
    snap = pool.snapshot()
    snap.append((9, 9))
    assert pool.cores == [(5, 5)]

    assert not pool.raise_lb(0, "MAIN")
    assert pool.raise_lb(4, "MAIN") and not pool.raise_lb(4, "MAIN")
    assert not pool.raise_lb(3, "MAIN")
    assert pool.offer_ub(10, (0,), "MAIN")
    assert not pool.offer_ub(10, (1,), "MAIN")
    assert not pool.offer_ub(11, (1,), "MAIN")
    assert pool.offer_ub(8, (2,), "MAIN")
    assert pool.best_witness == (2,)
    assert pool.bounds() == (4, 8)


def test_pool_records_only_accepted_changes():
    recorder = TraceRecorder()
    pool = CorePool(recorder)
    pool.raise_lb(2, "MAIN")
    pool.raise_lb(2, "MAIN")
    pool.offer_ub(9, (0,), "MAIN")
    pool.offer_ub(9, (0,), "MAIN")
    pool.add_core((1, 1), "MAIN")
    pool.add_core((1, 1), "MAIN")
    assert [(e.kind, e.value) for e in recorder.events] == [
        ("LB", 2),
        ("UB", 9),
        ("CORE", 1),
    ]


def test_trace_recorder_forwards_in_order():
    seen = []
    recorder = TraceRecorder(sink=seen.append)
    recorder.record("LB", 1, "MAIN")
    recorder.record("UB", 9, "MAIN")
    assert seen == recorder.events
    assert recorder.events[0].elapsed_ms <= recorder.events[1].elapsed_ms


def test_solve_result_consistency_is_enforced():
    with pytest.raises(AssertionError):
        SolveResult(OPTIMAL, None, 3, 3, None, 0, {}, 0.0, ())
    with pytest.raises(AssertionError):
        SolveResult(TIMEOUT, 5, 3, 5, None, 0, {}, 0.0, ())
    ok = SolveResult(TIMEOUT, None, 3, math.inf, None, 0, {}, 0.0, ())
    assert ok.lb == 3
