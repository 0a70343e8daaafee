import pytest

from hswcsp import (
    INF,
    RecordingSink,
    SatOracle,
    SearchAborted,
    leq,
    maximal_core,
)
from hswcsp.bruteforce import classify_all_vectors, maximal_cores, vector_is_solution


@pytest.mark.parametrize("start", [(0, 0), (0, 5), (5, 0), (5, 5)])
def test_every_fig1_core_grows_to_the_unique_maximal_core(fig1, start):
    assert maximal_core(SatOracle(fig1), start) == (5, 5)


def test_growth_result_dominates_start(fig1):
    grown = maximal_core(SatOracle(fig1), (0, 5))
    assert leq((0, 5), grown)


def test_not_a_core_is_a_caller_bug(fig1):
    with pytest.raises(ValueError, match="not a core"):
        maximal_core(SatOracle(fig1), (0, 20))


def test_growth_offers_probe_vector_costs(fig1):
    """Growing (0,0): raises to (5,5), then probes (20,5) and (5,20).

    Both probes are SAT at vector cost 25, but only the first one beats
    the sink bound, so exactly one offer lands.
    """
    sink = RecordingSink()
    grown = maximal_core(SatOracle(fig1), (0, 0), sink=sink)
    assert grown == (5, 5)
    assert sink.ub == 25
    assert len(sink.offers) == 1
    value, witness = sink.offers[0]
    assert value == 25
    ev = fig1.evaluate(witness)
    assert ev.feasible
    # the witness satisfies the SAT probe (20, 5), componentwise
    assert leq(ev.per_function, (20, 5))
    assert ev.total <= value


def test_growth_respects_preexisting_bound(fig1):
    # with ub already at 20, the cost-25 probes are not worth reporting
    sink = RecordingSink(ub=20)
    assert maximal_core(SatOracle(fig1), (0, 0), sink=sink) == (5, 5)
    assert sink.offers == []
    assert sink.ub == 20 and sink.witness is None


def test_growth_without_sink(fig1):
    assert maximal_core(SatOracle(fig1), (0, 0), sink=None) == (5, 5)


def test_recording_sink_keeps_best():
    sink = RecordingSink()
    assert sink.ub == INF
    sink.offer_ub(30, (0,))
    sink.offer_ub(40, (1,))
    sink.offer_ub(25, (2,))
    assert sink.ub == 25 and sink.witness == (2,)
    assert [v for v, _ in sink.offers] == [30, 40, 25]


def test_stop_now_aborts(fig1):
    with pytest.raises(SearchAborted):
        maximal_core(SatOracle(fig1), (0, 0), should_stop=lambda: True)


def test_stop_between_probes_aborts(fig1):
    # two polls happen inside the initial oracle call; the third is the
    # growth loop's own check before the first raise probe
    calls = {"n": 0}

    def stop() -> bool:
        calls["n"] += 1
        return calls["n"] > 2

    with pytest.raises(SearchAborted, match="stopped during core growth"):
        maximal_core(SatOracle(fig1), (0, 0), should_stop=stop)


def test_grown_cores_are_maximal_on_random_instances(corpus):
    """Cross-check growth against enumeration on small instances."""
    checked = 0
    for w, _ in corpus[:60]:
        classification = classify_all_vectors(w)
        if not classification.cores:
            continue
        oracle = SatOracle(w)
        maximal = set(maximal_cores(w))
        start = classification.cores[0]
        grown = maximal_core(oracle, start)
        assert leq(start, grown)
        assert grown in maximal
        assert not vector_is_solution(w, grown)
        # no single-component raise may stay unsatisfiable
        for i, f in enumerate(w.cost_functions):
            j = f.levels.index(grown[i])
            if j + 1 < len(f.levels):
                probe = list(grown)
                probe[i] = f.levels[j + 1]
                assert vector_is_solution(w, probe)
        checked += 1
    assert checked >= 20
