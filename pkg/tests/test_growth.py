import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klmcluster.graphstate import ClusterGraph
from klmcluster.growth import (CZOutcome, GateModel, GrowthError, GrowthState, GrowthStats, alternating_attempts_per_site,
                               alternating_successes_per_site, attempt_add_double_bond, attempt_add_single_bond,
                               attempt_add_site, attempt_cz, check_build_order, cz_outcome_probabilities,
                               expected_gain, frontier_schedule, grow_alternating, grow_cluster, ladder,
                               ratio_estimate, resource_report, run_trials, sample_gains)
from klmcluster.mbqc import CircuitIR, UGate, example_circuit
from klmcluster.rng import RngStream

N1, N2 = GateModel(1), GateModel(2)


def test_gate_model_rationals():
    assert N2.p_teleport == Fraction(2, 3) and N2.p_gate == Fraction(4, 9)
    assert N1.p_gate == Fraction(1, 4)
    for m in (N1, N2, GateModel(5)):
        assert m.p_gate == m.p_teleport**2
    assert (N1.cost.beamsplitters, N1.cost.photodetectors, N1.cost.single_photon_preps) == (8, 4, 4)
    assert (N2.cost.beamsplitters, N2.cost.photodetectors, N2.cost.single_photon_preps) == (70, 30, 12)
    assert N2.cost.upper_bound and not N1.cost.upper_bound
    assert N2.destructive_gate_probability == Fraction(2, 27)
    with pytest.raises(GrowthError):
        GateModel(0)


def test_cz_branch_probabilities():
    assert cz_outcome_probabilities(N2, 1)[CZOutcome.SUCCESS] == Fraction(2, 3)
    assert cz_outcome_probabilities(N2, 2)[CZOutcome.SUCCESS] == Fraction(4, 9)
    probs = cz_outcome_probabilities(N1, 2)
    assert probs == {CZOutcome.SUCCESS: Fraction(1, 4), CZOutcome.FAIL_FIRST: Fraction(1, 2),
                     CZOutcome.FAIL_SECOND: Fraction(1, 4)}
    for m in (N1, N2):
        for k in (1, 2):
            assert sum(cz_outcome_probabilities(m, k).values()) == 1
    with pytest.raises(GrowthError):
        cz_outcome_probabilities(N1, 3)


def test_attempt_cz_frequencies():
    rng = RngStream(12)
    draws = [attempt_cz(N1, rng, 2) for _ in range(40_000)]
    for outcome, p in cz_outcome_probabilities(N1, 2).items():
        freq = draws.count(outcome) / len(draws)
        assert abs(freq - float(p)) < 4 * math.sqrt(float(p * (1 - p)) / len(draws))


def test_expected_gain_values():
    assert expected_gain(N2, "single") == Fraction(1, 3)
    assert expected_gain(N2, "double") == Fraction(-1, 9)
    assert expected_gain(N2, "single") + expected_gain(N2, "double") == Fraction(2, 9)
    assert expected_gain(N1, "single") == 0
    assert expected_gain(N1, "double") == Fraction(-1, 2)
    assert alternating_attempts_per_site(N2) == 9
    assert alternating_successes_per_site(N2) == 8
    assert alternating_attempts_per_site(N1) is None


def test_forced_single_bond_success():
    st_ = GrowthState.seeded([0])
    rng = RngStream(0)
    while True:
        gain, _ = attempt_add_site(st_, [max(st_.cluster.nodes)], GateModel(10**6), rng)
        if gain > 0:
            break
    assert len(st_.cluster) == 2 and st_.cluster.num_edges() == 1


def test_double_bond_abort_keeps_first_target():
    # p close to 0 forces the first gate to fail: A is removed, B untouched
    st_ = GrowthState.seeded([0, 1])
    attempt_add_double_bond(st_, 0, 1, N2, _FixedRng([0.99, 0.3]))
    assert st_.cluster.nodes == [1]
    # first succeeds, second fails: B removed, A stays with at most a Z correction
    st_ = GrowthState.seeded([0, 1])
    attempt_add_double_bond(st_, 0, 1, N2, _FixedRng([0.1, 0.99, 0.2, 0.7]))
    assert st_.cluster.nodes == [0]
    assert st_.corrections.get(0)[0] == 0
    assert st_.counters.gate_attempts == 2 and st_.counters.gate_successes == 1
    with pytest.raises(GrowthError):
        attempt_add_double_bond(st_, 0, 0, N2, RngStream(1))
    with pytest.raises(GrowthError):
        attempt_add_single_bond(st_, 42, N2, RngStream(1))


class _FixedRng:
    def __init__(self, values):
        self.values = list(values)

    def uniform(self):
        return self.values.pop(0)

    def bit(self):
        return 1 if self.uniform() < 0.5 else 0


@given(st.integers(0, 2**32), st.integers(2, 40), st.sampled_from([1, 2]))
@settings(max_examples=40, deadline=None)
def test_conservation_and_counters(seed, sites, n):
    tr = grow_alternating(sites, GateModel(n), RngStream(seed), max_attempts=400, record=True, keep_graph=True)
    c = tr.counters
    assert c.nodes_added - c.nodes_removed == tr.final_size - tr.initial_size
    assert len(tr.cluster) == tr.final_size
    assert c.gate_successes <= c.gate_attempts
    # every site attempt adds or removes exactly one node
    steps = [e for e in tr.events if e[0] in ("add", "fail")]
    assert len(steps) == c.site_attempts
    if tr.completed:
        assert tr.final_size >= sites


def test_growth_is_deterministic():
    a = grow_alternating(60, N2, RngStream(77), record=True)
    b = grow_alternating(60, N2, RngStream(77), record=True)
    assert a.events == b.events
    c = grow_alternating(60, N2, RngStream(78), record=True)
    assert a.events != c.events


def test_sample_gain_means():
    for bonds, expected in ((1, 1 / 3), (2, -1 / 9)):
        g = sample_gains(N2, bonds, 100_000, RngStream(bonds))
        se = g.std(ddof=1) / math.sqrt(len(g))
        assert abs(g.mean() - expected) < 3 * se
    g = sample_gains(N2, (1, 2), 100_000, RngStream(9)).astype(float)
    pairs = g[0::2] + g[1::2]
    assert abs(pairs.mean() - 2 / 9) < 3 * pairs.std(ddof=1) / math.sqrt(len(pairs))


def test_alternating_attempts_near_nine():
    traces = run_trials(lambda r: grow_alternating(50, N2, r), 1500, RngStream(3))
    st_ = GrowthStats.from_traces(traces, 50)
    assert st_.completed == 1500
    assert st_.attempts_per_site.within(9, 4)
    assert st_.successes_per_site.within(8, 4)


def test_build_order_checks():
    check_build_order(ClusterGraph.cycle(3), [0, 1, 2])
    g, order = ladder(4)
    check_build_order(g, order)
    k4 = ClusterGraph.from_edges([(a, b) for a in range(4) for b in range(a + 1, 4)])
    with pytest.raises(GrowthError):
        check_build_order(k4, [0, 1, 2, 3])
    with pytest.raises(GrowthError):
        grow_cluster(k4, N2, RngStream(1))
    with pytest.raises(GrowthError):
        grow_cluster(ClusterGraph.from_edges([], nodes=[0, 1]), N2, RngStream(1))


def test_grow_cluster_single_node_is_free():
    tr = grow_cluster(ClusterGraph.from_edges([], nodes=[5]), N2, RngStream(1))
    assert tr.completed and tr.counters.site_attempts == 0


def test_grow_cluster_builds_exact_target():
    g, order = ladder(5)
    tr = grow_cluster(g, N2, RngStream(4), order)
    assert tr.completed and tr.cluster == g


def test_chain_costs_three_attempts_per_site():
    traces = run_trials(lambda r: grow_cluster(ClusterGraph.path(10), N2, r), 3000, RngStream(6))
    est = ratio_estimate(np.array([t.counters.site_attempts for t in traces]),
                         np.array([t.gate_grown_sites for t in traces]))
    assert est.within(3, 4)


def test_ratio_estimate_standard_error():
    num = np.array([1.0, 2.0, 3.0, 4.0])
    den = np.ones(4)
    est = ratio_estimate(num, den)
    assert est.value == pytest.approx(2.5)
    assert est.stderr == pytest.approx(num.std(ddof=1) / 2)


def test_resource_report_n2():
    rep = resource_report(example_circuit(), N2, 400, RngStream(2), label_trials=20)
    assert rep.viable and rep.layout_nodes == 10
    assert rep.logical_gates == 5 and rep.entangling_gates == 1
    assert rep.analytic_successes_per_site == 8
    assert rep.label_exact_attempts_per_site is not None
    names = [r[0] for r in rep.rows()]
    assert "quoted_successes_per_logical_gate" in names and "quoted_successes_per_entangling_gate" in names
    text = rep.to_text()
    assert "24" in text and "NOT VIABLE" not in text


def test_resource_report_flags_n1():
    rep = resource_report(example_circuit(), N1, 50, RngStream(2))
    assert not rep.viable
    assert "NOT VIABLE" in rep.to_text()
    assert rep.completed < 50


def _deep(depth, breadth=2):
    return CircuitIR(breadth, [[UGate(q, 0.1, 0.2) for q in range(breadth)] for _ in range(depth)])


def test_frontier_depth_one_fits_window():
    rep = frontier_schedule(_deep(1, 3), N2, 100, RngStream(1))
    assert rep.peak_live <= 3 * 3
    assert rep.starvation_rate == 0


def test_frontier_full_slack_grows_everything():
    rep = frontier_schedule(_deep(16), N2, 50, RngStream(1), slack=16)
    assert rep.starvation_rate == 0
    assert rep.peak_live == rep.total_nodes


def test_frontier_window_is_logarithmic():
    rep = frontier_schedule(_deep(64), N2, 50, RngStream(2))
    assert rep.slack == math.ceil(2 * math.log2(65))
    assert rep.peak_live <= rep.window_nodes + 2 < rep.total_nodes


def test_frontier_rejects_n1():
    with pytest.raises(GrowthError):
        frontier_schedule(_deep(4), N1, 5, RngStream(1))
