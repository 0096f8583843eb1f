"""Conditional mutual information: closed form, trace series, loop identity.

The reference route here is the entropy difference computed with raw
numpy inverses and log-determinants of the implied covariance; it
shares no code with the functions under test.
"""

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from pathcorr import (
    IndexOutOfRange,
    InfoResult,
    PartialCorrelationGraph,
    PathcorrError,
    QOutOfRange,
    SpectralRadiusTooLarge,
    TriPartition,
    conditional_mi_closed,
    conditional_mi_series,
    loop_sum_mi_identity,
    marginalize_nodes,
    partial_to_marginal_oracle,
    partial_to_precision,
    validate_partial_graph,
)
from pathcorr import gaussinfo
from pathcorr.gaussinfo import TERM_FLOOR

from conftest import complete_graph, scaled_random_graph


def chain_graph(d, r):
    w = np.zeros((d, d))
    for k in range(d - 1):
        w[k, k + 1] = w[k + 1, k] = r
    return validate_partial_graph(w)


def entropy_difference_oracle(g, part):
    """I(A; B | Z) from covariance log-determinants, raw numpy route."""
    sigma = np.linalg.inv(np.eye(g.dim) - g.weights)

    def h(nodes):
        if not nodes:
            return 0.0
        sub = sigma[np.ix_(list(nodes), list(nodes))]
        return float(np.linalg.slogdet(sub)[1])

    az = sorted(part.A + part.Z)
    bz = sorted(part.B + part.Z)
    return 0.5 * (h(az) + h(bz) - h(sorted(az + list(part.B))) - h(part.Z))


class TestTriPartition:
    def test_sorted_tuples(self):
        part = TriPartition(dim=5, A=(3, 0), B=(4, 1), Z=(2,))
        assert part.A == (0, 3) and part.B == (1, 4) and part.Z == (2,)

    def test_nonempty_sides_required(self):
        with pytest.raises(IndexOutOfRange):
            TriPartition(dim=3, A=(), B=(1,), Z=(0, 2))
        with pytest.raises(IndexOutOfRange):
            TriPartition(dim=3, A=(0,), B=(), Z=(1, 2))

    def test_disjointness_required(self):
        with pytest.raises(IndexOutOfRange):
            TriPartition(dim=3, A=(0, 1), B=(1, 2), Z=())
        with pytest.raises(IndexOutOfRange):
            TriPartition(dim=4, A=(0, 0), B=(1, 2), Z=(3,))

    def test_cover_required(self):
        with pytest.raises(IndexOutOfRange):
            TriPartition(dim=4, A=(0,), B=(1,), Z=())

    def test_range_checked(self):
        with pytest.raises(IndexOutOfRange):
            TriPartition(dim=3, A=(0,), B=(7,), Z=(1, 2))

    def test_complement_fills_z(self):
        part = TriPartition.complement(6, A=(0, 2), B=(5,))
        assert part.Z == (1, 3, 4)
        explicit = TriPartition(dim=6, A=(0, 2), B=(5,), Z=(1, 3, 4))
        assert part == explicit


class TestClosedForm:
    def test_two_node_literal(self):
        g = validate_partial_graph(np.array([[0.0, 0.3], [0.3, 0.0]]))
        res = conditional_mi_closed(g, TriPartition(dim=2, A=(0,), B=(1,)))
        assert res.nats == pytest.approx(0.04715533973562065, abs=1e-15)
        assert res.nats == pytest.approx(-0.5 * math.log(1.0 - 0.09), abs=1e-15)
        assert res.method == "closed"
        assert res.series_terms is None

    def test_against_entropy_difference(self):
        for seed in range(6):
            g = scaled_random_graph(70 + seed, 7, 0.8)
            for part in (
                TriPartition.complement(7, A=(0, 1), B=(4, 5, 6)),
                TriPartition.complement(7, A=(2,), B=(0, 3)),
                TriPartition(dim=7, A=(0, 1, 2), B=(3, 4, 5, 6)),
            ):
                assert conditional_mi_closed(g, part).nats == pytest.approx(
                    entropy_difference_oracle(g, part), abs=1e-10
                )

    def test_markov_chain_screens(self):
        g = chain_graph(3, 0.4)
        res = conditional_mi_closed(g, TriPartition(dim=3, A=(0,), B=(2,), Z=(1,)))
        assert abs(res.nats) < 1e-14

    def test_symmetry_in_arguments(self):
        g = scaled_random_graph(80, 6, 0.7)
        a = conditional_mi_closed(g, TriPartition.complement(6, A=(0, 1), B=(3, 4)))
        b = conditional_mi_closed(g, TriPartition.complement(6, A=(3, 4), B=(0, 1)))
        assert a.nats == pytest.approx(b.nats, abs=1e-12)

    def test_scale_free_through_precision_input(self):
        rng = np.random.default_rng(5)
        base = scaled_random_graph(81, 5, 0.7)
        g = PartialCorrelationGraph(base.weights, scale=rng.uniform(0.5, 3.0, 5))
        part = TriPartition.complement(5, A=(0, 2), B=(3,))
        from_graph = conditional_mi_closed(g, part).nats
        from_precision = conditional_mi_closed(partial_to_precision(g), part).nats
        assert from_graph == pytest.approx(from_precision, abs=1e-12)

    def test_raw_array_rejected(self):
        with pytest.raises(TypeError):
            conditional_mi_closed(np.eye(3), TriPartition(dim=3, A=(0,), B=(1, 2)))

    def test_dim_mismatch_rejected(self):
        g = chain_graph(3, 0.3)
        with pytest.raises(IndexOutOfRange):
            conditional_mi_closed(g, TriPartition(dim=4, A=(0,), B=(1, 2, 3)))

    def test_pair_mi_matches_marginal_correlation(self):
        # Integrating out the rest and applying the two-node formula
        # must agree with the direct pairwise information.
        g = scaled_random_graph(82, 6, 0.7)
        rho = partial_to_marginal_oracle(g).entries[1, 4]
        pair = marginalize_nodes(g, set(range(6)) - {1, 4})
        res = conditional_mi_closed(pair, TriPartition(dim=2, A=(0,), B=(1,)))
        assert res.nats == pytest.approx(-0.5 * math.log(1.0 - rho * rho), abs=1e-12)

    def test_works_in_rescale_required_regime(self):
        # nu(R) = 1.35 but T keeps spectrum inside the unit disc for
        # any positive definite system.
        g = complete_graph(4, -0.45)
        part = TriPartition(dim=4, A=(0, 1), B=(2, 3))
        closed = conditional_mi_closed(g, part).nats
        assert closed == pytest.approx(entropy_difference_oracle(g, part), abs=1e-10)
        series = conditional_mi_series(g, part).nats
        assert series == pytest.approx(closed, abs=1e-10)


class TestSeries:
    def test_matches_closed(self):
        for seed in range(6):
            g = scaled_random_graph(90 + seed, 6, 0.8)
            part = TriPartition.complement(6, A=(0, 1), B=(3, 4, 5))
            closed = conditional_mi_closed(g, part).nats
            res = conditional_mi_series(g, part)
            assert res.nats == pytest.approx(closed, abs=1e-10)
            assert res.method == "trace-series"

    def test_leading_term_is_half_trace(self):
        g = scaled_random_graph(95, 5, 0.6)
        part = TriPartition.complement(5, A=(0, 1), B=(2, 3, 4))
        a = [0, 1]
        b = [2, 3, 4]
        m_a = np.eye(2) - g.weights[np.ix_(a, a)]
        m_b = np.eye(3) - g.weights[np.ix_(b, b)]
        r_ab = g.weights[np.ix_(a, b)]
        t = np.linalg.inv(m_a) @ r_ab @ np.linalg.inv(m_b) @ r_ab.T
        res = conditional_mi_series(g, part)
        assert res.series_terms[0] == pytest.approx(np.trace(t) / 2.0, abs=1e-14)

    def test_early_stop_below_term_floor(self):
        g = chain_graph(4, 0.1)
        part = TriPartition.complement(4, A=(0,), B=(3,))
        res = conditional_mi_series(g, part, n_max=1000)
        assert len(res.series_terms) < 1000
        assert abs(res.series_terms[-1]) < TERM_FLOOR
        assert res.nats == pytest.approx(sum(res.series_terms), abs=1e-16)

    def test_truncation_bites_with_tiny_n_max(self):
        g = complete_graph(5, -0.3)
        part = TriPartition(dim=5, A=(0, 1), B=(2, 3, 4))
        closed = conditional_mi_closed(g, part).nats
        short = conditional_mi_series(g, part, n_max=2).nats
        full = conditional_mi_series(g, part).nats
        assert abs(short - closed) > 1e-6
        assert abs(full - closed) < 1e-10

    def test_rescaled_series_matches_closed(self):
        g = scaled_random_graph(96, 6, 0.8)
        part = TriPartition.complement(6, A=(0, 2), B=(1, 4, 5))
        closed = conditional_mi_closed(g, part).nats
        for q in (0.6, 1.0, 1.3):
            res = conditional_mi_series(g, part, q=q)
            assert res.nats == pytest.approx(closed, abs=1e-10), q

    def test_q_interval_enforced(self):
        g = scaled_random_graph(97, 5, 0.6)
        part = TriPartition.complement(5, A=(0,), B=(3, 4))
        for bad in (0.0, -0.5, 2.1):
            with pytest.raises(QOutOfRange):
                conditional_mi_series(g, part, q=bad)

    def test_n_max_validated(self):
        g = chain_graph(3, 0.3)
        part = TriPartition.complement(3, A=(0,), B=(2,))
        with pytest.raises(QOutOfRange):
            conditional_mi_series(g, part, n_max=0)

    def test_spectral_radius_guard(self, monkeypatch):
        # nu(T) < 1 holds for every valid system, so the guard only
        # fires on a doctored spectrum.
        g = chain_graph(3, 0.3)
        part = TriPartition.complement(3, A=(0,), B=(2,))
        monkeypatch.setattr(scipy.linalg, "eigh", lambda *a, **k: np.array([1.5]))
        with pytest.raises(SpectralRadiusTooLarge):
            conditional_mi_series(g, part)
        # A q inside the (shrunken) interval is still accepted.
        res = conditional_mi_series(g, part, q=0.5)
        assert res.nats == pytest.approx(
            conditional_mi_closed(g, part).nats, abs=1e-10
        )


class TestInfoResult:
    def test_small_negative_roundoff_tolerated(self):
        assert InfoResult(nats=-1e-13, method="closed").nats == -1e-13

    def test_below_floor_rejected(self):
        with pytest.raises(PathcorrError):
            InfoResult(nats=-1e-9, method="closed")


class TestLoopIdentity:
    def test_three_chain_by_hand(self):
        g = chain_graph(3, 0.4)
        loop, mi = loop_sum_mi_identity(g, 0, 2)
        assert loop == pytest.approx(0.16, abs=1e-14)
        assert mi == pytest.approx(-0.5 * math.log(1.0 - 0.16), abs=1e-14)

    def test_identity_on_random_graphs(self):
        for seed in range(5):
            g = scaled_random_graph(110 + seed, 6, 0.8)
            loop, mi = loop_sum_mi_identity(g, 2, 5)
            assert loop == pytest.approx(1.0 - math.exp(-2.0 * mi), abs=1e-10)

    def test_node_validation(self):
        g = chain_graph(4, 0.3)
        with pytest.raises(IndexOutOfRange):
            loop_sum_mi_identity(g, 1, 1)
        with pytest.raises(IndexOutOfRange):
            loop_sum_mi_identity(g, 0, 9)
        with pytest.raises(IndexOutOfRange):
            loop_sum_mi_identity(chain_graph(2, 0.3), 0, 1)

    def test_inconsistency_detected(self, monkeypatch):
        g = chain_graph(4, 0.3)
        monkeypatch.setattr(gaussinfo, "star_path_sum_closed", lambda *a, **k: 0.9)
        with pytest.raises(PathcorrError):
            loop_sum_mi_identity(g, 0, 3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_closed_and_series_agree_property(seed):
    g = scaled_random_graph(seed, 5, 0.7)
    part = TriPartition.complement(5, A=(0, 1), B=(3, 4))
    closed = conditional_mi_closed(g, part).nats
    series = conditional_mi_series(g, part).nats
    assert closed >= 0.0
    assert abs(closed - series) < 1e-9
