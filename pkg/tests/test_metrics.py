import math

import numpy as np
import pytest

from conftest import SWEEP, sweep_ids
from fadekit.errors import InvalidParams, MetricEvaluationFailure, NegativeInput
from fadekit.metrics import (
    average_metric,
    convergence_gap,
    nakagami_capacity,
    nakagami_equiv_m,
    outage_probability,
    rician_pdf_gap,
    rician_shadowed_approx,
    shadowed_capacity,
)
from fadekit.model import ShadowedParams, build_mixture, cdf, pdf
from fadekit.oracle import nakagami_pdf, pdf_kappa_mu, quad_expect
from fadekit.special import exp_integral_e1

LOG2E = 1 / math.log(2)


def log2p1(x):
    return np.log1p(x) * LOG2E


def mix(*args):
    return build_mixture(ShadowedParams(*args))


class TestAverageMetric:
    @pytest.mark.parametrize("args", [(1, 5, 3, 2), (2, 1, 1, 6), (0.3, 0.5, 6, 1)])
    def test_constant_and_mean(self, args):
        model = mix(*args)
        assert average_metric(model, lambda g, m: 1.0) == pytest.approx(1, abs=1e-12)
        assert average_metric(model, lambda g, m: g) == pytest.approx(args[0], rel=1e-10)

    def test_capacity_matches_quadrature(self):
        model = mix(1, 5, 3, 2)
        ref = quad_expect(lambda x: pdf(model, x), log2p1, epsabs=0, epsrel=1e-12)
        assert average_metric(model, nakagami_capacity) == pytest.approx(ref, rel=1e-6)

    def test_component_mean_is_first_argument(self):
        # The lift must pass each component's mean, not scale / shape.
        model = mix(1, 5, 6, 2)
        ref = quad_expect(lambda x: pdf(model, x), log2p1, epsabs=0, epsrel=1e-12)
        wrong = math.fsum(c.weight * nakagami_capacity(c.scale / c.shape, int(c.shape))
                          for c in model.components)
        assert abs(wrong - ref) / ref > 1e-2
        assert average_metric(model, nakagami_capacity) == pytest.approx(ref, rel=1e-6)

    def test_lifts_any_gamma_metric(self):
        # E[e^{-g}] for Gamma(m, mean w) is (1 + w/m)^{-m}: the lift reproduces the MGF at -1.
        model = mix(1, 5, 3, 2)
        val = average_metric(model, lambda w, m: (1 + w / m) ** -m)
        assert val == pytest.approx(quad_expect(lambda x: pdf(model, x), lambda x: np.exp(-x)), rel=1e-9)

    def test_failure(self):
        model = mix(1, 5, 3, 2)
        with pytest.raises(MetricEvaluationFailure):
            average_metric(model, lambda g, m: math.inf)
        with pytest.raises(MetricEvaluationFailure):
            average_metric(model, lambda g, m: math.log(-1.0))


class TestNakagamiCapacity:
    def test_rayleigh(self):
        v = nakagami_capacity(1, 1)
        assert v == pytest.approx(math.e * exp_integral_e1(1.0) * LOG2E, rel=1e-14)
        ref = quad_expect(lambda x: np.exp(-x), log2p1, epsabs=0, epsrel=1e-12)
        assert v == pytest.approx(ref, rel=1e-10)
        assert v == pytest.approx(0.8603, abs=1e-4)

    def test_low_snr(self):
        g = 1e-6
        assert nakagami_capacity(g, 2) < g * LOG2E * 1.01

    @pytest.mark.parametrize("g,m", [(10, 4), (1, 2), (0.01, 7), (1000, 1), (3.3, 30)])
    def test_matches_quadrature(self, g, m):
        ref = quad_expect(lambda x: nakagami_pdf(g, m, x), log2p1, epsabs=0, epsrel=1e-12)
        assert nakagami_capacity(g, m) == pytest.approx(ref, rel=1e-6)

    def test_invalid(self):
        with pytest.raises(InvalidParams):
            nakagami_capacity(0, 1)
        with pytest.raises(InvalidParams):
            nakagami_capacity(1, 0)


class TestShadowedCapacity:
    def test_collapse(self):
        assert shadowed_capacity(mix(1, 3, 2, 2)) == pytest.approx(nakagami_capacity(1, 2), rel=1e-14)

    def test_identity_with_average_metric(self):
        model = mix(1, 5, 3, 2)
        assert shadowed_capacity(model) == average_metric(model, nakagami_capacity)

    @pytest.mark.parametrize("k,mu,m", SWEEP, ids=sweep_ids(SWEEP))
    def test_matches_quadrature(self, k, mu, m):
        model = mix(1, k, mu, m)
        ref = quad_expect(lambda x: pdf(model, x), log2p1, epsabs=0, epsrel=1e-12)
        assert shadowed_capacity(model) == pytest.approx(ref, rel=1e-6)

    def test_increasing_in_m_with_strong_los(self):
        caps = [shadowed_capacity(mix(10, 10, 3, m)) for m in (1, 3, 10)]
        assert caps[0] < caps[1] < caps[2]

    def test_m_barely_matters_with_weak_los(self):
        caps = [shadowed_capacity(mix(10, 1, 3, m)) for m in (1, 3, 10)]
        assert max(caps) - min(caps) < 0.1

    @pytest.mark.parametrize("k,mu,m", [(10, 3, 1), (1, 3, 10), (0.5, 6, 1), (5, 1, 6)])
    def test_monotone_and_below_awgn(self, k, mu, m):
        gbars = 10 ** (np.linspace(0, 40, 20) / 10)
        caps = [shadowed_capacity(mix(g, k, mu, m)) for g in gbars]
        assert all(np.diff(caps) > 0)
        assert all(c <= math.log2(1 + g) for c, g in zip(caps, gbars))


class TestOutage:
    def test_values(self):
        model = mix(1, 3, 2, 2)
        assert outage_probability(model, 0.0) == 0.0
        assert outage_probability(model, 1.0) == pytest.approx(1 - 3 * math.exp(-2), rel=1e-13)
        assert outage_probability(model, 50.0) >= 1 - 1e-10

    def test_negative(self):
        with pytest.raises(NegativeInput):
            outage_probability(mix(1, 3, 2, 2), -1.0)

    def test_monotone(self):
        ths = np.linspace(0, 5, 40)
        po = [outage_probability(mix(1, 5, 3, 2), t) for t in ths]
        assert all(np.diff(po) >= 0)
        by_snr = [outage_probability(mix(g, 5, 3, 2), 0.5) for g in (0.5, 1, 2, 4, 8)]
        assert all(np.diff(by_snr) < 0)


class TestRicianMaps:
    def test_equivalent_m(self):
        assert nakagami_equiv_m(3) == pytest.approx(16 / 7, rel=1e-15)
        assert nakagami_equiv_m(10) == pytest.approx(121 / 21, rel=1e-15)
        assert abs(nakagami_equiv_m(1e-9) - 1) < 1e-8
        with pytest.raises(InvalidParams):
            nakagami_equiv_m(0)

    def test_single_component_when_m_is_one(self):
        model = rician_shadowed_approx(3, 1, 1)
        assert len(model.components) == 1 and model.components[0].shape == 1

    def test_gap_improves_with_m(self):
        assert rician_pdf_gap(3, 20) < rician_pdf_gap(3, 5)

    def test_gap_grows_with_k(self):
        assert rician_pdf_gap(10, 20) > rician_pdf_gap(3, 20)

    @pytest.mark.parametrize("m", [1, 5, 20])
    def test_unit_diversity_order(self, m):
        model = rician_shadowed_approx(3, m, 1)
        slope = math.log(cdf(model, 1e-6) / cdf(model, 1e-7)) / math.log(10)
        assert abs(slope - 1) < 0.05


class TestConvergence:
    def test_gap_sequence(self):
        rep = convergence_gap(5, 3, 1, [2, 5, 20, 100, 500])
        assert rep.m_values == [2, 5, 20, 100, 500]
        assert all(np.diff(rep.sup_gaps) < 0)
        assert rep.sup_gaps[-1] < 0.01
        assert all(math.isfinite(g) for g in rep.sup_gaps)

    def test_kappa_floor_boundary(self):
        rep = convergence_gap(1e-3, 1, 1, [1, 2, 10])
        assert len(rep.sup_gaps) == 3

    def test_thread_setting_does_not_change_results(self, monkeypatch):
        monkeypatch.setenv("FADEKIT_THREADS", "1")
        a = convergence_gap(5, 3, 1, [2, 20])
        monkeypatch.setenv("FADEKIT_THREADS", "4")
        b = convergence_gap(5, 3, 1, [2, 20])
        assert a == b

    def test_bounded_test_function_expectations(self):
        phi = lambda x: 1 / (1 + x)
        ref = quad_expect(lambda x: pdf_kappa_mu(1, 5, 3, x), phi, epsabs=0, epsrel=1e-12)
        gaps = []
        for m in (2, 5, 20, 100, 500):
            model = mix(1, 5, 3, m)
            gaps.append(abs(quad_expect(lambda x: pdf(model, x), phi, epsabs=0, epsrel=1e-12) - ref))
        assert all(np.diff(gaps) < 0)
        assert gaps[-1] < 1e-3
