"""Performance metrics built on the Gamma-mixture representation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import InvalidParams, MetricEvaluationFailure, NegativeInput
from .model import MixtureModel, ShadowedParams, build_mixture, cdf, pdf
from .oracle import pdf_kappa_mu, quad_cdf_grid
from .special import Neumaier, scaled_upper_gamma_table

LOG2E = 1.0 / math.log(2.0)
GRID_POINTS = 2001

NakagamiMetricFn = Callable[[float, int], float]


@dataclass(frozen=True)
class ConvergenceReport:
    m_values: list = field(default_factory=list)
    sup_gaps: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.m_values) != len(self.sup_gaps):
            raise ValueError("m_values and sup_gaps must have equal length")


def average_metric(model: MixtureModel, h: NakagamiMetricFn) -> float:
    """Lift a Nakagami-m metric to the mixture: sum_i C_i h(mean_i, shape_i).

    Terms are accumulated in decreasing |C_i| with compensated summation so
    that signed (improper) weights cancel as cleanly as possible.
    """
    order = sorted(model.components, key=lambda c: -abs(c.weight))
    acc = Neumaier()
    for comp in order:
        try:
            v = float(h(comp.mean, int(comp.shape)))
        except (ArithmeticError, ValueError) as exc:
            raise MetricEvaluationFailure(
                f"metric failed at mean={comp.mean}, shape={comp.shape}: {exc}"
            ) from exc
        if not math.isfinite(v):
            raise MetricEvaluationFailure(
                f"metric not finite at mean={comp.mean}, shape={comp.shape}"
            )
        acc.add(comp.weight * v)
    return acc.value


def nakagami_capacity(gamma_bar: float, m_hat: int) -> float:
    """Ergodic capacity E[log2(1+g)] (bps/Hz) of Gamma(m_hat, mean gamma_bar)."""
    if not (gamma_bar > 0 and math.isfinite(gamma_bar)):
        raise InvalidParams(f"gamma_bar must be finite and > 0, got {gamma_bar}")
    if isinstance(m_hat, bool) or int(m_hat) != m_hat or m_hat < 1:
        raise InvalidParams(f"m_hat must be a positive integer, got {m_hat}")
    m_hat = int(m_hat)
    x = m_hat / gamma_bar
    # G_k(x) x^k = H_k / x with H_k = x^{k+1} e^x Gamma(-k, x); all terms positive.
    h = scaled_upper_gamma_table(m_hat - 1, x)
    return LOG2E * math.fsum(h) / x


def shadowed_capacity(model: MixtureModel) -> float:
    return average_metric(model, nakagami_capacity)


def outage_probability(model: MixtureModel, gamma_th: float) -> float:
    if gamma_th < 0:
        raise NegativeInput("gamma_th must be >= 0")
    return float(cdf(model, float(gamma_th)))


def nakagami_equiv_m(K: float) -> float:
    """Nakagami m matching the Rician amount of fading for factor K."""
    if not K > 0:
        raise InvalidParams("K must be > 0")
    return (1 + K) ** 2 / (1 + 2 * K)


def rician_shadowed_approx(K: float, m: int, gamma_bar: float) -> MixtureModel:
    """Rician shadowed model (mu = 1) whose mixture approximates Rician for large m."""
    return build_mixture(ShadowedParams(gamma_bar, K, 1, m))


def rician_pdf_gap(K: float, m: int, gamma_bar: float = 1.0, points: int = GRID_POINTS) -> float:
    """sup |f_approx - f_Rician| on a uniform grid over [0, 10 gamma_bar]."""
    xs = np.linspace(0.0, 10.0 * gamma_bar, points)
    approx = pdf(rician_shadowed_approx(K, m, gamma_bar), xs)
    exact = pdf_kappa_mu(gamma_bar, K, 1.0, xs)
    return float(np.max(np.abs(approx - exact)))


def convergence_grid(gamma_bar: float) -> np.ndarray:
    return np.geomspace(1e-6 * gamma_bar, 50.0 * gamma_bar, GRID_POINTS)


def convergence_gap(kappa: float, mu: int, gamma_bar: float,
                    m_list: Sequence[int]) -> ConvergenceReport:
    """Sup-norm CDF distance to the kappa-mu limit for each m in m_list."""
    xs = convergence_grid(gamma_bar)
    f_km = quad_cdf_grid(lambda x: pdf_kappa_mu(gamma_bar, kappa, mu, x), xs)

    def gap(m):
        model = build_mixture(ShadowedParams(gamma_bar, kappa, mu, int(m)))
        return float(np.max(np.abs(cdf(model, xs) - f_km)))

    m_values = [int(m) for m in m_list]
    return ConvergenceReport(m_values=m_values, sup_gaps=ordered_map(gap, m_values))
