"""Independent reference evaluators used to validate the mixture path.

Densities are evaluated straight from their hypergeometric / Bessel forms for
arbitrary real parameters, and integrals come from an adaptive 7/15-point
Gauss-Kronrod scheme.  Nothing in this module touches ``fadekit.model``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParams, NegativeInput, QuadratureFailure
from .special import log_bessel_i, log_bessel_i_array, log_kummer_1f1

SUBDIVISION_LIMIT = 10_000

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (positive half).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes, ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[9, 11, 13]] = _WG[2::-1]
_WG15[7] = _WG[3]


@dataclass(frozen=True)
class RealShadowedParams:
    gamma_bar: float
    kappa: float
    mu: float
    m: float

    def __post_init__(self):
        for name in ("gamma_bar", "kappa", "mu", "m"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be finite and > 0, got {v}")
            object.__setattr__(self, name, v)


def _map_scalar(fn, x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise NegativeInput("x must be >= 0")
    if arr.ndim == 0:
        return fn(float(arr))
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------


def pdf_direct(p: RealShadowedParams, x):
    """kappa-mu shadowed density from its 1F1 closed form, any real mu, m > 0."""
    g, k, mu, m = p.gamma_bar, p.kappa, p.mu, p.m
    log_const = (
        mu * math.log(mu) + m * math.log(m) + mu * math.log1p(k)
        - math.lgamma(mu) - m * math.log(mu * k + m) - math.log(g)
    )
    zfac = mu * mu * k * (1 + k) / ((mu * k + m) * g)

    def one(xv):
        if xv == 0.0:
            if mu > 1:
                return 0.0
            return math.exp(log_const) if mu == 1 else math.inf
        lf = (
            log_const + (mu - 1) * math.log(xv / g) - mu * (1 + k) * xv / g
            + log_kummer_1f1(m, mu, zfac * xv)
        )
        return math.exp(lf)

    return _map_scalar(one, x)


def pdf_kappa_mu(gamma_bar: float, kappa: float, mu: float, x):
    """kappa-mu density (deterministic LOS), via the scaled Bessel series."""
    if gamma_bar <= 0 or kappa <= 0 or mu <= 0:
        raise InvalidParams("gamma_bar, kappa and mu must be > 0")
    nu = mu - 1.0
    log_const = (
        math.log(mu) + (mu + 1) / 2 * math.log1p(kappa) - math.log(gamma_bar)
        - nu / 2 * math.log(kappa) - mu * kappa
    )
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise NegativeInput("x must be >= 0")
    zfac = 2 * mu * math.sqrt(kappa * (1 + kappa) / gamma_bar)
    if arr.ndim == 0:
        xv = float(arr)
        if xv == 0.0:
            if mu > 1:
                return 0.0
            # (x/g)^{nu/2} I_nu(z) -> (kappa(1+kappa))^{nu/2} mu^nu / Gamma(mu)
            if mu == 1:
                return math.exp(log_const)
            return math.inf
        z = zfac * math.sqrt(xv)
        return math.exp(
            log_const + nu / 2 * math.log(xv / gamma_bar) - mu * (1 + kappa) * xv / gamma_bar
            + log_bessel_i(nu, z)
        )
    flat = arr.ravel()
    out = np.empty_like(flat)
    pos = flat > 0
    xp = flat[pos]
    out[pos] = np.exp(
        log_const + nu / 2 * np.log(xp / gamma_bar) - mu * (1 + kappa) * xp / gamma_bar
        + log_bessel_i_array(nu, zfac * np.sqrt(xp))
    )
    out[~pos] = 0.0 if mu > 1 else (math.exp(log_const) if mu == 1 else math.inf)
    return out.reshape(arr.shape)


def _check_mhat(m_hat):
    if isinstance(m_hat, bool) or int(m_hat) != m_hat or m_hat < 1:
        raise InvalidParams(f"m_hat must be a positive integer, got {m_hat}")
    return int(m_hat)


def nakagami_pdf(gamma_bar: float, m_hat: int, x):
    """Squared-Nakagami (Gamma, shape m_hat, mean gamma_bar) density."""
    m_hat = _check_mhat(m_hat)
    if gamma_bar <= 0:
        raise InvalidParams("gamma_bar must be > 0")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise NegativeInput("x must be >= 0")
    rate = m_hat / gamma_bar
    with np.errstate(divide="ignore"):
        lg = m_hat * math.log(rate) + (m_hat - 1) * np.log(arr) - rate * arr - math.lgamma(m_hat)
    if m_hat == 1:
        lg = np.where(arr == 0, math.log(rate), lg)
    out = np.exp(lg)
    return float(out) if arr.ndim == 0 else out


def nakagami_cdf(gamma_bar: float, m_hat: int, x):
    """1 - e^{-x/D} sum_{r<m_hat} (x/D)^r / r!, D = gamma_bar / m_hat."""
    m_hat = _check_mhat(m_hat)
    if gamma_bar <= 0:
        raise InvalidParams("gamma_bar must be > 0")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise NegativeInput("x must be >= 0")
    y = arr * m_hat / gamma_bar
    term = np.exp(-y)
    acc = term.copy()
    for r in range(1, m_hat):
        term = term * y / r
        acc = acc + term
    out = np.clip(1.0 - acc, 0.0, 1.0)
    return float(out) if arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _gk15(f, a: np.ndarray, b: np.ndarray):
    """Kronrod estimate and |K15 - G7| on each interval [a_i, b_i]."""
    c = (a + b) / 2
    h = (b - a) / 2
    nodes = c[:, None] + h[:, None] * _NODES[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise QuadratureFailure("integrand is not finite on the integration interval")
    k = h * (vals @ _WK)
    g = h * (vals @ _WG15)
    return k, np.abs(k - g)


def truncation_point(shape: float, scale: float) -> float:
    """Upper limit leaving < 1e-14 of a Gamma(shape, scale) envelope's mass."""
    return scale * (shape + 40.0 + 10.0 * math.log(shape + 1.0))


def integrate(f: Callable, a: float, b: float, epsabs: float = 1e-10, epsrel: float = 1e-9,
              limit: int = SUBDIVISION_LIMIT) -> tuple[float, float]:
    """Globally adaptive G7/K15 quadrature of a vectorised integrand on [a, b].

    b may be ``inf``; the half line is then mapped onto [0, 1) with
    x = a + t / (1 - t).  Returns (value, error estimate).
    """
    if b == a:
        return 0.0, 0.0
    if math.isinf(b):
        def g(t):
            t = np.asarray(t)
            one_m = 1.0 - t
            return f(a + t / one_m) / one_m ** 2
        return integrate(g, 0.0, 1.0, epsabs, epsrel, limit)
    k, e = _gk15(f, np.array([a]), np.array([b]))
    heap = [(-e[0], a, b, k[0])]
    total, err = k[0], e[0]
    n = 1
    while err > max(epsabs, epsrel * abs(total)):
        if n >= limit:
            raise QuadratureFailure(
                f"tolerance not met after {limit} subdivisions (err {err:.2e})"
            )
        # Split the worst few intervals at once to keep integrand calls batched.
        batch = [heapq.heappop(heap) for _ in range(min(len(heap), 8))]
        lo = np.array([iv[1] for iv in batch])
        hi = np.array([iv[2] for iv in batch])
        mid = (lo + hi) / 2
        kk, ee = _gk15(f, np.concatenate([lo, mid]), np.concatenate([mid, hi]))
        nb = len(batch)
        for i, (ne, ia, ib, ik) in enumerate(batch):
            total += kk[i] + kk[nb + i] - ik
            err += ee[i] + ee[nb + i] + ne
            heapq.heappush(heap, (-ee[i], ia, mid[i], kk[i]))
            heapq.heappush(heap, (-ee[nb + i], mid[i], ib, kk[nb + i]))
        n += nb
        # Re-sum the error so that cancellation in the running total cannot drift.
        if n % 256 < nb:
            err = -sum(iv[0] for iv in heap)
    return float(total), float(err)


def quad_cdf(pdf_fn: Callable, x: float, epsabs: float = 1e-10, epsrel: float = 1e-9) -> float:
    """CDF at x by adaptive quadrature of pdf_fn over [0, x]."""
    if x < 0:
        raise NegativeInput("x must be >= 0")
    return integrate(pdf_fn, 0.0, float(x), epsabs, epsrel)[0]


def quad_cdf_grid(pdf_fn: Callable, xs, epsrel: float = 1e-12, epsabs: float = 0.0,
                  limit: int = SUBDIVISION_LIMIT) -> np.ndarray:
    """CDF on a sorted grid by cumulative segment-wise quadrature.

    Each segment [x_{i-1}, x_i] (starting from 0) must meet
    max(epsabs, epsrel |I_i|) on its own, so relative accuracy carries into
    the far lower tail where the CDF is tiny.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or np.any(np.diff(xs) < 0):
        raise ValueError("xs must be a sorted 1-D grid")
    if xs.size and xs[0] < 0:
        raise NegativeInput("x must be >= 0")
    edges = np.concatenate([[0.0], xs])
    seg_id = np.arange(xs.size)
    lo, hi = edges[:-1], edges[1:]
    keep = hi > lo
    seg_id, lo, hi = seg_id[keep], lo[keep], hi[keep]
    pieces = np.zeros(xs.size)
    used = 0
    while lo.size:
        used += lo.size
        if used > limit * max(1, xs.size):
            raise QuadratureFailure("segment quadrature exceeded its subdivision budget")
        k, e = _gk15(pdf_fn, lo, hi)
        ok = e <= np.maximum(epsabs, epsrel * np.abs(k))
        # Accept pieces far below the running scale of their segment too.
        np.add.at(pieces, seg_id[ok], k[ok])
        bad = ~ok
        if not np.any(bad):
            break
        mid = (lo[bad] + hi[bad]) / 2
        seg_id = np.concatenate([seg_id[bad], seg_id[bad]])
        lo, hi = np.concatenate([lo[bad], mid]), np.concatenate([mid, hi[bad]])
    return np.cumsum(pieces)


def quad_expect(pdf_fn: Callable, h: Callable, a: float = 0.0, b: float = math.inf,
                x_trunc: float | None = None, epsabs: float = 1e-10,
                epsrel: float = 1e-9) -> float:
    """E[h(X) 1{a <= X <= b}] by quadrature.

    For b = inf, ``x_trunc`` (see ``truncation_point``) replaces the upper
    limit when given; otherwise the half line is mapped onto [0, 1).
    """
    if a < 0:
        raise NegativeInput("a must be >= 0")
    upper = x_trunc if (math.isinf(b) and x_trunc is not None) else b

    def integrand(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        nz = np.isfinite(x)
        out[nz] = pdf_fn(x[nz]) * h(x[nz])
        return out

    return integrate(integrand, a, upper, epsabs, epsrel)[0]
