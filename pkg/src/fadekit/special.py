"""Scalar special functions: Kummer 1F1, modified Bessel I, E1 and Gamma(-k, x).

Everything here is evaluated with plain series, continued fractions and
recurrences in double precision.  Series are accumulated with Neumaier
compensated summation and, where terms can overflow, summed relative to the
largest term with the scale carried separately in log form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NoConvergence, NonPositiveInput

EULER_GAMMA = 0.57721566490153286061

# Above this argument 1F1 switches to a large-argument method
# (terminating Kummer transform or asymptotic expansion).
Z_SWITCH = 40.0

_FPMIN = 1e-300


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-14
    max_terms: int = 1_000_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise ValueError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 100:
            raise ValueError(f"max_terms must be >= 100, got {self.max_terms}")


DEFAULT_SERIES = SeriesControl()


class Neumaier:
    """Running compensated sum (Kahan-Babuska-Neumaier)."""

    __slots__ = ("total", "_comp")

    def __init__(self, start: float = 0.0):
        self.total = float(start)
        self._comp = 0.0

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self._comp += (self.total - t) + x
        else:
            self._comp += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self._comp


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


# ---------------------------------------------------------------------------
# Kummer confluent hypergeometric function 1F1(a; b; z)
# ---------------------------------------------------------------------------


def _terminating_1f1(n: int, b: float, z: float) -> float:
    """1F1(-n; b; z) as the degree-n polynomial it reduces to."""
    acc = Neumaier(1.0)
    term = 1.0
    for k in range(n):
        term *= (-n + k) * z / ((b + k) * (k + 1))
        acc.add(term)
    return acc.value


def _log_terminating_positive(n: int, b: float, z: float) -> float:
    """log 1F1(-n; b; -z) for z > 0, where all n + 1 terms are positive."""
    k = np.arange(1, n + 1, dtype=float)
    steps = np.log(n - k + 1) + math.log(z) - np.log(b + k - 1) - np.log(k)
    logt = np.concatenate([[0.0], np.cumsum(steps)])
    top = logt.max()
    return top + math.log(math.fsum(np.exp(logt - top)))


def _log_series_positive(a: float, b: float, z: float, ctl: SeriesControl) -> float:
    # All terms positive (a > 0, b > 0, z > 0).  Sum outward from the peak
    # term so nothing overflows; the peak itself is anchored with lgamma.
    def ratio(k):
        return (a + k) * z / ((b + k) * (k + 1))

    disc = (b + 1 - z) ** 2 - 4 * (b - a * z)
    # Both roots positive (only possible for a < 1): the terms dip and rise
    # again towards k = 0, so the downward pass must not stop early.
    two_humps = disc >= 0 and b - a * z > 0 and z - b - 1 > 0
    kpk = 0
    if disc >= 0:
        root = (-(b + 1 - z) + math.sqrt(disc)) / 2
        if root > 0:
            kpk = int(math.ceil(root))
    log_peak = (
        math.lgamma(a + kpk) - math.lgamma(a) + math.lgamma(b) - math.lgamma(b + kpk)
        + kpk * math.log(z) - math.lgamma(kpk + 1)
    )
    acc = Neumaier(1.0)
    n = 1
    t = 1.0
    k = kpk
    while True:
        t *= ratio(k)
        k += 1
        n += 1
        acc.add(t)
        if t < ctl.rel_tol * acc.total * 1e-2 and ratio(k) < 0.5:
            break
        if n > ctl.max_terms:
            raise NoConvergence(f"1F1({a}, {b}, {z}) series exceeded {ctl.max_terms} terms")
    t = 1.0
    k = kpk
    while k > 0:
        t /= ratio(k - 1)
        k -= 1
        n += 1
        acc.add(t)
        if t < ctl.rel_tol * acc.total * 1e-2 and not two_humps:
            break
    return log_peak + math.log(acc.value)


def _log_asymptotic_1f1(a: float, b: float, z: float, ctl: SeriesControl) -> float | None:
    """Large-z expansion of log 1F1, or None when it cannot reach rel_tol."""
    tol = ctl.rel_tol * 1e-2
    if not _is_nonpos_int(b - a):
        # Recessive branch: Gamma(b)/Gamma(b-a) (-z)^-a relative to the dominant one.
        log_rec = math.lgamma(a) - math.lgamma(b - a) + (b - 2 * a) * math.log(z) - z
        if log_rec > math.log(tol):
            return None
    acc = Neumaier(1.0)
    term = 1.0
    prev = 1.0
    for s in range(1, 400):
        term *= (b - a + s - 1) * (s - a) / (s * z)
        if term == 0.0:
            break
        if abs(term) > abs(prev):
            return None
        acc.add(term)
        if abs(term) < tol * abs(acc.total):
            break
        prev = term
    else:
        return None
    if acc.value <= 0:
        return None
    return math.lgamma(b) - math.lgamma(a) + z + (a - b) * math.log(z) + math.log(acc.value)


def log_kummer_1f1(a: float, b: float, z: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Natural log of 1F1(a; b; z) for a > 0, b > 0, z >= 0.

    Usable far beyond the double overflow threshold of 1F1 itself.
    """
    if b <= 0 or a <= 0:
        raise InvalidParams("log_kummer_1f1 needs a > 0 and b > 0")
    if z < 0:
        raise InvalidParams("log_kummer_1f1 needs z >= 0")
    if z == 0:
        return 0.0
    if z > Z_SWITCH:
        c = b - a
        if _is_nonpos_int(c):
            # e^z 1F1(c; b; -z) with every polynomial term positive.
            return z + _log_terminating_positive(int(-c), b, z)
        res = _log_asymptotic_1f1(a, b, z, ctl)
        if res is not None:
            return res
    return _log_series_positive(a, b, z, ctl)


def kummer_series(a: float, b: float, z: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Plain power series sum_k (a)_k/(b)_k z^k/k!, no transformations.

    Loses accuracy for large negative z; kept as a reference path.
    """
    acc = Neumaier(1.0)
    term = 1.0
    for k in range(ctl.max_terms):
        term *= (a + k) * z / ((b + k) * (k + 1))
        acc.add(term)
        if term == 0.0 or (abs(term) < ctl.rel_tol * abs(acc.total) and k > abs(z)):
            return acc.value
    raise NoConvergence(f"1F1({a}, {b}, {z}) series exceeded {ctl.max_terms} terms")


def _exp_or_inf(v: float) -> float:
    return math.inf if v > 709.78 else math.exp(v)


def kummer_1f1(a: float, b: float, z: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Confluent hypergeometric function of the first kind, 1F1(a; b; z).

    Negative arguments go through Kummer's transformation
    1F1(a; b; z) = e^z 1F1(b-a; b; -z) so the summed series has positive
    terms.  For z above ``Z_SWITCH`` a terminating transform or the
    asymptotic expansion replaces the series when either is exact to
    ``ctl.rel_tol``.
    """
    if _is_nonpos_int(b):
        raise InvalidParams(f"b must not be a non-positive integer, got {b}")
    if z == 0:
        return 1.0
    if _is_nonpos_int(a):
        return _terminating_1f1(int(-a), b, z)
    if z < 0:
        c = b - a
        if _is_nonpos_int(c):
            return math.exp(z) * _terminating_1f1(int(-c), b, -z)
        if c > 0 and b > 0:
            return math.exp(z + log_kummer_1f1(c, b, -z, ctl))
        return kummer_series(a, b, z, ctl)
    if a > 0 and b > 0:
        return math.exp(log_kummer_1f1(a, b, z, ctl))
    return kummer_series(a, b, z, ctl)


# ---------------------------------------------------------------------------
# Modified Bessel function of the first kind
# ---------------------------------------------------------------------------


def log_bessel_i(nu: float, z: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """log I_nu(z): ascending series summed around its peak term, Hankel expansion for large z."""
    if nu <= -1:
        raise InvalidParams("nu must exceed -1")
    if z < 0:
        raise InvalidParams("z must be >= 0")
    if z == 0:
        return 0.0 if nu == 0 else -math.inf
    if z >= _HANKEL_MIN + nu * nu:
        return float(_log_bessel_i_hankel(nu, np.array([float(z)]))[0])
    w = (z / 2) ** 2
    lz = math.log(z / 2)
    kpk = max(0, int(math.ceil((-(nu + 2) + math.sqrt(nu * nu + 4 * w)) / 2)))
    log_peak = (2 * kpk + nu) * lz - math.lgamma(kpk + 1) - math.lgamma(kpk + nu + 1)

    def ratio(k):
        return w / ((k + 1) * (k + nu + 1))

    acc = Neumaier(1.0)
    t, k, n = 1.0, kpk, 1
    while True:
        t *= ratio(k)
        k += 1
        n += 1
        acc.add(t)
        if t < ctl.rel_tol * acc.total * 1e-2 and ratio(k) < 0.5:
            break
        if n > ctl.max_terms:
            raise NoConvergence(f"I_{nu}({z}) series exceeded {ctl.max_terms} terms")
    t, k = 1.0, kpk
    while k > 0:
        t /= ratio(k - 1)
        k -= 1
        acc.add(t)
        if t < ctl.rel_tol * acc.total * 1e-2:
            break
    return log_peak + math.log(acc.value)


def bessel_i(nu: float, z: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Modified Bessel function I_nu(z) for real nu >= 0, z >= 0."""
    if nu < 0:
        raise InvalidParams("nu must be >= 0")
    return math.exp(log_bessel_i(nu, z, ctl))


def bessel_i_scaled(nu: float, z: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """e^{-z} I_nu(z); finite for arbitrarily large z."""
    if nu < 0:
        raise InvalidParams("nu must be >= 0")
    if z >= _HANKEL_MIN + nu * nu:
        return float(_hankel_sum(nu, np.array([float(z)]))[0]) / math.sqrt(2 * math.pi * z)
    return math.exp(log_bessel_i(nu, z, ctl) - z)


_HANKEL_MIN = 40.0


def _hankel_sum(nu: float, z: np.ndarray) -> np.ndarray:
    """Large-argument expansion: I_nu(z) ~ e^z / sqrt(2 pi z) sum (-1)^k a_k / z^k.

    Each element stops adding once its terms start to grow; for
    z >= 40 + nu^2 the smallest term is far below double rounding.
    """
    mu4 = 4.0 * nu * nu
    term = np.ones_like(z)
    acc = np.ones_like(z)
    live = np.ones(z.shape, dtype=bool)
    for k in range(1, 200):
        nxt = -term * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * z)
        live &= np.abs(nxt) < np.abs(term)
        term = np.where(live, nxt, 0.0)
        acc += term
        if not live.any() or np.all(np.abs(term) <= 1e-17 * np.abs(acc)):
            break
    return acc


def _log_bessel_i_hankel(nu: float, z: np.ndarray) -> np.ndarray:
    return z - 0.5 * np.log(2 * np.pi * z) + np.log(_hankel_sum(nu, z))


def log_bessel_i_array(nu: float, z: np.ndarray) -> np.ndarray:
    """Vectorised log I_nu(z) over an array of arguments.

    Uses a fixed number of terms sized by max(z) and a log-sum-exp reduction;
    intended for bulk evaluation inside quadrature loops.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    zero = z == 0
    out[zero] = 0.0 if nu == 0 else -np.inf
    big = z >= _HANKEL_MIN + nu * nu
    if np.any(big):
        out[big] = _log_bessel_i_hankel(nu, z[big])
    zp = z[~zero & ~big]
    if zp.size:
        half = zp.max() / 2
        nterms = int(math.ceil(half + 12 * math.sqrt(half + 1) + 40))
        k = np.arange(nterms, dtype=float)
        kstep = np.log(k + 1) + np.log(k + nu + 1)
        res = np.empty_like(zp)
        rows = max(1, 2_000_000 // nterms)
        for lo in range(0, zp.size, rows):
            zc = zp[lo:lo + rows]
            lz = np.log(zc) - math.log(2.0)
            # log t_k = log t_0 + sum_{j<k} [2 log(z/2) - log(j+1) - log(j+nu+1)]
            logt = np.empty((zc.size, nterms))
            logt[:, 0] = nu * lz - math.lgamma(nu + 1)
            logt[:, 1:] = logt[:, :1] + np.cumsum(2 * lz[:, None] - kstep[None, :-1], axis=1)
            top = logt.max(axis=1)
            res[lo:lo + rows] = top + np.log(np.exp(logt - top[:, None]).sum(axis=1))
        out[~zero & ~big] = res
    return out


# ---------------------------------------------------------------------------
# Exponential integral and Gamma(-k, x)
# ---------------------------------------------------------------------------


def _upper_gamma_cf(a: float, x: float, eps: float = 1e-16, max_iter: int = 100_000) -> float:
    """h with Gamma(a, x) = e^{-x} x^a h, by modified Lentz (x >= 1)."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise NoConvergence(f"continued fraction for Gamma({a}, {x}) did not converge")


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    acc = Neumaier(-EULER_GAMMA - math.log(x))
    term = 1.0
    for k in range(1, 200):
        term *= -x / k
        acc.add(-term / k)
        if abs(term) < 1e-18 * abs(acc.total):
            break
    return acc.value


def scaled_exp_integral_e1(x: float) -> float:
    """e^x E1(x)."""
    if x <= 0:
        raise NonPositiveInput(f"E1 needs x > 0, got {x}")
    if x <= 1.0:
        return math.exp(x) * _e1_series(x)
    return _upper_gamma_cf(0.0, x)


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = Gamma(0, x) = -Ei(-x) for x > 0."""
    if x <= 0:
        raise NonPositiveInput(f"E1 needs x > 0, got {x}")
    if x <= 1.0:
        return _e1_series(x)
    return math.exp(-x) * _upper_gamma_cf(0.0, x)


def scaled_upper_gamma_table(kmax: int, x: float) -> np.ndarray:
    """H_k = x^{k+1} e^x Gamma(-k, x) for k = 0..kmax.

    H_k stays O(1) for large x, which keeps capacity sums free of overflow.
    The recurrence G_k = (x^{-k} - G_{k-1})/k is only stable for k > x, so
    the orders k <= x are filled downward from a continued-fraction seed.
    """
    if x <= 0:
        raise NonPositiveInput(f"Gamma(-k, x) needs x > 0, got {x}")
    if kmax < 0:
        raise InvalidParams("kmax must be >= 0")
    h = np.empty(kmax + 1)
    if x < 1.0:
        k0 = 0
        h[0] = x * scaled_exp_integral_e1(x)
    else:
        k0 = min(kmax, int(math.floor(x)))
        h[k0] = x * _upper_gamma_cf(-float(k0), x)
        for k in range(k0, 0, -1):
            h[k - 1] = 1.0 - k * h[k] / x
    for k in range(k0 + 1, kmax + 1):
        h[k] = x * (1.0 - h[k - 1]) / k
    return h


def scaled_upper_gamma_negint(k: int, x: float) -> float:
    """G_k(x) = e^x Gamma(-k, x) for integer k >= 0 and x > 0."""
    if k < 0 or int(k) != k:
        raise InvalidParams(f"k must be a non-negative integer, got {k}")
    if x <= 0:
        raise NonPositiveInput(f"Gamma(-k, x) needs x > 0, got {x}")
    hk = scaled_upper_gamma_table(int(k), x)[-1]
    return _exp_or_inf(math.log(hk) - (k + 1) * math.log(x))
