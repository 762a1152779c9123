"""Finite Gamma-mixture representation of the kappa-mu shadowed distribution.

For integer mu and m the SNR density is a finite weighted sum of Gamma
densities with integer shapes.  When m >= mu the weights are binomial
probabilities (a proper mixture); when m < mu they are signed and the sum
is only a linear combination of densities.  Every evaluator here accepts
scalars or numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    IllConditionedMixture,
    InternalConsistencyError,
    InvalidParams,
    KappaTooSmall,
    NegativeInput,
    OutOfRegion,
)

KAPPA_MIN = 1e-3
MAX_SHAPE = 2000
# Unit-sum residual above which a constructed mixture is rejected.
WEIGHT_SUM_TOL = 1e-9
# Signed sums whose |terms| exceed the result by more than this factor are
# re-evaluated with the positive series instead.
COND_MAX = 1e3
CLAMP_REL = 1e-12
_CHUNK = 4096


class Regime(enum.Enum):
    PROPER = "proper"
    IMPROPER = "improper"


def _as_count(name: str, v) -> int:
    if isinstance(v, bool):
        raise InvalidParams(f"{name} must be an integer, got {v!r}")
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise InvalidParams(f"{name} must be an integer, got {v!r}") from None
    if not math.isfinite(f) or not f.is_integer():
        raise InvalidParams(f"{name} must be an integer, got {v!r}")
    k = int(f)
    if not 1 <= k <= MAX_SHAPE:
        raise InvalidParams(f"{name} must lie in [1, {MAX_SHAPE}], got {k}")
    return k


@dataclass(frozen=True)
class ShadowedParams:
    """(gamma_bar, kappa, mu, m) with integer mu and m."""

    gamma_bar: float
    kappa: float
    mu: int
    m: int

    def __post_init__(self):
        for name in ("gamma_bar", "kappa"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise InvalidParams(f"{name} must be a real number, got {v!r}") from None
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be finite and > 0, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "mu", _as_count("mu", self.mu))
        object.__setattr__(self, "m", _as_count("m", self.m))

    @property
    def regime(self) -> Regime:
        return Regime.PROPER if self.m >= self.mu else Regime.IMPROPER

    @property
    def p(self) -> float:
        """m / (mu kappa + m), the binomial success probability."""
        return self.m / (self.mu * self.kappa + self.m)

    @property
    def q(self) -> float:
        return self.mu * self.kappa / (self.mu * self.kappa + self.m)


@dataclass(frozen=True)
class DeltaPair:
    delta1: float
    delta2: float


def delta_pair(params: ShadowedParams) -> DeltaPair:
    d1 = params.gamma_bar / (params.mu * (1.0 + params.kappa))
    d2 = (params.mu * params.kappa + params.m) / params.m * d1
    return DeltaPair(d1, d2)


@dataclass(frozen=True)
class GammaComponent:
    weight: float
    shape: int
    scale: float

    @property
    def mean(self) -> float:
        return self.shape * self.scale


@dataclass(frozen=True)
class MixtureModel:
    params: ShadowedParams
    components: tuple[GammaComponent, ...]
    regime: Regime

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @cached_property
    def shapes(self) -> np.ndarray:
        return np.array([c.shape for c in self.components])

    @cached_property
    def scales(self) -> np.ndarray:
        return np.array([c.scale for c in self.components])

    @cached_property
    def _groups(self):
        # Components sharing a scale have contiguous shapes; evaluate each
        # group with one pass over its shape range.
        groups = {}
        for c in self.components:
            groups.setdefault(c.scale, {})[c.shape] = c.weight
        out = []
        for scale, by_shape in groups.items():
            kmin, kmax = min(by_shape), max(by_shape)
            w = np.array([by_shape.get(k, 0.0) for k in range(kmin, kmax + 1)])
            out.append((scale, kmin, kmax, w))
        return out

    @cached_property
    def peak_density(self) -> float:
        """Rough upper bound on the density, used to scale clamp tolerances."""
        best = 0.0
        for c in self.components:
            k, s = c.shape, c.scale
            if k == 1:
                g = 1.0 / s
            else:
                g = math.exp((k - 1) * math.log(k - 1) - (k - 1) - math.lgamma(k)) / s
            best = max(best, abs(c.weight) * g)
        return best


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _proper_log_weights(params: ShadowedParams):
    n = params.m - params.mu
    lp, lq = math.log(params.p), math.log(params.q)
    return [(1.0, _log_binom(n, i) + i * lp + (n - i) * lq) for i in range(n + 1)]


def _improper_log_weights_partial_fractions(params: ShadowedParams, d: DeltaPair):
    """Signed weights from the partial-fraction expansion written with Deltas.

    Returns (sign, log|C|) for the delta1 block (j = 1..mu-m) followed by the
    delta2 block (j = 1..m).
    """
    mu, m = params.mu, params.m
    a = mu - m
    ld1, ld2 = math.log(d.delta1), math.log(d.delta2)
    # delta2 - delta1 = delta1 mu kappa / m, without the subtraction.
    lgap = ld1 + math.log(mu * params.kappa / m)
    out = []
    sign1 = -1.0 if m % 2 else 1.0
    for j in range(1, a + 1):
        out.append((sign1, _log_binom(m + j - 2, j - 1) + (j - 1) * ld2 + m * ld1 - (m + j - 1) * lgap))
    for j in range(1, m + 1):
        s = -1.0 if (j - 1) % 2 else 1.0
        out.append((s, _log_binom(a + j - 2, j - 1) + (j - 1) * ld1 + a * ld2 - (a + j - 1) * lgap))
    return out


def _improper_log_weights_tabulated(params: ShadowedParams):
    """Same weights in the (p, q) form used by the tabulated parameter set."""
    mu, m = params.mu, params.m
    lp, lq = math.log(params.p), math.log(params.q)
    out = []
    for i in range(1, mu + 1):
        if i <= mu - m:
            s = -1.0 if m % 2 else 1.0
            out.append((s, _log_binom(m + i - 2, i - 1) + m * lp + (-m - i + 1) * lq))
        else:
            e = i - mu + m - 1
            s = -1.0 if e % 2 else 1.0
            out.append((s, _log_binom(i - 2, e) + e * lp + (-i + 1) * lq))
    return out


def build_mixture(params: ShadowedParams) -> MixtureModel:
    """Exact finite Gamma mixture for integer mu and m.

    Raises KappaTooSmall for kappa < KAPPA_MIN when m < mu, and
    IllConditionedMixture if the weights fail the unit-sum check.
    """
    if not isinstance(params, ShadowedParams):
        raise InvalidParams("build_mixture expects ShadowedParams")
    mu, m = params.mu, params.m
    d = delta_pair(params)
    if params.regime is Regime.PROPER:
        logw = _proper_log_weights(params)
        shapes = [m - i for i in range(m - mu + 1)]
        scales = [d.delta2] * len(shapes)
    else:
        if params.kappa < KAPPA_MIN:
            raise KappaTooSmall(
                f"kappa={params.kappa} < {KAPPA_MIN}: signed weights too large for m < mu"
            )
        logw = _improper_log_weights_partial_fractions(params, d)
        check = _improper_log_weights_tabulated(params)
        for (s1, l1), (s2, l2) in zip(logw, check):
            if s1 != s2 or abs(l1 - l2) > 1e-10 * max(1.0, abs(l1)):
                raise InternalConsistencyError("partial-fraction and tabulated weights disagree")
        a = mu - m
        shapes = [a - j + 1 for j in range(1, a + 1)] + [m - j + 1 for j in range(1, m + 1)]
        scales = [d.delta1] * a + [d.delta2] * m

    weights = [s * math.exp(lw) for s, lw in logw]
    resid = math.fsum(weights) - 1.0
    if not math.isfinite(resid) or abs(resid) > WEIGHT_SUM_TOL:
        raise IllConditionedMixture(f"weights sum to 1{resid:+.3e}; parameters too ill-conditioned")
    if params.regime is Regime.PROPER:
        # Binomial probabilities: strip the lgamma rounding drift seen at large m - mu.
        total = math.fsum(weights)
        weights = [w / total for w in weights]
    comps = tuple(
        GammaComponent(w, k, s) for w, k, s in zip(weights, shapes, scales) if w != 0.0
    )
    return MixtureModel(params, comps, params.regime)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _check_x(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("x contains NaN")
    if np.any(arr < 0):
        raise NegativeInput("x must be >= 0")
    return arr, arr.ndim == 0


def _log_poisson(k: int, y: np.ndarray, logy: np.ndarray) -> np.ndarray:
    # log(e^-y y^k / k!), with 0^0 = 1.
    if k == 0:
        return -y
    return k * logy - y - math.lgamma(k + 1)


def _gamma_p_q(k: int, y: np.ndarray, logy: np.ndarray):
    """Regularized incomplete gammas P(k, y) and Q(k, y) for integer k >= 1.

    The smaller of the two is summed directly; the other is its complement.
    """
    p = np.empty_like(y)
    lo = y < k
    if np.any(lo):
        # P = pi_k(y) sum_j y^j k!/(k+j)!
        yl = y[lo]
        base = np.exp(_log_poisson(k, yl, logy[lo]))
        acc = np.ones_like(yl)
        t = np.ones_like(yl)
        j = 0
        while True:
            j += 1
            t = t * yl / (k + j)
            acc += t
            if np.all(t <= 1e-17 * acc):
                break
        p[lo] = base * acc
    q = 1.0 - p
    hi = ~lo
    if np.any(hi):
        # Q = pi_{k-1}(y) sum_j (k-1)!/(k-1-j)! y^-j, a finite decreasing sum.
        yh = y[hi]
        base = np.exp(_log_poisson(k - 1, yh, logy[hi]))
        acc = np.ones_like(yh)
        t = np.ones_like(yh)
        for j in range(1, k):
            t = t * (k - j) / yh
            acc += t
            if np.all(t <= 1e-17 * acc):
                break
        q[hi] = base * acc
        p[hi] = 1.0 - q[hi]
    return p, q


def _group_sums(model: MixtureModel, x: np.ndarray, kind: str):
    """Float mixture sums and absolute sums over the flattened grid x.

    kind is "pdf", "cdf" (sum of C_i P_i) or "sf" (sum of C_i Q_i).
    """
    total = np.zeros_like(x)
    absum = np.zeros_like(x)
    with np.errstate(divide="ignore"):
        for scale, kmin, kmax, w in model._groups:
            y = x / scale
            logy = np.log(y)
            if kind == "pdf":
                for idx, k in enumerate(range(kmin, kmax + 1)):
                    if w[idx] == 0.0:
                        continue
                    t = w[idx] * np.exp(_log_poisson(k - 1, y, logy)) / scale
                    total += t
                    absum += np.abs(t)
            elif kind == "cdf":
                # P(k) = P(k+1) + pi_k: downward over shapes, adding positives.
                pk = _gamma_p_q(kmax, y, logy)[0]
                for idx in range(kmax - kmin, -1, -1):
                    k = kmin + idx
                    if k < kmax:
                        pk = pk + np.exp(_log_poisson(k, y, logy))
                    t = w[idx] * pk
                    total += t
                    absum += np.abs(t)
            else:
                # Q(k+1) = Q(k) + pi_k: upward over shapes.
                qk = _gamma_p_q(kmin, y, logy)[1]
                for idx in range(kmax - kmin + 1):
                    k = kmin + idx
                    if k > kmin:
                        qk = qk + np.exp(_log_poisson(k - 1, y, logy))
                    t = w[idx] * qk
                    total += t
                    absum += np.abs(t)
    return total, absum


def _nb_series(model: MixtureModel, x: np.ndarray, kind: str) -> np.ndarray:
    """Improper-regime density/CDF as a positive negative-binomial Gamma mixture.

    The MGF (1 - d1 s)^-(mu-m) (1 - d2 s)^-m expands to
    sum_k NB(k; m, p) (1 - d1 s)^-(mu+k), so every term is nonnegative.
    """
    prm = model.params
    mu, m = prm.mu, prm.m
    d1 = delta_pair(prm).delta1
    p, q = prm.p, prm.q
    y = x / d1
    with np.errstate(divide="ignore"):
        logy = np.log(y)
        n0 = mu - 1 if kind == "pdf" else mu
        log_base = m * math.log(p) + _log_poisson(n0, y, logy)
    acc = np.ones_like(y)
    rho = np.ones_like(y)      # pi_{n0+j} / pi_{n0}
    v = 1.0                    # NB weight ratio w_j / p^m
    vcum = 1.0
    j = 0
    while True:
        rho = rho * y / (n0 + j + 1)
        v = v * (m + j) / (j + 1) * q
        vcum += v
        j += 1
        t = rho * (v if kind == "pdf" else vcum)
        acc += t
        if j > q * float(np.max(y, initial=0.0)) + 10 and np.all(t <= 1e-17 * acc):
            break
        if j > 1_000_000:
            raise InternalConsistencyError("negative-binomial series did not converge")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(log_base + np.log(acc))
    out[y == 0] = 0.0 if n0 > 0 else math.exp(m * math.log(p))
    if kind == "pdf":
        out /= d1
    return out


def _evaluate(model: MixtureModel, x, kind: str):
    arr, scalar = _check_x(x)
    flat = arr.ravel()
    res = np.empty_like(flat)
    for start in range(0, flat.size, _CHUNK):
        xs = flat[start:start + _CHUNK]
        total, absum = _group_sums(model, xs, kind)
        if model.regime is Regime.IMPROPER:
            with np.errstate(divide="ignore", invalid="ignore"):
                bad = ~(np.abs(total) * COND_MAX >= absum)
            if np.any(bad):
                total[bad] = _nb_series(model, xs[bad], kind)
        if kind == "cdf":
            # In the upper half the complement of the survival sum rounds
            # monotonically; the lower sum keeps relative accuracy below.
            upper = total >= 0.5
            if np.any(upper):
                total[upper] = 1.0 - _group_sums(model, xs[upper], "sf")[0]
        res[start:start + _CHUNK] = total
    tol = CLAMP_REL * (model.peak_density if kind == "pdf" else 1.0)
    if np.any(res < -tol):
        raise InternalConsistencyError(f"{kind} evaluated to {res.min():.3e} < 0")
    res = np.maximum(res, 0.0)
    if kind == "cdf":
        res = np.minimum(res, 1.0)
    res = res.reshape(arr.shape)
    return float(res) if scalar else res


def pdf(model: MixtureModel, x):
    """Mixture density sum_i C_i x^{m_i-1} e^{-x/W_i} / ((m_i-1)! W_i^{m_i})."""
    return _evaluate(model, x, "pdf")


def cdf(model: MixtureModel, x):
    """Mixture CDF, accumulated as sum_i C_i P(m_i, x/W_i).

    Equal to 1 - sum_i C_i Q(m_i, x/W_i) since the weights sum to one, but
    keeps full relative accuracy in the lower tail.
    """
    return _evaluate(model, x, "cdf")


def mixture_sums(model: MixtureModel, x, kind: str = "pdf"):
    """Raw float mixture sum and sum of |terms| with no fallback or clamping."""
    arr, scalar = _check_x(x)
    total, absum = _group_sums(model, arr.ravel(), kind)
    if scalar:
        return float(total[0]), float(absum[0])
    return total.reshape(arr.shape), absum.reshape(arr.shape)


def pdf_split(params: ShadowedParams, x):
    """Density from the two-block (m < mu) or binomial (m >= mu) presentation.

    Each term is a squared-Nakagami density parameterised by its mean
    omega and shape; the weights use the (p, q) form directly in floating
    point.  Serves as a cross-check of the unified component table.
    """
    arr, scalar = _check_x(x)
    mu, m = params.mu, params.m
    d = delta_pair(params)
    p, q = params.p, params.q

    def f_k(mean, shape):
        rate = shape / mean
        with np.errstate(divide="ignore"):
            lg = shape * math.log(rate) + (shape - 1) * np.log(arr) - rate * arr - math.lgamma(shape)
        if shape == 1:
            lg = np.where(arr == 0, math.log(rate), lg)
        return np.exp(lg)

    total = np.zeros_like(arr)
    if m < mu:
        for j in range(1, mu - m + 1):
            c = (-1) ** m * math.comb(m + j - 2, j - 1) * p ** m * q ** (-m - j + 1)
            k = mu - m - j + 1
            total = total + c * f_k(d.delta1 * k, k)
        for j in range(1, m + 1):
            c = (-1) ** (j - 1) * math.comb(mu - m + j - 2, j - 1) * p ** (j - 1) * q ** (m - mu - j + 1)
            k = m - j + 1
            total = total + c * f_k(d.delta2 * k, k)
    else:
        for j in range(m - mu + 1):
            c = math.comb(m - mu, j) * p ** j * q ** (m - mu - j)
            k = m - j
            total = total + c * f_k(d.delta2 * k, k)
    return float(total) if scalar else total


def mgf_rational(params: ShadowedParams, s):
    """(1 - d1 s)^(m - mu) / (1 - d2 s)^m, valid for s < 1/d2."""
    d = delta_pair(params)
    sa = np.asarray(s, dtype=float)
    if np.any(sa * d.delta2 >= 1.0):
        raise OutOfRegion(f"s must be < 1/delta2 = {1.0 / d.delta2}")
    out = np.exp((params.m - params.mu) * np.log1p(-d.delta1 * sa) - params.m * np.log1p(-d.delta2 * sa))
    return float(out) if sa.ndim == 0 else out


def mgf_mixture(model: MixtureModel, s):
    """sum_i C_i (1 - W_i s)^(-m_i), valid for s < 1/max W_i."""
    sa = np.asarray(s, dtype=float)
    if np.any(sa * model.scales.max() >= 1.0):
        raise OutOfRegion(f"s must be < 1/max scale = {1.0 / model.scales.max()}")
    flat = sa.ravel()
    out = np.empty_like(flat)
    for i, si in enumerate(flat):
        terms = model.weights * np.exp(-model.shapes * np.log1p(-model.scales * si))
        out[i] = math.fsum(terms)
    return float(out[0]) if sa.ndim == 0 else out.reshape(sa.shape)


def moment(model: MixtureModel, n: int) -> float:
    """E[gamma^n] = sum_i C_i W_i^n m_i (m_i + 1) ... (m_i + n - 1)."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParams(f"moment order must be a positive integer, got {n}")
    n = int(n)
    terms = []
    for c in model.components:
        rising = math.exp(math.lgamma(c.shape + n) - math.lgamma(c.shape))
        terms.append(c.weight * c.scale ** n * rising)
    return math.fsum(terms)
