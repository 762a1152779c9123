"""Exact variate generation for integer-parameter kappa-mu shadowed fading."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParams, RegimeMismatch
from .model import ShadowedParams, build_mixture, delta_pair

ALGORITHM = "philox4x64-numpy"
_BLOCK = 1 << 16


class RngState:
    """Seeded, splittable uniform stream.

    The generator is Philox4x64 keyed by ``seed``; ``split(i)`` returns the
    stream advanced by (i + 1) * 2**128 draws, so shards never overlap.
    Instances are stateful and must not be shared between threads.
    """

    def __init__(self, seed: int, algorithm: str = ALGORITHM, stream: int = 0):
        if algorithm != ALGORITHM:
            raise ValueError(f"unsupported algorithm {algorithm!r}")
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.algorithm = algorithm
        self.stream = int(stream)
        bitgen = np.random.Philox(key=seed)
        if self.stream:
            bitgen = bitgen.jumped(self.stream)
        self._gen = np.random.Generator(bitgen)

    def split(self, shard: int) -> "RngState":
        if shard < 0:
            raise ValueError("shard must be >= 0")
        return RngState(self.seed, self.algorithm, stream=self.stream + shard + 1)

    def uniform(self, n: int) -> np.ndarray:
        """n draws on (0, 1]; the open lower end keeps log() finite."""
        return 1.0 - self._gen.random(n)

    def __repr__(self):
        return f"RngState(seed={self.seed}, algorithm={self.algorithm!r}, stream={self.stream})"


def _erlang(shape: int, scale: float, n: int, rng: RngState) -> np.ndarray:
    """Gamma(shape, scale) for integer shape as -scale * sum of log-uniforms."""
    out = np.zeros(n)
    if shape == 0 or n == 0:
        return out
    rows = max(1, _BLOCK // shape)
    for lo in range(0, n, rows):
        k = min(rows, n - lo)
        u = rng.uniform(k * shape).reshape(k, shape)
        out[lo:lo + k] = -scale * np.log(u).sum(axis=1)
    return out


def _component_probs(params: ShadowedParams) -> np.ndarray:
    """Selection probabilities B_j for component shape m - j, j = 0..m-mu."""
    model = build_mixture(params)
    probs = np.zeros(params.m - params.mu + 1)
    for c in model.components:
        probs[params.m - int(c.shape)] = c.weight
    return probs


def _choose(probs: np.ndarray, n: int, rng: RngState) -> np.ndarray:
    cum = np.cumsum(probs)
    cum /= cum[-1]
    idx = np.searchsorted(cum, rng.uniform(n), side="left")
    return np.minimum(idx, len(probs) - 1)


def _check(params: ShadowedParams, n: int):
    if not isinstance(params, ShadowedParams):
        raise InvalidParams("params must be ShadowedParams")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParams(f"n must be a positive integer, got {n}")
    return int(n)


def sample_component_counts(params: ShadowedParams, n: int, rng: RngState) -> np.ndarray:
    """Histogram of selected component indices j (shape m - j) over n draws."""
    n = _check(params, n)
    if params.m < params.mu:
        raise RegimeMismatch("component selection needs m >= mu")
    idx = _choose(_component_probs(params), n, rng)
    return np.bincount(idx, minlength=params.m - params.mu + 1)


def sample(params: ShadowedParams, n: int, rng: RngState, method: str = "auto") -> np.ndarray:
    """Draw n SNR values.

    ``method``: "mixture" picks a binomially weighted Gamma component (m >= mu),
    "two_gamma" adds Gamma(mu-m, D1) and Gamma(m, D2) (m <= mu), "auto"
    selects whichever applies.
    """
    n = _check(params, n)
    mu, m = params.mu, params.m
    if method == "auto":
        method = "mixture" if m >= mu else "two_gamma"
    d = delta_pair(params)
    if method == "mixture":
        if m < mu:
            raise RegimeMismatch("mixture sampling needs m >= mu")
        idx = _choose(_component_probs(params), n, rng)
        out = np.empty(n)
        for j in range(m - mu + 1):
            sel = np.flatnonzero(idx == j)
            out[sel] = _erlang(m - j, d.delta2, sel.size, rng)
        return out
    if method == "two_gamma":
        if m > mu:
            raise RegimeMismatch("two-gamma sampling needs m <= mu")
        return _erlang(mu - m, d.delta1, n, rng) + _erlang(m, d.delta2, n, rng)
    raise ValueError(f"unknown method {method!r}")


def ks_distance(values: np.ndarray, cdf_values: np.ndarray) -> float:
    """One-sample KS statistic given sorted samples and the model CDF at them."""
    n = len(values)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf_values), np.max(cdf_values - (i - 1) / n)))


def ks_critical(n: int, coeff: float = 1.7) -> float:
    return coeff / math.sqrt(n)
