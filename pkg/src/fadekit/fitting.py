"""Fit integer kappa-mu shadowed (and Rician / Nakagami baselines) to power samples.

The objective is the log-domain KS error factor
``eps = max_x |log10 F_emp(x) - log10 F_model(x)|`` over a thinned set of
order statistics.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from ._parallel import ordered_map
from .errors import (
    DegenerateSample,
    FadekitError,
    NoFeasibleCandidate,
    ParseError,
    TooFewSamples,
)
from .model import KAPPA_MIN, ShadowedParams, build_mixture, cdf
from .oracle import nakagami_cdf, pdf_kappa_mu, quad_cdf_grid

MIN_SAMPLES = 50
MAX_GRID = 2000
KAPPA_CAP = 1e3
PRESCAN_POINTS = 25
GOLDEN_TOL = 1e-4      # bracket width in log10(kappa)
GRID_BOUND = 50

MODELS = ("shadowed", "rician", "nakagami")
_MODEL_RANK = {name: i for i, name in enumerate(MODELS)}
_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class EmpiricalSample:
    values: np.ndarray
    n: int

    @classmethod
    def from_values(cls, values: Iterable[float], min_samples: int = MIN_SAMPLES):
        arr = np.sort(np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                                 dtype=float))
        if arr.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(arr)) or (arr.size and arr[0] < 0):
            raise ValueError("values must be finite and >= 0")
        if arr.size < min_samples:
            raise TooFewSamples(f"need at least {min_samples} samples, got {arr.size}")
        arr.setflags(write=False)
        return cls(values=arr, n=int(arr.size))

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / self.n


@dataclass(frozen=True)
class Candidate:
    model: str
    mu: int | None
    m: int | None
    kappa: float | None
    epsilon: float

    def key(self):
        # Deterministic tie-break: epsilon, model, smaller mu, smaller m, smaller kappa.
        return (self.epsilon, _MODEL_RANK[self.model], self.mu or 0, self.m or 0,
                self.kappa if self.kappa is not None else 0.0)

    def as_dict(self):
        return {"model": self.model, "mu": self.mu, "m": self.m,
                "kappa": self.kappa, "epsilon": self.epsilon}


@dataclass(frozen=True)
class FitResult:
    model: str
    gamma_bar: float
    kappa: float | None
    mu: int | None
    m: int | None
    epsilon: float
    candidates: list
    eval_points: np.ndarray
    grid: dict = field(default_factory=dict)

    @property
    def params(self) -> ShadowedParams | None:
        if self.model != "shadowed":
            return None
        return ShadowedParams(self.gamma_bar, self.kappa, self.mu, self.m)

    def best(self, model: str) -> Candidate:
        pool = [c for c in self.candidates if c.model == model and math.isfinite(c.epsilon)]
        if not pool:
            raise NoFeasibleCandidate(f"no feasible {model} candidate")
        return min(pool, key=Candidate.key)

    def to_json(self) -> str:
        doc = {
            "model": self.model,
            "gamma_bar": self.gamma_bar,
            "kappa": self.kappa,
            "mu": self.mu,
            "m": self.m,
            "epsilon": self.epsilon,
            "candidates": [
                {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                 for k, v in c.as_dict().items()}
                for c in self.candidates
            ],
            "grid": self.grid,
        }
        return json.dumps(doc, indent=2, allow_nan=False)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _parse_value(text: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(line, f"not a number: {text!r}") from None
    if math.isnan(v) or math.isinf(v):
        raise ParseError(line, f"non-finite value {text!r}")
    if v < 0:
        raise ParseError(line, f"negative value {text!r}")
    return v


def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


def load_samples(source, format: str = "plain", min_samples: int = MIN_SAMPLES) -> EmpiricalSample:
    """Parse a sample stream (bytes, str or file object).

    ``plain``: one number per line, blank lines ignored.  ``csv``: a single
    column, optionally preceded by a non-numeric header row.
    """
    text = _read_text(source)
    values = []
    fmt = format.lower()
    if fmt == "plain":
        for lineno, raw in enumerate(text.splitlines(), start=1):
            s = raw.strip()
            if s:
                values.append(_parse_value(s, lineno))
    elif fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        for row in reader:
            lineno = reader.line_num
            cells = [c.strip() for c in row]
            if not any(cells):
                continue
            if len(cells) != 1:
                raise ParseError(lineno, f"expected one column, got {len(cells)}")
            if not values and lineno == 1:
                try:
                    float(cells[0])
                except ValueError:
                    continue  # header
            values.append(_parse_value(cells[0], lineno))
    else:
        raise ValueError(f"unknown format {format!r}")
    return EmpiricalSample.from_values(values, min_samples=min_samples)


def dump_samples(values, stream) -> None:
    """Write values in plain format with round-trip precision."""
    for v in values:
        stream.write(f"{float(v):.17g}\n")


# ---------------------------------------------------------------------------
# Objective
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalGrid:
    x: np.ndarray
    ecdf: np.ndarray
    floor_p: float


def eval_grid(sample: EmpiricalSample, max_points: int = MAX_GRID) -> EvalGrid:
    """Evenly thinned order statistics with their right-continuous ECDF values."""
    n = sample.n
    if sample.values[0] == sample.values[-1]:
        raise DegenerateSample("all sample values are identical")
    k = min(n, max_points)
    idx = np.unique(np.ceil(np.arange(1, k + 1) * n / k).astype(np.int64))
    x = sample.values[idx - 1]
    # With ties the ECDF at x counts every value <= x.
    counts = np.searchsorted(sample.values, x, side="right")
    x, first = np.unique(x, return_index=True)
    return EvalGrid(x=x, ecdf=counts[first] / n, floor_p=1.0 / (2 * n))


def epsilon_on_grid(grid: EvalGrid, model_cdf: np.ndarray) -> float:
    f = np.asarray(model_cdf, dtype=float)
    ok = (f >= grid.floor_p) & (grid.ecdf >= grid.floor_p)
    if not np.any(ok):
        return math.inf
    return float(np.max(np.abs(np.log10(grid.ecdf[ok]) - np.log10(f[ok]))))


def epsilon(sample: EmpiricalSample, cdf_fn: Callable) -> float:
    grid = eval_grid(sample)
    return epsilon_on_grid(grid, cdf_fn(grid.x))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


def _minimize_log_kappa(obj: Callable[[float], float], lo: float, hi: float):
    """Pre-scan, golden-section and 3-point refine over t = log10(kappa)."""
    ts = np.linspace(lo, hi, PRESCAN_POINTS)
    vals = [obj(float(t)) for t in ts]
    if not any(math.isfinite(v) for v in vals):
        return None
    i = min(range(len(ts)), key=lambda j: (vals[j], j))
    a = float(ts[max(i - 1, 0)])
    b = float(ts[min(i + 1, len(ts) - 1)])
    best_t, best_v = float(ts[i]), vals[i]

    def consider(t, v):
        nonlocal best_t, best_v
        if (v, t) < (best_v, best_t):
            best_t, best_v = t, v

    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = obj(c), obj(d)
    consider(c, fc)
    consider(d, fd)
    while b - a > GOLDEN_TOL:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = obj(c)
            consider(c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = obj(d)
            consider(d, fd)
    h = b - a
    for t in (best_t - h, best_t + h):
        if lo <= t <= hi:
            consider(t, obj(t))
    return best_t, best_v


def _shadowed_objective(grid: EvalGrid, gamma_bar: float, mu: int, m: int):
    def obj(t: float) -> float:
        try:
            model = build_mixture(ShadowedParams(gamma_bar, 10.0 ** t, mu, m))
            return epsilon_on_grid(grid, cdf(model, grid.x))
        except FadekitError:
            return math.inf
    return obj


def _rician_objective(grid: EvalGrid, gamma_bar: float):
    def obj(t: float) -> float:
        kappa = 10.0 ** t
        try:
            f = quad_cdf_grid(lambda x: pdf_kappa_mu(gamma_bar, kappa, 1.0, x), grid.x)
            return epsilon_on_grid(grid, np.minimum(f, 1.0))
        except FadekitError:
            return math.inf
    return obj


def fit(sample: EmpiricalSample, mu_max: int, m_max: int,
        models: Iterable[str] = ("shadowed",), kappa_min: float = KAPPA_MIN,
        kappa_cap: float = KAPPA_CAP) -> FitResult:
    """Grid search over integer (mu, m) with kappa optimised on a log scale."""
    for name, v in (("mu_max", mu_max), ("m_max", m_max)):
        if isinstance(v, bool) or int(v) != v or not 1 <= v <= GRID_BOUND:
            raise ValueError(f"{name} must be an integer in [1, {GRID_BOUND}]")
    models = [mdl.lower() for mdl in models]
    unknown = set(models) - set(MODELS)
    if unknown or not models:
        raise ValueError(f"models must be a non-empty subset of {MODELS}")
    if not 0 < kappa_min < kappa_cap:
        raise ValueError("need 0 < kappa_min < kappa_cap")

    grid = eval_grid(sample)
    gamma_bar = sample.mean
    lo, hi = math.log10(kappa_min), math.log10(kappa_cap)
    candidates: list[Candidate] = []

    if "shadowed" in models:
        pairs = [(mu, m) for mu in range(1, int(mu_max) + 1) for m in range(1, int(m_max) + 1)]

        def run(pair):
            mu, m = pair
            res = _minimize_log_kappa(_shadowed_objective(grid, gamma_bar, mu, m), lo, hi)
            if res is None:
                return Candidate("shadowed", mu, m, None, math.inf)
            return Candidate("shadowed", mu, m, 10.0 ** res[0], res[1])

        candidates.extend(ordered_map(run, pairs))
    if "rician" in models:
        res = _minimize_log_kappa(_rician_objective(grid, gamma_bar), lo, hi)
        candidates.append(Candidate("rician", 1, None, None if res is None else 10.0 ** res[0],
                                    math.inf if res is None else res[1]))
    if "nakagami" in models:
        for mh in range(1, max(int(mu_max), int(m_max)) + 1):
            eps = epsilon_on_grid(grid, nakagami_cdf(gamma_bar, mh, grid.x))
            candidates.append(Candidate("nakagami", None, mh, None, eps))

    feasible = [c for c in candidates if math.isfinite(c.epsilon)]
    if not feasible:
        raise NoFeasibleCandidate("every candidate evaluation failed")
    best = min(feasible, key=Candidate.key)
    meta = {
        "n": sample.n,
        "points": int(grid.x.size),
        "floor_p": grid.floor_p,
        "kappa_min": kappa_min,
        "kappa_cap": kappa_cap,
        "mu_max": int(mu_max),
        "m_max": int(m_max),
        "models": models,
    }
    return FitResult(model=best.model, gamma_bar=gamma_bar, kappa=best.kappa, mu=best.mu,
                     m=best.m, epsilon=best.epsilon, candidates=candidates,
                     eval_points=grid.x, grid=meta)
