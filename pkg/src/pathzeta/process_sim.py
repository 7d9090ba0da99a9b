"""Seeded simulation of uniformly sampled one-dimensional paths.

Every simulator draws from a counter-based Philox stream keyed by
``(seed, replica)``, so replicas can be generated in any order or on any
number of workers and still reproduce bit for bit.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidInputError, InvalidParameterError, ParseError


@dataclass(frozen=True)
class SeedSpec:
    seed: int
    replica: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.replica) < 0:
            raise InvalidParameterError(f"replica index must be non-negative, got {self.replica}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.seed), int(self.replica)])
        return np.random.Generator(np.random.Philox(ss))


def _as_seed(seed: SeedSpec | int) -> SeedSpec:
    return seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Values v_0..v_n of a path at the times k t / n, k = 0..n."""

    t: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise InvalidInputError("a sampled path needs at least two samples (n >= 1)")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("path values must be finite")
        if not (math.isfinite(self.t) and self.t > 0):
            raise InvalidParameterError(f"horizon must be positive and finite, got {self.t}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return self.t / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.dt

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampledPath):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.values, other.values)

    __hash__ = None


def _check_grid(t: float, n: int) -> tuple[float, int]:
    if not (isinstance(t, (int, float, np.floating, np.integer)) and math.isfinite(t) and t > 0):
        raise InvalidParameterError(f"horizon t must be positive and finite, got {t}")
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"number of steps must be an integer >= 1, got {n}")
    return float(t), int(n)


def _brownian_values(t: float, n: int, seed: SeedSpec) -> np.ndarray:
    rng = seed.generator()
    steps = rng.standard_normal(n)
    steps *= math.sqrt(t / n)
    v = np.empty(n + 1)
    v[0] = 0.0
    np.cumsum(steps, out=v[1:])
    return v


def simulate_brownian(t: float, n: int, seed: SeedSpec | int) -> SampledPath:
    """Standard Brownian motion started at 0."""
    t, n = _check_grid(t, n)
    return SampledPath(t, _brownian_values(t, n, _as_seed(seed)))


def simulate_reflected(t: float, n: int, seed: SeedSpec | int) -> SampledPath:
    """|B| built from the same stream as :func:`simulate_brownian`."""
    t, n = _check_grid(t, n)
    return SampledPath(t, np.abs(_brownian_values(t, n, _as_seed(seed))))


def simulate_drift(mu: float, sigma: float, t: float, n: int, seed: SeedSpec | int) -> SampledPath:
    """mu s + sigma B_s, sharing the Brownian stream of the same seed."""
    t, n = _check_grid(t, n)
    if not (math.isfinite(mu)):
        raise InvalidParameterError(f"drift must be finite, got {mu}")
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    b = _brownian_values(t, n, _as_seed(seed))
    return SampledPath(t, mu * (np.arange(n + 1) * (t / n)) + sigma * b)


def simulate_ou(theta: float, sigma: float, x0: float, t: float, n: int, seed: SeedSpec | int) -> SampledPath:
    """Ornstein-Uhlenbeck path sampled through its exact Gaussian transition."""
    t, n = _check_grid(t, n)
    if not (math.isfinite(theta) and theta > 0):
        raise InvalidParameterError(f"theta must be positive, got {theta}")
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    dt = t / n
    a = math.exp(-theta * dt)
    s = sigma * math.sqrt(-math.expm1(-2.0 * theta * dt) / (2.0 * theta))
    z = _as_seed(seed).generator().standard_normal(n)
    z *= s
    v = np.empty(n + 1)
    v[0] = x0
    # AR(1) recursion v_{k+1} = a v_k + s z_k
    v[1:] = lfilter([1.0], [1.0, -a], z, zi=[a * x0])[0]
    return SampledPath(t, v)


def stable_increment(alpha, u, w):
    """Symmetric alpha-stable variate from a uniform angle and an exponential.

    ``u`` lies in (-pi/2, pi/2) and ``w`` is Exp(1). The result has
    characteristic function exp(-|s|^alpha); at alpha = 2 that is Normal(0, 2).
    Works elementwise on arrays.
    """
    alpha = float(alpha)
    if not (0 < alpha <= 2):
        raise InvalidParameterError(f"alpha must lie in (0, 2], got {alpha}")
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if alpha == 2.0:
        out = 2.0 * np.sin(u) * np.sqrt(w)
    elif alpha == 1.0:
        out = np.tan(u)
    else:
        out = (
            np.sin(alpha * u)
            / np.cos(u) ** (1.0 / alpha)
            * (np.cos(u - alpha * u) / w) ** ((1.0 - alpha) / alpha)
        )
    return out[()] if out.ndim == 0 else out


def stable_draws(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` standard symmetric stable draws from ``rng``."""
    # open-interval angles: (k + 1/2) 2^-53 never hits the endpoints
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    u = np.pi * ((k + 0.5) * 2.0**-53 - 0.5)
    w = rng.standard_exponential(size)
    np.maximum(w, np.finfo(np.float64).tiny, out=w)
    return stable_increment(alpha, u, w)


def simulate_alpha_stable(alpha: float, t: float, n: int, seed: SeedSpec | int) -> SampledPath:
    """Symmetric alpha-stable Levy process with increments dt^{1/alpha} S."""
    t, n = _check_grid(t, n)
    if not (0 < alpha <= 2):
        raise InvalidParameterError(f"alpha must lie in (0, 2], got {alpha}")
    steps = stable_draws(alpha, n, _as_seed(seed).generator())
    steps *= (t / n) ** (1.0 / alpha)
    v = np.empty(n + 1)
    v[0] = 0.0
    np.cumsum(steps, out=v[1:])
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("stable path overflowed; alpha too small for this horizon")
    return SampledPath(t, v)


# --- CSV ---------------------------------------------------------------------


def path_to_csv(path: SampledPath) -> str:
    buf = io.StringIO()
    buf.write("time,value\n")
    for s, x in zip(path.times, path.values):
        buf.write(f"{s:.17g},{x:.17g}\n")
    return buf.getvalue()


def write_path_csv(path: SampledPath, dest: str | os.PathLike) -> None:
    with open(dest, "w", newline="") as fh:
        fh.write(path_to_csv(path))


def parse_path_csv(lines: Iterable[str]) -> tuple[np.ndarray, np.ndarray]:
    """Parse ``time,value`` rows; times must be strictly increasing.

    Returns the raw ``(times, values)`` arrays, so single-sample inputs are
    accepted even though they do not form a :class:`SampledPath`.
    """
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        raise ParseError("empty file, expected header 'time,value'", line=1)
    if [h.strip() for h in header] != ["time", "value"]:
        raise ParseError(f"expected header 'time,value', got {','.join(header)!r}", line=1)
    times, values = [], []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line=lineno)
        try:
            s, x = float(row[0]), float(row[1])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if not (math.isfinite(s) and math.isfinite(x)):
            raise ParseError("non-finite number", line=lineno)
        if times and s <= times[-1]:
            raise ParseError("time column must be strictly increasing", line=lineno)
        times.append(s)
        values.append(x)
    if not values:
        raise ParseError("no data rows", line=2)
    return np.array(times), np.array(values)


def read_path_csv(src: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    with open(src, newline="") as fh:
        return parse_path_csv(fh)
