"""Real-argument special functions used by the closed-form series.

erfc and the gamma family delegate to the C library through :mod:`math`;
the Riemann zeta function is evaluated here, because neither the standard
library nor numpy provide it for negative arguments with the accuracy the
functional-equation checks need.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import InvalidParameterError, PoleError


class NaNInputWarning(RuntimeWarning):
    """A special function received NaN and returned NaN."""


@dataclass(frozen=True)
class EvalPolicy:
    """Stopping rule shared by every truncated series.

    A series stops once its estimated remainder drops below ``tol`` in
    absolute value, or after ``max_terms`` terms (reported as unconverged).
    """

    tol: float = 1e-12
    max_terms: int = 1_000_000

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidParameterError(f"tolerance must be positive, got {self.tol}")
        if self.max_terms < 10:
            raise InvalidParameterError(f"term cap must be at least 10, got {self.max_terms}")


DEFAULT_POLICY = EvalPolicy()


def _flag_nan(name: str) -> float:
    warnings.warn(f"{name} received NaN", NaNInputWarning, stacklevel=3)
    return math.nan


def erfc(x: float) -> float:
    """Complementary error function 1 - erf(x)."""
    x = float(x)
    if math.isnan(x):
        return _flag_nan("erfc")
    return math.erfc(x)


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function for real x off the non-positive integers.

    Overflows to +-inf above x ~ 171.6; use :func:`log_gamma` there.
    """
    x = float(x)
    if math.isnan(x):
        return _flag_nan("gamma")
    if _is_pole(x):
        raise PoleError(f"gamma has a pole at {x}")
    try:
        return math.gamma(x)
    except OverflowError:
        return gamma_sign(x) * math.inf


def gamma_sign(x: float) -> int:
    """Sign of Gamma(x): +1 for x > 0, (-1)^ceil(-x) for negative non-integers."""
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x > 0:
        return 1
    return -1 if math.ceil(-x) % 2 else 1


def log_gamma(x: float) -> float:
    """log|Gamma(x)|; combine with :func:`gamma_sign` for the sign."""
    x = float(x)
    if math.isnan(x):
        return _flag_nan("log_gamma")
    if _is_pole(x):
        raise PoleError(f"gamma has a pole at {x}")
    return math.lgamma(x)


# Alternating-series acceleration for the Dirichlet eta function.
# With n terms the error is below 3 / (3 + sqrt 8)^n, so n = 40 is far past
# double precision.
_ETA_TERMS = 40


@lru_cache(maxsize=1)
def _eta_weights() -> tuple[float, ...]:
    n = _ETA_TERMS
    d = []
    acc = Fraction(0)
    for i in range(n + 1):
        acc += Fraction(math.factorial(n + i - 1) * 4**i, math.factorial(n - i) * math.factorial(2 * i))
        d.append(n * acc)
    dn = d[-1]
    # eta(s) = sum_k w_k / (k+1)^s with w_k = (-1)^k (d_n - d_k) / d_n
    return tuple(float((-1) ** k * (dn - d[k]) / dn) for k in range(n))


def dirichlet_eta(s: float) -> float:
    """Alternating zeta sum_{k>=1} (-1)^{k-1} k^{-s}, accurate for s >= -1."""
    w = _eta_weights()
    return math.fsum(wk * math.exp(-s * math.log(k + 1)) for k, wk in enumerate(w))


def _zeta_eta(s: float) -> float:
    if s >= 60:
        return 1.0 + 2.0**-s
    # 1 - 2^{1-s} without cancellation near s = 1
    denom = -math.expm1((1.0 - s) * math.log(2.0))
    return dirichlet_eta(s) / denom


def zeta_functional_equation(s: float) -> float:
    """zeta(s) through the reflection zeta(s) = 2^s pi^{s-1} sin(pi s/2) Gamma(1-s) zeta(1-s).

    Defined for s < 1. Used for s < -1, and exposed separately so the two
    routes can be compared on (0, 1).
    """
    s = float(s)
    if s >= 1:
        raise InvalidParameterError("the reflection route requires s < 1")
    if s == math.floor(s) and s < 0 and int(s) % 2 == 0:
        return 0.0  # trivial zeros
    sin_term = math.sin(math.pi * s / 2)
    one_minus = 1.0 - s
    z = _zeta_eta(one_minus)
    # Gamma(1-s) overflows for s < -170; assemble in log space
    log_mag = (
        s * math.log(2.0)
        + (s - 1.0) * math.log(math.pi)
        + math.log(abs(sin_term))
        + math.lgamma(one_minus)
        + math.log(abs(z))
    )
    sign = math.copysign(1.0, sin_term) * math.copysign(1.0, z)
    return sign * math.exp(log_mag)


def riemann_zeta(s: float) -> float:
    """Riemann zeta function for real s != 1."""
    s = float(s)
    if math.isnan(s):
        return _flag_nan("riemann_zeta")
    if s == 1.0:
        raise PoleError("zeta has a pole at s = 1")
    # the accelerated eta sum is still accurate to ~1e-14 down to s = -1, and
    # avoids losing digits of 1 - s right next to s = 0 in the reflection
    if s >= -1:
        return _zeta_eta(s)
    return zeta_functional_equation(s)


def gaussian_pdf(x: float, t: float) -> float:
    """Heat kernel exp(-x^2 / 2t) / sqrt(2 pi t)."""
    if not t > 0:
        raise InvalidParameterError(f"variance t must be positive, got {t}")
    return math.exp(-x * x / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
