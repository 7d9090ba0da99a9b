"""Closed-form zeta functions, expectation series and laws for Brownian-type processes.

Each expectation has a representation that converges fast for large eps
(erfc sums) and, where one exists, a theta-type representation that
converges fast for small eps. The switch happens at eps^2 / t = 1. Every
series is truncated by an estimated remainder, never a fixed term count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import InvalidParameterError, PoleError, SeriesConvergenceError
from .special_functions import DEFAULT_POLICY, EvalPolicy, erfc, gamma, gaussian_pdf, riemann_zeta

SQRT_PI = math.sqrt(math.pi)
PI2 = math.pi * math.pi


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms: int
    bound: float


def _closed(value: float) -> SeriesResult:
    return SeriesResult(float(value), 0, 0.0)


def sum_series(term: Callable[[int], float], policy: EvalPolicy = DEFAULT_POLICY, start: int = 1) -> SeriesResult:
    """Sum term(start) + term(start+1) + ... until the estimated tail is below tol.

    The tail after term k is estimated as |a_k| r / (1 - r), with r the
    largest magnitude ratio over the last two steps. That bound is exact for
    geometric tails and conservative for the log-concave erfc and Gaussian
    tails used here. Two consecutive zero terms end the sum.
    """
    parts: list[float] = []
    mags = [math.inf, math.inf, math.inf]
    bound = math.inf
    for k in range(start, start + policy.max_terms):
        a = float(term(k))
        if not math.isfinite(a):
            raise SeriesConvergenceError(f"non-finite term at k={k}")
        parts.append(a)
        mags = [mags[1], mags[2], abs(a)]
        if mags[2] == 0.0 and mags[1] == 0.0:
            bound = 0.0
        elif mags[0] > 0 and mags[1] > 0 and math.isfinite(mags[0]):
            r = max(mags[2] / mags[1], mags[1] / mags[0])
            bound = mags[2] * r / (1.0 - r) if r < 1.0 else math.inf
        if bound <= policy.tol:
            return SeriesResult(math.fsum(parts), len(parts), bound)
    raise SeriesConvergenceError(
        f"series did not reach tolerance {policy.tol:g} within {policy.max_terms} terms (tail estimate {bound:g})"
    )


def _pos(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")
    return value


def _nonneg(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value >= 0):
        raise InvalidParameterError(f"{name} must be non-negative and finite, got {value}")
    return value


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value}")
    return value


def _clamp01(r: SeriesResult) -> SeriesResult:
    return SeriesResult(min(max(r.value, 0.0), 1.0), r.terms, r.bound)


# --- zeta functions -------------------------------------------------------


def _gamma_half_zeta(p: float) -> float:
    """Gamma((p+1)/2) zeta(p-1), continued through its removable singularities.

    For p < 1 the reflection formulas for zeta and Gamma give
    -(2 pi)^s Gamma(1-s) zeta(1-s) / Gamma(-s/2) with s = p - 1, which is
    finite at the odd negative integers where Gamma((p+1)/2) has poles
    cancelled by trivial zeros of zeta.
    """
    if p == 2.0:
        raise PoleError("zeta(p-1) has a pole at p = 2")
    if p >= 1.0:
        return gamma((p + 1.0) / 2.0) * riemann_zeta(p - 1.0)
    s = p - 1.0
    return -((2.0 * math.pi) ** s) * gamma(1.0 - s) * riemann_zeta(1.0 - s) / gamma(-s / 2.0)


def zeta_bm(p: float, t: float = 1.0) -> float:
    """zeta-function E[Pers_p^p] of Brownian motion on [0, t].

    4 (2^p - 3) / sqrt(pi) (t/2)^{p/2} Gamma((p+1)/2) zeta(p-1), simple pole
    at p = 2 with residue t.
    """
    p = _finite("p", p)
    t = _pos("t", t)
    return 4.0 * (2.0**p - 3.0) / SQRT_PI * (t / 2.0) ** (p / 2.0) * _gamma_half_zeta(p)


def zeta_hat_bm(p: float, t: float = 1.0) -> float:
    """Tail zeta-function of Brownian motion, the infinite bar excluded.

    2^{3-3p/2} t^{p/2} Gamma(p) / Gamma(p/2) zeta(p-1). The Gamma ratio is
    rewritten with the duplication formula as 2^{p-1} Gamma((p+1)/2) / sqrt(pi),
    which removes its spurious singularities at negative integers.
    """
    p = _finite("p", p)
    t = _pos("t", t)
    return 2.0 ** (2.0 - p / 2.0) / SQRT_PI * t ** (p / 2.0) * _gamma_half_zeta(p)


def mellin_range_tail_bm(p: float, t: float = 1.0) -> float:
    """Mellin transform in eps of P(R_t >= eps) for Brownian motion."""
    p = _pos("p", p)
    t = _pos("t", t)
    return (2.0**p - 4.0) * zeta_hat_bm(p, t) / p


def eta_bm(p: float, t: float = 1.0) -> float:
    """(3 2^p - 8)(p - 2)(2 pi t)^{-p/2} zeta_bm(p, t), symmetric under p -> 3 - p."""
    p = _finite("p", p)
    t = _pos("t", t)
    if p == 2.0:
        # (p-2) zeta_bm -> t at the pole
        return (3.0 * 4.0 - 8.0) * t / (2.0 * math.pi * t)
    return (3.0 * 2.0**p - 8.0) * (p - 2.0) * (2.0 * math.pi * t) ** (-p / 2.0) * zeta_bm(p, t)


def zeta_reflected(p: float, t: float = 1.0) -> float:
    """zeta-function of reflected Brownian motion |B| on [0, t]."""
    p = _finite("p", p)
    t = _pos("t", t)
    return 2.0 ** (1.0 - p / 2.0) * (2.0**p - 2.0) * t ** (p / 2.0) / SQRT_PI * _gamma_half_zeta(p)


# --- range law ------------------------------------------------------------


def _range_erfc(a: float, policy: EvalPolicy) -> SeriesResult:
    return sum_series(lambda k: 4.0 * (-1) ** (k - 1) * k * erfc(k * a), policy)


def _range_theta(a: float, policy: EvalPolicy) -> SeriesResult:
    a2 = a * a

    def term(j: int) -> float:
        h = j - 0.5
        return -8.0 * math.exp(-PI2 * h * h / a2) * (1.0 / (2.0 * a2) + 1.0 / (4.0 * PI2 * h * h))

    r = sum_series(term, policy)
    return SeriesResult(1.0 + r.value, r.terms, r.bound)


def prob_range_geq_series(eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    eps = _pos("eps", eps)
    t = _pos("t", t)
    a = eps / math.sqrt(2.0 * t)
    r = _range_erfc(a, policy) if eps * eps >= t else _range_theta(a, policy)
    return _clamp01(r)


def prob_range_geq(eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """P(max B - min B >= eps) on [0, t]."""
    return prob_range_geq_series(eps, t, policy).value


# --- E[N^eps] -------------------------------------------------------------


def _nveps_bm_erfc(eps: float, t: float, policy: EvalPolicy) -> SeriesResult:
    a = eps / math.sqrt(2.0 * t)
    return sum_series(lambda k: 4.0 * ((2 * k - 1) * erfc((2 * k - 1) * a) - k * erfc(2 * k * a)), policy)


def _nveps_bm_theta(eps: float, t: float, policy: EvalPolicy) -> SeriesResult:
    u = t / (eps * eps)

    def term(k: int) -> float:
        kk = PI2 * k * k
        return 2.0 * (2.0 * (-1) ** k - 1.0) * math.exp(-kk * u / 2.0) * u * (1.0 + 1.0 / (kk * u))

    r = sum_series(term, policy)
    return SeriesResult(u / 2.0 + 2.0 / 3.0 + r.value, r.terms, r.bound)


def expected_nveps_bm_series(eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY,
                             representation: str = "auto") -> SeriesResult:
    eps = _pos("eps", eps)
    t = _pos("t", t)
    rep = _pick(representation, eps, t)
    return _nveps_bm_erfc(eps, t, policy) if rep == "erfc" else _nveps_bm_theta(eps, t, policy)


def expected_nveps_bm(eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """E[N^eps] for Brownian motion on [0, t]."""
    return expected_nveps_bm_series(eps, t, policy).value


def _pick(representation: str, eps: float, t: float) -> str:
    if representation == "auto":
        return "erfc" if eps * eps >= t else "theta"
    if representation not in ("erfc", "theta"):
        raise InvalidParameterError(f"representation must be 'auto', 'erfc' or 'theta', got {representation!r}")
    return representation


def _nveps_reflected_erfc(eps: float, t: float, policy: EvalPolicy) -> SeriesResult:
    a = eps / math.sqrt(2.0 * t)
    return sum_series(lambda k: 2.0 * k * (erfc(k * a) - 2.0 * erfc(2 * k * a)), policy)


def _nveps_reflected_theta(eps: float, t: float, policy: EvalPolicy) -> SeriesResult:
    # unit-horizon formula at eps / sqrt(t), by Brownian scaling
    e = eps / math.sqrt(t)
    e2 = e * e

    def term(k: int) -> float:
        kk = PI2 * k * k
        far = math.exp(-2.0 * kk / e2)
        near = math.exp(-kk / (2.0 * e2))
        return (4.0 * kk * far + e2 * far - 2.0 * near * (kk + e2)) / (kk * e2)

    r = sum_series(term, policy)
    return SeriesResult(1.0 / (2.0 * e2) + 1.0 / 6.0 + r.value, r.terms, r.bound)


def expected_nveps_reflected_series(eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY,
                                    representation: str = "auto") -> SeriesResult:
    eps = _pos("eps", eps)
    t = _pos("t", t)
    rep = _pick(representation, eps, t)
    return _nveps_reflected_erfc(eps, t, policy) if rep == "erfc" else _nveps_reflected_theta(eps, t, policy)


def expected_nveps_reflected(eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """E[N^eps] for reflected Brownian motion on [0, t]."""
    return expected_nveps_reflected_series(eps, t, policy).value


# --- local counts ---------------------------------------------------------


def expected_nxxeps_bm_series(x: float, eps: float, t: float = 1.0,
                              policy: EvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    x = _nonneg("x", x)
    eps = _pos("eps", eps)
    t = _pos("t", t)
    s = math.sqrt(2.0 * t)
    return sum_series(lambda k: erfc((x + (2 * k - 1) * eps) / s), policy)


def expected_nxxeps_bm(x: float, eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """E[N^{x,x+eps}] for Brownian motion started at 0, x >= 0."""
    return expected_nxxeps_bm_series(x, eps, t, policy).value


def expected_nxxeps_reflected_series(x: float, eps: float, t: float = 1.0,
                                     policy: EvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    x = _nonneg("x", x)
    eps = _pos("eps", eps)
    t = _pos("t", t)
    s = math.sqrt(2.0 * t)
    return sum_series(lambda k: 2.0 * erfc((x + (2 * k + 1) * eps) / s), policy, start=0)


def expected_nxxeps_reflected(x: float, eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """E[N^{x,x+eps}] for reflected Brownian motion, x >= 0."""
    return expected_nxxeps_reflected_series(x, eps, t, policy).value


# --- bar-length laws ------------------------------------------------------


_SURVIVAL_SATURATION = 0.125


def bar_length_survival_bm_series(k: int, eps: float, t: float = 1.0,
                                  policy: EvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    if k not in (2, 3, 4):
        raise InvalidParameterError(f"only the 2nd, 3rd and 4th longest bars are available, got k={k}")
    eps = _pos("eps", eps)
    t = _pos("t", t)
    if eps < _SURVIVAL_SATURATION * math.sqrt(t):
        # the erfc sums cancel catastrophically here (terms grow like eps^{-2k+2});
        # survival is monotone in eps and already within 1e-26 of 1 at the cutoff (k = 4 is the loosest)
        return SeriesResult(1.0, 0, 1e-26)
    b = eps * math.sqrt(2.0 / t)
    if k == 2:
        def term(m):
            return 4.0 * m * (erfc(m * b) - 4.0 * erfc(2 * m * b))
    elif k == 3:
        def term(m):
            return 8.0 / 3.0 * m * (4.0 * (4 * m * m - 1) * erfc(2 * m * b) - (m * m - 1) * erfc(m * b))
    else:
        def term(m):
            m2 = m * m
            return 8.0 / 15.0 * m * (
                (m2 * m2 - 5 * m2 + 4) * erfc(m * b) - 16.0 * (4 * m2 * m2 - 5 * m2 + 1) * erfc(2 * m * b)
            )
    r = _clamp01(sum_series(term, policy))
    if 1.0 - r.value <= r.bound:
        # indistinguishable from 1 at the attained accuracy; snapping keeps l_4 <= l_3 <= l_2
        r = SeriesResult(1.0, r.terms, r.bound)
    return r


def bar_length_survival_bm(k: int, eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """P(l_k >= eps) for the k-th longest bar of Brownian motion (l_1 is the range)."""
    return bar_length_survival_bm_series(k, eps, t, policy).value


# --- densities ------------------------------------------------------------


def local_time_density_bm(x: float, w: float, t: float = 1.0) -> float:
    """Density at w > 0 of the Brownian local time at level x >= 0; an atom sits at 0."""
    x = _nonneg("x", x)
    w = _pos("w", w)
    t = _pos("t", t)
    return 2.0 * gaussian_pdf(x + w, t)


def avg_diagram_density_bm_series(x: float, eps: float, t: float = 1.0,
                                  policy: EvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    x = _pos("x", x)
    eps = _pos("eps", eps)
    t = _pos("t", t)
    c = math.sqrt(2.0 / (math.pi * t**3))

    def term(k: int) -> float:
        u = x + (2 * k - 1) * eps
        return c * (2 * k - 1) * u * math.exp(-u * u / (2.0 * t))

    return sum_series(term, policy)


def avg_diagram_density_bm(x: float, eps: float, t: float = 1.0, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Density of the average persistence diagram of Brownian motion.

    Equals the mixed derivative d^2/dx deps of E[N^{x,x+eps}].
    """
    return avg_diagram_density_bm_series(x, eps, t, policy).value


# --- drift and Ornstein-Uhlenbeck -----------------------------------------


def expected_nxxeps_drift_ray(mu: float, eps: float) -> float:
    """Mean number of finite bars in the rectangle for mu s + B_s on [0, inf), x > 0."""
    mu = _pos("mu", mu)
    eps = _pos("eps", eps)
    return 1.0 / math.expm1(2.0 * mu * eps)


def expected_local_time_ou_zero_series(theta: float, sigma: float, t: float,
                                       policy: EvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    theta = _pos("theta", theta)
    sigma = _pos("sigma", sigma)
    t = _pos("t", t)
    scale = sigma / math.sqrt(theta)
    lead = scale * (2.0 * theta * t + math.log(4.0)) / SQRT_PI

    def term(k: int) -> float:
        # 1 / (Gamma((1-2k)/2) Gamma(k)) = (-1)^k Gamma(k + 1/2) / (pi Gamma(k)) by reflection
        log_mag = -2.0 * theta * k * t + math.lgamma(k + 0.5) - math.lgamma(k) - math.log(math.pi) - 2.0 * math.log(k)
        sign = (-1) ** (k + 1) * (-1) ** k
        return scale * sign * math.exp(log_mag)

    r = sum_series(term, policy)
    return SeriesResult(lead + r.value, r.terms, r.bound)


def expected_local_time_ou_zero(theta: float, sigma: float, t: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """E[L_t^0] for the OU process dX = -theta X dt + sigma dB started at 0."""
    return expected_local_time_ou_zero_series(theta, sigma, t, policy).value


def ou_local_time_asymptote(theta: float, sigma: float, t: float) -> float:
    """Leading linear growth (sigma / sqrt theta) 2 theta t / sqrt(pi)."""
    return sigma / math.sqrt(theta) * 2.0 * theta * t / SQRT_PI


# --- registry for tabulation ----------------------------------------------


@dataclass(frozen=True)
class Quantity:
    name: str
    params: tuple[str, ...]
    evaluate: Callable[..., SeriesResult]


def _wrap_closed(fn: Callable[..., float]) -> Callable[..., SeriesResult]:
    def inner(*args, policy: EvalPolicy = DEFAULT_POLICY):
        return _closed(fn(*args))

    return inner


def _wrap_series(fn: Callable[..., SeriesResult]) -> Callable[..., SeriesResult]:
    def inner(*args, policy: EvalPolicy = DEFAULT_POLICY):
        return fn(*args, policy=policy)

    return inner


QUANTITIES: dict[str, Quantity] = {
    q.name: q
    for q in [
        Quantity("zeta_bm", ("p", "t"), _wrap_closed(zeta_bm)),
        Quantity("zeta_hat_bm", ("p", "t"), _wrap_closed(zeta_hat_bm)),
        Quantity("eta_bm", ("p", "t"), _wrap_closed(eta_bm)),
        Quantity("zeta_reflected", ("p", "t"), _wrap_closed(zeta_reflected)),
        Quantity("prob_range_geq", ("eps", "t"), _wrap_series(prob_range_geq_series)),
        Quantity("expected_nveps_bm", ("eps", "t"), _wrap_series(expected_nveps_bm_series)),
        Quantity("expected_nveps_reflected", ("eps", "t"), _wrap_series(expected_nveps_reflected_series)),
        Quantity("expected_nxxeps_bm", ("x", "eps", "t"), _wrap_series(expected_nxxeps_bm_series)),
        Quantity("expected_nxxeps_reflected", ("x", "eps", "t"), _wrap_series(expected_nxxeps_reflected_series)),
        Quantity("bar_length_survival_bm", ("k", "eps", "t"),
                 lambda k, eps, t, policy=DEFAULT_POLICY: bar_length_survival_bm_series(int(k), eps, t, policy)),
        Quantity("local_time_density_bm", ("x", "w", "t"), _wrap_closed(local_time_density_bm)),
        Quantity("avg_diagram_density_bm", ("x", "eps", "t"), _wrap_series(avg_diagram_density_bm_series)),
        Quantity("expected_nxxeps_drift_ray", ("mu", "eps"), _wrap_closed(expected_nxxeps_drift_ray)),
        Quantity("expected_local_time_ou_zero", ("theta", "sigma", "t"),
                 _wrap_series(expected_local_time_ou_zero_series)),
    ]
}


def evaluate(quantity: str, *params: float, policy: EvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    """Evaluate a registered quantity by name with positional parameters."""
    try:
        q = QUANTITIES[quantity]
    except KeyError:
        raise InvalidParameterError(
            f"unknown quantity {quantity!r}; choose from {', '.join(sorted(QUANTITIES))}"
        ) from None
    if len(params) != len(q.params):
        raise InvalidParameterError(f"{quantity} takes parameters ({', '.join(q.params)}), got {len(params)} values")
    return q.evaluate(*params, policy=policy)


def tabulate(quantity: str, grid: list[tuple[float, ...]], policy: EvalPolicy = DEFAULT_POLICY) -> str:
    """CSV ``quantity,<param names>,value,terms,bound`` with one row per grid point."""
    q = QUANTITIES.get(quantity)
    if q is None:
        evaluate(quantity)  # raises with the list of names
    lines = [",".join(("quantity", *q.params, "value", "terms", "bound"))]
    for point in grid:
        r = evaluate(quantity, *point, policy=policy)
        cells = [quantity, *(f"{float(v):.17g}" for v in point), f"{r.value:.17g}", str(r.terms), f"{r.bound:.17g}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
