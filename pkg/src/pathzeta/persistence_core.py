"""Superlevel-set barcodes of sampled paths and the counts built on them.

The barcode is computed by a union-find style sweep over samples in
decreasing order. Two independent scans serve as oracles: an alternating
running-max / running-min scan for N^eps, and an up-crossing scan for the
local count N^{x,x+eps}. Both use the step interpolant of the samples, so
they must agree with the barcode exactly, not approximately.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numba
import numpy as np

from .errors import DegenerateSampleError, InvalidInputError, InvalidParameterError, ParseError
from .process_sim import SampledPath


@dataclass(frozen=True)
class Bar:
    birth: float
    death: float
    is_infinite: bool = False

    @property
    def length(self) -> float:
        return self.birth - self.death


@dataclass(frozen=True, eq=False)
class Barcode:
    """Bars of a superlevel filtration; row 0 is the infinite bar.

    The infinite bar is stored at (max, min) so its length is the range.
    """

    births: np.ndarray = field(repr=False)
    deaths: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.array(self.births, dtype=np.float64)
        d = np.array(self.deaths, dtype=np.float64)
        if b.ndim != 1 or b.shape != d.shape or b.size == 0:
            raise InvalidInputError("a barcode needs matching birth/death arrays with the infinite bar first")
        if np.any(b < d):
            raise InvalidInputError("every bar must satisfy birth >= death")
        if np.any(b[1:] > b[0]) or np.any(d[1:] < d[0]):
            raise InvalidInputError("the infinite bar must span the whole range")
        b.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "births", b)
        object.__setattr__(self, "deaths", d)

    @classmethod
    def from_bars(cls, bars: Iterable[Bar]) -> "Barcode":
        bars = list(bars)
        inf = [b for b in bars if b.is_infinite]
        if len(inf) != 1:
            raise InvalidInputError(f"exactly one infinite bar required, found {len(inf)}")
        rest = [b for b in bars if not b.is_infinite]
        ordered = inf + rest
        return cls(np.array([b.birth for b in ordered]), np.array([b.death for b in ordered]))

    def __len__(self) -> int:
        return self.births.size

    def __iter__(self) -> Iterator[Bar]:
        for i, (b, d) in enumerate(zip(self.births.tolist(), self.deaths.tolist())):
            yield Bar(b, d, i == 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Barcode):
            return NotImplemented
        return np.array_equal(self.births, other.births) and np.array_equal(self.deaths, other.deaths)

    __hash__ = None

    @property
    def path_max(self) -> float:
        return float(self.births[0])

    @property
    def path_min(self) -> float:
        return float(self.deaths[0])

    @property
    def range(self) -> float:
        return float(self.births[0] - self.deaths[0])

    @cached_property
    def lengths(self) -> np.ndarray:
        """All bar lengths in storage order (infinite bar first)."""
        out = self.births - self.deaths
        out.setflags(write=False)
        return out

    @cached_property
    def sorted_lengths(self) -> np.ndarray:
        out = np.sort(self.lengths)
        out.setflags(write=False)
        return out

    def finite_lengths(self) -> np.ndarray:
        return self.lengths[1:]


# --- barcode sweep -------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _sweep(v, order):
    n = v.shape[0]
    rank = np.empty(n, np.int64)
    for r in range(n):
        rank[order[r]] = r
    # processed runs are [lo, hi]; each endpoint stores the other end and
    # the rank of the run's peak (smaller rank = elder)
    other = np.full(n, -1, np.int64)
    peak = np.empty(n, np.int64)
    births = np.empty(n, np.float64)
    deaths = np.empty(n, np.float64)
    m = 1
    for r in range(n):
        i = order[r]
        val = v[i]
        left = i > 0 and other[i - 1] >= 0
        right = i < n - 1 and other[i + 1] >= 0
        if not left and not right:
            other[i] = i
            peak[i] = r
        elif left and not right:
            a = other[i - 1]
            other[a] = i
            other[i] = a
            peak[i] = peak[a]
        elif right and not left:
            b = other[i + 1]
            other[b] = i
            other[i] = b
            peak[i] = peak[b]
        else:
            a = other[i - 1]
            b = other[i + 1]
            pa = peak[a]
            pb = peak[b]
            young = pa if pa > pb else pb
            elder = pa if pa < pb else pb
            birth = v[order[young]]
            if birth > val:
                births[m] = birth
                deaths[m] = val
                m += 1
            other[a] = b
            other[b] = a
            peak[a] = elder
            peak[b] = elder
            other[i] = a  # interior marker; only endpoints are consulted
    births[0] = v[order[0]]
    deaths[0] = v[order[n - 1]]
    return births[:m].copy(), deaths[:m].copy()


def _values(path) -> np.ndarray:
    v = path.values if isinstance(path, SampledPath) else np.asarray(path, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError("path must be a non-empty one-dimensional sequence")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("path values must be finite")
    return np.ascontiguousarray(v, dtype=np.float64)


def superlevel_barcode(path: SampledPath | Sequence[float] | np.ndarray) -> Barcode:
    """Barcode of the superlevel filtration of the step interpolant.

    Samples are swept from the highest value down; equal values are
    processed in index order, so the earlier sample is the elder. Merges
    at the peak value of the younger component (zero-length bars) emit no
    bar.
    """
    v = _values(path)
    order = np.argsort(-v, kind="stable")
    b, d = _sweep(v, order)
    return Barcode(b, d)


# --- global and local counts ---------------------------------------------


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    return eps


def count_bars_geq(barcode: Barcode, eps: float) -> int:
    """N^eps: number of bars of length >= eps, the infinite bar included."""
    eps = _check_eps(eps)
    s = barcode.sorted_lengths
    return int(s.size - np.searchsorted(s, eps, side="left"))


def count_bars_geq_many(barcode: Barcode, eps: np.ndarray) -> np.ndarray:
    """Vectorised :func:`count_bars_geq` over a grid of thresholds."""
    eps = np.asarray(eps, dtype=np.float64)
    if np.any(~(eps > 0)):
        raise InvalidParameterError("all eps must be positive")
    s = barcode.sorted_lengths
    return s.size - np.searchsorted(s, eps, side="left")


@numba.njit(cache=True, nogil=True)
def _updown(v, eps):
    n = v.shape[0]
    lo = v[0]
    hi = v[0]
    for k in range(n):
        if v[k] < lo:
            lo = v[k]
        if v[k] > hi:
            hi = v[k]
    if not hi - lo >= eps:
        return 0
    # alternate: wait for a drop of eps below the running max, then for a
    # rise of eps above the running min; each completed rise is a new bar
    count = 1
    mx = v[0]
    mn = v[0]
    falling = False
    for k in range(n):
        x = v[k]
        if not falling:
            if x > mx:
                mx = x
            if mx - x >= eps:
                falling = True
                mn = x
        else:
            if x < mn:
                mn = x
            if x - mn >= eps:
                falling = False
                mx = x
                count += 1
    return count


def count_bars_updown(path, eps: float) -> int:
    """N^eps from one pass of alternating eps-drawdowns and eps-rises.

    Independent of the barcode sweep; the two must agree exactly.
    """
    eps = _check_eps(eps)
    return int(_updown(_values(path), eps))


def count_rectangle(barcode: Barcode, x: float, eps: float, include_infinite: bool = True) -> int:
    """Diagram points with death <= x and birth >= x + eps."""
    eps = _check_eps(eps)
    top = float(x) + eps
    b, d = barcode.births, barcode.deaths
    if not include_infinite:
        b, d = b[1:], d[1:]
    return int(np.count_nonzero((d <= x) & (b >= top)))


@numba.njit(cache=True, nogil=True)
def _upcross(v, x, top):
    armed = True  # the run before the first sample counts as below x
    seen_low = False
    count = 0
    for k in range(v.shape[0]):
        if v[k] <= x:
            armed = True
            seen_low = True
        elif armed and v[k] >= top:
            count += 1
            armed = False
    return count if seen_low else 0


def count_upcrossings(path, x: float, eps: float, include_infinite: bool = True) -> int:
    """N^{x,x+eps} counted along the path.

    Counts maximal runs of samples above x that reach x + eps, provided
    the path visits (-inf, x] at all. The run holding the global maximum
    corresponds to the infinite bar; ``include_infinite=False`` drops it.
    """
    eps = _check_eps(eps)
    v = _values(path)
    x = float(x)
    top = x + eps
    c = int(_upcross(v, x, top))
    if not include_infinite and c > 0 and v.max() >= top:
        c -= 1
    return c


def count_upcrossings_many(path, x: float, eps: np.ndarray) -> np.ndarray:
    v = _values(path)
    return np.array([count_upcrossings(v, x, e) for e in np.asarray(eps, dtype=np.float64)], dtype=np.int64)


# --- functionals ----------------------------------------------------------


def pers_p(barcode: Barcode, p: float, include_infinite: bool = True) -> float:
    """Sum of bar lengths to the power p."""
    p = float(p)
    if not p > 0:
        raise InvalidParameterError(f"p must be positive, got {p}")
    lengths = barcode.lengths if include_infinite else barcode.finite_lengths()
    return math.fsum(np.power(lengths, p).tolist())


def tree_measure(barcode: Barcode, eps: float) -> float:
    """Total length of the eps-trimmed merge tree, sum of (length - eps)_+."""
    eps = float(eps)
    if not eps >= 0:
        raise InvalidParameterError(f"eps must be non-negative, got {eps}")
    return math.fsum(np.maximum(barcode.lengths - eps, 0.0).tolist())


def mellin_count_integral(barcode: Barcode, p: float) -> float:
    """p * int_0^inf e^{p-1} N^e de, evaluated piece by piece.

    N^e is constant between consecutive sorted lengths, so the integral is a
    finite sum of (count) * (L_j^p - L_{j-1}^p).
    """
    p = float(p)
    if not p > 0:
        raise InvalidParameterError(f"p must be positive, got {p}")
    s = barcode.sorted_lengths
    m = s.size
    knots = np.concatenate(([0.0], s))
    powers = np.power(knots, p)
    counts = m - np.arange(m)  # N^e on (L_{j-1}, L_j]
    return math.fsum((counts * np.diff(powers)).tolist())


def tree_measure_from_counts(barcode: Barcode, eps: float) -> float:
    """int_eps^inf N^a da over the piecewise-constant count function."""
    eps = float(eps)
    if not eps >= 0:
        raise InvalidParameterError(f"eps must be non-negative, got {eps}")
    s = barcode.sorted_lengths
    s = s[s > eps]
    m = s.size
    knots = np.concatenate(([eps], s))
    counts = m - np.arange(m)
    return math.fsum((counts * np.diff(knots)).tolist())


def holder_exponent_estimate(path, eps_grid: Sequence[float], shift: float = 0.0) -> float:
    """Log-log slope of N^eps against 1/eps, floored at 1.

    ``shift`` counts bars at ``eps - shift`` to undo the systematic
    shortening of bars on a sampled path (see :mod:`pathzeta.discretization`).
    """
    eps = np.asarray(eps_grid, dtype=np.float64)
    if eps.ndim != 1 or eps.size < 2:
        raise InvalidParameterError("eps grid needs at least two points")
    if np.unique(eps).size < 2:
        raise InvalidParameterError("eps grid needs at least two distinct values")
    if np.any(eps - shift <= 0):
        raise InvalidParameterError("every eps must exceed the shift")
    bc = superlevel_barcode(path)
    counts = count_bars_geq_many(bc, eps - shift)
    if np.any(counts == 0):
        raise DegenerateSampleError("some eps exceeds the path range; no bars to count")
    slope = np.polyfit(np.log(1.0 / eps), np.log(counts.astype(np.float64)), 1)[0]
    return max(float(slope), 1.0)


# --- CSV ------------------------------------------------------------------


def barcode_to_csv(barcode: Barcode) -> str:
    buf = io.StringIO()
    buf.write("birth,death,is_infinite\n")
    for bar in barcode:
        buf.write(f"{bar.birth:.17g},{bar.death:.17g},{'true' if bar.is_infinite else 'false'}\n")
    return buf.getvalue()


def write_barcode_csv(barcode: Barcode, dest: str | os.PathLike) -> None:
    with open(dest, "w", newline="") as fh:
        fh.write(barcode_to_csv(barcode))


_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


def parse_bar_rows(lines: Iterable[str]) -> list[Bar]:
    """Rows of ``birth,death,is_infinite``; no constraint on the flag count."""
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        raise ParseError("empty file, expected header 'birth,death,is_infinite'", line=1)
    if [h.strip() for h in header] != ["birth", "death", "is_infinite"]:
        raise ParseError(f"expected header 'birth,death,is_infinite', got {','.join(header)!r}", line=1)
    bars = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
        try:
            b, d = float(row[0]), float(row[1])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        flag = row[2].strip().lower()
        if flag not in _TRUE | _FALSE:
            raise ParseError(f"is_infinite must be true/false, got {row[2]!r}", line=lineno)
        if not (math.isfinite(b) and math.isfinite(d)):
            raise ParseError("non-finite coordinate", line=lineno)
        if b < d:
            raise ParseError("birth must be >= death in superlevel orientation", line=lineno)
        bars.append(Bar(b, d, flag in _TRUE))
    return bars


def parse_barcode_csv(lines: Iterable[str]) -> Barcode:
    bars = parse_bar_rows(lines)
    try:
        return Barcode.from_bars(bars)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from None


def read_barcode_csv(src: str | os.PathLike) -> Barcode:
    with open(src, newline="") as fh:
        return parse_barcode_csv(fh)
