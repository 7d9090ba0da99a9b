"""Persistence diagrams as point measures, and transport distances between them.

Points are (birth, death) pairs in superlevel orientation, birth > death.
The diagonal acts as an unlimited reservoir: a point can be sent to its
l-infinity projection at cost persistence / 2.
"""

from __future__ import annotations

import io
import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import InvalidInputError, InvalidParameterError, ParseError
from .persistence_core import Bar, Barcode, parse_bar_rows

DIAGONAL = -1


@dataclass(frozen=True, eq=False)
class Diagram:
    points: np.ndarray = field(repr=False)  # shape (k, 2): birth, death

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("diagram coordinates must be finite")
        if np.any(pts[:, 0] <= pts[:, 1]):
            raise InvalidInputError("every diagram point needs birth > death")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def empty(cls) -> "Diagram":
        return cls(np.empty((0, 2)))

    @classmethod
    def from_barcode(cls, barcode: Barcode) -> "Diagram":
        """All bars of positive length; the infinite bar sits at (max, min)."""
        keep = barcode.lengths > 0
        return cls(np.column_stack([barcode.births[keep], barcode.deaths[keep]]))

    @classmethod
    def from_bars(cls, bars: Iterable[Bar]) -> "Diagram":
        return cls(np.array([(b.birth, b.death) for b in bars if b.birth > b.death]).reshape(-1, 2))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def persistence(self) -> np.ndarray:
        return self.points[:, 0] - self.points[:, 1]

    def __repr__(self) -> str:
        return f"Diagram({len(self)} points)"


@dataclass(frozen=True)
class Transport:
    """Optimal matching; ``pairs`` holds (i, j) with -1 meaning the diagonal."""

    pairs: tuple[tuple[int, int], ...]
    cost: float
    p: float


def _check_p(p: float, allow_inf: bool = False) -> float:
    p = float(p)
    if math.isinf(p) and p > 0 and allow_inf:
        return p
    if not (math.isfinite(p) and p >= 1):
        raise InvalidParameterError(f"order p must be a finite real >= 1, got {p}")
    return p


def linf_cost(a: Diagram, b: Diagram) -> np.ndarray:
    """Pairwise l-infinity distances between points of a and b."""
    pa, pb = a.points, b.points
    return np.maximum(
        np.abs(pa[:, None, 0] - pb[None, :, 0]),
        np.abs(pa[:, None, 1] - pb[None, :, 1]),
    )


def _augmented(a: Diagram, b: Diagram, p: float) -> np.ndarray:
    n, m = len(a), len(b)
    big = np.inf
    c = np.full((n + m, m + n), big)
    c[:n, :m] = linf_cost(a, b) ** p
    c[n:, m:] = 0.0
    if n:
        c[np.arange(n), m + np.arange(n)] = (a.persistence / 2.0) ** p
    if m:
        c[n + np.arange(m), np.arange(m)] = (b.persistence / 2.0) ** p
    return c


def wasserstein_p(a: Diagram, b: Diagram, p: float) -> tuple[float, Transport]:
    """Exact p-Wasserstein distance with l-infinity ground metric."""
    p = _check_p(p)
    n, m = len(a), len(b)
    if n + m == 0:
        return 0.0, Transport((), 0.0, p)
    c = _augmented(a, b, p)
    rows, cols = linear_sum_assignment(c)
    pairs = []
    terms = []
    for r, k in zip(rows.tolist(), cols.tolist()):
        if r < n and k < m:
            pairs.append((r, k))
        elif r < n:
            pairs.append((r, DIAGONAL))
        elif k < m:
            pairs.append((DIAGONAL, k))
        else:
            continue
        terms.append(c[r, k])
    cost = math.fsum(terms)
    return cost ** (1.0 / p), Transport(tuple(pairs), cost, p)


def _feasible(allowed: np.ndarray) -> bool:
    graph = csr_matrix(allowed.astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck(a: Diagram, b: Diagram) -> float:
    """Bottleneck distance: smallest achievable maximum l-infinity edge cost."""
    n, m = len(a), len(b)
    if n + m == 0:
        return 0.0
    c = _augmented(a, b, 1.0)
    candidates = np.unique(c[np.isfinite(c)])
    lo, hi = 0, candidates.size - 1
    # the all-diagonal matching is always feasible, so hi is a valid answer
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(c <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def distance(a: Diagram, b: Diagram, p: float) -> float:
    """d_p for finite p, bottleneck for p = inf."""
    p = _check_p(p, allow_inf=True)
    return bottleneck(a, b) if math.isinf(p) else wasserstein_p(a, b, p)[0]


def pers_p_measure(a: Diagram, p: float) -> float:
    """Distance to the empty diagram: (sum (persistence/2)^p)^{1/p}; max for p = inf."""
    p = float(p)
    if not p >= 1:
        raise InvalidParameterError(f"p must be >= 1, got {p}")
    half = a.persistence / 2.0
    if half.size == 0:
        return 0.0
    if math.isinf(p):
        return float(half.max())
    return math.fsum((half**p).tolist()) ** (1.0 / p)


def zeta_of_measure_direct(a: Diagram, p: float) -> float:
    p = float(p)
    if not p > 0:
        raise InvalidParameterError(f"p must be positive, got {p}")
    return math.fsum(np.power(a.persistence, p).tolist())


def zeta_of_measure_mellin(a: Diagram, p: float) -> float:
    """p int e^{p-1} #{persistence >= e} de, exact over the step function."""
    p = float(p)
    if not p > 0:
        raise InvalidParameterError(f"p must be positive, got {p}")
    s = np.sort(a.persistence)
    knots = np.concatenate(([0.0], s))
    counts = s.size - np.arange(s.size)
    return math.fsum((counts * np.diff(np.power(knots, p))).tolist())


def zeta_of_measure(a: Diagram, p: float, rtol: float = 1e-9) -> float:
    """Pers_p^p of the diagram, checked against its Mellin representation."""
    direct = zeta_of_measure_direct(a, p)
    mellin = zeta_of_measure_mellin(a, p)
    if abs(direct - mellin) > rtol * max(abs(direct), 1e-300):
        raise ArithmeticError(f"direct sum {direct!r} and Mellin integral {mellin!r} disagree")
    return direct


# --- brute force oracle ---------------------------------------------------


def enumerate_matching_costs(a: Diagram, b: Diagram, p: float = 1.0) -> Iterable[list[float]]:
    """Edge costs (to the power p) of every partial injection a -> b.

    Unmatched points go to the diagonal. The powered costs are taken from
    the same arrays the assignment solver sees, so optimal values compare
    exactly. Exponential in size; meant for at most six points per diagram.
    """
    n, m = len(a), len(b)
    c = _augmented(a, b, p)
    ha = [float(c[i, m + i]) for i in range(n)]
    hb = [float(c[n + j, j]) for j in range(m)]
    for k in range(min(n, m) + 1):
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.permutations(range(m), k):
                edges = [float(c[r, q]) for r, q in zip(rows, cols)]
                edges += [ha[i] for i in range(n) if i not in rows]
                edges += [hb[j] for j in range(m) if j not in cols]
                yield edges


def brute_force_wasserstein(a: Diagram, b: Diagram, p: float) -> float:
    p = _check_p(p)
    best = min(math.fsum(edges) for edges in enumerate_matching_costs(a, b, p))
    return best ** (1.0 / p)


def brute_force_bottleneck(a: Diagram, b: Diagram) -> float:
    return min((max(edges) if edges else 0.0) for edges in enumerate_matching_costs(a, b))


# --- IO -------------------------------------------------------------------


def parse_diagram_csv(lines: Iterable[str]) -> Diagram:
    """Diagram from a barcode-format CSV; zero-length rows are dropped."""
    try:
        return Diagram.from_bars(parse_bar_rows(lines))
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from None


def read_diagram_csv(src: str | os.PathLike) -> Diagram:
    with open(src, newline="") as fh:
        return parse_diagram_csv(fh)


def diagram_to_csv(a: Diagram) -> str:
    buf = io.StringIO()
    buf.write("birth,death,is_infinite\n")
    for b, d in a.points.tolist():
        buf.write(f"{b:.17g},{d:.17g},false\n")
    return buf.getvalue()


def distance_matrix(diagrams: Sequence[Diagram], p: float) -> np.ndarray:
    k = len(diagrams)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = distance(diagrams[i], diagrams[j], p)
    return out


def distance_matrix_to_csv(names: Sequence[str], matrix: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(["name", *names]) + "\n")
    for name, row in zip(names, np.asarray(matrix).tolist()):
        buf.write(",".join([name, *(f"{v:.17g}" for v in row)]) + "\n")
    return buf.getvalue()
