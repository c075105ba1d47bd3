"""Exact rational feasibility for proper Tverberg weight systems.

Deciding whether disjoint parts I_1..I_r admit strictly positive weights
t_i with equal part sums and equal weighted centroids is a linear program:
maximize the slack eps subject to t_i >= eps and the equality system.  The
feasible region is compact (part sums are pinned to one), so the maximum
is attained and the decision is the exact sign of the optimum.

Everything here runs over Fraction.  Cyclotomic configurations are
realified first: each coordinate is replaced by its coefficient vector
over the power basis, a Q-linear injection that preserves and reflects
equality of Q-linear combinations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from fandist.errors import PreconditionError
from fandist.exactnum import Cyclotomic, _field_data
from fandist.galedual import PointConfig

__all__ = [
    "ExactWeightSolver",
    "ProperWeightProblem",
    "WeightWitness",
    "proper_weights",
    "realify",
]

SIMPLEX_ITERATION_CAP = 200_000


def realify(config: PointConfig) -> PointConfig:
    """Replace each cyclotomic coordinate by its basis coefficient vector.

    Proper-weight feasibility over the realified points coincides with
    equality of the original complex combinations.
    """
    if config.conductor is None:
        raise PreconditionError("realify expects a cyclotomic configuration")
    deg = _field_data(config.conductor).deg
    pts = []
    for p in config.points:
        row: list[Fraction] = []
        for c in p:
            row.extend(c.coeffs)
        pts.append(row)
    return PointConfig(config.dim * deg, pts, None, config.coloring)


def realify_if_needed(config: PointConfig) -> PointConfig:
    return config if config.conductor is None else realify(config)


class ProperWeightProblem:
    """Rational points plus pairwise disjoint nonempty parts."""

    __slots__ = ("points", "parts")

    def __init__(self, points: Sequence[Sequence[Fraction]],
                 parts: Sequence[Sequence[int]]):
        pts = tuple(tuple(Fraction(c) for c in p) for p in points)
        seen: set[int] = set()
        norm = []
        for part in parts:
            t = tuple(sorted(int(i) for i in part))
            if not t:
                raise PreconditionError("parts must be nonempty")
            if seen.intersection(t):
                raise PreconditionError("parts must be pairwise disjoint")
            if t[0] < 0 or t[-1] >= len(pts):
                raise PreconditionError("part index out of range")
            seen.update(t)
            norm.append(t)
        self.points = pts
        self.parts = tuple(norm)


@dataclass(frozen=True)
class WeightWitness:
    """Strictly positive weights certifying a proper Tverberg tuple.

    ``weights`` lists only part indices; everything else is implicitly
    zero.  ``slack`` is the optimal eps, i.e. the least weight.
    """

    weights: dict[int, Fraction]
    common_point: tuple[Fraction, ...]
    slack: Fraction

    def verify(self, points, parts) -> bool:
        if self.slack <= 0:
            return False
        support = set()
        for part in parts:
            support.update(part)
        if set(self.weights) != support:
            return False
        if any(w <= 0 for w in self.weights.values()):
            return False
        if min(self.weights.values()) != self.slack:
            return False
        dim = len(points[0]) if points else 0
        for part in parts:
            if sum(self.weights[i] for i in part) != 1:
                return False
            for c in range(dim):
                s = sum(self.weights[i] * Fraction(points[i][c]) for i in part)
                if s != self.common_point[c]:
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "weights": {str(i): str(w) for i, w in sorted(self.weights.items())},
            "common_point": [str(c) for c in self.common_point],
            "slack": str(self.slack),
        }

    @classmethod
    def from_json(cls, obj) -> "WeightWitness":
        return cls({int(i): Fraction(w) for i, w in obj["weights"].items()},
                   tuple(Fraction(c) for c in obj["common_point"]),
                   Fraction(obj["slack"]))


# --------------------------------------------------------------------------
# integer presolve for the equality system

def _int_augmented(rows, rhs):
    out = []
    for row, b in zip(rows, rhs):
        den = b.denominator
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
        out.append([int(x.numerator * (den // x.denominator)) for x in row]
                   + [int(b.numerator * (den // b.denominator))])
    return out


def _reduce_row(row):
    g = 0
    for x in row:
        if x:
            g = gcd(g, abs(x))
            if g == 1:
                return row
    if g > 1:
        return [x // g for x in row]
    return row


def _solve_equalities_int(M, nvars):
    """Classify an integer augmented system: inconsistent/unique/under.

    Fraction-free elimination; exact throughout.  Returns
    ('inconsistent', None) | ('unique', list[Fraction]) | ('under', None).
    """
    m = len(M)
    pivots = []  # (row, col)
    r = 0
    for c in range(nvars):
        pr = None
        for rr in range(r, m):
            if M[rr][c]:
                pr = rr
                break
        if pr is None:
            continue
        M[r], M[pr] = M[pr], M[r]
        M[r] = _reduce_row(M[r])
        p = M[r][c]
        for rr in range(r + 1, m):
            f = M[rr][c]
            if f:
                M[rr] = _reduce_row(
                    [a * p - b * f for a, b in zip(M[rr], M[r])])
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    for rr in range(r, m):
        if any(M[rr][:nvars]):
            raise AssertionError("elimination left an unreduced row")
        if M[rr][nvars]:
            return "inconsistent", None
    if len(pivots) < nvars:
        return "under", None
    x = [Fraction(0)] * nvars
    for (pr, pc) in reversed(pivots):
        s = Fraction(M[pr][nvars])
        for c2 in range(pc + 1, nvars):
            if M[pr][c2]:
                s -= M[pr][c2] * x[c2]
        x[pc] = s / M[pr][pc]
    return "unique", x


def _solve_equalities(rows, rhs, nvars):
    return _solve_equalities_int(_int_augmented(rows, rhs), nvars)


# --------------------------------------------------------------------------
# exact two-phase simplex, Bland's anti-cycling rule

def _pivot(T, basis, row, col):
    piv = T[row][col]
    T[row] = [x / piv for x in T[row]]
    for r in range(len(T)):
        if r != row and T[r][col]:
            f = T[r][col]
            T[r] = [a - f * b for a, b in zip(T[r], T[row])]
    basis[row] = col


def _run_simplex(T, basis, cost, ncols, iteration_cap):
    """Maximize cost.x on the tableau in place; Bland's rule throughout."""
    m = len(T)
    z = [Fraction(0)] * (ncols + 1)
    for r in range(m):
        cb = cost[basis[r]]
        if cb:
            for j in range(ncols + 1):
                z[j] += cb * T[r][j]
    red = [z[j] - cost[j] for j in range(ncols)]
    iters = 0
    while True:
        col = None
        for j in range(ncols):
            if red[j] < 0:
                col = j
                break
        if col is None:
            return z[ncols]
        row = None
        best = None
        for r in range(m):
            a = T[r][col]
            if a > 0:
                ratio = T[r][ncols] / a
                if best is None or ratio < best or \
                        (ratio == best and basis[r] < basis[row]):
                    best, row = ratio, r
        if row is None:
            raise AssertionError("objective unbounded (cannot happen here)")
        _pivot(T, basis, row, col)
        for j in range(ncols + 1):
            z[j] = sum(cost[basis[r]] * T[r][j] for r in range(m)
                       if cost[basis[r]])
        red = [z[j] - cost[j] for j in range(ncols)]
        iters += 1
        if iters > iteration_cap:
            raise AssertionError("simplex exceeded its iteration bound")


def _simplex_max_eps(rows, rhs, nvars):
    """max eps s.t. t_i >= eps and the equality rows, via standard form.

    Variables: u_i = t_i - eps >= 0, eps = ep - em with ep, em >= 0.
    Returns (eps_opt, t) where t is a list of Fractions, or (None, None)
    when the equality system is infeasible.
    """
    m = len(rows)
    ncols = nvars + 2 + m  # u's, ep, em, artificials
    T = []
    for row, b in zip(rows, rhs):
        s = sum(row, Fraction(0))
        line = list(row) + [s, -s] + [Fraction(0)] * m + [b]
        T.append(line)
    for r in range(m):
        if T[r][ncols] < 0:
            T[r] = [-x for x in T[r]]
        T[r][nvars + 2 + r] = Fraction(1)
    basis = [nvars + 2 + r for r in range(m)]
    # phase 1: maximize -sum(artificials)
    cost1 = [Fraction(0)] * ncols
    for r in range(m):
        cost1[nvars + 2 + r] = Fraction(-1)
    val = _run_simplex(T, basis, cost1, ncols, SIMPLEX_ITERATION_CAP)
    if val != 0:
        return None, None
    # drive leftover artificials out of the basis, drop redundant rows
    r = 0
    while r < len(T):
        if basis[r] >= nvars + 2:
            col = next((j for j in range(nvars + 2) if T[r][j]), None)
            if col is None:
                del T[r]
                del basis[r]
                continue
            _pivot(T, basis, r, col)
        r += 1
    # strip artificial columns
    keep = nvars + 2
    T = [row[:keep] + [row[-1]] for row in T]
    cost2 = [Fraction(0)] * keep
    cost2[nvars] = Fraction(1)
    cost2[nvars + 1] = Fraction(-1)
    eps = _run_simplex(T, basis, cost2, keep, SIMPLEX_ITERATION_CAP)
    x = [Fraction(0)] * keep
    for r, b in enumerate(basis):
        x[b] = T[r][keep]
    t = [x[i] + eps for i in range(nvars)]
    return eps, t


class ExactWeightSolver:
    """Reusable proper-weight solver for one fixed point set.

    Coordinates are cleared to a shared integer grid once, so candidate
    systems are assembled and classified in pure integer arithmetic
    (uniform positive scaling changes no feasibility and no weights);
    only genuinely underdetermined systems reach the Fraction simplex.
    """

    __slots__ = ("points", "ipoints", "dim")

    def __init__(self, points: Sequence[Sequence[Fraction]]):
        pts = [tuple(Fraction(c) for c in p) for p in points]
        scale = 1
        for p in pts:
            for c in p:
                scale = scale * c.denominator // gcd(scale, c.denominator)
        self.points = tuple(pts)
        self.ipoints = [[int(c * scale) for c in p] for p in pts]
        self.dim = len(pts[0]) if pts else 0

    def solve(self, parts) -> Optional[WeightWitness]:
        support = []
        for part in parts:
            support.extend(part)
        support.sort()
        col = {i: k for k, i in enumerate(support)}
        nvars = len(support)

        M: list[list[int]] = []
        for part in parts:
            row = [0] * (nvars + 1)
            for i in part:
                row[col[i]] = 1
            row[nvars] = 1
            M.append(row)
        base = parts[0]
        for part in parts[1:]:
            for c in range(self.dim):
                row = [0] * (nvars + 1)
                for i in part:
                    row[col[i]] += self.ipoints[i][c]
                for i in base:
                    row[col[i]] -= self.ipoints[i][c]
                M.append(row)

        status, sol = _solve_equalities_int(M, nvars)
        if status == "inconsistent":
            return None
        if status == "unique":
            t = sol
            if min(t) <= 0:
                return None
        else:
            rows = [[Fraction(x) for x in row[:nvars]] for row in M]
            rhs = [Fraction(row[nvars]) for row in M]
            eps, t = _simplex_max_eps(rows, rhs, nvars)
            if eps is None or eps <= 0:
                return None

        weights = {i: t[col[i]] for i in support}
        pts = self.points
        common = tuple(
            sum((weights[i] * pts[i][c] for i in base), Fraction(0))
            for c in range(self.dim))
        witness = WeightWitness(weights, common, min(t))
        assert witness.verify(pts, parts), \
            "witness failed exact re-verification"
        return witness


def proper_weights(problem: ProperWeightProblem) -> Optional[WeightWitness]:
    """Witness weights for a proper tuple, or None when infeasible.

    The equality system is classified first by fraction-free elimination;
    only genuinely underdetermined systems reach the simplex with Bland's
    anti-cycling rule.  Every returned witness re-verifies exactly.
    """
    return ExactWeightSolver(problem.points).solve(problem.parts)
