"""Fans, fan/tuple conversions, slicing, classification, verification.

A real r-fan of codimension r-2 is stored as r hyperplane normals and
offsets with the cyclic convention that half-flat j lies inside every
hyperplane except j and j-1 and on the nonnegative side of hyperplane j.
Construction enforces the canonical normalization (normals and offsets
each sum to zero after rescaling by the unique hyperplane dependency),
which makes the classification predicate two-sided consistent and gives
the closed-half-flat intersection law exactly.

A complex regular r-fan is a single Hermitian functional alpha and offset
beta; half-flat j collects the points whose functional value sits on the
ray through the j-th power of the standard root of unity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from fandist.errors import MalformedFan, PreconditionError, VerificationBug
from fandist.exactnum import (
    Cyclotomic,
    ExactMatrix,
    Positivity,
    hermitian_dot,
    is_positive_rational,
    scalar_from_json,
    scalar_to_json,
)
from fandist.feaslp import WeightWitness, realify_if_needed
from fandist.galedual import (
    GaleDualPair,
    PointConfig,
    dependence_to_functional,
)
from fandist.kneser import SetFamily
from fandist.tverberg import TverbergTuple

__all__ = [
    "CENTER",
    "Classification",
    "ComplexFan",
    "INTERIOR",
    "OUTSIDE",
    "RealFan",
    "VerificationReport",
    "classify_point",
    "fan_from_tuple_complex",
    "fan_from_tuple_real",
    "slice_project",
    "tuple_from_fan",
    "verify_report",
]

CENTER = "center"
INTERIOR = "interior"
OUTSIDE = "outside"


def _primitive_positive_scale(values) -> Fraction:
    """Positive factor carrying the fractions to integers with content 1.

    Scaling a whole fan by it changes no half-flat and keeps sums zero.
    """
    from math import gcd
    den = 1
    for v in values:
        den = den * v.denominator // gcd(den, v.denominator)
    num_g = 0
    for v in values:
        num_g = gcd(num_g, abs(v.numerator) * (den // v.denominator))
    if num_g == 0:
        return Fraction(1)
    return Fraction(den, num_g)


@dataclass(frozen=True)
class Classification:
    """Exactly one of center / interior(j) / outside per point."""

    kind: str
    part: Optional[int] = None
    diagnostic: Optional[str] = None

    def __str__(self):
        if self.kind == INTERIOR:
            return f"interior({self.part})"
        return self.kind


class RealFan:
    """r half-flats of codimension r-2 about a codimension r-1 center."""

    __slots__ = ("r", "dim", "normals", "offsets", "normalized")

    def __init__(self, r: int, dim: int,
                 normals: Sequence[Sequence[Fraction]],
                 offsets: Sequence[Fraction]):
        if r < 3:
            raise MalformedFan("real fans need r >= 3")
        if len(normals) != r or len(offsets) != r:
            raise MalformedFan("need exactly r normals and offsets")
        normals = [tuple(Fraction(x) for x in v) for v in normals]
        offsets = [Fraction(c) for c in offsets]
        if any(len(v) != dim for v in normals):
            raise MalformedFan("normal dimension mismatch")
        lifted = [list(v) + [-c] for v, c in zip(normals, offsets)]
        L = ExactMatrix.from_columns(lifted)
        if L.rank() != r - 1:
            raise MalformedFan("hyperplanes must have rank exactly r-1")
        for drop in range(r):
            sub = ExactMatrix.from_columns(
                [lifted[j] for j in range(r) if j != drop])
            if sub.rank() != r - 1:
                raise MalformedFan(
                    f"any r-1 hyperplanes must be independent (drop {drop})")
        if (any(sum(v[i] for v in normals) != 0 for i in range(dim))
                or sum(offsets, Fraction(0)) != 0):
            mu = L.kernel_basis()[0]
            if any(x == 0 for x in mu):
                raise MalformedFan("degenerate hyperplane dependency")
            if all(x > 0 for x in mu):
                pass
            elif all(x < 0 for x in mu):
                mu = tuple(-x for x in mu)
            else:
                raise MalformedFan(
                    "orientations admit no positive normalization")
            normals = [tuple(m * x for x in v)
                       for m, v in zip(mu, normals)]
            offsets = [m * c for m, c in zip(mu, offsets)]
        lam = _primitive_positive_scale(
            [x for v in normals for x in v] + list(offsets))
        if lam != 1:
            normals = [tuple(lam * x for x in v) for v in normals]
            offsets = [lam * c for c in offsets]
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "normals", tuple(normals))
        object.__setattr__(self, "offsets", tuple(offsets))
        object.__setattr__(self, "normalized", True)

    def __setattr__(self, *a):
        raise AttributeError("RealFan is immutable")

    def is_linear(self) -> bool:
        return all(c == 0 for c in self.offsets)

    def values(self, x: Sequence[Fraction]) -> list[Fraction]:
        return [sum(b * xi for b, xi in zip(v, x)) - c
                for v, c in zip(self.normals, self.offsets)]

    def classify(self, x: Sequence[Fraction]) -> Classification:
        if len(x) != self.dim:
            raise PreconditionError("point dimension mismatch")
        vals = self.values(x)
        nonzero = [j for j, v in enumerate(vals) if v != 0]
        if not nonzero:
            return Classification(CENTER)
        for j in range(self.r):
            prev = (j - 1) % self.r
            if all(k in (j, prev) for k in nonzero) and vals[j] > 0:
                return Classification(INTERIOR, j)
        return Classification(OUTSIDE)

    def center_point(self) -> tuple[Fraction, ...]:
        """One exact point of the center flat (it is nonempty)."""
        M = ExactMatrix(list(self.normals))
        sol = M.solve(list(self.offsets))
        if sol is None:
            raise MalformedFan("center is empty")
        return sol

    def to_json(self) -> dict:
        return {
            "kind": "real",
            "r": self.r,
            "dim": self.dim,
            "normals": [[str(x) for x in v] for v in self.normals],
            "offsets": [str(c) for c in self.offsets],
            "normalized": self.normalized,
        }

    @classmethod
    def from_json(cls, obj) -> "RealFan":
        return cls(int(obj["r"]), int(obj["dim"]),
                   [[Fraction(x) for x in v] for v in obj["normals"]],
                   [Fraction(c) for c in obj["offsets"]])


class ComplexFan:
    """Regular complex r-fan: <alpha, z> = beta + t * omega_r^j, t >= 0."""

    __slots__ = ("r", "N", "dim", "alpha", "beta")

    def __init__(self, r: int, N: int, alpha: Sequence[Cyclotomic],
                 beta: Union[Cyclotomic, Fraction, int]):
        if r < 2:
            raise MalformedFan("complex fans need r >= 2")
        if N % r:
            raise MalformedFan("conductor must be divisible by r")
        alpha = tuple(a if isinstance(a, Cyclotomic)
                      else Cyclotomic.from_rational(N, a) for a in alpha)
        if any(a.N != N for a in alpha):
            raise MalformedFan("alpha conductor mismatch")
        if all(a.is_zero() for a in alpha):
            raise MalformedFan("alpha must be nonzero")
        if not isinstance(beta, Cyclotomic):
            beta = Cyclotomic.from_rational(N, beta)
        lam = _primitive_positive_scale(
            [c for a in alpha for c in a.coeffs] + list(beta.coeffs))
        if lam != 1:
            alpha = tuple(a * lam for a in alpha)
            beta = beta * lam
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "dim", len(alpha))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def __setattr__(self, *a):
        raise AttributeError("ComplexFan is immutable")

    def omega(self, j: int = 1) -> Cyclotomic:
        return Cyclotomic.root_of_unity(self.N, (self.N // self.r) * j)

    def is_linear(self) -> bool:
        return self.beta.is_zero()

    def classify(self, x: Sequence[Cyclotomic]) -> Classification:
        if len(x) != self.dim:
            raise PreconditionError("point dimension mismatch")
        x = tuple(xi if isinstance(xi, Cyclotomic) and xi.N == self.N
                  else (xi.embed(self.N) if isinstance(xi, Cyclotomic)
                        else Cyclotomic.from_rational(self.N, xi))
                  for xi in x)
        w = hermitian_dot(self.alpha, x) - self.beta
        if w.is_zero():
            return Classification(CENTER)
        saw_rational = False
        for j in range(self.r):
            q = w * self.omega(-j)
            sign = is_positive_rational(q)
            if sign is Positivity.POSITIVE:
                return Classification(INTERIOR, j)
            if sign is not Positivity.NOT_RATIONAL:
                saw_rational = True
        if saw_rational:
            return Classification(OUTSIDE)
        return Classification(OUTSIDE, diagnostic="not-rational-real")

    def to_json(self) -> dict:
        return {
            "kind": "complex",
            "r": self.r,
            "N": self.N,
            "alpha": [scalar_to_json(a) for a in self.alpha],
            "beta": scalar_to_json(self.beta),
        }

    @classmethod
    def from_json(cls, obj) -> "ComplexFan":
        N = int(obj["N"])
        alpha = [scalar_from_json(a) for a in obj["alpha"]]
        beta = scalar_from_json(obj["beta"])
        return cls(int(obj["r"]), N, alpha, beta)


Fan = Union[RealFan, ComplexFan]


def fan_from_json(obj) -> Fan:
    if obj.get("kind") == "complex" or "alpha" in obj:
        return ComplexFan.from_json(obj)
    return RealFan.from_json(obj)


def classify_point(fan: Fan, x) -> Classification:
    return fan.classify(x)


def fan_from_tuple_real(pair: GaleDualPair, tup: TverbergTuple) -> RealFan:
    """Linear real fan distributing the dual points according to the parts.

    For each j the dependence with weights +t on part j and -t on part
    j-1 is carried to a functional alpha_j; the stored normal for
    half-flat j is -alpha_(j+1), which aligns the interior predicate with
    the part labels.  The distribution claim is re-verified exactly.
    """
    if pair.primal.conductor is not None:
        raise PreconditionError("real fans need a rational configuration")
    tup.validate(pair.primal)
    r = tup.r
    n = pair.primal.n
    t = tup.witness.weights
    alphas = []
    for j in range(r):
        lam = [Fraction(0)] * n
        for i in tup.parts[j]:
            lam[i] = t[i]
        for i in tup.parts[(j - 1) % r]:
            lam[i] = -t[i]
        alphas.append(dependence_to_functional(pair, lam))
    dim = pair.dual.dim
    normals = [tuple(-x for x in alphas[(j + 1) % r]) for j in range(r)]
    fan = RealFan(r, dim, normals, [Fraction(0)] * r)
    _verify_distribution(fan, pair.dual, tup)
    return fan


def fan_from_tuple_complex(pair: GaleDualPair,
                           tup: TverbergTuple) -> ComplexFan:
    """Linear complex regular fan from a proper tuple over Q(zeta_N)."""
    N = pair.primal.conductor
    if N is None:
        raise PreconditionError("complex fans need a cyclotomic configuration")
    r = tup.r
    if N % r:
        raise PreconditionError(f"conductor {N} must be divisible by r={r}")
    tup.validate(pair.primal)
    n = pair.primal.n
    t = tup.witness.weights
    lam = [Cyclotomic.from_rational(N, 0)] * n
    for j in range(r):
        w = Cyclotomic.root_of_unity(N, (N // r) * j)
        for i in tup.parts[j]:
            lam[i] = w * t[i]
    alpha = dependence_to_functional(pair, lam)
    # before canonical rescaling: functional values are exactly t_i omega^j
    for i, g in enumerate(pair.dual.points):
        if hermitian_dot(alpha, g) != lam[i]:
            raise VerificationBug("complex fan functional mismatch")
    fan = ComplexFan(r, N, alpha, 0)
    _verify_distribution(fan, pair.dual, tup)
    return fan


def _verify_distribution(fan: Fan, dual: PointConfig,
                         tup: TverbergTuple) -> None:
    part_of = {}
    for j, p in enumerate(tup.parts):
        for i in p:
            part_of[i] = j
    for i, g in enumerate(dual.points):
        c = fan.classify(g)
        want = part_of.get(i)
        if want is None:
            if c.kind != CENTER:
                raise VerificationBug(
                    f"leftover point {i} classifies {c}, expected center")
        elif c.kind != INTERIOR or c.part != want:
            raise VerificationBug(
                f"point {i} classifies {c}, expected interior({want})")


def tuple_from_fan(fan: RealFan, pair: GaleDualPair) -> TverbergTuple:
    """Proper tuple read off a linear real fan distributing the dual.

    Parts are the interior occupancies; the equal part sums of the
    positive functional values normalize the weights.  The witness is
    re-verified by exact substitution before the tuple is returned.
    """
    if not isinstance(fan, RealFan):
        raise PreconditionError("tuple_from_fan applies to real fans")
    if not fan.is_linear():
        raise PreconditionError("fan must be linear (zero offsets)")
    parts: list[list[int]] = [[] for _ in range(fan.r)]
    for i, g in enumerate(pair.dual.points):
        c = fan.classify(g)
        if c.kind == OUTSIDE:
            raise PreconditionError(
                f"dual point {i} lies outside the fan")
        if c.kind == INTERIOR:
            parts[c.part].append(i)
    if any(not p for p in parts):
        raise PreconditionError("every half-flat interior must be occupied")
    sums = []
    vals: dict[int, Fraction] = {}
    for j, p in enumerate(parts):
        s = Fraction(0)
        for i in p:
            v = sum(b * xi for b, xi in zip(fan.normals[j],
                                            pair.dual.points[i]))
            vals[i] = v
            s += v
        sums.append(s)
    if any(s != sums[0] for s in sums) or sums[0] <= 0:
        raise VerificationBug("part sums of functional values differ")
    weights = {i: vals[i] / sums[0] for i in vals}
    primal_pts = realify_if_needed(pair.primal).points
    dimp = len(primal_pts[0]) if primal_pts else 0
    common = tuple(
        sum((weights[i] * primal_pts[i][c] for i in parts[0]), Fraction(0))
        for c in range(dimp))
    witness = WeightWitness(weights, common, min(weights.values()))
    tup = TverbergTuple(fan.r, tuple(tuple(p) for p in parts), witness)
    tup.validate(pair.primal)
    return tup


def slice_project(fan: Fan) -> Fan:
    """Intersect a linear fan with the height-one slab and project.

    Real: alpha_j = (beta_j, gamma_j) becomes the affine hyperplane
    <beta_j, x> = -gamma_j.  Complex: alpha = (beta, gamma) becomes the
    fan with normal beta and offset -gamma.  Classification commutes with
    lifting, exactly.
    """
    if isinstance(fan, RealFan):
        if not fan.is_linear():
            raise PreconditionError("slice_project expects a linear fan")
        normals = [v[:-1] for v in fan.normals]
        offsets = [-v[-1] for v in fan.normals]
        for j, b in enumerate(normals):
            if all(x == 0 for x in b):
                raise MalformedFan(f"projected normal {j} is zero")
        return RealFan(fan.r, fan.dim - 1, normals, offsets)
    if not fan.is_linear():
        raise PreconditionError("slice_project expects a linear fan")
    beta = fan.alpha[:-1]
    gamma = fan.alpha[-1]
    if all(b.is_zero() for b in beta):
        raise MalformedFan("projected complex normal is zero")
    return ComplexFan(fan.r, fan.N, beta, -gamma)


@dataclass(frozen=True)
class VerificationReport:
    """Exact verification of a fan distribution against a configuration."""

    mode: str
    r: int
    passes: bool
    center_count: int
    interior_counts: tuple          # per half-flat totals
    cell_class_counts: dict         # "(j,k)" or "(i,j,k)" -> count
    robustness: int                 # total interior occupancy
    class_sizes: tuple
    failures: tuple
    details: dict

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "r": self.r,
            "passes": self.passes,
            "center_count": self.center_count,
            "interior_counts": list(self.interior_counts),
            "cell_class_counts": {k: v for k, v in
                                  sorted(self.cell_class_counts.items())},
            "robustness": self.robustness,
            "class_sizes": list(self.class_sizes),
            "failures": list(self.failures),
            "details": self.details,
        }


def _classify_all(fan: Fan, config: PointConfig) -> list[Classification]:
    return [fan.classify(x) for x in config.points]


def verify_report(fan: Fan, config: PointConfig, mode: str, *,
                  family: Optional[SetFamily] = None,
                  other_fan: Optional[Fan] = None) -> VerificationReport:
    """Classify every point and check the requested distribution mode.

    Modes: distribute, equidistribute, pierce, rainbow, two-fan.  All
    counting is exact integer arithmetic; the report carries per-cell
    counts and the total interior occupancy (the robustness statistic).
    """
    if mode not in ("distribute", "equidistribute", "pierce", "rainbow",
                    "two-fan"):
        raise PreconditionError(f"unknown mode {mode!r}")
    coloring = config.coloring if config.coloring is not None \
        else [0] * config.n
    ncls = max(coloring) + 1
    sizes = [sum(1 for c in coloring if c == k) for k in range(ncls)]
    cls1 = _classify_all(fan, config)
    failures: list[str] = []
    details: dict = {}

    r = fan.r
    center = sum(1 for c in cls1 if c.kind == CENTER)
    interiors = [sum(1 for c in cls1 if c.kind == INTERIOR and c.part == j)
                 for j in range(r)]
    outside = [i for i, c in enumerate(cls1) if c.kind == OUTSIDE]
    diagnostics = [i for i, c in enumerate(cls1) if c.diagnostic]
    if diagnostics:
        details["diagnostics"] = {
            str(i): cls1[i].diagnostic for i in diagnostics}
    if outside:
        failures.append(f"points outside the fan: {outside}")

    cell_counts: dict[str, int] = {}
    if mode == "two-fan":
        if other_fan is None:
            raise PreconditionError("two-fan mode needs the second fan")
        cls2 = _classify_all(other_fan, config)
        out2 = [i for i, c in enumerate(cls2) if c.kind == OUTSIDE]
        if out2:
            failures.append(f"points outside the second fan: {out2}")
        for i in range(r):
            for j in range(other_fan.r):
                cell = [p for p in range(config.n)
                        if cls1[p].kind == INTERIOR and cls1[p].part == i
                        and cls2[p].kind == INTERIOR and cls2[p].part == j]
                for k in range(ncls):
                    cnt = sum(1 for p in cell if coloring[p] == k)
                    cell_counts[f"({i},{j},{k})"] = cnt
                    if family is None and r * r * cnt > sizes[k]:
                        failures.append(
                            f"cell ({i},{j}) holds {cnt} of class {k}: "
                            f"{r * r}*{cnt} > {sizes[k]}")
                if family is not None:
                    cellset = set(cell)
                    for m in family.members:
                        if set(m) <= cellset:
                            failures.append(
                                f"family member {list(m)} sits inside "
                                f"cell ({i},{j})")
        details["second_fan_interiors"] = [
            sum(1 for c in cls2 if c.kind == INTERIOR and c.part == j)
            for j in range(other_fan.r)]
        details["second_fan_center"] = sum(
            1 for c in cls2 if c.kind == CENTER)
    else:
        for j in range(r):
            for k in range(ncls):
                cnt = sum(1 for p in range(config.n)
                          if cls1[p].kind == INTERIOR and cls1[p].part == j
                          and coloring[p] == k)
                cell_counts[f"({j},{k})"] = cnt

    if mode == "equidistribute":
        for j in range(r):
            for k in range(ncls):
                cnt = cell_counts[f"({j},{k})"]
                if r * cnt > sizes[k]:
                    failures.append(
                        f"half-flat {j} holds {cnt} of class {k}: "
                        f"{r}*{cnt} > {sizes[k]}")
    elif mode == "rainbow":
        for j in range(r):
            for k in range(ncls):
                if cell_counts[f"({j},{k})"] > 1:
                    failures.append(
                        f"half-flat {j} holds more than one of class {k}")
    elif mode == "pierce":
        if family is None:
            raise PreconditionError("pierce mode needs the family")
        meets = {}
        contained = []
        for m in family.members:
            tags = set()
            any_center = False
            for i in m:
                if cls1[i].kind == CENTER:
                    any_center = True
                elif cls1[i].kind == INTERIOR:
                    tags.add(cls1[i].part)
            count = r if any_center else len(tags)
            meets[str(list(m))] = count
            if count < 2:
                failures.append(
                    f"family member {list(m)} meets only {count} "
                    "closed half-flats")
            # the stronger conclusion from the proof, reported not enforced
            if not any_center and len(tags) == 1 and \
                    all(cls1[i].kind == INTERIOR for i in m):
                contained.append(list(m))
        details["closed_halfflat_meets"] = meets
        details["members_inside_one_interior"] = contained

    robustness = sum(interiors)
    passes = not failures
    return VerificationReport(
        mode=mode, r=r, passes=passes, center_count=center,
        interior_counts=tuple(interiors), cell_class_counts=cell_counts,
        robustness=robustness, class_sizes=tuple(sizes),
        failures=tuple(failures), details=details)
