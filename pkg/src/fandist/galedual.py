"""The Gale transform, its inverse, and the dependence/functional bridge.

A sequence of n affinely spanning points in K^d is carried to n vectors in
K^(n-d-1) (the columns of the conjugated kernel-basis matrix of the lifted
point matrix).  Affine dependencies among the points correspond exactly to
linear functionals on the dual vectors, which is the bridge every fan
construction in this package rests on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from fandist.errors import (
    NonzeroSum,
    NotADependence,
    NotAffinelySpanning,
    NotSpanning,
    ZeroFunctional,
)
from fandist.exactnum import (
    Cyclotomic,
    ExactMatrix,
    FieldMismatch,
    Scalar,
    conj,
    hermitian_dot,
    scalar_from_json,
    scalar_is_zero,
    scalar_to_json,
    scalar_zero,
)

__all__ = [
    "GaleDualPair",
    "PointConfig",
    "dependence_to_functional",
    "functional_to_dependence",
    "gale_pair_from_dual",
    "gale_transform",
    "inverse_gale",
    "lift_augment",
    "linear_change_of_basis",
]


class PointConfig:
    """A labeled sequence of points over one exact field.

    ``conductor`` is None for rational coordinates, or the N of Q(zeta_N).
    ``coloring`` is an optional list assigning each point a class in
    0..m-1.  The affine-spanning check is cached once verified.
    """

    __slots__ = ("dim", "points", "conductor", "coloring", "_spanning")

    def __init__(self, dim: int, points: Sequence[Sequence[Scalar]],
                 conductor: Optional[int] = None,
                 coloring: Optional[Sequence[int]] = None):
        pts = []
        for p in points:
            if len(p) != dim:
                raise ValueError("point dimension mismatch")
            row = []
            for c in p:
                if isinstance(c, Cyclotomic):
                    if conductor is None:
                        conductor = c.N
                    elif c.N != conductor:
                        raise FieldMismatch("mixed conductors in one config")
                    row.append(c)
                else:
                    row.append(Fraction(c))
            pts.append(tuple(row))
        if conductor is not None:
            pts = [tuple(Cyclotomic.from_rational(conductor, c)
                         if not isinstance(c, Cyclotomic) else c for c in p)
                   for p in pts]
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "conductor", conductor)
        if coloring is not None:
            coloring = tuple(int(c) for c in coloring)
            if len(coloring) != len(pts):
                raise ValueError("coloring length mismatch")
        object.__setattr__(self, "coloring", coloring)
        object.__setattr__(self, "_spanning", None)

    def __setattr__(self, name, value):
        if name == "_spanning":
            object.__setattr__(self, name, value)
            return
        raise AttributeError("PointConfig is immutable")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def num_classes(self) -> int:
        if self.coloring is None:
            return 1
        return max(self.coloring) + 1

    def class_indices(self, k: int) -> tuple[int, ...]:
        if self.coloring is None:
            return tuple(range(self.n)) if k == 0 else ()
        return tuple(i for i, c in enumerate(self.coloring) if c == k)

    def class_sizes(self) -> list[int]:
        return [len(self.class_indices(k)) for k in range(self.num_classes)]

    def lifted_matrix(self) -> ExactMatrix:
        """(dim+1) x n matrix whose columns are (a_j, 1)."""
        one = Fraction(1) if self.conductor is None else \
            Cyclotomic.from_rational(self.conductor, 1)
        rows = [[self.points[j][i] for j in range(self.n)]
                for i in range(self.dim)]
        rows.append([one] * self.n)
        return ExactMatrix(rows, self.conductor)

    def affinely_spanning(self) -> bool:
        if self._spanning is None:
            self._spanning = (self.n >= self.dim + 1
                              and self.lifted_matrix().rank() == self.dim + 1)
        return self._spanning

    def linearly_spanning(self) -> bool:
        return ExactMatrix.from_columns(list(self.points),
                                        self.conductor).rank() == self.dim

    def with_coloring(self, coloring) -> "PointConfig":
        return PointConfig(self.dim, self.points, self.conductor, coloring)

    def to_conductor(self, N: int) -> "PointConfig":
        """Embed a config into Q(zeta_N); rational configs promote freely."""
        if self.conductor == N:
            return self
        if self.conductor is None:
            pts = [[Cyclotomic.from_rational(N, c) for c in p]
                   for p in self.points]
        else:
            pts = [[c.embed(N) for c in p] for p in self.points]
        return PointConfig(self.dim, pts, N, self.coloring)

    def to_json(self) -> dict:
        field = "rational" if self.conductor is None else \
            {"cyclotomic": self.conductor}
        out = {
            "field": field,
            "dim": self.dim,
            "points": [[scalar_to_json(c) for c in p] for p in self.points],
        }
        if self.coloring is not None:
            out["coloring"] = list(self.coloring)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PointConfig":
        field = obj.get("field", "rational")
        conductor = None if field == "rational" else int(field["cyclotomic"])
        pts = [[scalar_from_json(c) for c in p] for p in obj["points"]]
        if conductor is not None:
            pts = [[c if isinstance(c, Cyclotomic)
                    else Cyclotomic.from_rational(conductor, c) for c in p]
                   for p in pts]
        return cls(int(obj["dim"]), pts, conductor, obj.get("coloring"))

    def __eq__(self, other):
        return (isinstance(other, PointConfig)
                and self.dim == other.dim
                and self.conductor == other.conductor
                and self.points == other.points
                and self.coloring == other.coloring)

    def __repr__(self):
        f = "Q" if self.conductor is None else f"Q(zeta_{self.conductor})"
        return f"PointConfig(n={self.n}, dim={self.dim}, field={f})"


@dataclass(frozen=True)
class GaleDualPair:
    """A primal configuration together with its Gale dual.

    ``basis_matrix`` is the matrix B whose rows are the chosen kernel basis
    of the lifted primal matrix; the dual points are the columns of its
    conjugate.  Keeping B makes the dependence/functional bridge
    basis-stable.
    """

    primal: PointConfig
    dual: PointConfig
    basis_matrix: ExactMatrix

    def validate(self) -> None:
        A = self.primal.lifted_matrix()
        for b in self.basis_matrix.entries:
            if any(not scalar_is_zero(x) for x in A.mul_vec(b)):
                raise NotADependence("basis row is not in ker A")


def gale_transform(primal: PointConfig) -> GaleDualPair:
    """Gale transform of an affinely spanning configuration.

    The dual points linearly span K^(n-d-1) and sum to zero exactly.
    """
    if not primal.affinely_spanning():
        raise NotAffinelySpanning(
            f"{primal.n} points do not affinely span dimension {primal.dim}")
    A = primal.lifted_matrix()
    kb = A.kernel_basis()  # n - d - 1 vectors of length n
    B = ExactMatrix(kb, primal.conductor)
    Bc = B.conjugate()
    dual_pts = [Bc.column(j) for j in range(primal.n)]
    dual = PointConfig(len(kb), dual_pts, primal.conductor, primal.coloring)
    return GaleDualPair(primal, dual, B)


def _check_dual_preconditions(dual: PointConfig):
    m = dual.dim
    zero = scalar_zero(dual.conductor)
    total = [zero] * m
    for p in dual.points:
        total = [a + b for a, b in zip(total, p)]
    if any(not scalar_is_zero(t) for t in total):
        raise NonzeroSum("dual points must sum to zero")
    if not dual.linearly_spanning():
        raise NotSpanning(f"dual points do not linearly span K^{m}")


def inverse_gale(dual: PointConfig, verify: bool = True) -> PointConfig:
    """Reconstruct a primal whose Gale transform is the given points.

    The kernel basis of the matrix with columns g_i is rearranged so the
    all-ones vector is its last member (one deterministic basis exchange);
    the recovered points affinely span K^d with d = n - dim - 1.
    """
    _check_dual_preconditions(dual)
    n, m = dual.n, dual.dim
    d = n - m - 1
    B = ExactMatrix.from_columns(list(dual.points), dual.conductor)
    kb = B.kernel_basis()  # d + 1 vectors of length n
    assert len(kb) == d + 1, "kernel dimension off: dual not spanning?"
    one = Fraction(1) if dual.conductor is None else \
        Cyclotomic.from_rational(dual.conductor, 1)
    ones = tuple([one] * n)
    # express the all-ones vector in the kernel basis, then exchange
    W = ExactMatrix.from_columns(kb, dual.conductor)
    coeff = W.solve(ones)
    assert coeff is not None, "all-ones vector must lie in ker B"
    swap = next(i for i, c in enumerate(coeff) if not scalar_is_zero(c))
    basis = [kb[i] for i in range(d + 1) if i != swap] + [ones]
    primal_pts = [tuple(conj(basis[k][j]) for k in range(d))
                  for j in range(n)]
    primal = PointConfig(d, primal_pts, dual.conductor, dual.coloring)
    if verify:
        if not primal.affinely_spanning():
            raise NotSpanning("recovered primal fails to affinely span")
        pair = gale_transform(primal)
        if linear_change_of_basis(pair.dual.points, dual.points) is None:
            raise NotSpanning(
                "recovered primal's dual is not linearly isomorphic to input")
    return primal


def gale_pair_from_dual(dual: PointConfig) -> GaleDualPair:
    """Inverse Gale transform packaged with its basis matrix.

    The resulting pair satisfies: dual points are exactly the given ones
    (columns of the conjugate of ``basis_matrix``), and the primal is an
    affinely spanning configuration in K^(n-dim-1).
    """
    primal = inverse_gale(dual, verify=False)
    # rows of B are the conjugates of the coordinate rows of the dual
    rows = [tuple(conj(dual.points[j][i]) for j in range(dual.n))
            for i in range(dual.dim)]
    B = ExactMatrix(rows, dual.conductor)
    pair = GaleDualPair(primal, dual, B)
    pair.validate()
    return pair


def lift_augment(config: PointConfig) -> PointConfig:
    """Lift points to height one and append the negated sum.

    The output linearly spans K^(D+1) and sums to zero, hence is
    inverse-Gale eligible with d = n - D - 1.
    """
    if not config.affinely_spanning():
        raise NotAffinelySpanning("input must affinely span its space")
    one = Fraction(1) if config.conductor is None else \
        Cyclotomic.from_rational(config.conductor, 1)
    lifted = [tuple(p) + (one,) for p in config.points]
    acc = list(lifted[0])
    for p in lifted[1:]:
        acc = [a + b for a, b in zip(acc, p)]
    lifted.append(tuple(-a for a in acc))
    # the augmented point carries no color; callers exclude it by index
    return PointConfig(config.dim + 1, lifted, config.conductor, None)


def _is_dependence(pair: GaleDualPair, lam: Sequence[Scalar]) -> bool:
    primal = pair.primal
    if len(lam) != primal.n:
        return False
    if all(scalar_is_zero(x) for x in lam):
        return False
    zero = scalar_zero(primal.conductor)
    s = zero
    for x in lam:
        s = s + x
    if not scalar_is_zero(s):
        return False
    for i in range(primal.dim):
        acc = zero
        for j, x in enumerate(lam):
            acc = acc + x * primal.points[j][i]
        if not scalar_is_zero(acc):
            return False
    return True


def dependence_to_functional(pair: GaleDualPair, lam: Sequence[Scalar]):
    """The unique alpha with <alpha, g_i> = lambda_i for every i.

    lambda must be a nonzero affine dependence of the primal (checked
    exactly).  Solved through the stored kernel basis: lambda = B^T alpha.
    """
    lam = [Fraction(x) if not isinstance(x, Cyclotomic) else x for x in lam]
    if pair.primal.conductor is not None:
        lam = [x if isinstance(x, Cyclotomic)
               else Cyclotomic.from_rational(pair.primal.conductor, x)
               for x in lam]
    if not _is_dependence(pair, lam):
        raise NotADependence("lambda is not a nonzero affine dependence")
    alpha = pair.basis_matrix.transpose().solve(lam)
    assert alpha is not None, "dependence must lie in the row space of B"
    for i, g in enumerate(pair.dual.points):
        if hermitian_dot(alpha, g) != lam[i]:
            raise AssertionError("functional does not reproduce lambda")
    return alpha


def functional_to_dependence(pair: GaleDualPair, alpha: Sequence[Scalar]):
    """lambda_i = <alpha, g_i>; exact dependence of the primal by duality."""
    if all(scalar_is_zero(a) if isinstance(a, Cyclotomic) else Fraction(a) == 0
           for a in alpha):
        raise ZeroFunctional("alpha must be nonzero")
    lam = tuple(hermitian_dot(alpha, g) for g in pair.dual.points)
    if not _is_dependence(pair, lam):
        raise AssertionError("bridge postcondition failed (bug)")
    return lam


def linear_change_of_basis(src_points, dst_points):
    """Invertible T with T src_i = dst_i for all i, or None.

    Used to verify that two duals differ only by a linear isomorphism.
    """
    if len(src_points) != len(dst_points):
        return None
    m = len(src_points[0])
    if any(len(p) != m for p in dst_points):
        return None
    S = ExactMatrix.from_columns(list(src_points))
    # pick a spanning subset of source columns deterministically
    chosen = []
    for j in range(len(src_points)):
        trial = chosen + [j]
        sub = ExactMatrix.from_columns([src_points[k] for k in trial],
                                       S.conductor)
        if sub.rank() == len(trial):
            chosen.append(j)
        if len(chosen) == m:
            break
    if len(chosen) < m:
        return None
    Ssub = ExactMatrix.from_columns([src_points[k] for k in chosen], S.conductor)
    # solve T * Ssub = Dsub column by column via Ssub^T T^T = ...
    Tt_cols = []
    for i in range(m):
        rhs = [dst_points[k][i] for k in chosen]
        sol = Ssub.transpose().solve(rhs)
        if sol is None:
            return None
        Tt_cols.append(sol)
    T = ExactMatrix.from_columns(Tt_cols, S.conductor).transpose()
    for s, t in zip(src_points, dst_points):
        if T.mul_vec(s) != tuple(t):
            return None
    if T.rank() < m:
        return None
    return T
