"""Theorem-level drivers: lift, invert, search, build, slice, verify.

Every driver takes a configuration X of n points in K^D, derives
d = n - D - 1, lifts X to height one with the augmented negated-sum
point, recovers a primal by the inverse Gale transform, searches a
constrained proper tuple among the original n indices, carries it to a
linear fan, slices at height one, and verifies the projected fan against
the original coordinates with exact arithmetic.  A run either returns a
fully verified result, returns None (no tuple), or raises: guarantee
violations and verification failures are bug signals, never data errors.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from math import gcd
from typing import Optional

from fandist.errors import (
    NotAffinelySpanning,
    PreconditionError,
    VerificationBug,
)
from fandist.fans import (
    CENTER,
    INTERIOR,
    ComplexFan,
    RealFan,
    VerificationReport,
    fan_from_tuple_complex,
    fan_from_tuple_real,
    slice_project,
    verify_report,
)
from fandist.galedual import PointConfig, gale_pair_from_dual, lift_augment
from fandist.genpos import (
    SGP_GATE,
    build_counterexample,
    is_typical,
    robustness_check,
    verify_no_equidistribution,
)
from fandist.kneser import (
    ColoringCertificate,
    SetFamily,
    m_eligible,
    threshold_caps,
    verify_certificate,
)
from fandist.tverberg import (
    SearchConstraint,
    TverbergTuple,
    search_two_tuples,
    search_tuple,
)
from fandist.errors import SizeGateExceeded

__all__ = [
    "PipelineResult",
    "TwoFanResult",
    "bounds_experiment",
    "equidistribute",
    "pierce",
    "rainbow",
    "two_fans",
]


def _is_prime_power(r: int) -> bool:
    if r < 2:
        return False
    p = 2
    while p * p <= r:
        if r % p == 0:
            while r % p == 0:
                r //= p
            return r == 1
        p += 1
    return True  # r itself prime


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _digest(config: PointConfig) -> str:
    return hashlib.sha256(
        canonical_json(config.to_json()).encode()).hexdigest()


@dataclass(frozen=True)
class PipelineResult:
    """Verified outcome of a single-fan pipeline run.

    The affine fan classifies the original input points exactly as the
    tuple's parts; timing is carried on the object but never serialized,
    keeping result JSON byte-deterministic.
    """

    mode: str
    input_digest: str
    r: int
    m: int
    d: int
    n: int
    ambient_dim: int
    field: object
    warnings: tuple
    guaranteed: bool
    tuple_: TverbergTuple
    linear_fan: object
    affine_fan: object
    report: VerificationReport
    robustness: int
    typical: Optional[bool]
    timing: float

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "input_digest": self.input_digest,
            "parameters": {
                "r": self.r, "m": self.m, "d": self.d, "n": self.n,
                "ambient_dim": self.ambient_dim, "field": self.field,
            },
            "warnings": list(self.warnings),
            "guaranteed": self.guaranteed,
            "tuple": self.tuple_.to_json(),
            "linear_fan": self.linear_fan.to_json(),
            "affine_fan": self.affine_fan.to_json(),
            "report": self.report.to_json(),
            "robustness": self.robustness,
            "typical": self.typical,
        }


@dataclass(frozen=True)
class TwoFanResult:
    """Verified pair of fans sharing one lifted dual."""

    mode: str
    input_digest: str
    r: int
    m: int
    d: int
    n: int
    warnings: tuple
    tuples: tuple
    affine_fans: tuple
    report: VerificationReport
    timing: float

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "input_digest": self.input_digest,
            "parameters": {"r": self.r, "m": self.m, "d": self.d,
                           "n": self.n},
            "warnings": list(self.warnings),
            "tuples": [t.to_json() for t in self.tuples],
            "affine_fans": [f.to_json() for f in self.affine_fans],
            "report": self.report.to_json(),
        }


def _prepare(X: PointConfig, r: int, need_complex_root: bool = False):
    """Lift, augment, invert; returns (X', pair, lifted, d, warnings)."""
    if not X.affinely_spanning():
        raise NotAffinelySpanning("input must affinely span its space")
    warnings: list[str] = []
    d = X.n - X.dim - 1
    if d < 1:
        raise PreconditionError("need n >= D + 2 so that d >= 1")
    if X.conductor is not None and need_complex_root:
        N = X.conductor
        target = 4 * r // gcd(4, r)
        target = target * N // gcd(target, N)
        if target != N:
            X = X.to_conductor(target)
            warnings.append(
                f"coordinates embedded into Q(zeta_{target}) for omega_{r}")
    lifted = lift_augment(X)
    pair = gale_pair_from_dual(lifted)
    return X, pair, lifted, d, warnings


def _check_commutation(linear_fan, affine_fan, lifted, X) -> list:
    cls = []
    for i in range(X.n):
        c1 = linear_fan.classify(lifted.points[i])
        c2 = affine_fan.classify(X.points[i])
        if (c1.kind, c1.part) != (c2.kind, c2.part):
            raise VerificationBug(
                f"classification does not commute with slicing at point {i}")
        cls.append(c2)
    if linear_fan.classify(lifted.points[X.n]).kind != CENTER:
        raise VerificationBug("augmented point left the center")
    return cls


def _finish(mode: str, X, r, m, d, pair, lifted, tup, warnings, guaranteed,
            t0, *, family=None, typicality_gate: int = SGP_GATE):
    if X.conductor is None:
        linear_fan = fan_from_tuple_real(pair, tup)
    else:
        linear_fan = fan_from_tuple_complex(pair, tup)
    affine_fan = slice_project(linear_fan)
    cls = _check_commutation(linear_fan, affine_fan, lifted, X)

    # part/cell correspondence: interiors receive exactly the parts
    for j, part in enumerate(tup.parts):
        got = {i for i, c in enumerate(cls)
               if c.kind == INTERIOR and c.part == j}
        if got != set(part):
            raise VerificationBug(
                f"half-flat {j} holds {sorted(got)}, expected {list(part)}")

    verify_mode = mode if mode != "two-fan" else "distribute"
    report = verify_report(affine_fan, X, verify_mode, family=family)
    if not report.passes:
        raise VerificationBug(
            f"verification failed: {report.failures}")

    typical = None
    if X.conductor is None and X.n <= typicality_gate:
        typical = is_typical(X, gate=typicality_gate)
        if typical and not robustness_check(report, r, d, False):
            raise VerificationBug(
                "typical input violates the interior-occupancy bound")
    return PipelineResult(
        mode=mode, input_digest=_digest(X), r=r, m=m, d=d, n=X.n,
        ambient_dim=X.dim,
        field="rational" if X.conductor is None else
        {"cyclotomic": X.conductor},
        warnings=tuple(warnings), guaranteed=guaranteed, tuple_=tup,
        linear_fan=linear_fan, affine_fan=affine_fan, report=report,
        robustness=report.robustness, typical=typical,
        timing=time.monotonic() - t0)


def equidistribute(X: PointConfig, r: int, *, lp_gate: int = 50_000_000,
                   workers: int = 1,
                   typicality_gate: int = SGP_GATE
                   ) -> Optional[PipelineResult]:
    """Equidistributing r-fan for an m-colored configuration, or None.

    Outside the theorem bounds the search may legitimately fail (None,
    after a warning); inside them, exhaustion raises a bug signal.
    """
    t0 = time.monotonic()
    is_complex = X.conductor is not None
    X, pair, lifted, d, warnings = _prepare(X, r, need_complex_root=True)
    coloring = X.coloring if X.coloring is not None else [0] * X.n
    sizes = [coloring.count(k) for k in range(max(coloring) + 1)]
    m = len(sizes)

    if is_complex:
        bound = (r - 1) * (2 * d + m + 1) + 1
        if r < 2:
            warnings.append("complex fans need r >= 2")
    else:
        bound = (r - 1) * (d + m + 1) + 1
        if r < 3:
            raise PreconditionError("real fans need r >= 3")
    guaranteed = True
    if X.n < bound:
        warnings.append(
            f"n={X.n} below the guarantee bound {bound}; proceeding "
            "best-effort")
        guaranteed = False
    if not _is_prime_power(r):
        warnings.append(f"r={r} is not a prime power; no guarantee applies")
        guaranteed = False

    caps = threshold_caps(sizes, r)
    constraint = SearchConstraint.color_cap(caps, list(coloring) + [0])
    tup = search_tuple(
        pair.primal, r, constraint, allowed=range(X.n), lp_gate=lp_gate,
        workers=workers,
        guarantee=("equidistribution theorem hypotheses hold"
                   if guaranteed else None))
    if tup is None:
        return None
    return _finish("equidistribute", X, r, m, d, pair, lifted, tup,
                   warnings, guaranteed, t0, typicality_gate=typicality_gate)


def pierce(X: PointConfig, family: SetFamily,
           certificate: ColoringCertificate, r: int, *,
           lp_gate: int = 50_000_000, workers: int = 1,
           typicality_gate: int = SGP_GATE) -> Optional[PipelineResult]:
    """Distributing fan whose closed half-flats pierce every family member."""
    t0 = time.monotonic()
    if certificate.family != family or certificate.r != r:
        raise PreconditionError("certificate must cover this family and r")
    ok, bad = verify_certificate(certificate)
    if not ok:
        raise PreconditionError(f"invalid chromatic certificate: {bad}")
    m = certificate.num_classes
    is_complex = X.conductor is not None
    X, pair, lifted, d, warnings = _prepare(X, r, need_complex_root=True)
    if family.n != X.n:
        raise PreconditionError("family ground set must match the points")

    bound = (r - 1) * ((2 * d if is_complex else d) + m + 1) + 1
    guaranteed = _is_prime_power(r) and X.n >= bound and \
        (is_complex or r >= 3)
    if X.n < bound:
        warnings.append(f"n={X.n} below the guarantee bound {bound}")
    if not _is_prime_power(r):
        warnings.append(f"r={r} is not a prime power; no guarantee applies")

    constraint = SearchConstraint.family_avoid(family)
    tup = search_tuple(
        pair.primal, r, constraint, allowed=range(X.n), lp_gate=lp_gate,
        workers=workers,
        guarantee=("piercing theorem hypotheses hold" if guaranteed
                   else None))
    if tup is None:
        return None
    return _finish("pierce", X, r, m, d, pair, lifted, tup, warnings,
                   guaranteed, t0, family=family,
                   typicality_gate=typicality_gate)


def rainbow(X: PointConfig, r: int, *, lp_gate: int = 50_000_000,
            workers: int = 1,
            typicality_gate: int = SGP_GATE) -> Optional[PipelineResult]:
    """Rainbow-distributing fan: at most one point per class per interior."""
    t0 = time.monotonic()
    if X.coloring is None:
        raise PreconditionError("rainbow mode needs a coloring")
    is_complex = X.conductor is not None
    X, pair, lifted, d, warnings = _prepare(X, r, need_complex_root=True)
    sizes = X.class_sizes()
    m = len(sizes)
    if any(s < r for s in sizes):
        raise PreconditionError(
            f"every class needs at least r={r} points, sizes {sizes}")

    guaranteed = True
    expected_classes = (2 * d + 1) if is_complex else (d + 1)
    if m != expected_classes:
        warnings.append(
            f"{m} classes given, the theorem speaks of {expected_classes}")
        guaranteed = False
    if not _is_prime(r + 1):
        warnings.append(f"r+1={r + 1} is not prime; no guarantee applies")
        guaranteed = False
    if is_complex:
        stated = r * (2 * d + 1) - 1
        proved = r * (2 * d + 1)
        if X.n < stated:
            warnings.append(f"n={X.n} below the stated bound {stated}")
            guaranteed = False
        elif X.n < proved:
            warnings.append(
                f"n={X.n} sits between the two published thresholds "
                f"{stated} and {proved}: the guarantee is ambiguous there")
            guaranteed = False
    else:
        if X.n < r * (d + 1):
            warnings.append(f"n={X.n} below the bound {r * (d + 1)}")
            guaranteed = False
    if (not is_complex and r < 4) or r < 2:
        warnings.append("r below the theorem's range")
        guaranteed = False

    constraint = SearchConstraint.rainbow(list(X.coloring) + [m])
    tup = search_tuple(
        pair.primal, r, constraint, allowed=range(X.n), lp_gate=lp_gate,
        workers=workers,
        guarantee=("rainbow theorem hypotheses hold" if guaranteed
                   else None))
    if tup is None:
        return None
    return _finish("rainbow", X, r, m, d, pair, lifted, tup, warnings,
                   guaranteed, t0, typicality_gate=typicality_gate)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


def two_fans(X: PointConfig, r: int, *, mode: str = "equidistribute",
             family: Optional[SetFamily] = None,
             certificate: Optional[ColoringCertificate] = None,
             seed: int = 0, tuple_gate: int = 200_000,
             pair_gate: int = 1_000_000,
             time_budget: Optional[float] = None,
             workers: int = 1) -> Optional[TwoFanResult]:
    """Two r-fans whose intersection distributes X with r^2-cell control.

    Equidistribute mode derives per-class cell caps from the coloring;
    pierce mode takes an explicit family with a chromatic certificate for
    the r^2-uniform Kneser hypergraph.  The digit condition on the class
    count is a hard precondition.  Search is exhaustive under the gates,
    then randomized best-effort; emitted pairs always verify exactly.
    """
    t0 = time.monotonic()
    X0 = X
    X, pair, lifted, d, warnings = _prepare(X, r, need_complex_root=True)
    coloring = X.coloring if X.coloring is not None else [0] * X.n
    sizes = [coloring.count(k) for k in range(max(coloring) + 1)]

    bound = (r - 1) * (d + 1) + (max(coloring) + 1) * (r * r - 1) // 2 + 1
    if X.n < bound:
        warnings.append(f"n={X.n} below the guarantee bound {bound}")

    if mode == "equidistribute":
        m = len(sizes)
        caps9 = threshold_caps(sizes, r * r)
        # the augmented index never enters parts (allowed), so the
        # coloring list may stop at the original points
        pairres = search_two_tuples(
            pair.primal, r, cell_caps=caps9,
            coloring=list(coloring), allowed=range(X.n), seed=seed,
            tuple_gate=tuple_gate, pair_gate=pair_gate,
            time_budget=time_budget, workers=workers)
    elif mode == "pierce":
        if family is None or certificate is None:
            raise PreconditionError(
                "pierce mode needs a family and a certificate")
        m = certificate.num_classes
        pairres = search_two_tuples(
            pair.primal, r, family=family, certificate=certificate,
            allowed=range(X.n), seed=seed, tuple_gate=tuple_gate,
            pair_gate=pair_gate, time_budget=time_budget, workers=workers)
    else:
        raise PreconditionError(f"unknown two-fan mode {mode!r}")
    if pairres is None:
        return None
    tup1, tup2 = pairres

    fans = []
    for tup in (tup1, tup2):
        if X.conductor is None:
            lf = fan_from_tuple_real(pair, tup)
        else:
            lf = fan_from_tuple_complex(pair, tup)
        af = slice_project(lf)
        _check_commutation(lf, af, lifted, X)
        fans.append(af)

    report = verify_report(fans[0], X, "two-fan", other_fan=fans[1],
                           family=family if mode == "pierce" else None)
    if not report.passes:
        raise VerificationBug(f"two-fan verification failed: "
                              f"{report.failures}")

    return TwoFanResult(
        mode=f"two-fan-{mode}", input_digest=_digest(X0), r=r, m=m, d=d,
        n=X.n, warnings=tuple(warnings), tuples=(tup1, tup2),
        affine_fans=tuple(fans), report=report,
        timing=time.monotonic() - t0)


def bounds_experiment(r: int, m: int, d_values, seeds, *, bits: int = 6,
                      lp_gate: int = 10_000_000,
                      max_ell_extra: int = 1) -> list[dict]:
    """Bracket the maximum equidistributable size for each ambient d.

    For d = (r-2)s + t + (r-1)(m+1): the lower-bound runs equidistribute
    n = d+s+1 random points in R^d (success expected from the main
    theorem); the upper-bound side builds the sharpness instance at the
    same parameters and certifies non-equidistributability exhaustively,
    escalating ell by one when the minimal value fails to certify.
    """
    c = (r - 1) * (m + 1)
    rows = []
    for d in d_values:
        if r == 2:
            raise PreconditionError("bounds experiment needs r >= 3")
        if d <= c:
            rows.append({"d": d, "skipped": "d must exceed (r-1)(m+1)"})
            continue
        s = (d - c) // (r - 2) if r > 3 else d - c
        t = d - c - (r - 2) * s if r > 3 else 0
        while r > 3 and t > r - 2:
            s += 1
            t = d - c - (r - 2) * s
        if s < 1 or t < 0:
            rows.append({"d": d, "skipped": "no valid (s, t) decomposition"})
            continue
        n = d + s + 1
        successes = 0
        for seed in seeds:
            from fandist.genpos import random_config
            coloring = [k % m for k in range(n)]
            X = random_config(n, d, "rational", bits, seed,
                              coloring=sorted(coloring))
            res = equidistribute(X, r, lp_gate=lp_gate)
            if res is not None:
                successes += 1
        ell_min = 3 if _ell_three_admissible(t, r) else 4
        certified_at = None
        for ell in range(ell_min, ell_min + max_ell_extra + 1):
            inst = build_counterexample(r, m, s, t, ell,
                                        seed=seeds[0] if seeds else 0)
            try:
                if verify_no_equidistribution(inst, lp_gate=lp_gate):
                    certified_at = ell
                    break
            except SizeGateExceeded:
                break
        rows.append({
            "d": d, "s": s, "t": t, "n_lower": n,
            "lower_successes": successes, "lower_runs": len(list(seeds)),
            "upper_points": None if certified_at is None
            else n + certified_at,
            "certified_ell": certified_at,
        })
    return rows


def _ell_three_admissible(k: int, r: int) -> bool:
    """Whether ell = 3 satisfies ell > 2 + k/(r-1)."""
    return (3 - 2) * (r - 1) > k


# re-exported for the CLI
__all__ += ["build_counterexample", "verify_no_equidistribution"]
