import random
from fractions import Fraction as F

import pytest

from fandist.errors import MalformedFan, PreconditionError, VerificationBug
from fandist.exactnum import Cyclotomic, ExactMatrix, Positivity, is_positive_rational
from fandist.fans import (
    CENTER,
    INTERIOR,
    OUTSIDE,
    Classification,
    ComplexFan,
    RealFan,
    classify_point,
    fan_from_json,
    fan_from_tuple_complex,
    fan_from_tuple_real,
    slice_project,
    tuple_from_fan,
    verify_report,
)
from fandist.feaslp import ProperWeightProblem, proper_weights
from fandist.galedual import (
    PointConfig,
    gale_pair_from_dual,
    gale_transform,
    lift_augment,
)
from fandist.kneser import SetFamily
from fandist.tverberg import search_tuple


def random_proper_pair(seed, complex_field=False):
    """A Gale pair plus a proper tuple on its primal, or None."""
    rng = random.Random(seed)
    if complex_field:
        N = 4
        n = rng.randint(5, 6)
        d = 1
        pts = [[Cyclotomic(N, [F(rng.randint(-9, 9), rng.randint(1, 4)),
                               F(rng.randint(-9, 9), rng.randint(1, 4))])
                for _ in range(d)] for _ in range(n)]
        cfg = PointConfig(d, pts, N)
        r = 2
    else:
        n = rng.randint(5, 7)
        d = rng.randint(1, 2)
        pts = [[F(rng.randint(-15, 15), rng.randint(1, 6))
                for _ in range(d)] for _ in range(n)]
        cfg = PointConfig(d, pts)
        r = 3 if n >= (2 * (d + 1) + 1) else 3
    if not cfg.affinely_spanning():
        return None
    tup = search_tuple(cfg, r)
    if tup is None:
        return None
    return gale_transform(cfg), tup


class TestRealFanGeometry:
    def test_hand_fan_classification(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        assert fan.classify((F(2), F(0))) == Classification(INTERIOR, 0)
        assert fan.classify((F(-1), F(1))) == Classification(INTERIOR, 1)
        assert fan.classify((F(0), F(-3))) == Classification(INTERIOR, 2)
        assert fan.classify((F(1), F(1))).kind == OUTSIDE
        assert fan.classify((F(0), F(0))).kind == CENTER

    def test_origin_is_center_of_linear_fans(self):
        fan = RealFan(3, 3, [[1, 0, 0], [0, 1, 0], [-1, -1, 0]], [0, 0, 0])
        assert fan.classify((F(0), F(0), F(0))).kind == CENTER

    def test_normalization_rescales(self):
        # scaled hyperplanes normalize back to summing to zero
        fan = RealFan(3, 2, [[2, 0], [0, 3], [-1, -1]], [0, 0, 0])
        for i in range(2):
            assert sum(v[i] for v in fan.normals) == 0

    def test_mixed_orientation_rejected(self):
        with pytest.raises(MalformedFan):
            RealFan(3, 2, [[1, 0], [0, 1], [1, 1]], [0, 0, 0])

    def test_rank_conditions_enforced(self):
        with pytest.raises(MalformedFan):
            RealFan(3, 2, [[1, 0], [2, 0], [-3, 0]], [0, 0, 0])

    def test_classification_trichotomy(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        rng = random.Random(2)
        tags = set()
        for _ in range(200):
            x = (F(rng.randint(-4, 4), rng.randint(1, 3)),
                 F(rng.randint(-4, 4), rng.randint(1, 3)))
            c = fan.classify(x)
            assert c.kind in (CENTER, INTERIOR, OUTSIDE)
            tags.add(c.kind)
        assert OUTSIDE in tags

    def test_closed_halfflat_intersection_law(self):
        # membership in two distinct closed half-flats implies center
        fan = RealFan(4, 4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0],
                             [-1, -1, -1, 0]], [0, 0, 0, 0])

        def in_closed(fan, x, j):
            vals = fan.values(x)
            prev = (j - 1) % fan.r
            return all(vals[k] == 0 for k in range(fan.r)
                       if k not in (j, prev)) and vals[j] >= 0

        rng = random.Random(3)
        for _ in range(300):
            x = tuple(F(rng.randint(-2, 2)) for _ in range(4))
            hits = [j for j in range(4) if in_closed(fan, x, j)]
            if len(hits) >= 2:
                assert fan.classify(x).kind == CENTER

    def test_json_round_trip(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        back = fan_from_json(fan.to_json())
        assert back.normals == fan.normals and back.offsets == fan.offsets


class TestFanFromTuple:
    def test_collinear_five_distribution(self):
        cfg = PointConfig(1, [[1], [2], [3], [4], [5]])
        pair = gale_transform(cfg)
        tup = search_tuple(cfg, 3)
        fan = fan_from_tuple_real(pair, tup)
        assert fan.dim == 3
        # sum of normals vanishes; every pair of normals independent
        for i in range(fan.dim):
            assert sum(v[i] for v in fan.normals) == 0
        for drop in range(3):
            cols = [list(fan.normals[j]) for j in range(3) if j != drop]
            assert ExactMatrix.from_columns(cols).rank() == 2
        # duals classify into their parts
        for j, part in enumerate(tup.parts):
            for i in part:
                c = fan.classify(pair.dual.points[i])
                assert c == Classification(INTERIOR, j)

    def test_leftover_lands_on_center(self):
        cfg = PointConfig(2, [[0, 0], [4, 0], [0, 4], [1, 1], [9, 9]])
        pair = gale_transform(cfg)
        tup = search_tuple(cfg, 2, max_part_size=None)
        if tup is None:
            pytest.skip("no tuple on this configuration")
        # r=2 needs complex machinery; use r=3 on a 1-d config instead
        cfg = PointConfig(1, [[1], [2], [3], [4], [5], [6]])
        pair = gale_transform(cfg)
        tup = search_tuple(cfg, 3)
        fan = fan_from_tuple_real(pair, tup)
        leftovers = set(range(6)) - set(tup.support())
        for i in leftovers:
            assert fan.classify(pair.dual.points[i]).kind == CENTER

    def test_round_trip_hundred_random_tuples(self):
        done = 0
        seed = 0
        while done < 100 and seed < 500:
            seed += 1
            made = random_proper_pair(seed)
            if made is None:
                continue
            pair, tup = made
            fan = fan_from_tuple_real(pair, tup)
            back = tuple_from_fan(fan, pair)
            assert back.parts == tup.parts
            assert back.witness.weights == tup.witness.weights
            done += 1
        assert done == 100

    def test_rational_field_required(self):
        i = Cyclotomic.root_of_unity(4)
        cfg = PointConfig(1, [[i * k + 1] for k in range(5)], 4)
        pair = gale_transform(cfg)
        tup = search_tuple(cfg, 3)
        if tup is not None:
            with pytest.raises(PreconditionError):
                fan_from_tuple_real(pair, tup)


class TestTupleFromFan:
    def test_outside_point_rejected(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        cfg = PointConfig(1, [[1], [2], [3], [4], [5]])
        pair = gale_transform(cfg)
        # this synthetic fan cannot distribute the dual of the collinear
        # points; at least one dual point must land outside
        with pytest.raises((PreconditionError, VerificationBug)):
            tuple_from_fan(fan, pair)

    def test_affine_fan_rejected(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [1, 1, -2])
        cfg = PointConfig(1, [[1], [2], [3], [4], [5]])
        pair = gale_transform(cfg)
        with pytest.raises(PreconditionError):
            tuple_from_fan(fan, pair)


class TestComplexFan:
    def test_omega_and_membership(self):
        N = 4
        i = Cyclotomic.root_of_unity(N)
        fan = ComplexFan(2, N, [Cyclotomic.from_rational(N, 1)], 0)
        # w = conj(x); positive real -> interior(0), negative -> interior(1)
        assert fan.classify([Cyclotomic.from_rational(N, 5)]) == \
            Classification(INTERIOR, 0)
        assert fan.classify([Cyclotomic.from_rational(N, -5)]) == \
            Classification(INTERIOR, 1)
        assert fan.classify([Cyclotomic.from_rational(N, 0)]).kind == CENTER
        c = fan.classify([i])
        assert c.kind == OUTSIDE

    def test_regular_three_fan_membership(self):
        N = 12
        w3 = Cyclotomic.root_of_unity(N, 4)
        fan = ComplexFan(3, N, [Cyclotomic.from_rational(N, 1)], 0)
        # conj(w3^j) lies on the ray of omega^{-j}
        assert fan.classify([w3]).part == 2
        assert fan.classify([w3 * w3]).part == 1
        assert fan.classify([Cyclotomic.from_rational(N, 2)]).part == 0

    def test_tuple_to_complex_fan(self):
        made = random_proper_pair(7, complex_field=True)
        assert made is not None
        pair, tup = made
        fan = fan_from_tuple_complex(pair, tup)
        for j, part in enumerate(tup.parts):
            for i in part:
                assert fan.classify(pair.dual.points[i]) == \
                    Classification(INTERIOR, j)
        for i in set(range(pair.primal.n)) - set(tup.support()):
            assert fan.classify(pair.dual.points[i]).kind == CENTER

    def test_r2_equivalence_with_proper_partition(self):
        # a complex linear 2-fan distributing duals yields a proper real
        # partition with matching parts (real-hyperplane reading)
        made = random_proper_pair(11, complex_field=True)
        assert made is not None
        pair, tup = made
        fan = fan_from_tuple_complex(pair, tup)
        assert fan.omega(1) == Cyclotomic.from_rational(4, -1)
        from fandist.feaslp import realify
        real = realify(pair.primal)
        w = proper_weights(ProperWeightProblem(real.points, tup.parts))
        assert w is not None

    def test_positive_rational_quotients(self):
        made = random_proper_pair(13, complex_field=True)
        assert made is not None
        pair, tup = made
        fan = fan_from_tuple_complex(pair, tup)
        from fandist.exactnum import hermitian_dot
        for j, part in enumerate(tup.parts):
            for i in part:
                w = hermitian_dot(fan.alpha, pair.dual.points[i]) - fan.beta
                q = w * fan.omega(-j)
                assert is_positive_rational(q) is Positivity.POSITIVE

    def test_foreign_irrational_point_diagnostic(self):
        N = 12
        fan = ComplexFan(3, N, [Cyclotomic.from_rational(N, 1)], 0)
        # zeta_12 + conj(zeta_12) = sqrt(3): real but irrational
        z = Cyclotomic.root_of_unity(N)
        x = z + z.conjugate()
        c = fan.classify([x])
        assert c.kind == OUTSIDE and c.diagnostic == "not-rational-real"

    def test_json_round_trip(self):
        N = 12
        fan = ComplexFan(3, N, [Cyclotomic.root_of_unity(N, 1),
                                Cyclotomic.from_rational(N, 2)], 1)
        back = fan_from_json(fan.to_json())
        assert back.alpha == fan.alpha and back.beta == fan.beta


class TestSliceProject:
    def _lifted_run(self, seed):
        # 7 points in R^5: the lifted primal has 8 points with d = 1
        from fandist.genpos import random_config
        X = random_config(7, 5, seed=seed)
        lifted = lift_augment(X)
        pair = gale_pair_from_dual(lifted)
        tup = search_tuple(pair.primal, 3, allowed=range(7))
        assert tup is not None
        return X, lifted, pair, tup

    def test_real_commutation(self):
        X, lifted, pair, tup = self._lifted_run(6)
        fan = fan_from_tuple_real(pair, tup)
        afan = slice_project(fan)
        assert afan.dim == fan.dim - 1
        for i in range(X.n):
            c1 = fan.classify(lifted.points[i])
            c2 = afan.classify(X.points[i])
            assert (c1.kind, c1.part) == (c2.kind, c2.part)

    def test_offsets_sum_zero(self):
        X, lifted, pair, tup = self._lifted_run(8)
        afan = slice_project(fan_from_tuple_real(pair, tup))
        assert sum(afan.offsets, F(0)) == 0

    def test_affine_fan_rejected(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [1, 1, -2])
        with pytest.raises(PreconditionError):
            slice_project(fan)


class TestTwoFanReport:
    def test_real_pair_cells(self):
        cfg = PointConfig(1, [[i] for i in range(1, 10)])
        pair = gale_transform(cfg)
        t1 = search_tuple(cfg, 3, allowed=[0, 1, 2, 3, 4])
        t2 = search_tuple(cfg, 3, allowed=[4, 5, 6, 7, 8])
        assert t1 is not None and t2 is not None
        f1 = fan_from_tuple_real(pair, t1)
        f2 = fan_from_tuple_real(pair, t2)
        colored = pair.dual.with_coloring([0] * 9)
        rep = verify_report(f1, colored, "two-fan", other_fan=f2)
        # cell counts accounted exactly against both classifications
        total = sum(rep.cell_class_counts.values())
        shared = set(t1.support()) & set(t2.support())
        assert total == len(shared)

    def test_complex_pair_cells(self):
        made1 = random_proper_pair(17, complex_field=True)
        assert made1 is not None
        pair, t1 = made1
        t2 = search_tuple(pair.primal, 2,
                          allowed=sorted(set(range(pair.primal.n))
                                         - {t1.parts[0][0]}))
        if t2 is None:
            pytest.skip("no second tuple on this draw")
        f1 = fan_from_tuple_complex(pair, t1)
        f2 = fan_from_tuple_complex(pair, t2)
        colored = pair.dual.with_coloring([0] * pair.dual.n)
        rep = verify_report(f1, colored, "two-fan", other_fan=f2)
        assert rep.mode == "two-fan"
        assert "second_fan_interiors" in rep.details


class TestVerifyReport:
    def _center_only_config(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        cfg = PointConfig(2, [[0, 0], [0, 0], [0, 0]], coloring=[0, 0, 1])
        return fan, cfg

    def test_all_center_passes_everything(self):
        fan, cfg = self._center_only_config()
        rep = verify_report(fan, cfg, "distribute")
        assert rep.passes and rep.center_count == 3
        rep = verify_report(fan, cfg, "equidistribute")
        assert rep.passes and rep.robustness == 0

    def test_threshold_failure(self):
        # r=4 fan in R^4; one interior holding 3 of a 10-point class fails
        fan = RealFan(4, 4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0],
                             [-1, -1, -1, 0]], [0, 0, 0, 0])
        pts = [[0, 0, 0, 0]] * 7
        # interior(0) of this fan: last coords free on the axis pattern
        inside0 = [[1, 0, 0, 0], [2, 0, 0, 0], [3, 0, 0, 0]]
        cfg = PointConfig(4, pts + inside0, coloring=[0] * 10)
        for x in inside0:
            assert fan.classify([F(v) for v in x]) == \
                Classification(INTERIOR, 0)
        rep = verify_report(fan, cfg, "equidistribute")
        assert not rep.passes
        assert any("4*3 > 10" in f for f in rep.failures)

    def test_pierce_single_interior_fails(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        cfg = PointConfig(2, [[1, 0], [2, 0], [0, 0]])
        fam = SetFamily(3, [[0, 1]])
        rep = verify_report(fan, cfg, "pierce", family=fam)
        assert not rep.passes
        assert rep.details["members_inside_one_interior"] == [[0, 1]]

    def test_pierce_center_meets_all(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        cfg = PointConfig(2, [[1, 0], [0, 0]])
        fam = SetFamily(2, [[0, 1]])
        rep = verify_report(fan, cfg, "pierce", family=fam)
        assert rep.passes
        assert rep.details["closed_halfflat_meets"]["[0, 1]"] == 3

    def test_rainbow_mode(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        cfg = PointConfig(2, [[1, 0], [2, 0], [0, 0]], coloring=[0, 0, 1])
        rep = verify_report(fan, cfg, "rainbow")
        assert not rep.passes  # two class-0 points in interior(0)

    def test_outside_fails_distribute(self):
        fan = RealFan(3, 2, [[1, 0], [0, 1], [-1, -1]], [0, 0, 0])
        cfg = PointConfig(2, [[1, 1]])
        rep = verify_report(fan, cfg, "distribute")
        assert not rep.passes
