import math
import random

import pytest

from onegenus import forms
from onegenus.forms import QuadForm, enumerate_reduced, genus_report, reduce_form


def brute_reduced(d: int) -> list[tuple[int, int, int]]:
    """Independent oracle: scan all triples with |b| <= a <= c directly."""
    n = -d
    out = []
    for a in range(1, math.isqrt(n // 3) + 1):
        for b in range(-a, a + 1):
            num = b * b + n
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (-b == a or c == a):
                continue
            out.append((a, b, c))
    return sorted(out, key=lambda t: (t[0], -t[1]))


def random_reduced(rng, max_d=50000) -> QuadForm:
    while True:
        n = rng.randrange(3, max_d)
        if n % 4 in (0, 3):
            fs = enumerate_reduced(-n)
            return rng.choice(fs)


def apply_unimodular(f: QuadForm, p, q, r, s) -> QuadForm:
    a = f.a * p * p + f.b * p * r + f.c * r * r
    b = 2 * f.a * p * q + f.b * (p * s + q * r) + 2 * f.c * r * s
    c = f.a * q * q + f.b * q * s + f.c * s * s
    return QuadForm(a, b, c)


class TestDiscriminant:
    def test_examples(self):
        assert QuadForm(1, 0, 5).discriminant() == -20
        assert QuadForm(2, 2, 3).discriminant() == -20
        assert QuadForm(3, 2, 5).discriminant() == -56

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            QuadForm(1, 5, 1)
        with pytest.raises(ValueError):
            QuadForm(-1, 0, -5)


class TestIsReduced:
    def test_examples(self):
        assert QuadForm(1, 0, 5).is_reduced()
        assert QuadForm(3, -2, 5).is_reduced()
        assert not QuadForm(2, -2, 3).is_reduced()  # |b| = a forces b >= 0

    def test_boundary_a_equals_c(self):
        assert QuadForm(2, 1, 2).is_reduced()
        assert not QuadForm(2, -1, 2).is_reduced()


class TestReduce:
    def test_examples(self):
        assert reduce_form(QuadForm(1, 0, 5)) == QuadForm(1, 0, 5)
        assert reduce_form(QuadForm(3, 10, 9)) == QuadForm(1, 0, 2)
        assert reduce_form(QuadForm(5, 3, 1)) == QuadForm(1, 1, 3)

    def test_idempotent_and_disc_preserving(self):
        rng = random.Random(20260810)
        for _ in range(300):
            a = rng.randrange(1, 40)
            b = rng.randrange(-60, 60)
            cmin = (b * b) // (4 * a) + 1
            c = rng.randrange(cmin, cmin + 80)
            f = QuadForm(a, b, c)
            g = reduce_form(f)
            assert g.is_reduced()
            assert g.discriminant() == f.discriminant()
            assert reduce_form(g) == g

    def test_equivalence_soundness(self):
        # reduce(g . f) == f for reduced f and unimodular g with small entries
        rng = random.Random(42)
        mats = []
        for p in range(-4, 5):
            for q in range(-4, 5):
                for r in range(-4, 5):
                    for s in range(-4, 5):
                        if p * s - q * r == 1:
                            mats.append((p, q, r, s))
        for _ in range(200):
            f = random_reduced(rng)
            g = apply_unimodular(f, *rng.choice(mats))
            assert reduce_form(g) == f


class TestEnumerate:
    def test_examples(self):
        assert [f.as_tuple() for f in enumerate_reduced(-20)] == [(1, 0, 5), (2, 2, 3)]
        assert [f.as_tuple() for f in enumerate_reduced(-56)] == [
            (1, 0, 14),
            (2, 0, 7),
            (3, 2, 5),
            (3, -2, 5),
        ]
        assert [f.as_tuple() for f in enumerate_reduced(-4)] == [(1, 0, 1)]

    def test_against_brute_force(self):
        rng = random.Random(7)
        ds = [-3, -4, -7, -8, -11, -12, -16, -23, -27, -32, -400]
        ds += [-n for n in rng.sample(range(3, 30000), 150) if n % 4 in (0, 3)]
        for d in ds:
            if d % 4 not in (0, 1):
                continue
            got = [f.as_tuple() for f in enumerate_reduced(d)]
            assert got == brute_reduced(d), d
            for f in enumerate_reduced(d):
                assert f.is_reduced()
                assert f.discriminant() == d

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            enumerate_reduced(-5)
        with pytest.raises(ValueError):
            enumerate_reduced(20)

    def test_refuses_oversized(self):
        with pytest.raises(ValueError, match="too large"):
            enumerate_reduced(-(10**11))


class TestClassNumber:
    def test_examples(self):
        assert forms.class_number(-20) == 2
        assert forms.class_number(-23) == 3
        assert forms.class_number(-4) == 1

    def test_known_values(self):
        # classical table entries
        for d, h in [(-3, 1), (-7, 1), (-8, 1), (-11, 1), (-15, 2), (-163, 1),
                     (-47, 5), (-71, 7), (-5460, 16)]:
            assert forms.class_number(d) == h, d


class TestAmbiguous:
    def test_examples(self):
        assert QuadForm(1, 0, 5).is_ambiguous()
        assert QuadForm(2, 1, 2).is_ambiguous()
        assert not QuadForm(2, 1, 3).is_ambiguous()

    def test_requires_reduced(self):
        with pytest.raises(ValueError):
            QuadForm(2, -2, 3).is_ambiguous()


class TestGenusCount:
    def test_examples(self):
        assert forms.genus_count(-20) == 2
        assert forms.genus_count(-4) == 1
        assert forms.genus_count(-420) == 8

    def test_rejects_non_fundamental(self):
        with pytest.raises(ValueError):
            forms.genus_count(-12)


class TestOneClassPerGenus:
    def test_examples(self):
        assert forms.one_class_per_genus(-20)
        assert not forms.one_class_per_genus(-23)
        assert not forms.one_class_per_genus(-56)


class TestIsFundamental:
    def test_examples(self):
        assert forms.is_fundamental(-20)
        assert not forms.is_fundamental(-7392)
        assert forms.is_fundamental(-23)

    def test_more(self):
        assert forms.is_fundamental(-4)
        assert forms.is_fundamental(-8)
        assert not forms.is_fundamental(-12)
        assert not forms.is_fundamental(-16)
        assert not forms.is_fundamental(-27)


class TestGenusReport:
    def test_report_consistency(self):
        rng = random.Random(3)
        for _ in range(80):
            n = rng.randrange(3, 20000)
            if n % 4 not in (0, 3):
                continue
            rep = genus_report(-n)
            assert rep.class_number == len(rep.forms)
            assert rep.one_class_per_genus == (rep.ambiguous_count == rep.class_number)
            assert rep.is_fundamental == forms.is_fundamental(-n)
            if rep.is_fundamental:
                assert rep.genus_count == forms.genus_count(-n)
            else:
                assert rep.genus_count is None

    def test_json_shape(self):
        d = genus_report(-20).to_json_dict()
        assert set(d) == {
            "d", "class_number", "genus_count", "forms", "ambiguous_count",
            "one_class_per_genus", "is_fundamental",
        }
        assert d["forms"] == [[1, 0, 5], [2, 2, 3]]


class TestFundamentalInvariants:
    def test_ocpg_iff_h_equals_genus_count(self):
        # for fundamental d: one class per genus <=> h(d) = number of genera.
        # The ambiguous census always matches the genus count (the ambiguous
        # classes are exactly the 2-torsion), whether or not h exceeds it.
        rng = random.Random(11)
        ds = [-n for n in range(3, 2000) if n % 4 in (0, 3)]
        ds += [-n for n in rng.sample(range(2000, 100000), 120) if n % 4 in (0, 3)]
        checked = 0
        for d in ds:
            if not forms.is_fundamental(d):
                continue
            rep = genus_report(d)
            g = rep.genus_count
            assert rep.one_class_per_genus == (rep.class_number == g), d
            assert rep.ambiguous_count == g, d
            if rep.one_class_per_genus:
                assert rep.class_number == rep.ambiguous_count == g, d
            checked += 1
        assert checked > 400
