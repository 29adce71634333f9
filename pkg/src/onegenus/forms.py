"""Exact arithmetic of positive definite binary quadratic forms.

A form (a, b, c) stands for ax^2 + bxy + cy^2 with discriminant b^2 - 4ac < 0.
This module supplies reduction, enumeration of reduced representatives per
discriminant, class numbers, the ambiguous-shape test, genus counts for
fundamental discriminants, and the all-forms-ambiguous predicate that
characterises discriminants with one class per genus.

Reduction convention: |b| <= a <= c, with b >= 0 whenever |b| = a or a = c.
All arithmetic is in plain Python integers, so discriminants far beyond the
64-bit range are handled exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .arith import factorize, is_squarefree, omega

# enumerate_reduced walks ~|d|/6 (a, b) pairs; refuse sizes that would spin
# for hours instead of silently never returning.
ENUMERATION_LIMIT = 10**10


def validate_discriminant(d: int) -> int:
    if d >= 0:
        raise ValueError(f"discriminant must be negative, got {d}")
    if d % 4 not in (0, 1):
        raise ValueError(f"discriminant must be 0 or 1 mod 4, got {d}")
    return d


@dataclass(frozen=True)
class QuadForm:
    """Positive definite integral form ax^2 + bxy + cy^2."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError(f"form {self.as_tuple()} is not positive definite")
        if self.discriminant() >= 0:
            raise ValueError(f"form {self.as_tuple()} has non-negative discriminant")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if b < 0 and (abs(b) == a or a == c):
            return False
        return True

    def is_ambiguous(self) -> bool:
        """Shape test (a,0,c), (a,a,c) or (a,b,a); only defined on reduced forms."""
        if not self.is_reduced():
            raise ValueError(f"ambiguity test needs a reduced form, got {self.as_tuple()}")
        return self.b == 0 or self.b == self.a or self.a == self.c


def discriminant(f: QuadForm) -> int:
    return f.discriminant()


def reduce_form(f: QuadForm) -> QuadForm:
    """Unique reduced form equivalent to f (classical Gauss reduction)."""
    a, b, c = f.a, f.b, f.c
    while True:
        # normalize b into (-a, a]
        m = (b + a - 1) // (2 * a)
        if m:
            c += m * (m * a - b)
            b -= 2 * a * m
        if a <= c:
            break
        a, b, c = c, -b, a
    if b < 0 and a == c:
        b = -b
    return QuadForm(a, b, c)


def enumerate_reduced(d: int) -> list[QuadForm]:
    """All reduced forms of discriminant d, sorted by (a, -b).

    Loops a up to sqrt(|d|/3) and b over the matching parity with |b| <= a;
    c = (b^2 - d)/(4a) must be integral and >= a, and b < 0 is skipped on the
    boundary cases so every class appears exactly once.
    """
    validate_discriminant(d)
    n = -d
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"|d| = {n} too large for enumeration (limit {ENUMERATION_LIMIT})")
    parity = d & 1
    out = []
    for a in range(1, math.isqrt(n // 3) + 1):
        four_a = 4 * a
        b = -a + ((a + parity) % 2)
        while b <= a:
            num = b * b + n
            if num % four_a == 0:
                c = num // four_a
                if c >= a and not (b < 0 and (-b == a or c == a)):
                    out.append(QuadForm(a, b, c))
            b += 2
    out.sort(key=lambda f: (f.a, -f.b))
    return out


def class_number(d: int) -> int:
    """Number of reduced forms of discriminant d."""
    return len(enumerate_reduced(d))


def is_fundamental(d: int) -> bool:
    """True iff d is the discriminant of an imaginary quadratic field."""
    validate_discriminant(d)
    if d % 4 == 1:
        return is_squarefree(d)
    m = d // 4
    return m % 4 in (2, 3) and is_squarefree(m)


def genus_count(d: int) -> int:
    """2^(omega(|d|) - 1) for fundamental d; rejects non-fundamental input."""
    if not is_fundamental(d):
        raise ValueError(f"genus count is only computed for fundamental discriminants, got {d}")
    return 1 << (omega(d) - 1)


def one_class_per_genus(d: int) -> bool:
    """True iff every reduced form of discriminant d is ambiguous."""
    return all(f.is_ambiguous() for f in enumerate_reduced(d))


@dataclass
class GenusReport:
    """Per-discriminant verdict: forms, class number, genus data, ambiguity census."""

    d: int
    class_number: int
    genus_count: int | None
    forms: list[QuadForm]
    ambiguous_count: int
    one_class_per_genus: bool
    is_fundamental: bool

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "class_number": self.class_number,
            "genus_count": self.genus_count,
            "forms": [list(f.as_tuple()) for f in self.forms],
            "ambiguous_count": self.ambiguous_count,
            "one_class_per_genus": self.one_class_per_genus,
            "is_fundamental": self.is_fundamental,
        }


def genus_report(d: int, factors: dict[int, int] | None = None) -> GenusReport:
    forms = enumerate_reduced(d)
    ambiguous = sum(1 for f in forms if f.is_ambiguous())
    if factors is None:
        factors = factorize(d)
    fund = _is_fundamental_from_factors(d, factors)
    genera = (1 << (len(factors) - 1)) if fund else None
    return GenusReport(
        d=d,
        class_number=len(forms),
        genus_count=genera,
        forms=forms,
        ambiguous_count=ambiguous,
        one_class_per_genus=ambiguous == len(forms),
        is_fundamental=fund,
    )


def _is_fundamental_from_factors(d: int, factors: dict[int, int]) -> bool:
    if d % 4 == 1:
        return all(e == 1 for e in factors.values())
    m = d // 4
    if m % 4 not in (2, 3):
        return False
    mf = dict(factors)
    mf[2] = mf.get(2, 0) - 2
    if mf[2] < 0:
        return False
    if mf[2] == 0:
        del mf[2]
    return all(e == 1 for e in mf.values())
