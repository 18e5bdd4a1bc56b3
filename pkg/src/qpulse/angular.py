"""Wigner 3j/6j symbols and Clebsch-Gordan coefficients via Racah sums.

Arguments may be integer or half-integer; they are validated by doubling.
The alternating sums and triangle coefficients are evaluated in exact
integer/rational arithmetic before the final square root, so values are
accurate to double-precision rounding for the small angular momenta used
in hyperfine structure.  Forbidden argument combinations return 0.0.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, isqrt, sqrt


def _twice(x, name: str) -> int:
    t = 2 * x
    ti = round(t)
    if abs(t - ti) > 1e-9:
        raise ValueError(f"{name}={x} is not integer or half-integer")
    return int(ti)


def _triangle_ok(a2: int, b2: int, c2: int) -> bool:
    # doubled angular momenta; perimeter must be even (integer total)
    if (a2 + b2 + c2) % 2 != 0:
        return False
    return abs(a2 - b2) <= c2 <= a2 + b2


def _delta2(a2: int, b2: int, c2: int) -> Fraction:
    """Squared triangle coefficient, exact rational."""
    return Fraction(
        factorial((a2 + b2 - c2) // 2)
        * factorial((a2 - b2 + c2) // 2)
        * factorial((-a2 + b2 + c2) // 2),
        factorial((a2 + b2 + c2) // 2 + 1),
    )


def _signed_sqrt(q: Fraction) -> float:
    return sqrt(float(q)) if q >= 0 else -sqrt(float(-q))


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3); 0.0 when selection rules fail."""
    J = [_twice(j, f"j{i+1}") for i, j in enumerate((j1, j2, j3))]
    M = [_twice(m, f"m{i+1}") for i, m in enumerate((m1, m2, m3))]
    for ji, mi in zip(J, M):
        if ji < 0 or abs(mi) > ji or (ji - mi) % 2 != 0:
            return 0.0
    if M[0] + M[1] + M[2] != 0 or not _triangle_ok(*J):
        return 0.0
    j12, j22, j32 = J
    m12, m22, m32 = M
    # Racah sum over t with all factorial arguments nonnegative
    tmin = max(0, (j22 - j32 - m12) // 2, (j12 - j32 + m22) // 2)
    tmax = min((j12 + j22 - j32) // 2, (j12 - m12) // 2, (j22 + m22) // 2)
    if tmax < tmin:
        return 0.0
    ssum = Fraction(0)
    for t in range(tmin, tmax + 1):
        den = (
            factorial(t)
            * factorial((j32 - j22 + m12) // 2 + t)
            * factorial((j32 - j12 - m22) // 2 + t)
            * factorial((j12 + j22 - j32) // 2 - t)
            * factorial((j12 - m12) // 2 - t)
            * factorial((j22 + m22) // 2 - t)
        )
        ssum += Fraction(-1 if t % 2 else 1, den)
    if ssum == 0:
        return 0.0
    rad = _delta2(j12, j22, j32) * (
        factorial((j12 + m12) // 2) * factorial((j12 - m12) // 2)
        * factorial((j22 + m22) // 2) * factorial((j22 - m22) // 2)
        * factorial((j32 + m32) // 2) * factorial((j32 - m32) // 2)
    )
    phase = -1 if ((j12 - j22 - m32) // 2) % 2 else 1
    return phase * sqrt(float(rad)) * float(ssum)


def wigner6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}; 0.0 when any triad fails."""
    a2, b2, c2, d2, e2, f2 = (_twice(j, f"j{i+1}") for i, j in enumerate((j1, j2, j3, j4, j5, j6)))
    triads = [(a2, b2, c2), (a2, e2, f2), (d2, b2, f2), (d2, e2, c2)]
    for tr in triads:
        if min(tr) < 0 or not _triangle_ok(*tr):
            return 0.0
    tri = [sum(tr) // 2 for tr in triads]
    quads = [
        (a2 + b2 + d2 + e2) // 2,
        (b2 + c2 + e2 + f2) // 2,
        (a2 + c2 + d2 + f2) // 2,
    ]
    tmin = max(tri)
    tmax = min(quads)
    if tmax < tmin:
        return 0.0
    ssum = Fraction(0)
    for t in range(tmin, tmax + 1):
        num = factorial(t + 1)
        den = 1
        for tr in tri:
            den *= factorial(t - tr)
        for q in quads:
            den *= factorial(q - t)
        ssum += Fraction((-1 if t % 2 else 1) * num, den)
    if ssum == 0:
        return 0.0
    rad = Fraction(1)
    for tr in triads:
        rad *= _delta2(*tr)
    return sqrt(float(rad)) * float(ssum)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention."""
    j12 = _twice(j1, "j1")
    j22 = _twice(j2, "j2")
    M2 = _twice(M, "M")
    J2 = _twice(J, "J")
    w = wigner3j(j1, j2, J, m1, m2, -M)
    if w == 0.0:
        return 0.0
    phase = -1 if ((j12 - j22 + M2) // 2) % 2 else 1
    return phase * sqrt(J2 + 1.0) * w
