"""Point-separation degree schedules and the thresholds they need.

All certified comparisons use :class:`fractions.Fraction` with j-th roots
bracketed by rationals ``lo <= x^(1/j) <= hi``; floating point is never used
to decide an inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .covdeg import HypothesisViolated

__all__ = [
    "PrecisionExhausted",
    "SeparationSchedule",
    "ThresholdReport",
    "GonalityBound",
    "gonality_lower_bound",
    "degree_inequality_holds",
    "degree_threshold",
    "closed_form_derivation_holds",
    "closed_form_threshold",
    "root_bounds",
    "separation_count",
    "complete_intersection_gonality_bound",
]

START_BITS = 32
MAX_BITS = 4096
DEFAULT_DELTA = Fraction(1, 10**6)
DEFAULT_C = Fraction(1)


class PrecisionExhausted(ArithmeticError):
    pass


def _iroot(s: int, j: int) -> int:
    """Largest t with t**j <= s."""
    if s < 2 or j == 1:
        return s
    if j == 2:
        return math.isqrt(s)
    t = 1 << -(-s.bit_length() // j)  # overestimate
    while True:
        u = ((j - 1) * t + s // t ** (j - 1)) // j
        if u >= t:
            break
        t = u
    while t**j > s:
        t -= 1
    while (t + 1) ** j <= s:
        t += 1
    return t


def root_bounds(x: Fraction, j: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rationals ``lo <= x^(1/j) <= hi`` with ``hi - lo <= 2^-bits`` (equal when exact)."""
    x = Fraction(x)
    if x < 0 or j < 1:
        raise ValueError("root_bounds needs x >= 0 and j >= 1")
    if j == 1:
        return x, x
    scale = 1 << (j * bits)
    num = x.numerator * scale
    s = num // x.denominator
    t = _iroot(s, j)
    lo = Fraction(t, 1 << bits)
    if t**j * x.denominator == num:
        return lo, lo
    return lo, Fraction(t + 1, 1 << bits)


def _check_eps(epsilon) -> Fraction:
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie strictly between 0 and 1, got {eps}")
    return eps


def degree_inequality_holds(n: int, epsilon, c, d: int, start_bits: int = START_BITS, max_bits: int = MAX_BITS) -> bool:
    """Decide ``sum_{j=1..n} j*((1-eps)d)^(1/j) + c < d`` exactly.

    Both verdicts are rigorous: True needs the upper bracket to pass, False
    needs the lower bracket to fail.  The bracket is tightened by doubling
    the precision up to ``max_bits``.
    """
    eps = _check_eps(epsilon)
    c = Fraction(c)
    if n < 1 or d < 1 or c < 0:
        raise ValueError("need n >= 1, d >= 1 and c >= 0")
    x = (1 - eps) * d
    P, Q = x.numerator, x.denominator
    cn, cd = c.numerator, c.denominator
    bits = start_bits
    while bits <= max_bits:
        # bracket sum_{j>=2} j*x^(1/j) between lo/2^bits and hi/2^bits
        lo = hi = 0
        for j in range(2, n + 1):
            num = P << (j * bits)
            t = _iroot(num // Q, j)
            lo += j * t
            hi += j * (t if t**j * Q == num else t + 1)
        # compare S + x + c with d, everything over Q * cd * 2^bits
        rest = (P * cd + cn * Q) << bits
        rhs = (d * Q * cd) << bits
        if hi * Q * cd + rest < rhs:
            return True
        if lo * Q * cd + rest >= rhs:
            return False
        bits *= 2
    raise PrecisionExhausted(f"could not decide the inequality at d={d} with {max_bits} bits")


@dataclass(frozen=True)
class ThresholdReport:
    n: int
    epsilon: Fraction
    c: Fraction
    d0_scan: int
    d0_closed: int
    # the algebraic step used to justify d0_closed, checked literally
    tail_verified: bool

    @property
    def closed_form_sound(self) -> bool:
        return self.d0_scan <= self.d0_closed

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "epsilon": _frac_str(self.epsilon),
            "c": _frac_str(self.c),
            "d0_scan": self.d0_scan,
            "d0_closed": self.d0_closed,
            "tail_verified": self.tail_verified,
        }


def closed_form_threshold(n: int, epsilon, c) -> int:
    eps, c = _check_eps(epsilon), Fraction(c)
    bound = max(c, Fraction(n) / (1 - eps)) / eps**n
    return math.ceil(bound) + 1


def closed_form_derivation_holds(n: int, epsilon, c, d0: int) -> bool:
    """Literal check of the per-term inequalities behind the closed form."""
    eps, c = _check_eps(epsilon), Fraction(c)
    terms = all(((eps ** (j - 1) - eps**j) * d0 / j) ** j > (1 - eps) * d0 for j in range(2, n + 1))
    return terms and eps**n * d0 > c


def degree_threshold(n: int, epsilon, c, max_scan: int = 10**8) -> ThresholdReport:
    """Least ``d`` from which the inequality holds for every larger integer.

    The defect ``f(t) = t - sum_j j((1-eps)t)^(1/j) - c`` is convex on
    ``t >= 0`` (each root is concave) and ``f(0) = -c <= 0``, so ``f(d) > 0``
    forces ``f > 0`` on all of ``[d, oo)``; that certifies the tail.  Between
    ``d0_scan`` and ``d0_closed`` every integer is also checked one by one.
    When the closed form undershoots, ``d0_scan`` exceeds ``d0_closed`` and
    is located by bisection, which the same convexity argument justifies.
    """
    if n < 1:
        raise ValueError("n must be positive")
    eps, c = _check_eps(epsilon), Fraction(c)
    if c < 0:
        raise ValueError("c must be nonnegative")
    d0_closed = closed_form_threshold(n, eps, c)
    tail_verified = closed_form_derivation_holds(n, eps, c, d0_closed)

    def holds(d):
        return degree_inequality_holds(n, eps, c, d)

    if holds(d0_closed):
        d = d0_closed
        while d > 1 and holds(d - 1):
            d -= 1
        return ThresholdReport(n, eps, c, d, d0_closed, tail_verified)
    lo, hi = d0_closed, 2 * d0_closed
    while not holds(hi):
        lo, hi = hi, 2 * hi
        if hi > max_scan:
            raise PrecisionExhausted("inequality never held below the scan limit")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdReport(n, eps, c, hi, d0_closed, tail_verified)


@dataclass(frozen=True)
class SeparationSchedule:
    n: int
    alpha: Fraction
    epsilon: Fraction
    delta: Fraction
    m: int
    a: tuple[Fraction, ...]
    c: Fraction
    d: int
    feasible: bool

    @property
    def total(self) -> Fraction:
        return sum(self.a, Fraction(0)) + self.c

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": _frac_str(self.alpha),
            "epsilon": _frac_str(self.epsilon),
            "delta": _frac_str(self.delta),
            "m": self.m,
            "a": [_frac_str(a) for a in self.a],
            "c": _frac_str(self.c),
            "d": self.d,
            "feasible": self.feasible,
        }


def separation_count(n: int, alpha, epsilon, d: int, delta=DEFAULT_DELTA, c=DEFAULT_C, max_bits: int = MAX_BITS) -> SeparationSchedule:
    """Schedule ``a_j = j*(m/alpha)^(1/j) + delta`` for ``m = floor((1-eps)*alpha*d)`` points.

    Each ``a_j`` is an exact rational upper bound.  The schedule is feasible
    when ``a_1 + ... + a_n + c < d``; if the precision cap is reached without
    a decision it is reported infeasible.
    """
    eps = _check_eps(epsilon)
    alpha, delta, c = Fraction(alpha), Fraction(delta), Fraction(c)
    if n < 1 or d < 1 or alpha <= 0 or delta <= 0 or c < 0:
        raise ValueError("need n >= 1, d >= 1, alpha > 0, delta > 0, c >= 0")
    m = math.floor((1 - eps) * alpha * d)
    x = Fraction(m) / alpha
    bits = START_BITS
    while True:
        bounds = [root_bounds(x, j, bits) for j in range(1, n + 1)]
        a = tuple(j * hi + delta for j, (_, hi) in enumerate(bounds, start=1))
        if sum(a) + c < d:
            feasible = True
            break
        lower = sum((j * lo + delta for j, (lo, _) in enumerate(bounds, start=1)), Fraction(0))
        if lower + c >= d or bits >= max_bits:
            feasible = False
            break
        bits *= 2
    return SeparationSchedule(n, alpha, eps, delta, m, a, c, d, feasible)


def gonality_lower_bound(n: int, alpha, epsilon, d: int, delta=DEFAULT_DELTA, c=DEFAULT_C) -> int:
    """``m + 1`` when the schedule separates ``m`` points, else 0 (nothing certified)."""
    s = separation_count(n, alpha, epsilon, d, delta, c)
    return s.m + 1 if s.feasible else 0


@dataclass(frozen=True)
class GonalityBound:
    bound: int
    alpha: int
    schedule: SeparationSchedule
    # bound / (d_1 * ... * d_r): the constant actually achieved
    ratio: Fraction

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "alpha": self.alpha,
            "schedule": self.schedule.to_dict(),
            "ratio": _frac_str(self.ratio),
        }


def complete_intersection_gonality_bound(n: int, degrees, epsilon, delta=DEFAULT_DELTA, c=DEFAULT_C) -> GonalityBound:
    """Covering-gonality bound for a complete intersection of dimension ``n``.

    ``X`` is viewed as a divisor of class ``d_1 H`` on the complete
    intersection ``Y`` of type ``(d_2, ..., d_r)``, which has dimension
    ``n + 1``.  Subvarieties of ``Y`` have degree at least
    ``alpha = prod_{i>=2} (d_i - n)``, and the schedule runs on ``Y`` with
    ``d = d_1``.
    """
    degrees = [int(d) for d in degrees]
    if n < 1 or not degrees or any(d < 1 for d in degrees):
        raise ValueError("need n >= 1 and at least one positive degree")
    d1, rest = degrees[0], degrees[1:]
    if any(d < n + 1 for d in rest):
        raise HypothesisViolated(f"degrees after the first must be >= n + 1 = {n + 1}")
    alpha = math.prod(d - n for d in rest)
    schedule = separation_count(n + 1, alpha, epsilon, d1, delta, c)
    bound = schedule.m + 1 if schedule.feasible else 0
    return GonalityBound(bound, alpha, schedule, Fraction(bound, math.prod(degrees)))


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
