"""Exact integer/rational arithmetic helpers.

All dimension-style inequalities in this package reduce to comparisons of
integer powers; nothing here touches floating point except the final
6-decimal log-ratio formatting done by callers.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as math_gcd


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("iroot of negative number")
    if k < 1:
        raise ValueError("root index must be >= 1")
    if n in (0, 1) or k == 1:
        return n
    hi = 1 << (-(-n.bit_length() // k) + 1)
    lo = 0
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid
    return lo


def floor_power(base: int, exp: Fraction) -> int:
    """floor(base ** exp) for integer base >= 1 and rational exp >= 0."""
    if exp < 0:
        raise ValueError("negative exponent")
    p, q = exp.numerator, exp.denominator
    return iroot(base**p, q)


def pow_at_least(base: int, exp: Fraction, value: int) -> bool:
    """True iff base ** exp >= value (exact, rational exp of any sign)."""
    if value <= 0:
        return True
    p, q = exp.numerator, exp.denominator
    if p >= 0:
        return base**p >= value**q
    return 1 >= value**q * base ** (-p)


def pow_at_most(base: int, exp: Fraction, value: int) -> bool:
    """True iff base ** exp <= value (exact)."""
    if value <= 0:
        return False
    p, q = exp.numerator, exp.denominator
    if p >= 0:
        return base**p <= value**q
    return 1 <= value**q * base ** (-p)


def count_meets_power_bound(count: int, base: int, n: int, N: int,
                            eps: Fraction) -> bool:
    """True iff count >= N**n * base**(-n*eps), checked in integers.

    count >= N^n M^{-n eps}  <=>  count^q * M^(n p) >= N^(n q)
    with eps = p/q.
    """
    p, q = eps.numerator, eps.denominator
    return count**q * base ** (n * p) >= N ** (n * q)


def badic_power_sum_le(base: int, term_exps: list[int], bound_exp: int,
                       alpha_eps: Fraction, max_bits: int = 65536) -> bool:
    """Decide sum_i (b^e_i)^t <= (b^L)^t exactly, t = alpha_eps > 0.

    All quantities are powers of `base` with rational exponent n_i/q.
    Exact equality is decided by comparing integer coefficient vectors
    over the basis {b^(r/q)}; otherwise each b^(n_i/q) is bounded by
    integer q-th roots at increasing precision until the strict
    comparison is certain.
    """
    t = alpha_eps
    if t <= 0:
        raise ValueError("exponent must be positive")
    p, q = t.numerator, t.denominator
    # normalize to a primitive base c (base = c^m with m maximal), so
    # that the c^(r/q) below are linearly independent over the rationals
    m = 1
    for cand in range(base.bit_length(), 1, -1):
        root = iroot(base, cand)
        if root**cand == base:
            m = cand
            break
    base = iroot(base, m)
    fracs = [Fraction(e * p * m, q) for e in term_exps]
    tgt_frac = Fraction(bound_exp * p * m, q)
    q = 1
    for f in fracs + [tgt_frac]:
        q = q * f.denominator // math_gcd(q, f.denominator)
    nums = [int(f * q) for f in fracs]
    target = int(tgt_frac * q)
    if q == 1:
        return sum(base**n for n in nums) <= base**target
    shift0 = min(min(nums), target)  # make all exponents nonnegative
    nums = [n - shift0 for n in nums]
    target -= shift0

    def coeffs(exps):
        out = {}
        for n in exps:
            r = n % q
            out[r] = out.get(r, 0) + base ** (n // q)
        return out

    if coeffs(nums) == coeffs([target]):
        return True  # exact equality
    bits = 32
    while bits <= max_bits:
        shift = 1 << (q * bits)
        # lo <= b^(n/q) * 2^bits < lo + 1 for each term
        lo_sum = sum(iroot(base**n * shift, q) for n in nums)
        tgt_lo = iroot(base**target * shift, q)
        if lo_sum + len(nums) <= tgt_lo:
            return True
        if lo_sum >= tgt_lo + 1:
            return False
        bits *= 2
    raise ArithmeticError("could not resolve power-sum comparison "
                          f"within {max_bits} bits of precision")


def parse_fraction(text: str) -> Fraction:
    """Parse 'p/q' or a decimal string into an exact Fraction."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)
