"""Frozen counts for the core integration tests, at 60-digit precision.

count(x, delta, M, N) = |{M < q <= N : max_i ||q x_i|| < delta}|.
"""
from fractions import Fraction
import mpmath

mpmath.mp.dps = 60


def dist(v):
    f = v - mpmath.floor(v)
    return min(f, 1 - f)


def count(xs, delta, m, n):
    d = mpmath.mpf(delta.numerator) / delta.denominator
    return sum(1 for q in range(m + 1, n + 1) if max(dist(q * x) for x in xs) < d)


s2, s3 = mpmath.sqrt(2), mpmath.sqrt(3)
golden = (mpmath.sqrt(5) - 1) / 2
print("sqrt2m1 1/10 (0,100]", count([s2 - 1], Fraction(1, 10), 0, 100))
print("golden 1/20 (0,1000]", count([golden], Fraction(1, 20), 0, 1000))
print("sqrt2,sqrt3 1/5 (0,1000]", count([s2, s3], Fraction(1, 5), 0, 1000))
print("sqrt2,sqrt3 1/5 (500,1000]", count([s2, s3], Fraction(1, 5), 500, 1000))
print("lattice sqrt2m1 N=1000 1/10", 2 * count([s2 - 1], Fraction(1, 10), 0, 999) + 1)
print("lattice sqrt2,sqrt3 N=300 1/5", 2 * count([s2, s3], Fraction(1, 5), 0, 299) + 1)
