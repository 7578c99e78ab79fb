"""Direct-scan oracle for the fiber fractions on {sqrt2-1} x [0,1].

Qualifying q (with ||q x|| < psi(q)) are found with a float prefilter and
rechecked in 60-digit arithmetic near the boundary; grid points
y = i/10001 are then tested with exact integer arithmetic.
"""
import math
import sys

import mpmath
import numpy as np

mpmath.mp.dps = 60
X = mpmath.sqrt(2) - 1
GRID = 10_000
DEN = GRID + 1


def dist(v):
    f = v - mpmath.floor(v)
    return min(f, 1 - f)


def qualifying(psi, q_lo, q_hi):
    q = np.arange(q_lo + 1, q_hi + 1, dtype=np.float64)
    xf = math.sqrt(2) - 1
    t = q * xf
    d = np.abs(t - np.round(t))
    p = psi(q)
    cand = q[d < p * (1 + 1e-6) + 1e-9]
    out = []
    for qq in cand.astype(np.int64):
        qq = int(qq)
        exact = dist(qq * X)
        if exact < psi_mp(psi, qq):
            out.append(qq)
    return out


def psi_mp(psi, q):
    return psi.mp(q)


class Power:
    def __init__(self, a):
        self.a = a

    def __call__(self, q):
        return q ** (-self.a)

    def mp(self, q):
        return mpmath.mpf(q) ** (-mpmath.mpf(self.a))


class Phi:
    def __call__(self, q):
        return (q * np.log(q) ** 2) ** -0.5

    def mp(self, q):
        q = mpmath.mpf(q)
        return (q * mpmath.log(q) ** 2) ** mpmath.mpf(-0.5)


def fraction(psi, qs):
    i = np.arange(1, GRID + 1, dtype=np.int64)
    hit = np.zeros(GRID, dtype=bool)
    for q in qs:
        r = (q % DEN) * i % DEN
        m = np.minimum(r, DEN - r)
        bound = psi_mp(psi, q) * DEN
        lo = int(mpmath.floor(bound))
        # m integer: m < bound  <=>  m <= floor(bound), or m < bound when bound is an integer
        hit |= m < lo if bound == lo else m <= lo
    return hit.sum() / GRID


def main():
    half = Power(0.5)
    qs = qualifying(half, 0, 1_000_000)
    for qmax in (10**3, 10**4, 10**5, 10**6):
        sub = [q for q in qs if q <= qmax]
        print(f"divergent Qmax={qmax} qualifying={len(sub)} fraction={fraction(half, sub)}")
    phi = Phi()
    qs = qualifying(phi, 1000, 1_000_000)
    ub = mpmath.fsum(2 * phi.mp(q) * (q + 1) / q for q in qs)
    print(f"phi Q0=1000 Qmax=1000000 qualifying={len(qs)} fraction={fraction(phi, qs)} union_bound={mpmath.nstr(ub, 15)}")


if __name__ == "__main__":
    sys.exit(main())
