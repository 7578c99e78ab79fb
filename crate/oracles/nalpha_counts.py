"""Counts |{q in [-(N-1), N-1] : ||q x|| < delta}| style checks for x = sqrt2-1.

Prints, for delta = N^(-2/3), the one-sided count over 1 <= q <= N, the
two-sided lattice count 2*#{1<=q<=N-1} + 1, and 16*N*delta.
"""
import mpmath

mpmath.mp.dps = 50
X = mpmath.sqrt(2) - 1


def dist(v):
    f = v - mpmath.floor(v)
    return min(f, 1 - f)


for n in (10**3, 10**4, 10**5, 10**6):
    delta = mpmath.mpf(n) ** (mpmath.mpf(-2) / 3)
    hits = [q for q in range(1, n + 1) if dist(q * X) < delta]
    below = sum(1 for q in hits if q <= n - 1)
    print(f"N={n} one_sided={len(hits)} lattice={2 * below + 1} bound={mpmath.nstr(16 * n * delta, 12)}")
