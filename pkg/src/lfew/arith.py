"""Small integer-arithmetic helpers: primes, factorization, binomials."""

from __future__ import annotations

import math
from functools import lru_cache

__all__ = ["primes_upto", "factorize", "is_prime", "prime_power_split", "binomial"]


@lru_cache(maxsize=None)
def primes_upto(n):
    """Tuple of primes <= n (simple sieve)."""
    if n < 2:
        return ()
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(math.isqrt(n)) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return tuple(i for i in range(n + 1) if sieve[i])


@lru_cache(maxsize=200000)
def factorize(n):
    """Prime factorization of n >= 1 as a tuple of (p, e), ascending."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    m = n
    for p in (2, 3, 5):
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            out.append((p, e))
    f = 7
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while f * f <= m:
        e = 0
        while m % f == 0:
            m //= f
            e += 1
        if e:
            out.append((f, e))
        f += wheel[i]
        i = (i + 1) % 8
    if m > 1:
        out.append((m, 1))
    return tuple(out)


def is_prime(n):
    return n >= 2 and factorize(n) == ((n, 1),)


def prime_power_split(q):
    """(p, e) for a prime power q, else ValueError."""
    f = factorize(q)
    if len(f) != 1:
        raise ValueError(f"{q} is not a prime power")
    return f[0]


def binomial(n, k):
    return math.comb(n, k)
