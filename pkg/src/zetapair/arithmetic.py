"""Prime sieve, von Mangoldt function, and Lambda-weighted sums.

The sieve stores smallest prime factors, which gives both Lambda(n) and the
odd-prime factorizations needed by the singular series.  The weighted sums
Sum Lambda(n)^2 n and the cubic-decay tail are compared elsewhere against
their prime-number-theorem main terms; the prime-pair sum
Sum Lambda(n) Lambda(n+d) is the empirical side of the Hardy-Littlewood
prediction S(d) * N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .accum import fsum


class SieveRangeError(ValueError):
    """Requested value exceeds the sieve limit."""


@dataclass(frozen=True)
class PrimeSieve:
    """Smallest-prime-factor table for 1..limit.

    Immutable after construction; safe to share across threads.
    """

    limit: int
    smallest_prime_factor: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.smallest_prime_factor.setflags(write=False)

    def check(self, n: int, what: str = "n") -> None:
        if not 1 <= n <= self.limit:
            raise SieveRangeError(f"{what}={n} outside sieve range 1..{self.limit}")

    def is_prime(self, n: int) -> bool:
        self.check(n)
        return n >= 2 and int(self.smallest_prime_factor[n]) == n

    def primes(self, upto: int | None = None) -> np.ndarray:
        """All primes <= upto (default: the full sieve range)."""
        upto = self.limit if upto is None else upto
        self.check(upto, "upto")
        spf = self.smallest_prime_factor[: upto + 1]
        idx = np.arange(upto + 1, dtype=spf.dtype)
        return np.nonzero((spf == idx) & (idx >= 2))[0]

    def odd_prime_factors(self, n: int) -> list[int]:
        """Distinct odd prime factors of n."""
        self.check(n)
        out = []
        spf = self.smallest_prime_factor
        while n > 1:
            p = int(spf[n])
            if p > 2:
                out.append(p)
            while n % p == 0:
                n //= p
        return out


def build_sieve(limit: int = 10**7) -> PrimeSieve:
    """Sieve smallest prime factors up to limit.

    Fills multiples of each prime in increasing order, touching only slots
    not yet claimed by a smaller prime, so every entry ends up minimal.
    """
    if limit < 2:
        raise ValueError("sieve limit must be at least 2")
    if limit > 10**8:
        raise ValueError("sieve limit above 1e8 not supported (memory guard)")
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    remaining = np.nonzero(spf == 0)[0]
    spf[remaining] = remaining
    spf[0] = 0
    spf[1] = 1
    return PrimeSieve(limit=limit, smallest_prime_factor=spf)


def von_mangoldt(n: int, sieve: PrimeSieve) -> float:
    """Lambda(n): log p if n is a power of the prime p, else 0."""
    sieve.check(n)
    if n < 2:
        return 0.0
    p = int(sieve.smallest_prime_factor[n])
    while n % p == 0:
        n //= p
    return math.log(p) if n == 1 else 0.0


def prime_powers(limit: int, sieve: PrimeSieve) -> tuple[np.ndarray, np.ndarray]:
    """All prime powers p^k <= limit with their weights log p.

    Returns (n_values, log_p) sorted by n; this is the support of Lambda,
    so sums over Lambda need only these ~pi(limit) points.
    """
    sieve.check(limit, "limit")
    primes = sieve.primes(limit)
    logs = np.log(primes.astype(np.float64))
    ns, ws = [primes], [logs]
    base, power, lg = primes, primes.copy(), logs
    while base.size:
        keep = power <= limit // base
        base, lg = base[keep], lg[keep]
        power = power[keep] * base
        if power.size:
            ns.append(power.copy())
            ws.append(lg.copy())
    n_all = np.concatenate(ns)
    w_all = np.concatenate(ws)
    order = np.argsort(n_all, kind="stable")
    return n_all[order], w_all[order]


def lambda_square_sum(x: int, sieve: PrimeSieve) -> float:
    """Sum_{n<=x} Lambda(n)^2 n, exactly up to compensated rounding."""
    if x < 1:
        raise ValueError("x must be positive")
    sieve.check(x, "x")
    ns, ws = prime_powers(x, sieve)
    return fsum(ws * ws * ns.astype(np.float64))


def lambda_square_sum_main_term(x: float) -> float:
    """Main term (x^2 log x)/2 - x^2/4 of the weighted square sum."""
    return 0.5 * x * x * math.log(x) - 0.25 * x * x


def lambda_square_tail(x: int, limit: int, sieve: PrimeSieve) -> float:
    """Sum_{x < n <= limit} Lambda(n)^2 / n^3.

    Truncation of the infinite tail at `limit` leaves a remainder below
    (log limit)^2 / (2 limit^2); callers comparing against the asymptotic
    (log x)/(2 x^2) + 1/(4 x^2) should keep limit >> x.
    """
    if not x < limit:
        raise ValueError("need x < limit")
    sieve.check(limit, "limit")
    ns, ws = prime_powers(limit, sieve)
    mask = ns > x
    nf = ns[mask].astype(np.float64)
    return fsum(ws[mask] ** 2 / (nf * nf * nf))


def lambda_square_tail_main_term(x: float) -> float:
    """Asymptotic (log x)/(2 x^2) + 1/(4 x^2) of the cubic-decay tail."""
    return 0.5 * math.log(x) / (x * x) + 0.25 / (x * x)


def lambda_square_tail_remainder_bound(limit: float) -> float:
    """Bound on the part of the infinite tail dropped beyond `limit`."""
    return 0.5 * math.log(limit) ** 2 / (limit * limit)


def twin_sum(N: int, d: int, sieve: PrimeSieve) -> float:
    """Sum_{n<=N} Lambda(n) Lambda(n+d) for a fixed shift d != 0.

    Only n that are prime powers contribute, so the sum runs over the
    Lambda support and looks up n+d by binary search.
    """
    if d == 0:
        raise ValueError("shift d must be nonzero")
    if N < 1:
        raise ValueError("N must be positive")
    sieve.check(N + abs(d), "N + |d|")
    ns, ws = prime_powers(N + abs(d), sieve)
    lo = ns[ns <= N]
    wlo = ws[: lo.size]
    targets = lo + d
    valid = targets >= 1
    lo, wlo, targets = lo[valid], wlo[valid], targets[valid]
    pos = np.searchsorted(ns, targets)
    pos = np.clip(pos, 0, ns.size - 1)
    hit = ns[pos] == targets
    return fsum(wlo[hit] * ws[pos[hit]])
