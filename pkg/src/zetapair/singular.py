"""Hardy-Littlewood singular series and its fluctuation calculus.

S(h) = 2 C2 prod_{p|h, p>2} (p-1)/(p-2) for even h, 0 for odd h, with
C2 = prod_{p>2} (1 - 1/(p-1)^2) the twin prime constant.  Around the main
terms of its partial sums live two fluctuation functions,

    fluctuation(y)      = sum_{h<=y} S(h) - y + (1/2) log y
    drift(y)            = int_1^y (fluctuation(u) - B/2) du,

with B = -euler_gamma - log(2 pi).  Everything downstream (tail sums,
drift integrals, identity checks) is evaluated piecewise-exactly over unit
intervals: on [h, h+1) the fluctuation is an explicit elementary function,
so all integrals reduce to closed-form antiderivatives with u log u terms
and no quadrature error enters the identity tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .accum import compensated_cumsum, fsum
from .arithmetic import PrimeSieve

LOG_2PI = math.log(2.0 * math.pi)


class TableRangeError(ValueError):
    """Requested argument exceeds the tabulated range."""


@dataclass(frozen=True)
class Constants:
    """Derived constants of the fluctuation calculus.

    A = (1 - euler_gamma - log 2pi)/2 and B = -euler_gamma - log 2pi
    satisfy B = 2A - 1; both recur in the partial-sum main terms.
    """

    euler_gamma: float
    twin_prime_constant: float
    A: float
    B: float

    @classmethod
    def compute(cls, sieve: PrimeSieve, prime_limit: int | None = None) -> "Constants":
        gamma = float(np.euler_gamma)
        c2 = twin_prime_constant(prime_limit or sieve.limit, sieve)
        return cls(
            euler_gamma=gamma,
            twin_prime_constant=c2,
            A=0.5 * (1.0 - gamma - LOG_2PI),
            B=-gamma - LOG_2PI,
        )


def twin_prime_constant(prime_limit: int, sieve: PrimeSieve) -> float:
    """prod_{2 < p <= prime_limit} (1 - 1/(p-1)^2).

    Monotone decreasing in prime_limit; the dropped factors contribute
    less than sum_{p > prime_limit} 1/(p-1)^2 < 2/prime_limit.
    """
    if prime_limit < 3:
        raise ValueError("prime_limit must be at least 3")
    p = sieve.primes(prime_limit).astype(np.float64)
    p = p[p > 2]
    return math.exp(fsum(np.log1p(-1.0 / ((p - 1.0) ** 2))))


def singular_series(h: int, constants: Constants, sieve: PrimeSieve) -> float:
    """S(h): the prime-pair density constant at even shift h; 0 for odd h."""
    if h < 1:
        raise ValueError("h must be a positive integer")
    if h % 2 == 1:
        return 0.0
    value = 2.0 * constants.twin_prime_constant
    for p in sieve.odd_prime_factors(h):
        value *= (p - 1.0) / (p - 2.0)
    return value


@dataclass(frozen=True)
class SingularTable:
    """Precomputed singular-series arrays for 1..hmax.

    values[h] = S(h); dev arrays hold the deviation prefix sums
    sum_{k<=h} (S(k) - 1) k^alpha, which stay O(h^alpha · polylog) and so
    avoid the cancellation that raw prefix sums would suffer.  The raw
    prefix sums are reconstructed exactly from them on demand.
    """

    hmax: int
    constants: Constants
    values: np.ndarray = field(repr=False)
    dev0: np.ndarray = field(repr=False)
    dev1: np.ndarray = field(repr=False)
    dev2: np.ndarray = field(repr=False)
    f_at_integers: np.ndarray = field(repr=False)
    F2_at_integers: np.ndarray = field(repr=False)
    inv2_prefix: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.values, self.dev0, self.dev1, self.dev2,
                    self.f_at_integers, self.F2_at_integers, self.inv2_prefix):
            arr.setflags(write=False)

    def check(self, y: float, what: str = "y") -> None:
        if not 1.0 <= y <= self.hmax:
            raise TableRangeError(f"{what}={y} outside tabulated range 1..{self.hmax}")

    @property
    def prefix0(self) -> np.ndarray:
        """sum_{k<=h} S(k)."""
        return self.dev0 + np.arange(self.hmax + 1, dtype=np.float64)

    @property
    def prefix1(self) -> np.ndarray:
        """sum_{k<=h} S(k) k."""
        h = np.arange(self.hmax + 1, dtype=np.int64)
        return self.dev1 + (h * (h + 1) // 2).astype(np.float64)

    @property
    def prefix2(self) -> np.ndarray:
        """sum_{k<=h} S(k) k^2."""
        h = np.arange(self.hmax + 1, dtype=np.object_)
        exact = h * (h + 1) * (2 * h + 1) // 6
        return self.dev2 + exact.astype(np.float64)

    def quadratic_inverse_sum(self, H: float) -> float:
        """sum_{h <= H} S(h)/h^2, truncating at hmax with no tail term."""
        n = min(int(math.floor(H)), self.hmax)
        return float(self.inv2_prefix[n]) if n >= 1 else 0.0


def build_table(hmax: int, sieve: PrimeSieve, constants: Constants | None = None) -> SingularTable:
    """Tabulate S(h), deviation prefixes, and drift values for h <= hmax."""
    if hmax < 2:
        raise ValueError("hmax must be at least 2")
    if hmax > 10**8:
        raise ValueError("hmax above 1e8 not supported (memory guard)")
    if hmax > sieve.limit:
        raise SieveTooSmallError(hmax, sieve.limit)
    if constants is None:
        constants = Constants.compute(sieve)

    # Odd-prime-factor ratio sieve: r[h] = prod_{p|h, p>2} (p-1)/(p-2).
    ratio = np.ones(hmax + 1, dtype=np.float64)
    for p in sieve.primes(hmax):
        p = int(p)
        if p > 2:
            ratio[p::p] *= (p - 1.0) / (p - 2.0)
    values = np.zeros(hmax + 1, dtype=np.float64)
    values[2::2] = 2.0 * constants.twin_prime_constant * ratio[2::2]

    term = values - 1.0
    term[0] = 0.0
    dev0 = compensated_cumsum(term)

    idx = np.arange(hmax + 1, dtype=np.float64)
    dev1 = compensated_cumsum(term * idx)
    dev2 = compensated_cumsum(term * idx * idx)

    B = constants.B
    h = idx[1:hmax]  # segment left endpoints 1..hmax-1
    log_step = h * np.log1p(1.0 / h) + np.log(h + 1.0)
    seg_f = dev0[1:hmax] - B / 2.0 - 1.0 + 0.5 * log_step
    f_at = np.zeros(hmax + 1, dtype=np.float64)
    f_at[2:] = compensated_cumsum(seg_f)

    # int_0^1 of the in-segment log part (u log u - h log h), closed form.
    j_seg = (0.5 * h * h + h) * np.log1p(1.0 / h) + 0.5 * np.log(h + 1.0) - 0.5 * h - 0.25
    seg_F2 = f_at[1:hmax] + 0.5 * (dev0[1:hmax] - B / 2.0) - 1.0 / 6.0 - 0.25 + 0.5 * j_seg
    F2_at = np.zeros(hmax + 1, dtype=np.float64)
    F2_at[2:] = compensated_cumsum(seg_F2)

    hh = idx.copy()
    hh[0] = 1.0
    inv2 = compensated_cumsum(values / (hh * hh))

    return SingularTable(
        hmax=hmax, constants=constants, values=values,
        dev0=dev0, dev1=dev1, dev2=dev2,
        f_at_integers=f_at, F2_at_integers=F2_at, inv2_prefix=inv2,
    )


class SieveTooSmallError(ValueError):
    def __init__(self, hmax: int, limit: int):
        super().__init__(f"table hmax={hmax} exceeds sieve limit {limit}")


def _split(y):
    """floor/fraction split accepting scalars or arrays."""
    n = np.floor(y).astype(np.int64) if isinstance(y, np.ndarray) else int(math.floor(y))
    return n, y - n


def power_sum_deviation(y: float, alpha: int, table: SingularTable) -> float:
    """sum_{h<=y} S(h) h^alpha - y^(alpha+1)/(alpha+1), for alpha in {0,1,2}.

    Evaluated from the deviation prefixes plus the exact closed form of
    sum_{h<=n} h^alpha - y^(alpha+1)/(alpha+1), so no large cancellation.
    """
    table.check(y)
    n, d = _split(y)
    if alpha == 0:
        return float(table.dev0[n]) - d
    if alpha == 1:
        return float(table.dev1[n]) + (n - 2.0 * n * d - d * d) / 2.0
    if alpha == 2:
        nf = float(n)
        return float(table.dev2[n]) + (nf * nf / 2.0 + nf / 6.0
                                       - nf * nf * d - nf * d * d - d ** 3 / 3.0)
    raise ValueError("alpha must be 0, 1 or 2")


def fluctuation(y, table: SingularTable):
    """sum_{h<=y} S(h) - y + (1/2) log y.  Accepts scalars or arrays."""
    yy = np.asarray(y, dtype=np.float64)
    table.check(float(np.min(yy)))
    table.check(float(np.max(yy)))
    n, d = _split(yy) if isinstance(yy, np.ndarray) and yy.ndim else _split(float(y))
    out = table.dev0[n] - d + 0.5 * np.log(yy)
    return float(out) if np.isscalar(y) or np.ndim(y) == 0 else out


def inverse_power_tail(y: float, alpha: int, table: SingularTable,
                       analytic_tail: bool = True) -> float:
    """sum_{h>y} S(h)/h^alpha, truncated at hmax.

    With analytic_tail the dropped part beyond hmax is approximated by its
    average-density integral hmax^(1-alpha)/(alpha-1); the remaining error
    is below inverse_power_tail_bound(alpha, table).
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1 for a convergent tail")
    if y < 1.0:
        raise ValueError("y must be at least 1")
    n = min(int(math.floor(y)), table.hmax)
    if alpha == 2:
        total = float(table.inv2_prefix[table.hmax] - table.inv2_prefix[n])
    else:
        h = np.arange(n + 1, table.hmax + 1, dtype=np.float64)
        total = float(np.add.reduce(table.values[n + 1:] / h ** alpha))
    if analytic_tail:
        total += table.hmax ** (1 - alpha) / (alpha - 1)
    return total


def inverse_power_tail_bound(alpha: int, table: SingularTable) -> float:
    """Bound on the error of the analytic-tail approximation beyond hmax."""
    z = float(table.hmax)
    return 2.0 * (math.log(z) + 6.0) / z ** alpha


def drift(y, table: SingularTable):
    """int_1^y (fluctuation(u) - B/2) du, piecewise exact.  Scalar or array."""
    scalar = np.ndim(y) == 0
    yy = np.atleast_1d(np.asarray(y, dtype=np.float64))
    table.check(float(yy.min()))
    table.check(float(yy.max()))
    n, d = _split(yy)
    B = table.constants.B
    nf = n.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_part = nf * np.log1p(np.where(nf > 0, d / nf, 0.0)) + d * np.log(yy)
    out = (table.f_at_integers[n]
           + (table.dev0[n] - B / 2.0) * d - d * d / 2.0
           + 0.5 * (log_part - d))
    return float(out[0]) if scalar else out


def drift_integral(y, table: SingularTable):
    """int_1^y drift(u) du, one antiderivative level above drift."""
    scalar = np.ndim(y) == 0
    yy = np.atleast_1d(np.asarray(y, dtype=np.float64))
    table.check(float(yy.min()))
    table.check(float(yy.max()))
    n, d = _split(yy)
    B = table.constants.B
    nf = n.astype(np.float64)
    b = table.dev0[n] - B / 2.0
    # int_0^d of the in-segment log part (u log u - h log h).
    j = ((0.5 * nf * nf + nf * d) * np.log1p(d / nf)
         + 0.5 * d * d * np.log(yy) - 0.5 * nf * d - 0.25 * d * d)
    out = (table.F2_at_integers[n] + table.f_at_integers[n] * d
           + 0.5 * b * d * d - d ** 3 / 6.0 - 0.25 * d * d + 0.5 * j)
    return float(out[0]) if scalar else out


def _quartic_segment_integrals(table: SingularTable, n, d_from, d_to):
    """int over delta in [d_from, d_to] of drift(n+delta)/(n+delta)^4.

    Closed form per segment: drift is constant + linear + quadratic + u log u
    in u = n + delta, and every product with u^-4 has an elementary
    antiderivative.
    """
    nf = np.asarray(n, dtype=np.float64)
    a = nf + d_from
    bnd = nf + d_to
    B = table.constants.B
    fh = table.f_at_integers[n]
    slope = table.dev0[n] - B / 2.0

    inv3 = (a ** -3 - bnd ** -3) / 3.0                      # int u^-4
    inv2 = (a ** -2 - bnd ** -2) / 2.0                      # int u^-3
    inv1 = a ** -1 - bnd ** -1                              # int u^-2
    i_delta = inv2 - nf * inv3                              # int (u-n) u^-4
    i_delta2 = inv1 - 2.0 * nf * inv2 + nf * nf * inv3      # int (u-n)^2 u^-4
    logn = np.log(nf)
    i_ulog = (np.log(a) / (2.0 * a * a) + 1.0 / (4.0 * a * a)
              - np.log(bnd) / (2.0 * bnd * bnd) - 1.0 / (4.0 * bnd * bnd))
    return (fh * inv3 + slope * i_delta - 0.5 * i_delta2 - 0.5 * i_delta
            + 0.5 * (i_ulog - nf * logn * inv3))


def drift_quartic_tail(y: float, table: SingularTable, ymax: float | None = None) -> float:
    """int_y^ymax drift(u)/u^4 du (default ymax = hmax), piecewise exact."""
    ymax = float(table.hmax) if ymax is None else float(ymax)
    table.check(y)
    table.check(ymax, "ymax")
    if y > ymax:
        raise ValueError("need y <= ymax")
    return _quartic_cumulative(table, np.asarray([y]))[0] - \
        _quartic_cumulative(table, np.asarray([ymax]))[0]


def drift_quartic_tail_bound(ymax: float) -> float:
    """Dropped mass beyond ymax under the frozen |drift(u)| <= 5 u^0.6 bound."""
    return 5.0 / 2.4 * ymax ** -2.4


def _quartic_cumulative(table: SingularTable, y: np.ndarray) -> np.ndarray:
    """int_y^hmax drift(u)/u^4 du for an array of y, via cached suffix sums."""
    cache = getattr(table, "_quartic_suffix", None)
    if cache is None:
        h = np.arange(1, table.hmax, dtype=np.int64)
        seg = _quartic_segment_integrals(table, h, 0.0, 1.0)
        suffix = np.zeros(table.hmax + 1, dtype=np.float64)
        suffix[1:table.hmax] = compensated_cumsum(seg[::-1])[::-1]
        object.__setattr__(table, "_quartic_suffix", suffix)
        cache = suffix
    n, d = _split(y)
    partial = np.where(
        d > 0.0,
        _quartic_segment_integrals(table, np.minimum(n, table.hmax - 1), 0.0, d),
        0.0,
    )
    return cache[n] - partial


def fluctuation_moment_integral(y: float, alpha: int, table: SingularTable) -> float:
    """int_1^y fluctuation(u) u^(alpha-1) du for alpha in {1, 2}, piecewise exact."""
    table.check(y)
    if alpha == 1:
        return drift(y, table) + table.constants.B / 2.0 * (y - 1.0)
    if alpha != 2:
        raise ValueError("alpha must be 1 or 2")
    n, d = _split(float(y))
    hs = np.arange(1, n + 1, dtype=np.float64)
    widths = np.ones(n, dtype=np.float64)
    if d == 0.0:
        hs = hs[:-1]
        widths = widths[:-1]
    else:
        widths[-1] = d
    dev = table.dev0[hs.astype(np.int64)]
    w = widths
    poly = dev * (2.0 * hs * w + w * w) / 2.0 - hs * w * w / 2.0 - w ** 3 / 3.0
    upper = hs + w
    ulog = hs * hs * np.log1p(w / hs) + (2.0 * hs * w + w * w) * np.log(upper)
    logpart = 0.25 * ulog - (2.0 * hs * w + w * w) / 8.0
    return fsum(poly + logpart)


def fluctuation_inverse_cubic_integral(y: float, ymax: float, table: SingularTable) -> float:
    """int_y^ymax fluctuation(u)/u^3 du, piecewise exact."""
    table.check(y)
    table.check(ymax, "ymax")
    if y > ymax:
        raise ValueError("need y <= ymax")
    ny, dy = _split(float(y))
    nx, dx = _split(float(ymax))
    segs = []
    # partial head segment [y, min(ny+1, ymax))
    if dy > 0.0:
        top = 1.0 if ny < nx else dx
        segs.append(_cubic_segment(table, np.asarray([ny]), np.asarray([dy]),
                                   np.asarray([top])))
        start = ny + 1
    else:
        start = ny
    if start < nx:
        h = np.arange(start, nx, dtype=np.int64)
        segs.append(_cubic_segment(table, h, np.zeros(h.size), np.ones(h.size)))
    if dx > 0.0 and nx >= start:
        segs.append(_cubic_segment(table, np.asarray([nx]), np.asarray([0.0]),
                                   np.asarray([dx])))
    return fsum(np.concatenate(segs)) if segs else 0.0


def _cubic_segment(table: SingularTable, n, d_from, d_to):
    """int over [n+d_from, n+d_to] of fluctuation(u)/u^3 du, closed form."""
    nf = np.asarray(n, dtype=np.float64)
    a = nf + d_from
    b = nf + d_to
    dev = table.dev0[n]
    inv2 = (a ** -2 - b ** -2) / 2.0                        # int u^-3
    inv1 = a ** -1 - b ** -1                                # int u^-2
    i_ulog = (np.log(a) / (2.0 * a * a) + 1.0 / (4.0 * a * a)
              - np.log(b) / (2.0 * b * b) - 1.0 / (4.0 * b * b))
    # fluctuation(u) = dev + (n - u) + log(u)/2 on the segment
    return (dev + nf) * inv2 - inv1 + 0.5 * i_ulog


def ramp_weighted_sum(h: int, table: SingularTable) -> float:
    """sum_{k<=h} (h-k) S(k), exactly from the deviation prefixes."""
    table.check(h, "h")
    n = int(h)
    return float(n * table.dev0[n] - table.dev1[n] + n * (n - 1) / 2.0)


def ramp_weighted_main(h: float, constants: Constants) -> float:
    """Main term h^2/2 - (h log h)/2 + A h of the ramp-weighted sum."""
    return 0.5 * h * h - 0.5 * h * math.log(h) + constants.A * h
