"""Closed-form block error analytics: union bounds and nearest-neighbour terms.

Every bound is assembled from the pairwise error probability between two
waveforms whose tone orders differ in l pulse slots.  The number of
rivals at distance l is subfactorial(l) * C(M, l); summing pairwise
terms over l = 2..M gives the union bound, keeping only l = 2 gives the
nearest-neighbour approximation.  Values are returned unclamped (a bound
may exceed 1 at low SNR); use ``clamp`` for display.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, erfc, exp, fsum, lgamma, log, sqrt

import mpmath

from .errors import NumericError, ValidationError

# Above this chi-square order the alternating binomial sum loses too many
# digits in doubles, so evaluation switches to arbitrary precision.
_FLOAT_ORDER_LIMIT = 30


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation controls for the Poisson-weighted fading series."""

    tol: float = 1e-12
    j_max: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError(f"series tolerance must be positive, got {self.tol}")
        if self.j_max < 1:
            raise ValidationError(f"series cap must be at least 1, got {self.j_max}")


DEFAULT_SERIES = SeriesConfig()


def subfactorial(x: int) -> int:
    """Number of derangements of x elements, by the exact integer recurrence."""
    if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x <= 20:
        raise ValidationError(f"subfactorial is supported for integers 0..20, got {x!r}")
    acc = 1
    for i in range(1, x + 1):
        acc = i * acc + (-1) ** i
    return acc


def qfunc(x: float) -> float:
    """Gaussian tail probability via the complementary error function.

    erfc is evaluated by the C library to within a few ulp, so the
    relative error here stays below 1e-12 over the whole useful range.
    """
    return 0.5 * erfc(x / sqrt(2.0))


def clamp(p: float) -> float:
    """Display helper: probabilities bounded above by 1."""
    return min(p, 1.0)


def _check_common(m: int, n: int, snr: float) -> None:
    if m < 2:
        raise ValidationError(f"bounds need m >= 2 (no rival permutations below that), got {m}")
    if n < 1:
        raise ValidationError(f"antenna count must be at least 1, got {n}")
    if not snr > 0:
        raise ValidationError(f"snr must be positive, got {snr}")


def _alpha_sq(l: int, m: int, snr: float) -> float:
    """Square of the noise-to-signal scale for an l-slot mismatch."""
    return m / (snr * l)


def union_bound_awgn(m: int, n: int, snr: float) -> float:
    """Union bound on the block error rate over AWGN, snr = energy / n0."""
    _check_common(m, n, snr)
    terms = [
        subfactorial(l) * comb(m, l) * qfunc(sqrt(n * snr * l / m))
        for l in range(2, m + 1)
    ]
    return fsum(terms)


def nn_awgn(m: int, n: int, snr: float) -> float:
    """Nearest-neighbour approximation over AWGN: only the l = 2 rivals."""
    _check_common(m, n, snr)
    return (m * (m - 1) / 2.0) * qfunc(sqrt(n * snr * 2 / m))


def _nu(order: int, c: float) -> float:
    """nu_n(c) = sum_q C(n-1,q) C(2q,q) (c/4)^q / (2 (1+c)^(n-1/2))."""
    g = 1.0  # C(2q,q) (c/4)^q, updated incrementally
    s = 0.0
    for q in range(order):
        s += comb(order - 1, q) * g
        g *= (2.0 * (2 * q + 1) / (q + 1)) * (c / 4.0)
    return s / (2.0 * (1.0 + c) ** (order - 0.5))


class _ChiNormalSeries:
    """Evaluates Pr[chi(2*order) < sqrt(c) * Z] across orders for one fixed c.

    The value is 1/2 + sum_{n=1}^{order} (-1)^n C(order, n) nu_n(c).  The
    alternating binomial sum cancels catastrophically in doubles once the
    order grows, so past _FLOAT_ORDER_LIMIT it runs in fixed arbitrary
    precision with the nu values cached across orders; exact integer
    binomials avoid both overflow and per-term rounding.  Results are
    floored at zero: any negative output is pure rounding noise on an
    underflowed probability.
    """

    def __init__(self, c: float, max_order: int):
        self.c = c
        # enough digits to absorb C(max_order, max_order/2) plus headroom
        self._dps = 30 + int(0.4 * max_order)
        self._nu_mp: list = [None]  # 1-based; filled lazily

    def value(self, order: int) -> float:
        if order <= _FLOAT_ORDER_LIMIT:
            terms = [0.5]
            terms += [
                (-1.0) ** nn * comb(order, nn) * _nu(nn, self.c)
                for nn in range(1, order + 1)
            ]
            return max(fsum(terms), 0.0)
        with mpmath.workdps(self._dps):
            self._extend_nu(order)
            total = mpmath.mpf("0.5")
            binom = 1
            for nn in range(1, order + 1):
                binom = binom * (order - nn + 1) // nn
                total += (-1) ** nn * binom * self._nu_mp[nn]
            return max(float(total), 0.0)

    def _extend_nu(self, order: int) -> None:
        cc = mpmath.mpf(self.c)
        quarter = cc / 4
        for nn in range(len(self._nu_mp), order + 1):
            g = mpmath.mpf(1)   # C(2q,q) (c/4)^q
            s = mpmath.mpf(0)
            binom = 1           # C(nn-1, q)
            for q in range(nn):
                s += binom * g
                binom = binom * (nn - 1 - q) // (q + 1)
                g *= mpmath.mpf(2 * (2 * q + 1)) / (q + 1) * quarter
            self._nu_mp.append(s / (2 * (1 + cc) ** (nn - mpmath.mpf("0.5"))))


def _normal_exceeds_chi(order: int, c: float) -> float:
    """Single-order convenience wrapper around _ChiNormalSeries."""
    return _ChiNormalSeries(c, order).value(order)


def pairwise_rician(
    l: int,
    m: int,
    n: int,
    k: float,
    snr: float,
    cfg: SeriesConfig = DEFAULT_SERIES,
) -> float:
    """Pairwise error probability for an l-slot mismatch under Rician fading.

    Poisson-weighted series over the non-central chi-square mixture; each
    term is the closed-form chi-vs-normal probability above.  Truncates
    once a term past the Poisson mode drops below cfg.tol times the
    partial sum; failing to converge within cfg.j_max raises NumericError.
    """
    _check_common(m, n, snr)
    if not 2 <= l <= m:
        raise ValidationError(f"slot mismatch l must lie in [2, {m}], got {l}")
    if k < 0:
        raise ValidationError(f"Rician factor must be non-negative, got {k}")
    c = 2.0 * _alpha_sq(l, m, snr) * (k + 1.0)
    nk = n * k
    if nk == 0:
        return _normal_exceeds_chi(n, c)
    series = _ChiNormalSeries(c, n + cfg.j_max)
    total = 0.0
    log_nk = log(nk)
    for j in range(cfg.j_max + 1):
        weight = exp(j * log_nk - nk - lgamma(j + 1))
        term = weight * series.value(n + j)
        total += term
        # the Poisson weights rise until j ~ nk; only truncate past the mode
        if j > nk and term <= cfg.tol * total:
            return total
    raise NumericError(
        f"fading series did not converge within j_max={cfg.j_max}",
        j_max=cfg.j_max,
        last_term=term,
        partial_sum=total,
        poisson_mean=nk,
    )


def union_bound_rician(
    m: int, n: int, k: float, snr: float, cfg: SeriesConfig = DEFAULT_SERIES
) -> float:
    """Union bound over Rician fading with factor k."""
    return fsum(
        subfactorial(l) * comb(m, l) * pairwise_rician(l, m, n, k, snr, cfg)
        for l in range(2, m + 1)
    )


def nn_rician(
    m: int, n: int, k: float, snr: float, cfg: SeriesConfig = DEFAULT_SERIES
) -> float:
    """Nearest-neighbour approximation over Rician fading."""
    return (m * (m - 1) / 2.0) * pairwise_rician(2, m, n, k, snr, cfg)


def union_bound_rayleigh(m: int, n: int, snr: float) -> float:
    """Union bound over Rayleigh fading: the k = 0 closed form, no series."""
    _check_common(m, n, snr)
    return fsum(
        subfactorial(l) * comb(m, l) * _normal_exceeds_chi(n, 2.0 * _alpha_sq(l, m, snr))
        for l in range(2, m + 1)
    )


def nn_rayleigh(m: int, n: int, snr: float) -> float:
    """Nearest-neighbour approximation over Rayleigh fading."""
    _check_common(m, n, snr)
    return (m * (m - 1) / 2.0) * _normal_exceeds_chi(n, 2.0 * _alpha_sq(2, m, snr))


def rival_count(m: int) -> int:
    """Total rivals counted by the union bound; equals m! - 1."""
    return sum(subfactorial(l) * comb(m, l) for l in range(2, m + 1))
