"""Gamma-ratio factors and the normalization series for the Bergman scale.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DEFAULT_TOL = 1e-14
MAX_TERMS = 10_000

# Below this shift the log-ratio is summed term by term (log1p), which avoids
# the cancellation between two large lgamma values.
_DIRECT_SHIFT_LIMIT = 256


class SeriesError(ArithmeticError):
    """Raised when a series cannot be summed to the requested tolerance."""


@dataclass(frozen=True)
class WeightParam:
    """Bergman weight ``lambda >= 1``; ``lambda == 1`` is the Hardy space."""

    value: float
    degenerate: bool = field(init=False)

    def __post_init__(self):
        lam = float(self.value)
        if not math.isfinite(lam) or lam < 1.0:
            raise ValueError(f"weight must satisfy lambda >= 1, got {self.value!r}")
        object.__setattr__(self, "value", lam)
        object.__setattr__(self, "degenerate", lam == 1.0)

    def __float__(self):
        return self.value


def as_weight(lam) -> WeightParam:
    return lam if isinstance(lam, WeightParam) else WeightParam(lam)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def log_g_factor(n: int, k: int, lam) -> float:
    """``log G(n, k)`` with ``G(n,k) = (n+k)!/n! * Gamma(n+lam)/Gamma(n+k+lam)``."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    lam = as_weight(lam)
    if k == 0 or lam.degenerate:
        return 0.0
    a = lam.value - 1.0
    if k <= _DIRECT_SHIFT_LIMIT:
        # G = prod_{j=1..k} (n+j) / (n+j+lam-1)
        return -math.fsum(math.log1p(a / (n + j)) for j in range(1, k + 1))
    return (
        math.lgamma(n + k + 1) - math.lgamma(n + 1)
        + math.lgamma(n + lam.value) - math.lgamma(n + k + lam.value)
    )


def g_factor(n: int, k: int, lam) -> float:
    """Gamma-ratio factor ``G(n, k)``; lies in ``(0, 1]`` and equals 1 when
    ``k == 0`` or ``lambda == 1``."""
    return math.exp(log_g_factor(n, k, lam))


def series_I(k: int, lam, t: float, tol: float = DEFAULT_TOL,
             max_terms: int = MAX_TERMS) -> SeriesResult:
    """Sum ``I_{k,lam}(t) = sum_n t**n / (n!)**2 * G(n, k)``.

    Terms are accumulated by their ratio. Since ``0 < G <= 1`` the tail after
    index ``n`` is dominated by ``sum_{m>n} t**m/(m!)**2``, whose term ratio
    ``t/(m+1)**2`` decreases; summation stops once that ratio is below 1/2 and
    the resulting geometric bound is within ``tol``.

    Raises
    ------
    SeriesError
        If ``tol`` is not reached within ``max_terms`` terms.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    lam = as_weight(lam)
    t = float(t)
    if not t >= 0.0 or not math.isfinite(t):
        raise ValueError(f"t must be finite and nonnegative, got {t!r}")
    if not tol > 0.0:
        raise ValueError("tol must be positive")

    g = g_factor(0, k, lam)
    term = g          # t**n/(n!)**2 * G(n,k)
    major = 1.0       # t**n/(n!)**2, dominates term
    acc = [term]
    for n in range(max_terms):
        q = t / (n + 2) ** 2
        major_next = major * t / (n + 1) ** 2
        if q < 0.5:
            tail = major_next / (1.0 - q)
            if tail <= tol:
                value = math.fsum(acc)
                if not math.isfinite(value):
                    raise SeriesError(f"I_{k}(t={t}) overflows double precision")
                return SeriesResult(value, n + 1, tail)
        if k == 0 or lam.degenerate:
            ratio = 1.0
        else:
            ratio = ((n + 1 + k) * (n + lam.value)) / ((n + 1) * (n + k + lam.value))
        term = term * t / (n + 1) ** 2 * ratio
        major = major_next
        acc.append(term)
    raise SeriesError(
        f"series I_{k},lambda={lam.value}(t={t}) did not reach tol={tol} "
        f"within {max_terms} terms"
    )
