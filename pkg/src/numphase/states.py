"""Minimum-uncertainty states ``f_{w,k}`` in coefficient space.

``f_{w,k}(z) = c z**k sum_n w**n/n! e_n(z)``. Because
``z**k e_n = sqrt(G(n,k)) e_{n+k}``, the coefficients are
``a_{n+k} = c w**n/n! sqrt(G(n,k))`` with ``|c|**2 = 1/I_{k,lam}(|w|**2)``.

For ``lambda > 1`` and ``k >= 1`` that family does not solve
``N f = w Phi* f + k f`` when ``Phi*`` acts as the basis shift
``e_n -> e_{n+1}``; the exact solutions are the shifted states
``a_{n+k} = c w**n/n!`` built by :func:`build_shifted_state`. The two
coincide when ``k == 0`` or ``lambda == 1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import CoeffState, default_truncation
from .specfun import DEFAULT_TOL, WeightParam, as_weight, log_g_factor, series_I

__all__ = [
    "StateParams", "NormalizationConstant", "TruncationError",
    "normalization", "build_state", "build_shifted_state",
    "hardy_limit_state", "tail_mass",
]


class TruncationError(ValueError):
    """Raised when the truncation drops more squared norm than allowed."""


@dataclass(frozen=True)
class StateParams:
    w: complex
    k: int
    lam: WeightParam

    def __post_init__(self):
        object.__setattr__(self, "w", complex(self.w))
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a nonnegative integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "lam", as_weight(self.lam))


@dataclass(frozen=True)
class NormalizationConstant:
    c_abs_sq: float

    @property
    def c(self) -> float:
        # phase convention: c real positive
        return math.sqrt(self.c_abs_sq)


def normalization(p: StateParams, tol: float = DEFAULT_TOL) -> NormalizationConstant:
    """``|c|**2 = 1 / I_{k,lam}(|w|**2)``."""
    series = series_I(p.k, p.lam, abs(p.w) ** 2, tol)
    return NormalizationConstant(1.0 / series.value)


def tail_mass(p: StateParams, M: int, c_abs_sq: float) -> float:
    """Upper bound on the squared norm of coefficients beyond index ``M``.

    ``G(n, k)`` increases towards 1 in ``n``, so it is bounded by 1 and the
    remaining ``t**n/(n!)**2`` terms by a geometric series. Returns ``inf`` if
    the term ratio is not yet below one. Valid for both families.
    """
    t = abs(p.w) ** 2
    m = M - p.k + 1
    if t == 0.0:
        return 0.0
    q = t / (m + 1) ** 2
    if q >= 1.0:
        return math.inf
    log_first = m * math.log(t) - 2.0 * math.lgamma(m + 1)
    return c_abs_sq * math.exp(log_first) / (1.0 - q)


def _coefficients(p: StateParams, M: int, c_abs_sq: float, with_g: bool) -> np.ndarray:
    a = np.zeros(M + 1, dtype=complex)
    if p.w == 0:
        # c * sqrt(G(0,k)) == 1 exactly when |c|**2 = 1/G(0,k)
        a[p.k] = 1.0
        return a
    n = np.arange(M - p.k + 1)
    log_mod = 0.5 * math.log(c_abs_sq) + n * math.log(abs(p.w))
    log_mod -= np.array([math.lgamma(j + 1) for j in n])
    if with_g and not (p.k == 0 or p.lam.degenerate):
        log_mod += 0.5 * np.array([log_g_factor(int(j), p.k, p.lam) for j in n])
    phase = n * cmath.phase(p.w)
    a[p.k:] = np.exp(log_mod) * np.exp(1j * phase)
    return a


def _checked_truncation(p: StateParams, M) -> int:
    if M is None:
        M = default_truncation(p.w, p.k, p.lam)
    if M < p.k or M < 1:
        raise ValueError(f"truncation M={M} must satisfy M >= max(k, 1) with k={p.k}")
    return int(M)


def build_state(p: StateParams, M: int | None = None,
                tol: float = DEFAULT_TOL) -> tuple[CoeffState, NormalizationConstant]:
    """Coefficients of ``f_{w,k}`` up to index ``M`` with ``c > 0``.

    ``M=None`` picks :func:`numphase.hilbert.default_truncation`.

    Raises
    ------
    TruncationError
        If the squared norm beyond index ``M`` may exceed ``tol``.
    """
    M = _checked_truncation(p, M)
    norm = normalization(p, tol)
    tail = tail_mass(p, M, norm.c_abs_sq)
    if tail > tol:
        raise TruncationError(f"tail mass bound {tail:.3g} beyond M={M} exceeds tol={tol:.3g}")
    coeffs = _coefficients(p, M, norm.c_abs_sq, with_g=True)
    return CoeffState(coeffs, p.lam), norm


def build_shifted_state(p: StateParams, M: int | None = None,
                        tol: float = DEFAULT_TOL) -> tuple[CoeffState, NormalizationConstant]:
    """Exact solution of ``N f = w Phi* f + k f``: ``a_{n+k} = c w**n/n!``.

    Normalized by ``I_{0}(|w|**2)`` (the k = 0 series) on every weight.
    """
    M = _checked_truncation(p, M)
    base = StateParams(p.w, 0, p.lam)
    norm = normalization(base, tol)
    tail = tail_mass(p, M, norm.c_abs_sq)
    if tail > tol:
        raise TruncationError(f"tail mass bound {tail:.3g} beyond M={M} exceeds tol={tol:.3g}")
    coeffs = _coefficients(p, M, norm.c_abs_sq, with_g=False)
    return CoeffState(coeffs, p.lam), norm


def hardy_limit_state(w: complex, k: int, M: int, tol: float = DEFAULT_TOL) -> CoeffState:
    """Coefficients of ``c z**k exp(w z)`` in the Hardy basis ``z**n``."""
    state, _ = build_state(StateParams(w, k, WeightParam(1.0)), M, tol)
    return state
