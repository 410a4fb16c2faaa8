"""Expectations, variances and the number-phase Cauchy-Schwarz bound.

The variance of a (possibly non-Hermitian) operator is taken in the order
``<(A - <A>)(A - <A>)*>``, which equals ``||(A* - conj<A>) f||**2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .hilbert import CoeffState, apply_number, apply_phase, apply_phase_adjoint, inner, norm_sq
from .specfun import DEFAULT_TOL, log_g_factor
from .states import StateParams, normalization

__all__ = [
    "MomentReport", "ConsistencySeries", "NormalizationError",
    "expectation", "variance", "cs_bound", "consistency_residual",
    "consistency_series", "report",
]

NORM_TOL = 1e-10

_ACTION = {"N": apply_number, "Phi": apply_phase, "PhiAdjoint": apply_phase_adjoint}
_ADJOINT = {"N": "N", "Phi": "PhiAdjoint", "PhiAdjoint": "Phi"}


class NormalizationError(ValueError):
    pass


def _require_normalized(s: CoeffState):
    dev = abs(norm_sq(s) - 1.0)
    if dev > NORM_TOL:
        raise NormalizationError(f"state is not normalized: | ||s||^2 - 1 | = {dev:.3g}")


def _label(op_label: str) -> str:
    if op_label not in _ACTION:
        raise ValueError(f"unknown operator {op_label!r}; expected one of {sorted(_ACTION)}")
    return op_label


def expectation(op_label: str, s: CoeffState) -> complex:
    """``<A> = inner(s, A s)`` for ``A`` in ``{"N", "Phi", "PhiAdjoint"}``."""
    _require_normalized(s)
    return inner(s, _ACTION[_label(op_label)](s))


def _centered_adjoint(op_label: str, s: CoeffState) -> np.ndarray:
    # (A* - conj<A>) s
    mean = expectation(op_label, s)
    if op_label == "N":
        mean = mean.real
    return _ACTION[_ADJOINT[op_label]](s).coeffs - np.conj(mean) * s.coeffs


def variance(op_label: str, s: CoeffState) -> float:
    v = _centered_adjoint(_label(op_label), s)
    return float(np.vdot(v, v).real)


def cs_bound(s: CoeffState) -> float:
    """``|<(N - <N>) f, (Phi* - conj<Phi>) f>|**2``."""
    u = _centered_adjoint("N", s)
    v = _centered_adjoint("Phi", s)
    return abs(complex(np.vdot(u, v))) ** 2


def consistency_residual(s: CoeffState, p: StateParams) -> complex:
    """``<N> - w conj<Phi> - k`` evaluated by linear algebra."""
    mean_n = expectation("N", s).real
    mean_phi = expectation("Phi", s)
    return mean_n - p.w * mean_phi.conjugate() - p.k


@dataclass(frozen=True)
class ConsistencySeries:
    """Closed-form series for the moments of ``f_{w,k}``.

    ``number_excess`` is ``<N> - k = |c|**2 sum t**(n+1)/(n!(n+1)!) G(n+1,k)``.
    ``phase_term`` is ``w conj<Phi>`` written with ``G(n+1,k)``, the form
    that makes the consistency identity hold term by term.
    ``phase_term_exact`` is ``w conj<Phi>`` for the ``sqrt(G)`` coefficients,
    with ``sqrt(G(n,k) G(n+1,k))`` in place of ``G(n+1,k)``.
    """

    number_excess: float
    phase_term: float
    phase_term_exact: float
    k: int

    @property
    def expect_N(self) -> float:
        return self.k + self.number_excess

    @property
    def residual(self) -> float:
        return self.number_excess - self.phase_term


def consistency_series(p: StateParams, tol: float = DEFAULT_TOL) -> ConsistencySeries:
    t = abs(p.w) ** 2
    c_abs_sq = normalization(p, tol).c_abs_sq
    if t == 0.0:
        return ConsistencySeries(0.0, 0.0, 0.0, p.k)
    number, phase, exact = [], [], []
    log_t = math.log(t)
    n = 0
    while True:
        # majorant t**(n+1)/(n!(n+1)!); successive ratios are <= t/((n+1)(n+2))
        log_major = (n + 1) * log_t - math.lgamma(n + 1) - math.lgamma(n + 2)
        q = t / ((n + 1) * (n + 2))
        if q < 0.5 and c_abs_sq * math.exp(log_major) / (1.0 - q) <= tol:
            break
        lg_next = log_g_factor(n + 1, p.k, p.lam)
        lg_here = log_g_factor(n, p.k, p.lam)
        number.append(math.exp(log_major + lg_next))
        phase.append(math.exp(log_major + lg_next))
        exact.append(math.exp(log_major + 0.5 * (lg_here + lg_next)))
        n += 1
        if n > 10_000:
            raise ArithmeticError("consistency series did not converge")
    return ConsistencySeries(
        c_abs_sq * math.fsum(number),
        c_abs_sq * math.fsum(phase),
        c_abs_sq * math.fsum(exact),
        p.k,
    )


@dataclass(frozen=True)
class MomentReport:
    expect_N: float
    expect_Phi: complex
    var_N: float
    var_Phi: float
    product: float
    cs_bound: float
    gap: float
    consistency_residual: complex | None
    truncation_overflow: float

    def to_dict(self) -> dict:
        """Flat mapping; complex values become ``[re, im]``, a missing
        consistency residual becomes ``None``."""
        out = asdict(self)
        for key in ("expect_Phi", "consistency_residual"):
            z = out[key]
            out[key] = None if z is None else [z.real, z.imag]
        return out


def report(s: CoeffState, p: StateParams | None = None) -> MomentReport:
    _require_normalized(s)
    mean_n = expectation("N", s).real
    mean_phi = expectation("Phi", s)
    u = _centered_adjoint("N", s)
    v = _centered_adjoint("Phi", s)
    var_n = float(np.vdot(u, u).real)
    var_phi = float(np.vdot(v, v).real)
    bound = abs(complex(np.vdot(u, v))) ** 2
    product = var_n * var_phi
    residual = None
    if p is not None:
        residual = complex(mean_n - p.w * mean_phi.conjugate() - p.k)
    # Phi* pushes |a_M|^2 past the truncation while forming var_Phi
    overflow = s.overflow_mass + abs(s.coeffs[-1]) ** 2
    return MomentReport(
        expect_N=float(mean_n),
        expect_Phi=complex(mean_phi),
        var_N=var_n,
        var_Phi=var_phi,
        product=product,
        cs_bound=bound,
        gap=product - bound,
        consistency_residual=residual,
        truncation_overflow=float(overflow),
    )
