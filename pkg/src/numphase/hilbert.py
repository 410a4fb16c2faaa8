"""Truncated coefficient space for ``H_lambda`` in the orthonormal basis ``e_n``.

States are vectors ``a_0..a_M``. The number operator is diagonal, the phase
operator ``Phi = sum |n><n+1|`` shifts coefficients down and its adjoint shifts
them up. The upward shift pushes ``a_M`` past the truncation; that squared
modulus is accumulated in ``overflow_mass`` instead of being silently lost.

Inner products are conjugate-linear in the first argument, so that
``<A> = inner(f, A f)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import WeightParam, as_weight, log_g_factor

__all__ = [
    "CoeffState", "OperatorMatrix", "basis_state", "apply_number",
    "apply_phase", "apply_phase_adjoint", "inner", "norm_sq",
    "number_matrix", "phase_matrix", "phase_adjoint_matrix",
    "commutator_residual", "default_truncation",
]

LABELS = ("N", "Phi", "PhiAdjoint", "Custom")


@dataclass(frozen=True, eq=False)
class CoeffState:
    coeffs: np.ndarray
    lam: WeightParam
    overflow_mass: float = 0.0

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=complex)
        if a.ndim != 1 or a.size < 2:
            raise ValueError("coefficient vector must be 1-D with M >= 1")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "lam", as_weight(self.lam))
        if not self.overflow_mass >= 0.0:
            raise ValueError("overflow_mass must be nonnegative")
        object.__setattr__(self, "overflow_mass", float(self.overflow_mass))

    @property
    def M(self) -> int:
        return self.coeffs.size - 1

    def with_coeffs(self, coeffs, overflow_mass=None) -> "CoeffState":
        if overflow_mass is None:
            overflow_mass = self.overflow_mass
        return CoeffState(coeffs, self.lam, overflow_mass)

    def normalized(self) -> "CoeffState":
        return self.with_coeffs(self.coeffs / math.sqrt(norm_sq(self)))

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam.value,
            "M": self.M,
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
            "overflow_mass": self.overflow_mass,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CoeffState":
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc["im"], dtype=float)
        if re.shape != im.shape or re.size != int(doc["M"]) + 1:
            raise ValueError("re/im lengths must both equal M + 1")
        return cls(re + 1j * im, WeightParam(doc["lambda"]),
                   doc.get("overflow_mass", 0.0))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CoeffState":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix of an operator on the truncated space (diagnostics only)."""

    entries: np.ndarray
    label: str = "Custom"
    lam: WeightParam = field(default_factory=lambda: WeightParam(1.0))

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}")
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "lam", as_weight(self.lam))

    @property
    def M(self) -> int:
        return self.entries.shape[0] - 1

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam.value,
            "M": self.M,
            "label": self.label,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OperatorMatrix":
        m = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
        if m.shape != (int(doc["M"]) + 1,) * 2:
            raise ValueError("matrix shape does not match M")
        return cls(m, doc.get("label", "Custom"), WeightParam(doc["lambda"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def basis_state(n: int, M: int, lam=1.0) -> CoeffState:
    if not 0 <= n <= M:
        raise ValueError(f"basis index {n} outside 0..{M}")
    a = np.zeros(M + 1, dtype=complex)
    a[n] = 1.0
    return CoeffState(a, lam)


def apply_number(s: CoeffState) -> CoeffState:
    return s.with_coeffs(np.arange(s.M + 1) * s.coeffs)


def apply_phase(s: CoeffState) -> CoeffState:
    out = np.zeros_like(s.coeffs)
    out[:-1] = s.coeffs[1:]
    return s.with_coeffs(out)


def apply_phase_adjoint(s: CoeffState) -> CoeffState:
    out = np.zeros_like(s.coeffs)
    out[1:] = s.coeffs[:-1]
    lost = abs(s.coeffs[-1]) ** 2
    return s.with_coeffs(out, s.overflow_mass + lost)


def _check_compatible(s: CoeffState, t: CoeffState):
    if s.M != t.M:
        raise ValueError(f"dimension mismatch: M={s.M} vs M={t.M}")
    if s.lam != t.lam:
        raise ValueError(f"weight mismatch: {s.lam.value} vs {t.lam.value}")


def inner(s: CoeffState, t: CoeffState) -> complex:
    """``sum conj(s_n) t_n``."""
    _check_compatible(s, t)
    return complex(np.vdot(s.coeffs, t.coeffs))


def norm_sq(s: CoeffState) -> float:
    return float(np.vdot(s.coeffs, s.coeffs).real)


def number_matrix(M: int, lam=1.0) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.arange(M + 1, dtype=float)), "N", lam)


def phase_matrix(M: int, lam=1.0) -> OperatorMatrix:
    return OperatorMatrix(np.eye(M + 1, k=1), "Phi", lam)


def phase_adjoint_matrix(M: int, lam=1.0) -> OperatorMatrix:
    return OperatorMatrix(np.eye(M + 1, k=-1), "PhiAdjoint", lam)


def commutator_residual(M: int) -> float:
    """Max-norm of ``Phi N - N Phi - Phi`` on the truncated space."""
    if M < 2:
        raise ValueError("M must be at least 2")
    N = number_matrix(M).entries
    P = phase_matrix(M).entries
    return float(np.max(np.abs(P @ N - N @ P - P)))


def default_truncation(w: complex, k: int, lam=1.0, floor: int = 32,
                       eps: float = 1e-16) -> int:
    """Smallest ``M >= k + floor`` with ``|w|**(M-k)/(M-k)! * max(1, G) < eps``.

    ``G(n, k) <= 1`` on the whole scale, so the gamma factor never raises the
    bound; it is kept in the expression for clarity.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    lam = as_weight(lam)
    r = abs(complex(w))
    if r == 0.0:
        return k + floor
    log_r, log_eps = math.log(r), math.log(eps)
    m = floor
    while True:
        g = max(0.0, log_g_factor(m, k, lam))
        if m * log_r - math.lgamma(m + 1) + g < log_eps:
            return k + m
        m += 1
