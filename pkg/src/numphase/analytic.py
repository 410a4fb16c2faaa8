"""States as holomorphic functions on the unit disc.

Provides an independent route to the inner products: area quadrature for
the weighted Bergman norm (``lambda > 1``) and boundary integration for the
Hardy norm (``lambda == 1``), plus the ``lambda == 1`` shift operators on
monomial coefficients.

All pairings here are conjugate-linear in the first argument, matching
:func:`numphase.hilbert.inner`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .hilbert import CoeffState
from .specfun import as_weight

__all__ = [
    "QuadratureRule", "Polynomial", "basis_norms", "eval_state",
    "eval_state_derivative", "disc_rule", "disc_inner", "hardy_inner",
    "backward_shift", "forward_shift", "number_op",
]


def basis_norms(M: int, lam) -> np.ndarray:
    """``sqrt(Gamma(n+lam) / (n! Gamma(lam)))`` for ``n = 0..M``."""
    lam = as_weight(lam)
    if lam.degenerate:
        return np.ones(M + 1)
    lg = math.lgamma(lam.value)
    return np.array([
        math.exp(0.5 * (math.lgamma(n + lam.value) - math.lgamma(n + 1) - lg))
        for n in range(M + 1)
    ])


def _check_disc(z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("evaluation points must lie in the open unit disc")
    return z


def eval_state(s: CoeffState, z):
    """``f(z) = sum a_n e_n(z)`` at one point or an array of points."""
    z = _check_disc(z)
    mono = s.coeffs * basis_norms(s.M, s.lam)
    # Horner with highest degree first
    return np.polyval(mono[::-1], z)


def eval_state_derivative(s: CoeffState, z):
    z = _check_disc(z)
    mono = s.coeffs * basis_norms(s.M, s.lam)
    return np.polyval(np.polyder(mono[::-1]), z)


@dataclass(frozen=True)
class QuadratureRule:
    """Product rule on the disc for the normalized measure
    ``((lam-1)/pi) (1-|z|^2)^(lam-2) dA``.

    ``radial_nodes`` pairs radii with weights that sum to one;
    ``angular_count`` equally spaced angles carry equal weight.
    """

    radial_nodes: tuple[tuple[float, float], ...]
    angular_count: int
    lam: float

    def points(self):
        r = np.array([node for node, _ in self.radial_nodes])
        wr = np.array([wt for _, wt in self.radial_nodes])
        theta = 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count
        z = r[:, None] * np.exp(1j * theta)[None, :]
        wts = wr[:, None] * np.full(self.angular_count, 1.0 / self.angular_count)[None, :]
        return z.ravel(), wts.ravel()


def disc_rule(lam, degree: int) -> QuadratureRule:
    """Rule exact for ``z^m conj(z)^n`` with ``m, n <= degree``.

    With ``x = r^2`` the radial measure becomes ``(lam-1)(1-x)^(lam-2) dx`` on
    ``(0,1)``, a Gauss-Jacobi weight; the angular trapezoid is exact for
    ``exp(i j theta)``, ``|j| <= degree``.
    """
    lam = as_weight(lam)
    if lam.degenerate:
        raise ValueError("the area measure is not integrable at lambda == 1; use hardy_inner")
    n_radial = degree // 2 + 2
    t, wt = roots_jacobi(n_radial, lam.value - 2.0, 0.0)
    x = 0.5 * (1.0 + t)
    # maps int_{-1}^{1} (1-t)^a dt onto (lam-1) int_0^1 (1-x)^a dx, a = lam-2
    wt = wt * (lam.value - 1.0) * 0.5 ** (lam.value - 1.0)
    nodes = tuple((float(math.sqrt(xi)), float(wi)) for xi, wi in zip(x, wt))
    return QuadratureRule(nodes, degree + 1, lam.value)


def disc_inner(f: CoeffState, g: CoeffState, rule: QuadratureRule | None = None) -> complex:
    """Weighted Bergman pairing ``int conj(f) g dmu_lam`` by quadrature."""
    lam = f.lam
    if lam.degenerate:
        raise ValueError("disc_inner needs lambda > 1; use hardy_inner for the Hardy space")
    if g.lam != lam:
        raise ValueError("states live on different weights")
    if rule is None:
        rule = disc_rule(lam, max(f.M, g.M))
    if rule.lam != lam.value:
        raise ValueError("quadrature rule built for a different weight")
    z, wts = rule.points()
    return complex(np.sum(wts * np.conj(eval_state(f, z)) * eval_state(g, z)))


@dataclass(frozen=True, eq=False)
class Polynomial:
    monomial_coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.monomial_coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("need a nonempty 1-D coefficient vector")
        c.setflags(write=False)
        object.__setattr__(self, "monomial_coeffs", c)

    @property
    def degree(self) -> int:
        return self.monomial_coeffs.size - 1

    def __call__(self, z):
        return np.polyval(self.monomial_coeffs[::-1], np.asarray(z, dtype=complex))


def hardy_inner(f: Polynomial, g: Polynomial, angular_count: int | None = None) -> complex:
    """Boundary pairing ``(1/2pi) int conj(f) g dtheta`` on the unit circle."""
    deg = max(f.degree, g.degree)
    if angular_count is None:
        angular_count = 2 * deg + 1
    if angular_count <= 2 * deg:
        raise ValueError(f"angular_count must exceed 2*degree = {2 * deg}")
    z = np.exp(2j * np.pi * np.arange(angular_count) / angular_count)
    return complex(np.mean(np.conj(f(z)) * g(z)))


def backward_shift(f: Polynomial) -> Polynomial:
    """``(f(z) - f(0)) / z``."""
    c = f.monomial_coeffs
    return Polynomial(c[1:] if c.size > 1 else np.zeros(1))


def forward_shift(f: Polynomial) -> Polynomial:
    """``z f(z)``."""
    return Polynomial(np.concatenate([[0.0], f.monomial_coeffs]))


def number_op(f: Polynomial) -> Polynomial:
    """``z f'(z)``."""
    c = f.monomial_coeffs
    return Polynomial(np.arange(c.size) * c)
