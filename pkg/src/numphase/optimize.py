"""Variational check of the minimum-uncertainty characterization.

The saturation gap ``var_N * var_Phi - cs_bound`` is minimized directly over
normalized coefficient vectors, and the end point is fitted to
``N f = w Phi* f + k f``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .hilbert import CoeffState, apply_number, apply_phase_adjoint, default_truncation, norm_sq
from .moments import MomentReport, report
from .specfun import DEFAULT_TOL
from .states import StateParams, build_state

__all__ = [
    "OptimizeSettings", "FitResult", "OptimizeResult", "ScanRow",
    "fit_params", "gap_of_vectors", "gap_gradient", "minimize_gap",
    "scan_family", "scan_to_csv",
]


@dataclass(frozen=True)
class OptimizeSettings:
    max_iters: int = 5000
    step_init: float = 0.1
    grad_eps: float = 1e-6
    gap_target: float = 1e-12
    seed: int = 0
    armijo: float = 1e-4

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not (self.step_init > 0 and self.grad_eps > 0):
            raise ValueError("step_init and grad_eps must be positive")
        if self.gap_target < 1e-12:
            raise ValueError("gap_target must be at least 1e-12")


@dataclass(frozen=True)
class FitResult:
    w_fit: complex
    k_fit: float
    residual_norm: float
    k_round_distance: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "w_fit": [self.w_fit.real, self.w_fit.imag],
            "k_fit": self.k_fit,
            "residual_norm": self.residual_norm,
            "k_round_distance": self.k_round_distance,
            "degenerate": self.degenerate,
        }


def fit_params(s: CoeffState) -> FitResult:
    """Least-squares ``(w, k)`` with ``w`` complex and ``k`` real minimizing
    ``||N s - w Phi* s - k s||``.

    With ``u = N s`` and ``v = Phi* s`` the stationarity conditions are
    ``w <v,v> + k <v,s> = <v,u>`` and ``Re(w <s,v>) + k <s,s> = Re <s,u>``,
    a 3x3 real system in ``(Re w, Im w, k)``. A rank-deficient system
    (``s`` parallel to ``Phi* s``, or ``Phi* s = 0``) takes the
    minimum-norm solution and is flagged.
    """
    a = s.coeffs
    u = apply_number(s).coeffs
    v = apply_phase_adjoint(s).coeffs
    vv = np.vdot(v, v).real
    vs = np.vdot(v, a)
    ss = np.vdot(a, a).real
    vu = np.vdot(v, u)
    su = np.vdot(a, u)
    gram = np.array([
        [vv, 0.0, vs.real],
        [0.0, vv, vs.imag],
        [vs.real, vs.imag, ss],
    ])
    rhs = np.array([vu.real, vu.imag, su.real])
    rank = np.linalg.matrix_rank(gram, tol=1e-12 * max(1.0, np.abs(gram).max()))
    sol = np.linalg.pinv(gram, rcond=1e-12) @ rhs
    w = complex(sol[0], sol[1])
    k = float(sol[2])
    resid = float(np.linalg.norm(u - w * v - k * a))
    return FitResult(w, k, resid, abs(k - round(k)), degenerate=bool(rank < 3))


def gap_of_vectors(A: np.ndarray) -> np.ndarray:
    """Saturation gap for each row of ``A`` after normalizing it.

    ``A`` holds complex coefficient vectors, one per row.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    n = np.arange(A.shape[1])
    mean_n = (np.abs(A) ** 2) @ n
    mean_phi = np.sum(np.conj(A[:, :-1]) * A[:, 1:], axis=1)
    u = (n[None, :] - mean_n[:, None]) * A
    up = np.zeros_like(A)
    up[:, 1:] = A[:, :-1]
    v = up - np.conj(mean_phi)[:, None] * A
    uu = np.sum(np.abs(u) ** 2, axis=1)
    vv = np.sum(np.abs(v) ** 2, axis=1)
    uv = np.sum(np.conj(u) * v, axis=1)
    return uu * vv - np.abs(uv) ** 2


def _objective(X: np.ndarray) -> np.ndarray:
    d = X.shape[-1] // 2
    return gap_of_vectors(X[..., :d] + 1j * X[..., d:])


def _to_real(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a.real, a.imag])


def gap_gradient(x: np.ndarray, eps: float) -> np.ndarray:
    """Central finite-difference gradient of the gap in the real
    coordinates ``(Re a, Im a)``, projected onto the sphere's tangent space."""
    E = eps * np.eye(x.size)
    g = (_objective(x + E) - _objective(x - E)) / (2.0 * eps)
    return g - (g @ x) / (x @ x) * x


@dataclass
class OptimizeResult:
    state: CoeffState
    report: MomentReport
    fit: FitResult
    converged: bool
    iterations: int
    gap_history: list[float] = field(repr=False)

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "initial_gap": self.gap_history[0],
            "final_gap": self.gap_history[-1],
            "M": self.state.M,
            "fit": self.fit.to_dict(),
            "report": self.report.to_dict(),
        }


def minimize_gap(s0: CoeffState, settings: OptimizeSettings = OptimizeSettings(),
                 callback=None) -> OptimizeResult:
    """Projected descent of the saturation gap on the unit sphere.

    Each step moves against the finite-difference gradient, renormalizes,
    and halves the step until the Armijo condition holds, so the recorded
    gaps never increase. The first trial step is ``step_init``; later trial
    steps use the Barzilai-Borwein length from the previous move.
    Stops at ``gap <= gap_target``, after ``max_iters`` steps, or when the
    line search can no longer decrease the gap; only the first counts as
    converged. ``callback(iteration, coeffs, gap)`` sees every accepted
    iterate.
    """
    x = _to_real(s0.coeffs)
    x = x / np.linalg.norm(x)
    f = float(_objective(x[None])[0])
    history = [f]
    converged = f <= settings.gap_target
    it = 0
    x_prev = g_prev = None
    while not converged and it < settings.max_iters:
        g = gap_gradient(x, settings.grad_eps)
        gg = float(g @ g)
        if gg == 0.0:
            break
        step = settings.step_init
        if x_prev is not None:
            dx, dg = x - x_prev, g - g_prev
            curv = float(dx @ dg)
            if curv > 0.0:
                step = min(max(float(dx @ dx) / curv, 1e-10), 1e6)
        while step > 1e-20:
            trial = x - step * g
            trial /= np.linalg.norm(trial)
            ft = float(_objective(trial[None])[0])
            if ft <= f - settings.armijo * step * gg:
                break
            step *= 0.5
        else:
            break
        x_prev, g_prev = x, g
        x, f = trial, ft
        history.append(f)
        it += 1
        if callback is not None:
            d = x.size // 2
            callback(it, x[:d] + 1j * x[d:], f)
        converged = f <= settings.gap_target

    d = x.size // 2
    state = s0.with_coeffs(x[:d] + 1j * x[d:], 0.0)
    state = state.with_coeffs(state.coeffs / math.sqrt(norm_sq(state)))
    return OptimizeResult(state, report(state), fit_params(state), converged, it, history)


@dataclass(frozen=True)
class ScanRow:
    params: StateParams
    M: int | None
    report: MomentReport | None
    error: str | None = None


def _resolve_m(p: StateParams, m_policy):
    if m_policy is None:
        return default_truncation(p.w, p.k, p.lam)
    if callable(m_policy):
        return int(m_policy(p))
    return int(m_policy)


def _scan_point(p: StateParams, m_policy, tol: float, builder) -> ScanRow:
    M = None
    try:
        M = _resolve_m(p, m_policy)
        s, _ = builder(p, M, tol)
        return ScanRow(p, M, report(s, p))
    except Exception as exc:  # recorded per row; never aborts the batch
        return ScanRow(p, M, None, f"{type(exc).__name__}: {exc}")


def scan_family(grid, m_policy=None, tol: float = DEFAULT_TOL, builder=build_state,
                workers: int = 1) -> list[ScanRow]:
    """Moment reports for each parameter point, in input order.

    ``m_policy`` is ``None`` (automatic truncation), a fixed int, or a
    callable ``StateParams -> int``.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: _scan_point(p, m_policy, tol, builder), grid))
    return [_scan_point(p, m_policy, tol, builder) for p in grid]


_REPORT_FIELDS = [f.name for f in fields(MomentReport)]
CSV_COLUMNS = ["lambda", "w_re", "w_im", "k", "M"]
for _name in _REPORT_FIELDS:
    if _name in ("expect_Phi", "consistency_residual"):
        CSV_COLUMNS += [f"{_name}_re", f"{_name}_im"]
    else:
        CSV_COLUMNS.append(_name)
CSV_COLUMNS.append("error")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def scan_to_csv(rows: list[ScanRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        p = row.params
        out = [_fmt(p.lam.value), _fmt(p.w.real), _fmt(p.w.imag), _fmt(p.k), _fmt(row.M)]
        for name in _REPORT_FIELDS:
            val = None if row.report is None else getattr(row.report, name)
            if name in ("expect_Phi", "consistency_residual"):
                out += ["", ""] if val is None else [_fmt(val.real), _fmt(val.imag)]
            else:
                out.append(_fmt(val))
        out.append(row.error or "")
        writer.writerow(out)
    return buf.getvalue()
