"""Command-line front end.

    numphase state       --lambda 2 --w 1,0 --k 1
    numphase report      --lambda 2 --w 1,0 --k 0
    numphase scan        --grid grid.csv
    numphase optimize    --lambda 2 --w 1,0 --k 0 --seed 3
    numphase basis-check --lambda 2 --max-n 12

Output goes to stdout or ``--output``. Any failed check exits with status 1
and prints one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analytic import Polynomial, disc_inner, disc_rule, hardy_inner
from .hilbert import CoeffState, basis_state, default_truncation, norm_sq
from .moments import report
from .optimize import OptimizeSettings, ScanRow, minimize_gap, scan_family, scan_to_csv
from .serialize import dumps
from .specfun import DEFAULT_TOL, WeightParam
from .states import StateParams, build_shifted_state, build_state

COMMANDS = ("state", "report", "scan", "optimize", "basis-check")
BUILDERS = {"paper": build_state, "shifted": build_shifted_state}
GRID_HEADER = ["lambda", "w_re", "w_im", "k"]


class CommandFailure(Exception):
    def __init__(self, kind: str, message: str, output: str | None = None):
        super().__init__(message)
        self.kind = kind
        self.output = output


@dataclass(frozen=True)
class RunConfig:
    command: str
    lam: float = 2.0
    w_re: float = 0.0
    w_im: float = 0.0
    k: int = 0
    M: int | None = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    output_path: str | None = None
    format: str = "json"
    family: str = "paper"
    grid_path: str | None = None
    max_n: int = 12
    check_tol: float | None = None
    noise: float = 1e-2
    start: str = "family"
    max_iters: int = 5000
    gap_target: float = 1e-12

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.lam >= 1:
            raise ValueError("lambda must be >= 1")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        if self.family not in BUILDERS:
            raise ValueError(f"family must be one of {sorted(BUILDERS)}")

    @property
    def params(self) -> StateParams:
        return StateParams(complex(self.w_re, self.w_im), self.k, WeightParam(self.lam))


def parse_complex(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) == 1:
        return float(parts[0]), 0.0
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    return float(parts[0]), float(parts[1])


def _build(cfg: RunConfig) -> tuple[CoeffState, int]:
    p = cfg.params
    M = cfg.M if cfg.M is not None else default_truncation(p.w, p.k, p.lam)
    s, _ = BUILDERS[cfg.family](p, M, cfg.tol)
    dev = abs(norm_sq(s) - 1.0)
    if dev > 1e-12:
        raise CommandFailure("NormalizationError", f"|<f,f> - 1| = {dev:.3g} exceeds 1e-12")
    return s, M


def _check_report(rep) -> None:
    if rep.var_N < 0 or rep.var_Phi < 0:
        raise CommandFailure("InvariantViolation", "negative variance")
    if rep.gap < -1e-12 * max(1.0, rep.product):
        raise CommandFailure("InvariantViolation", f"Cauchy-Schwarz gap {rep.gap:.3g} < 0")


def _cmd_state(cfg: RunConfig) -> str:
    s, M = _build(cfg)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n, a in enumerate(s.coeffs):
            w.writerow([n, format(a.real, ".17g"), format(a.imag, ".17g")])
        return buf.getvalue()
    doc = s.to_dict()
    doc["k"] = cfg.k
    doc["w"] = [cfg.w_re, cfg.w_im]
    doc["family"] = cfg.family
    return dumps(doc) + "\n"


def _cmd_report(cfg: RunConfig) -> str:
    s, M = _build(cfg)
    p = cfg.params
    rep = report(s, p)
    if cfg.format == "csv":
        text = scan_to_csv([ScanRow(p, M, rep)])
    else:
        text = dumps({"M": M, "lambda": cfg.lam, "w": [cfg.w_re, cfg.w_im], "k": cfg.k,
                      "family": cfg.family, "report": rep.to_dict()}) + "\n"
    try:
        _check_report(rep)
    except CommandFailure as exc:
        exc.output = text
        raise
    return text


def read_grid(path: str) -> list[StateParams]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != GRID_HEADER:
            raise CommandFailure("GridFormatError", f"grid header must be {','.join(GRID_HEADER)}")
        grid = []
        for line, row in enumerate(reader, start=2):
            try:
                grid.append(StateParams(complex(float(row["w_re"]), float(row["w_im"])),
                                        int(row["k"]), WeightParam(float(row["lambda"]))))
            except (TypeError, ValueError) as exc:
                raise CommandFailure("GridFormatError", f"line {line}: {exc}") from exc
    if not grid:
        raise CommandFailure("GridFormatError", "grid file has no rows")
    return grid


def _cmd_scan(cfg: RunConfig) -> str:
    if cfg.grid_path is None:
        raise CommandFailure("UsageError", "scan requires --grid")
    grid = read_grid(cfg.grid_path)
    rows = scan_family(grid, cfg.M, cfg.tol, builder=BUILDERS[cfg.family])
    if cfg.format == "csv":
        text = scan_to_csv(rows)
    else:
        text = dumps([
            {"lambda": r.params.lam.value, "w": [r.params.w.real, r.params.w.imag],
             "k": r.params.k, "M": r.M,
             "report": None if r.report is None else r.report.to_dict(), "error": r.error}
            for r in rows
        ]) + "\n"
    failed = [i for i, r in enumerate(rows) if r.error is not None]
    if failed:
        raise CommandFailure("ScanFailure", f"{len(failed)} grid rows failed, first at row {failed[0]}", text)
    return text


def _log_samples(n: int) -> list[int]:
    idx = {0, n - 1}
    j = 1
    while j < n:
        idx.update((j, 2 * j, 5 * j))
        j *= 10
    return sorted(i for i in idx if 0 <= i < n)


def _cmd_optimize(cfg: RunConfig) -> str:
    if cfg.format != "json":
        raise CommandFailure("UsageError", "optimize only writes json")
    rng = np.random.default_rng(cfg.seed)
    if cfg.start == "family":
        s, M = _build(cfg)
        a = s.coeffs + cfg.noise * (rng.standard_normal(s.M + 1) + 1j * rng.standard_normal(s.M + 1))
    else:
        M = cfg.M if cfg.M is not None else 48
        a = rng.standard_normal(M + 1) + 1j * rng.standard_normal(M + 1)
    s0 = CoeffState(a / np.linalg.norm(a), WeightParam(cfg.lam))
    settings = OptimizeSettings(max_iters=cfg.max_iters, gap_target=cfg.gap_target, seed=cfg.seed)
    res = minimize_gap(s0, settings)
    hist = res.gap_history
    doc = {"M": M, "lambda": cfg.lam, "seed": cfg.seed, "start": cfg.start, "noise": cfg.noise,
           **res.summary(),
           "trajectory": [[i, hist[i]] for i in _log_samples(len(hist))]}
    text = dumps(doc) + "\n"
    if not res.converged:
        raise CommandFailure("NotConverged",
                             f"gap {hist[-1]:.3g} above target after {res.iterations} iterations", text)
    return text


def _cmd_basis_check(cfg: RunConfig) -> str:
    if cfg.format != "json":
        raise CommandFailure("UsageError", "basis-check only writes json")
    n = cfg.max_n
    lam = WeightParam(cfg.lam)
    gram = np.empty((n + 1, n + 1), dtype=complex)
    if lam.degenerate:
        method = "hardy_inner"
        tol = 1e-12 if cfg.check_tol is None else cfg.check_tol
        monos = [Polynomial(np.eye(n + 1)[j]) for j in range(n + 1)]
        for i in range(n + 1):
            for j in range(n + 1):
                gram[i, j] = hardy_inner(monos[i], monos[j])
    else:
        method = "disc_inner"
        tol = 1e-8 if cfg.check_tol is None else cfg.check_tol
        rule = disc_rule(lam, n)
        basis = [basis_state(j, n, lam) for j in range(n + 1)]
        for i in range(n + 1):
            for j in range(n + 1):
                gram[i, j] = disc_inner(basis[i], basis[j], rule)
    dev = float(np.abs(gram - np.eye(n + 1)).max())
    text = dumps({"lambda": cfg.lam, "max_n": n, "method": method,
                  "max_deviation": dev, "tolerance": tol}) + "\n"
    if not dev < tol:
        raise CommandFailure("BasisCheckFailure", f"max deviation {dev:.3g} >= {tol:.3g}", text)
    return text


_DISPATCH = {
    "state": _cmd_state,
    "report": _cmd_report,
    "scan": _cmd_scan,
    "optimize": _cmd_optimize,
    "basis-check": _cmd_basis_check,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command; returns ``(exit_status, output_text)``.

    Failures raise :class:`CommandFailure`, carrying any partial output.
    """
    text = _DISPATCH[cfg.command](cfg)
    return 0, text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=2.0, help="Bergman weight (>= 1)")
    common.add_argument("--w", type=parse_complex, default=(0.0, 0.0), help="complex w as re,im")
    common.add_argument("--k", type=int, default=0)
    common.add_argument("--M", type=int, default=None, help="truncation index (default: automatic)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", dest="output_path", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--family", choices=sorted(BUILDERS), default="paper",
                        help="paper: c z^k sum w^n/n! e_n; shifted: c sum w^n/n! e_(n+k)")

    parser = argparse.ArgumentParser(prog="numphase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("state", parents=[common], help="emit state coefficients")
    sub.add_parser("report", parents=[common], help="emit the moment report")
    scan = sub.add_parser("scan", parents=[common], help="moment reports over a grid file")
    scan.add_argument("--grid", dest="grid_path", required=True, help="CSV with header lambda,w_re,w_im,k")
    opt = sub.add_parser("optimize", parents=[common], help="minimize the saturation gap")
    opt.add_argument("--noise", type=float, default=1e-2)
    opt.add_argument("--start", choices=("family", "random"), default="family")
    opt.add_argument("--max-iters", type=int, default=5000)
    opt.add_argument("--gap-target", type=float, default=1e-12)
    bc = sub.add_parser("basis-check", parents=[common], help="orthonormality of e_0..e_n by quadrature")
    bc.add_argument("--max-n", type=int, default=12)
    bc.add_argument("--check-tol", type=float, default=None)
    return parser


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    fmt = ns.format or ("csv" if ns.command == "scan" else "json")
    extra = {key: getattr(ns, key) for key in
             ("grid_path", "max_n", "check_tol", "noise", "start", "max_iters", "gap_target")
             if hasattr(ns, key)}
    return RunConfig(command=ns.command, lam=ns.lam, w_re=ns.w[0], w_im=ns.w[1], k=ns.k, M=ns.M,
                     tol=ns.tol, seed=ns.seed, output_path=ns.output_path, format=fmt,
                     family=ns.family, **extra)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _fail(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": " ".join(str(message).split())}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config_from_args(ns)
    except ValueError as exc:
        _fail("ConfigError", str(exc))
        return 2
    try:
        status, text = run(cfg)
    except CommandFailure as exc:
        if exc.output is not None:
            _emit(exc.output, cfg.output_path)
        _fail(exc.kind, str(exc))
        return 1
    except (ValueError, ArithmeticError, OSError) as exc:
        _fail(type(exc).__name__, str(exc))
        return 1
    _emit(text, cfg.output_path)
    return status


if __name__ == "__main__":
    sys.exit(main())
