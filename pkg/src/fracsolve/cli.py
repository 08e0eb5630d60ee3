"""Batch driver: config-driven sweeps with CSV/JSON convergence tables.

A run configuration is a single JSON document; selected fields can be
overridden from the command line (flag wins over file).  Each entry of
m_list produces one table row; a failing entry is reported with a failure
marker instead of aborting the sweep.  Output is deterministic for a fixed
config and seed: the random right-hand side comes from a fixed 64-bit
linear congruential generator, not from platform RNG state.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import approximants as ap
from . import cauchy as cy
from . import exp_product as ep
from .analysis import INEQ_SLACK, scan_scalar_error
from .operators import (Eigenpairs, OracleCapError, SpdOperator, build_dense,
                        build_diagonal, build_laplacian_1d, build_laplacian_2d,
                        d_norm, oracle_apply_function, spectral_oracle)

METHODS = ("ra-log", "ra-jacobi", "ra-kappa", "es-laguerre", "es-graded",
           "es-ode", "ep-richter", "cauchy-ra", "cauchy-kappa", "cauchy-es",
           "cauchy-es2", "cauchy-ep")

CSV_HEADER = "method,alpha,m,eps_abs,eps_rel,err_l2,bound_rhs,satisfied,runtime_ms"

_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_LCG_MASK = (1 << 64) - 1


def lcg_vector(seed: int, n: int) -> np.ndarray:
    """Portable uniform(0,1) vector: x <- (a*x + c) mod 2^64, value = (x >> 11)/2^53."""
    x = seed & _LCG_MASK
    out = np.empty(n)
    for i in range(n):
        x = (_LCG_MULT * x + _LCG_INC) & _LCG_MASK
        out[i] = (x >> 11) / float(1 << 53)
    return out


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    operator: dict
    alpha: float
    method: str
    m_list: list[int]
    method_params: dict = field(default_factory=dict)
    rhs: dict = field(default_factory=lambda: {"kind": "ones"})
    output: dict = field(default_factory=lambda: {"path": "out.csv", "format": "csv"})
    figures: bool = False
    #: wall-clock timing is opt-in: with timing off the runtime_ms column is 0
    #: so identical config + seed produce byte-identical tables
    timing: bool = False

    ALLOWED_PARAMS = {"kappa", "mu", "t_max", "tau", "eps0", "step", "sigma"}

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method: unknown method {self.method!r}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha: must lie in (0,1), got {self.alpha}")
        if not self.m_list:
            raise ConfigError("m_list: must be nonempty")
        if any(m < 1 for m in self.m_list):
            raise ConfigError("m_list: entries must be positive")
        if sorted(self.m_list) != list(self.m_list):
            raise ConfigError("m_list: must be ascending")
        bad = set(self.method_params) - self.ALLOWED_PARAMS
        if bad:
            raise ConfigError(f"method_params: unknown keys {sorted(bad)}")
        if self.output.get("format", "csv") not in ("csv", "json"):
            raise ConfigError(f"output.format: must be csv or json")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {"operator", "alpha", "method", "m_list", "method_params",
                 "rhs", "output", "figures", "timing"}
        bad = set(doc) - known
        if bad:
            raise ConfigError(f"unknown config fields {sorted(bad)}")
        for req in ("operator", "alpha", "method", "m_list"):
            if req not in doc:
                raise ConfigError(f"{req}: required field missing")
        cfg = cls(**doc)
        cfg.validate()
        return cfg


@dataclass
class ResultRow:
    method: str
    alpha: float
    m: int
    eps_abs: float | None
    eps_rel: float | None
    err_l2: float | None
    bound_rhs: float | None
    satisfied: object   # True/False, "" (no check) or "error"
    runtime_ms: float


def build_operator(spec: dict) -> SpdOperator:
    kind = spec.get("kind")
    params = spec.get("params", {})
    if kind == "lap1d":
        return build_laplacian_1d(int(params["n"]))
    if kind == "lap2d":
        return build_laplacian_2d(int(params["nx"]), int(params["ny"]))
    if kind == "diag":
        return build_diagonal(params["values"])
    if kind == "file":
        return load_operator_file(params["path"], float(params["delta"]),
                                  float(params["lambda_max"]))
    raise ConfigError(f"operator.kind: unknown kind {kind!r}")


def load_operator_file(path: str, delta: float, lambda_max: float) -> SpdOperator:
    """Dense symmetric matrix as whitespace-separated text, one-line header K."""
    text = Path(path).read_text().split()
    k = int(text[0])
    vals = np.array([float(x) for x in text[1:]], dtype=float)
    if vals.size != k * k:
        raise ConfigError(f"operator file {path}: expected {k * k} entries, got {vals.size}")
    return build_dense(vals.reshape(k, k), delta, lambda_max)


def build_rhs(spec: dict, dim: int) -> np.ndarray:
    kind = spec.get("kind", "ones")
    if kind == "ones":
        return np.ones(dim)
    if kind == "random":
        return lcg_vector(int(spec.get("seed", 0)), dim)
    if kind == "file":
        v = np.loadtxt(spec["path"]).reshape(-1)
        if v.size != dim:
            raise ConfigError(f"rhs file length {v.size} != operator dim {dim}")
        return v
    raise ConfigError(f"rhs.kind: unknown kind {kind!r}")


def _run_one(cfg: RunConfig, op: SpdOperator, eig: Eigenpairs | None,
             phi: np.ndarray, m: int) -> ResultRow:
    alpha = cfg.alpha
    p = cfg.method_params
    delta, Lam = op.spectral_lower, op.spectral_upper
    interval = (delta, Lam)
    eigvals = eig.values if eig is not None else None
    phi_norm = float(np.linalg.norm(phi))
    method = cfg.method
    t0 = time.perf_counter()

    eps_abs = eps_rel = bound = err = None
    satisfied: object = ""
    solution = None
    eps0_used = float(p.get("eps0", 0.0))
    m_used = m

    if method in ("ra-log", "ra-jacobi", "ra-kappa"):
        if method == "ra-log":
            m_used = m if m % 2 == 1 else m + 1
            appr = ap.rational_from_log_trapezoid(alpha, m_used, float(p.get("step", 0.25)))
        elif method == "ra-jacobi":
            appr = ap.rational_from_gauss_jacobi(alpha, m, float(p.get("mu", math.sqrt(delta * Lam))))
        else:
            appr = ap.rational_from_kappa(alpha, m, float(p.get("kappa", 2.0)))
        est = scan_scalar_error(lambda lam: ap.scalar_eval(appr, lam), alpha,
                                interval, eigenvalues=eigvals)
        eps_abs, eps_rel = est.eps_abs, est.eps_rel
        solution = ap.apply_rational(appr, op, phi, eps0_used).solution
        bound = (eps_abs + eps0_used * (delta ** (-alpha) + eps_abs)) * phi_norm
    elif method in ("es-laguerre", "es-graded", "es-ode"):
        if method == "es-graded":
            appr = ap.es_from_graded(alpha, m, float(p.get("t_max", cy.es_terminal(alpha, delta))))
        else:
            appr = ap.es_from_laguerre(alpha, m, delta)
        est = scan_scalar_error(lambda lam: ap.scalar_eval(appr, lam), alpha,
                                interval, eigenvalues=eigvals)
        eps_abs, eps_rel = est.eps_abs, est.eps_rel
        if method == "es-ode" or eig is None:
            tau = float(p.get("tau", float(np.max(appr.b)) / 64.0))
            rep = ap.apply_es_via_ode(appr, op, phi, tau,
                                      sigma=float(p.get("sigma", 0.5)))
            solution = rep.solution
            eps0_used = rep.eps0 or 0.0
            bound = (eps_abs + eps0_used * (delta ** (-alpha) + eps_abs)) * phi_norm
        else:
            solution = ap.apply_es_exact(appr, eig, phi)
            bound = eps_abs * phi_norm
    elif method == "ep-richter":
        appr = ep.richter_log_coeffs(alpha, delta, m, rule=p.get("rule", "gauss_legendre")
                                     if isinstance(p.get("rule"), str) else "gauss_legendre")
        est = scan_scalar_error(lambda lam: ep.ep_scalar_eval(appr, lam), alpha,
                                interval, eigenvalues=eigvals,
                                log_evaluator=lambda lam: ep.ep_log_eval(appr, lam))
        eps_abs, eps_rel = est.eps_abs, est.eps_rel
        tau = float(p.get("tau", 1.0 / 64.0))
        rep = ep.apply_ep_sequence(appr, op, phi, tau,
                                   sigma=float(p.get("sigma", 0.5)), estimate_eps0=True)
        solution = rep.solution
        eps0_used = rep.eps0 or 0.0
        if eig is not None:
            bound = eps0_used * phi_norm \
                + math.expm1(est.eps_log) * d_norm(eig, -2.0 * alpha, phi)
    else:  # cauchy methods: m is the number of time steps
        if method == "cauchy-ra":
            grid = cy.geometric_grid(float(p.get("t_max", cy.rational_terminal(alpha, delta))), m)
            solution = cy.cauchy_rational_solve(op, phi, alpha, grid).solution
        elif method == "cauchy-kappa":
            grid = cy.uniform_grid(1.0, m)
            solution = cy.cauchy_kappa_solve(op, phi, alpha, float(p.get("kappa", 2.0)), grid).solution
        elif method == "cauchy-es":
            grid = cy.geometric_grid(float(p.get("t_max", cy.es_terminal(alpha, delta))), m)
            solution = cy.cauchy_es_solve(op, phi, alpha, grid).solution
        elif method == "cauchy-es2":
            T = p.get("t_max")
            if T is None:
                T = 1.5 * (math.log(1e8) / delta) ** alpha
            solution = cy.cauchy_second_order_solve(op, phi, alpha, cy.uniform_grid(float(T), m)).solution
        else:  # cauchy-ep
            grid = cy.uniform_grid(1.0, m)
            solution = cy.cauchy_ep_solve(op, phi, alpha, grid,
                                          sigma=float(p.get("sigma", 0.5))).solution

    if eig is not None and solution is not None:
        u_star = oracle_apply_function(eig, -alpha, phi)
        err = float(np.linalg.norm(solution - u_star))
        if bound is not None:
            satisfied = err <= bound * (1.0 + INEQ_SLACK)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return ResultRow(method=method, alpha=alpha, m=m_used, eps_abs=eps_abs,
                     eps_rel=eps_rel, err_l2=err, bound_rhs=bound,
                     satisfied=satisfied, runtime_ms=runtime_ms)


def run(cfg: RunConfig) -> list[ResultRow]:
    cfg.validate()
    op = build_operator(cfg.operator)
    try:
        eig = spectral_oracle(op)
    except OracleCapError:
        eig = None
    phi = build_rhs(cfg.rhs, op.dim)
    rows = []
    for m in cfg.m_list:
        try:
            row = _run_one(cfg, op, eig, phi, m)
            if not cfg.timing:
                row.runtime_ms = 0.0
            rows.append(row)
        except Exception:
            rows.append(ResultRow(method=cfg.method, alpha=cfg.alpha, m=m,
                                  eps_abs=None, eps_rel=None, err_l2=None,
                                  bound_rhs=None, satisfied="error", runtime_ms=0.0))
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def emit(rows: list[ResultRow], fmt: str, path: str) -> None:
    """Write rows as CSV (fixed header) or a JSON array, 17 significant digits."""
    if not rows:
        raise ValueError("no rows to emit")
    keys = CSV_HEADER.split(",")
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in rows:
            lines.append(",".join(_fmt(getattr(r, k)) for k in keys))
        Path(path).write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        doc = []
        for r in rows:
            obj = {}
            for k in keys:
                v = getattr(r, k)
                if isinstance(v, float):
                    v = float(format(v, ".17g"))
                obj[k] = v if v != "" else None
            doc.append(obj)
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def write_config_echo(cfg: RunConfig, out_path: str) -> None:
    sidecar = Path(out_path).with_suffix(Path(out_path).suffix + ".config.json")
    sidecar.write_text(json.dumps({
        "operator": cfg.operator, "alpha": cfg.alpha, "method": cfg.method,
        "m_list": cfg.m_list, "method_params": cfg.method_params,
        "rhs": cfg.rhs, "output": cfg.output, "figures": cfg.figures,
        "timing": cfg.timing,
    }, indent=2) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracsolve",
        description="Approximate solvers for A^(-alpha) phi with checked error bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a configured sweep")
    runp.add_argument("--config", required=True, help="path to the JSON run configuration")
    runp.add_argument("--method", choices=METHODS, help="override config method")
    runp.add_argument("--alpha", type=float, help="override config alpha")
    runp.add_argument("--m", type=int, nargs="+", help="override config m_list")
    runp.add_argument("--out", help="override config output path")
    runp.add_argument("--figures", action="store_true",
                      help="also render a convergence figure next to the table")
    args = parser.parse_args(argv)

    try:
        doc = json.loads(Path(args.config).read_text())
        cfg = RunConfig.from_dict(doc)
        if args.method:
            cfg.method = args.method
        if args.alpha is not None:
            cfg.alpha = args.alpha
        if args.m:
            cfg.m_list = list(args.m)
        if args.out:
            cfg.output["path"] = args.out
        if args.figures:
            cfg.figures = True
        cfg.validate()
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    rows = run(cfg)
    out_path = cfg.output.get("path", "out.csv")
    emit(rows, cfg.output.get("format", "csv"), out_path)
    write_config_echo(cfg, out_path)
    if cfg.figures:
        from .figures import render_convergence_figure
        fig_path = render_convergence_figure(rows, out_path)
        print(f"figure written to {fig_path}")
    print(f"table written to {out_path} ({len(rows)} rows)")

    checks = [r.satisfied for r in rows if r.satisfied != ""]
    return 0 if all(c is True for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
