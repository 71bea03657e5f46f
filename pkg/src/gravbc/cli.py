"""Command-line front end.

Every subcommand reads optional defaults from an INI file (``--config``);
flags given on the command line win. Results go to stdout and, with
``--out DIR``, to CSV/JSON files whose content depends only on the inputs.

Exit codes: 0 pass, 1 property violated, 2 configuration error,
3 degenerate or invalid boundary specification.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .boundary import (
    BoundaryConditionSpec,
    SideCoefficients,
    random_general_spec,
    symmetric_from_six,
)
from .ellipticity import sl_check, sl_scan
from .errors import DegenerateSpecError, GravBCError, InvalidSpecError
from .gauge import gauge_invariance_residual, random_collar_fields
from .geometry import WARP_PRESETS, make_flat_torus_product, make_warped_torus_product, mode_range
from .linearise import Perturbation, fd_linearisation_check
from .spectral import kernel_report
from .tensor_ops import intertwining_defects, make_grid, mode_index, smooth_one_form

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3
MAX_GRID, MAX_MODES = 2000, 8


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- config plumbing

class Settings:
    """Flag value if given, else the INI value, else a built-in default."""

    def __init__(self, args, cfg: configparser.ConfigParser):
        self.args = args
        self.cfg = cfg

    def get(self, name, section, key=None, cast=str, default=None):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        key = key or name
        if self.cfg.has_option(section, key):
            raw = self.cfg.get(section, key)
            try:
                return cast(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None
        return default


def _load_config(path):
    cfg = configparser.ConfigParser()
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file {path} does not exist")
        cfg.read(path)
    return cfg


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def _parse_S(text: str) -> np.ndarray:
    if str(text).strip().lower() == "zero":
        return np.zeros((3, 3))
    vals = _floats(text)
    if len(vals) != 6:
        raise ConfigError(f"S needs six entries (11,22,33,12,13,23) or 'zero', got {text!r}")
    return symmetric_from_six(vals)


def _side_from_section(cfg, section) -> SideCoefficients:
    get = cfg[section].get
    V = _floats(get("V", "0,0,0"))
    if len(V) != 3:
        raise ConfigError(f"[{section}] V needs three entries")
    return SideCoefficients(float(get("C1", "0")), float(get("C2", "0")), V, _parse_S(get("S", "zero")))


def load_general_spec(path) -> BoundaryConditionSpec:
    """General spec from an INI file with a ``[boundary]`` section.

    Optional ``[boundary.minus]`` and ``[boundary.plus]`` sections override
    the coefficients at ``s = -T`` and ``s = +T``.
    """
    if not Path(path).is_file():
        raise ConfigError(f"spec file {path} does not exist")
    cfg = configparser.ConfigParser()
    cfg.read(path)
    if not cfg.has_section("boundary"):
        raise ConfigError(f"spec file {path} has no [boundary] section")
    try:
        shared = _side_from_section(cfg, "boundary")
        sides = {sd: _side_from_section(cfg, sec) if cfg.has_section(sec) else shared
                 for sd, sec in ((-1, "boundary.minus"), (1, "boundary.plus"))}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return BoundaryConditionSpec("general", sides)


def resolve_spec(bc: str, spec_file=None) -> BoundaryConditionSpec:
    if bc == "dirichlet":
        return BoundaryConditionSpec.dirichlet()
    if bc == "anderson":
        return BoundaryConditionSpec.anderson()
    if bc.startswith("general:"):
        return load_general_spec(bc.split(":", 1)[1])
    if bc == "general" and spec_file:
        return load_general_spec(spec_file)
    raise ConfigError(f"unknown boundary condition {bc!r}")


def _check_range(name, value, lo, hi):
    if not lo <= value <= hi:
        raise ConfigError(f"{name} = {value} outside [{lo}, {hi}]")


# ---------------------------------------------------------------- output

def _out_dir(st: Settings):
    out = st.get("out", "output", "dir")
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _formats(st: Settings):
    fmts = st.get("formats", "output", default="csv,json")
    fmts = {f.strip() for f in fmts.split(",") if f.strip()}
    if not fmts <= {"csv", "json"}:
        raise ConfigError(f"unknown output format in {sorted(fmts)}")
    return fmts


def _plot_data(st: Settings) -> bool:
    flag = getattr(st.args, "plot_data", False)
    if flag:
        return True
    return st.cfg.getboolean("output", "plot_data", fallback=False)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: Path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(st: Settings, stem: str, header, rows, summary):
    out = _out_dir(st)
    if out is None:
        return
    fmts = _formats(st)
    if "csv" in fmts:
        write_csv(out / f"{stem}.csv", header, rows)
    if "json" in fmts:
        write_json(out / f"{stem}.json", summary)


def _gnuplot(out: Path, name: str, data_file: str, xlabel: str, ylabel: str):
    script = (f"set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
              f"plot '{data_file}' using 1:2 with points title '{name}'\n")
    (out / f"{name}.gp").write_text(script)


def _float(x) -> float:
    return float(np.real(x))


# ---------------------------------------------------------------- subcommands

def run_sl_check(args, st: Settings) -> int:
    C2 = st.get("c2", "boundary", "C2", float)
    S_text = st.get("s", "boundary", "S", default="zero")
    if C2 is None:
        raise ConfigError("--c2 is required")
    S = _parse_S(S_text)
    verdict = sl_check(C2, S)
    witness = None if verdict.witness is None else [float(v) for v in verdict.witness]
    status = "elliptic" if verdict.elliptic else "NOT elliptic"
    print(f"C2={C2:g} S={S.ravel().tolist()} -> {status}, margin {verdict.margin:.6g}")
    if witness is not None:
        print(f"witness direction: {witness}")
    summary = {"C2": C2, "S": S.tolist(), "elliptic": verdict.elliptic,
               "margin": verdict.margin, "witness": witness}
    _emit(st, "sl_check", ["C2", "S", "elliptic", "margin", "witness"],
          [[C2, S_text, verdict.elliptic, verdict.margin, "" if witness is None else witness]], summary)
    return EXIT_OK if verdict.elliptic else EXIT_FAIL


def _linspace_spec(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must read start:stop:count, got {text!r}")
    return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))


def run_sl_scan(args, st: Settings) -> int:
    c2_values = _linspace_spec(st.get("c2_range", "scan", "c2_range", default="-2:2:9"))
    family_text = st.get("s_family", "scan", "s_family", default="zero|1,1,-1,0,0,0|1,0,0,0,0,0")
    family_items = [t.strip() for t in family_text.split("|") if t.strip()]
    family = [_parse_S(t) for t in family_items]
    verdicts = sl_scan(c2_values, family)
    rows = []
    labels = [(c2, lab) for c2 in c2_values for lab in family_items]
    for (c2, lab), v in zip(labels, verdicts):
        rows.append([float(c2), lab, v.elliptic, v.margin])
        print(f"C2={c2:+.4f} S={lab:<20} {'elliptic' if v.elliptic else 'NOT elliptic'} margin={v.margin:.4g}")
    summary = {"count": len(rows), "elliptic": sum(r[2] for r in rows)}
    _emit(st, "sl_scan", ["C2", "S", "elliptic", "margin"], rows, summary)
    return EXIT_OK


def run_spectrum(args, st: Settings) -> int:
    bc = st.get("bc", "boundary", default="anderson")
    T = st.get("T", "geometry", "T", float, 1.0)
    L = st.get("L", "geometry", "L", float, 2 * math.pi)
    N = st.get("modes", "numerics", "modes", int, 0)
    M = st.get("grid", "numerics", "grid", int, 201)
    count = st.get("count", "numerics", "count", int, 10)
    tol = st.get("tol", "numerics", "tol", float, None)
    jobs = st.get("jobs", "numerics", "jobs", int, 1)
    method = st.get("method", "numerics", "method", default="auto")
    _check_range("--grid", M, 5, MAX_GRID)
    _check_range("--modes", N, 0, MAX_MODES)
    if count < 1 or (tol is not None and tol <= 0) or T <= 0 or L <= 0 or jobs < 1:
        raise ConfigError("count, tol, T, L and jobs must be positive")
    if method not in ("auto", "dense", "sparse"):
        raise ConfigError(f"unknown method {method!r}")
    spec = resolve_spec(bc, st.get("spec_file", "boundary", "spec_file"))
    _check_range("--T", T, 1e-6, 1e6)
    geom = make_flat_torus_product(T, (L, L, L))
    grid = make_grid(T, M)

    report = kernel_report(geom, spec, mode_range(N), grid, tol, count, method, jobs)
    rows, per_mode = [], []
    for n, res in report.results.items():
        for lam in res.eigenvalues:
            rows.append([*n, repr(float(lam.real)), repr(float(lam.imag))])
        per_mode.append({"mode": list(n), "kernel_dim": res.kernel_dim,
                         "smallest_singular": res.smallest_singular,
                         "smallest_eigenvalue": [_float(res.eigenvalues[0]), float(res.eigenvalues[0].imag)]})
    summary = {"bc": bc, "T": T, "L": L, "modes": N, "grid": M,
               "kernel_dim_total": report.kernel_dim_total,
               "kernel_modes": [list(n) for n in report.kernel_modes],
               "spectral_gap": report.spectral_gap, "per_mode": per_mode}
    print(f"kernel_dim_total = {report.kernel_dim_total}")
    print(f"kernel modes     = {[list(n) for n in report.kernel_modes]}")
    print(f"spectral gap     = {report.spectral_gap:.6g}")
    _emit(st, "spectrum", ["n1", "n2", "n3", "re_lambda", "im_lambda"], rows, summary)
    out = _out_dir(st)
    if out is not None and _plot_data(st):
        write_csv(out / "eigenvalues.dat", ["re", "im"], [[r[3], r[4]] for r in rows])
        gap_rows = sorted((float(np.linalg.norm(mode_index(geom, n).xi)), abs(res.eigenvalues[0]))
                          for n, res in report.results.items())
        write_csv(out / "gap_vs_xi.dat", ["xi_norm", "gap"], gap_rows)
        _gnuplot(out, "eigenvalues", "eigenvalues.dat", "Re lambda", "Im lambda")
        _gnuplot(out, "gap_vs_xi", "gap_vs_xi.dat", "|xi|", "min |lambda|")
    return EXIT_OK


def run_gauge_check(args, st: Settings) -> int:
    bc = st.get("bc", "boundary", default="anderson")
    N = st.get("modes", "numerics", "modes", int, 1)
    M = st.get("grid", "numerics", "grid", int, 400)
    batch = st.get("batch", "numerics", "batch", int, 20)
    nspecs = st.get("specs", "numerics", "specs", int, 10)
    seed = st.get("seed", "numerics", "seed", int, 0)
    tol = st.get("tol", "numerics", "tol", float, 1e-6)
    _check_range("--grid", M, 5, MAX_GRID)
    _check_range("--modes", N, 0, MAX_MODES)
    if batch < 1 or nspecs < 1 or tol <= 0:
        raise ConfigError("batch, specs and tol must be positive")
    rng = np.random.default_rng(seed)
    if bc == "random":
        specs = [(f"random{i}", random_general_spec(rng)) for i in range(nspecs)]
    else:
        specs = [(bc, resolve_spec(bc, st.get("spec_file", "boundary", "spec_file")))]
    geom = make_flat_torus_product(1.0)
    grid = make_grid(geom.T, M)
    modes = [mode_index(geom, n) for n in mode_range(N)]
    fields = random_collar_fields(geom, grid, modes, batch, rng)
    rows, worst = [], 0.0
    for i, gf in enumerate(fields):
        for label, spec in specs:
            r = gauge_invariance_residual(gf, spec, geom)
            worst = max(worst, r)
            rows.append([i, *gf.mode.n, label, repr(r)])
    ok = worst <= tol
    print(f"{len(rows)} (field, spec) pairs, max residual {worst:.3e} (tol {tol:g}) -> {'PASS' if ok else 'FAIL'}")
    summary = {"bc": bc, "pairs": len(rows), "max_residual": worst, "tol": tol, "pass": ok}
    _emit(st, "gauge_check", ["field", "n1", "n2", "n3", "spec", "residual"], rows, summary)
    return EXIT_OK if ok else EXIT_FAIL


def run_linearise_check(args, st: Settings) -> int:
    warp = st.get("warp", "geometry", default="quad01")
    if warp not in WARP_PRESETS:
        raise ConfigError(f"unknown warp {warp!r}; choose from {sorted(WARP_PRESETS)}")
    s0 = st.get("s0", "geometry", "s0", float, 1.0)
    T = st.get("T", "geometry", "T", float, 1.0)
    lambdas = _floats(st.get("lambda_seq", "numerics", "lambda_seq", default="1e-2,1e-3,1e-4"))
    tol = st.get("tol", "numerics", "tol", float, 1e-6)
    kind = st.get("perturbation", "numerics", "perturbation", default="ds-ds")
    seed = st.get("seed", "numerics", "seed", int, 0)
    if abs(s0) > T:
        raise ConfigError(f"s0 = {s0} outside [-T, T]")
    geom = make_warped_torus_product(T, warp=warp)
    if kind == "ds-ds":
        pert = Perturbation.ds_ds()
    elif kind == "tangential":
        pert = Perturbation.tangential_metric(geom, s0)
    elif kind == "random":
        pert = Perturbation.random(np.random.default_rng(seed), 0.3)
    else:
        raise ConfigError(f"unknown perturbation {kind!r}")
    drop = bool(getattr(args, "drop_h00_term", False))
    report = fd_linearisation_check(geom, pert, s0, lambdas, include_h00_term=not drop)
    print(f"{'lambda':>10} {'fd quotient':>16} {'formula':>16} {'discrepancy':>14}")
    rows = []
    for lam, q in report.fd_values:
        rows.append([repr(lam), repr(q), repr(report.formula_value), repr(abs(q - report.formula_value))])
        print(f"{lam:10.2e} {q:16.10f} {report.formula_value:16.10f} {abs(q - report.formula_value):14.3e}")
    print(f"richardson limit {report.richardson_limit:.10f}, discrepancy {report.discrepancy:.3e}, "
          f"h00 term {report.dropped_term_value:+.6f}{' (dropped)' if drop else ''}")
    ok = report.discrepancy <= tol
    summary = {"warp": warp, "s0": s0, "drop_h00_term": drop, "formula_value": report.formula_value,
               "richardson_limit": report.richardson_limit, "discrepancy": report.discrepancy,
               "dropped_term_value": report.dropped_term_value, "tol": tol, "pass": ok}
    _emit(st, "linearise_check", ["lambda", "fd", "formula", "discrepancy"], rows, summary)
    return EXIT_OK if ok else EXIT_FAIL


def run_intertwine_check(args, st: Settings) -> int:
    nfields = st.get("fields", "numerics", "fields", int, 10)
    grids = [int(v) for v in _floats(st.get("grids", "numerics", "grids", default="101,201,401"))]
    seed = st.get("seed", "numerics", "seed", int, 0)
    N = st.get("modes", "numerics", "modes", int, 2)
    _check_range("--modes", N, 0, MAX_MODES)
    for M in grids:
        _check_range("--grids", M, 11, MAX_GRID)
    if len(grids) < 2 or nfields < 1:
        raise ConfigError("need at least two grids and one field")
    geom = make_flat_torus_product(1.0)
    rng = np.random.default_rng(seed)
    all_modes = mode_range(N)
    rows, ok = [], True
    for f in range(nfields):
        n = all_modes[rng.integers(len(all_modes))]
        fseed = int(rng.integers(2 ** 31))
        errs = []
        for M in grids:
            omega = smooth_one_form(make_grid(1.0, M), np.random.default_rng(fseed))
            errs.append(intertwining_defects(omega, mode_index(geom, n)))
        e1 = np.array([e[0] for e in errs])
        rate = float(np.log2(e1[-2] / e1[-1]) / np.log2((grids[-1] - 1) / (grids[-2] - 1)))
        exact = max(e[1] for e in errs)
        bound = 1e-14 * ((grids[-1] - 1) / 2.0) ** 3 * 1e2
        good = abs(rate - 2) <= 0.2 and exact <= bound
        ok &= good
        rows.append([f, *n, repr(float(e1[-1])), repr(rate), repr(exact)])
        print(f"field {f} n={n}: delta K - D1 rate {rate:.3f}, K D1 - D2 K max {exact:.2e} {'ok' if good else 'FAIL'}")
    summary = {"fields": nfields, "grids": grids, "pass": bool(ok)}
    _emit(st, "intertwine_check", ["field", "n1", "n2", "n3", "deltaK_defect", "rate", "KD1_D2K_defect"],
          rows, summary)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gravbc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI file with default settings")
        p.add_argument("--out", help="directory for CSV/JSON output")
        p.add_argument("--formats", help="comma-separated subset of csv,json")
        return p

    p = common(sub.add_parser("sl-check", help="Shapiro-Lopatinskij check for one (C2, S)"))
    p.add_argument("--c2", type=float)
    p.add_argument("--s", help="'zero' or six entries 11,22,33,12,13,23")
    p.set_defaults(func=run_sl_check)

    p = common(sub.add_parser("sl-scan", help="ellipticity over a grid of C2 values and S matrices"))
    p.add_argument("--c2-range", dest="c2_range", help="start:stop:count (use --c2-range=-1:1:5 for negative starts)")
    p.add_argument("--s-family", dest="s_family", help="S matrices separated by '|'")
    p.set_defaults(func=run_sl_scan)

    p = common(sub.add_parser("spectrum", help="per-mode spectra and kernel dimensions"))
    p.add_argument("--bc", help="dirichlet, anderson or general:<file>")
    p.add_argument("--spec-file", dest="spec_file")
    p.add_argument("--T", type=float)
    p.add_argument("--L", type=float, help="torus period (all three directions)")
    p.add_argument("--modes", type=int, help="all |n_i| <= N")
    p.add_argument("--grid", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--method", choices=("auto", "dense", "sparse"))
    p.add_argument("--jobs", type=int)
    p.add_argument("--plot-data", dest="plot_data", action="store_true")
    p.set_defaults(func=run_spectrum)

    p = common(sub.add_parser("gauge-check", help="boundary residuals of K omega for collar gauge fields"))
    p.add_argument("--bc", help="dirichlet, anderson, random or general:<file>")
    p.add_argument("--spec-file", dest="spec_file")
    p.add_argument("--modes", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--specs", type=int, help="number of random specs for --bc random")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=run_gauge_check)

    p = common(sub.add_parser("linearise-check", help="first variation of the mean curvature"))
    p.add_argument("--warp", help=f"one of {sorted(WARP_PRESETS)}")
    p.add_argument("--s0", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--lambda-seq", dest="lambda_seq")
    p.add_argument("--perturbation", choices=("ds-ds", "tangential", "random"))
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--drop-h00-term", dest="drop_h00_term", action="store_true")
    p.set_defaults(func=run_linearise_check)

    p = common(sub.add_parser("intertwine-check", help="grid convergence of the operator identities"))
    p.add_argument("--fields", type=int)
    p.add_argument("--grids", help="comma-separated grid sizes")
    p.add_argument("--modes", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=run_intertwine_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        st = Settings(args, _load_config(args.config))
        return args.func(args, st)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateSpecError, InvalidSpecError) as exc:
        print(f"degenerate boundary specification: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except GravBCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
