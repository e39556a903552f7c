"""Command-line front end.

Subcommands
-----------
mesh            generate a triangulation and write it in the text format
infsup          inf-sup constants and spurious modes for one case
spectrum        full eigenvalue list of a chosen pencil
coercivity      coercivity constant on the divergence-free subspace
laplace-eig     smallest positive eigenvalue of the mixed Laplace pencil
stokes-infsup   inf-sup constant in the full gradient norm
converge        source-problem convergence study
tables          recompute the golden stability tables (T1..T4)

CSV artifacts start with a provenance line ``# mixed-stab <version>
<config-hash>`` so golden files detect configuration drift; JSON output
carries the same data under a "provenance" key.  Exit codes: 0 success,
1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .errors import MixedStabError
from .mesh import Family, GENERATED_FAMILIES, export_mesh, generate, read_mesh
from .stability import (DEFAULT_THRESHOLD, SWEEP_THRESHOLDS, babuska_infsup,
                        brezzi_coercivity, brezzi_infsup, case_forms,
                        divdiv_spectrum, laplace_eigenvalue, reproduce_table,
                        run_case, stokes_infsup, threshold_sweep,
                        StabilityReport)
from .poisson import convergence_study, default_n_values, NORM_KEYS

PROG = "mixed-stab"
THRESHOLD_ENV = "MIXEDSTAB_THRESHOLD"

# fields that locate outputs or control scheduling; they never change the
# numbers, so they stay out of the provenance hash
UNHASHED_FIELDS = ("out", "jobs", "dump_matrices", "plot_data")


@dataclass
class RunConfig:
    """Everything one invocation is going to do, JSON round-trippable."""

    command: str
    family: str | None = None
    n: int | None = None
    n_values: list | None = None
    r: int = 1
    r_values: list | None = None
    threshold: float = DEFAULT_THRESHOLD
    mesh: str | None = None
    which: str | None = None
    fmt: str = "json"
    out: str | None = None
    with_gamma: bool = False
    with_alpha: bool = False
    with_stokes: bool = False
    sweep: list | None = None
    pencil: str = "infsup"
    jobs: int = 1
    dump_matrices: str | None = None
    plot_data: str | None = None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def config_hash(self):
        data = asdict(self)
        for name in UNHASHED_FIELDS:
            data.pop(name, None)
        canon = json.dumps(data, sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def provenance_line(self):
        return f"# {PROG} {__version__} {self.config_hash()}"

    def provenance_dict(self):
        return {"tool": PROG, "version": __version__,
                "config_hash": self.config_hash()}


def parse_n_values(text):
    """Parse an n argument: "8", "4,8,16" or an inclusive range "4..16"
    stepping by 2 (generated families use even n)."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty n range {text!r}")
        return list(range(lo, hi + 1, 2))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _positive_int_list(text):
    vals = [int(tok) for tok in text.split(",") if tok.strip()]
    if not vals or any(v <= 0 for v in vals):
        raise ValueError(f"expected positive integers, got {text!r}")
    return vals


def _float_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser():
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="stability constants and convergence studies for "
                    "vector-Lagrange / discontinuous-pressure pairs")
    parser.add_argument("--version", action="version",
                        version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    family_names = [f.value for f in GENERATED_FAMILIES]

    def add_case_args(p, with_mesh=True):
        p.add_argument("--family", choices=family_names)
        p.add_argument("--n", help="subdivisions: int, list (4,8) or range 4..16")
        p.add_argument("--r", type=int, default=1,
                       help="velocity degree (pressure degree is r-1)")
        if with_mesh:
            p.add_argument("--mesh", help="mesh file instead of --family/--n")
        p.add_argument("--threshold", type=float, default=None,
                       help=f"zero threshold (default {DEFAULT_THRESHOLD:g}, "
                            f"or ${THRESHOLD_ENV})")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"),
                       default=None)
        p.add_argument("--out", "-o", help="output path (default stdout)")

    p_mesh = sub.add_parser("mesh", help="generate a triangulation")
    p_mesh.add_argument("--family", choices=family_names, required=True)
    p_mesh.add_argument("--n", required=True)
    p_mesh.add_argument("--out", "-o", help="output path (default stdout)")

    p_inf = sub.add_parser("infsup", help="inf-sup constants for one case")
    add_case_args(p_inf)
    p_inf.add_argument("--with-gamma", action="store_true",
                       help="also compute the full-pencil constant")
    p_inf.add_argument("--with-alpha", action="store_true",
                       help="also compute the coercivity constant")
    p_inf.add_argument("--with-stokes", action="store_true",
                       help="also compute the gradient-norm constant")
    p_inf.add_argument("--sweep", nargs="?", const="default", default=None,
                       help="threshold sweep; optional comma list of thresholds")
    p_inf.add_argument("--dump-matrices", metavar="DIR",
                       help="export assembled matrices (Matrix Market)")

    p_spec = sub.add_parser("spectrum", help="full pencil spectrum")
    add_case_args(p_spec)
    p_spec.add_argument("--pencil",
                        choices=("infsup", "laplace", "stokes", "divdiv",
                                 "babuska"),
                        default="infsup")
    p_spec.add_argument("--dump-matrices", metavar="DIR",
                        help="export assembled matrices (Matrix Market)")

    p_coer = sub.add_parser("coercivity",
                            help="coercivity on the divergence-free subspace")
    add_case_args(p_coer)

    p_lap = sub.add_parser("laplace-eig",
                           help="smallest positive mixed Laplace eigenvalue")
    add_case_args(p_lap)

    p_sto = sub.add_parser("stokes-infsup",
                           help="inf-sup constant in the gradient norm")
    add_case_args(p_sto)

    p_conv = sub.add_parser("converge", help="convergence study")
    p_conv.add_argument("--family", choices=family_names, default="diagonal")
    p_conv.add_argument("--r", help="degree or comma list (default 2)",
                        default="2")
    p_conv.add_argument("--n", help="mesh list (default 4,8,16,32 resp. 4,8,16)")
    p_conv.add_argument("--format", dest="fmt", choices=("json", "csv"),
                        default=None)
    p_conv.add_argument("--out", "-o")
    p_conv.add_argument("--plot-data", metavar="DIR",
                        help="write normalized-error panel files")

    p_tab = sub.add_parser("tables", help="recompute golden tables")
    p_tab.add_argument("--which", required=True,
                       help="one of T1, T2, T3, T4")
    p_tab.add_argument("--n", help="n values (list or range)")
    p_tab.add_argument("--r", help="degree list for T1 (default 1,2,3)")
    p_tab.add_argument("--threshold", type=float, default=None)
    p_tab.add_argument("--jobs", type=int, default=1)
    p_tab.add_argument("--format", dest="fmt", choices=("json", "csv"),
                       default=None)
    p_tab.add_argument("--out", "-o")

    return parser


def resolve_threshold(args):
    value = getattr(args, "threshold", None)
    if value is not None:
        return float(value)
    env = os.environ.get(THRESHOLD_ENV)
    if env is not None:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"bad {THRESHOLD_ENV} value {env!r}")
    return DEFAULT_THRESHOLD


class UsageError(Exception):
    pass


def config_from_args(args):
    command = args.command
    cfg = RunConfig(command=command)
    cfg.family = getattr(args, "family", None)
    cfg.mesh = getattr(args, "mesh", None)
    cfg.out = getattr(args, "out", None)

    if command in ("mesh", "infsup", "spectrum", "coercivity", "laplace-eig",
                   "stokes-infsup"):
        if cfg.mesh is None:
            if cfg.family is None or getattr(args, "n", None) is None:
                raise UsageError(f"{command}: need --family and --n, or --mesh")
            ns = parse_n_values(args.n)
            if len(ns) != 1:
                raise UsageError(f"{command}: exactly one n expected, got {ns}")
            cfg.n = ns[0]
    if command == "mesh":
        cfg.fmt = "mesh"
        return cfg

    cfg.threshold = resolve_threshold(args)
    if command not in ("converge", "tables"):
        cfg.r = int(getattr(args, "r", 1) or 1)
    default_fmt = "csv" if command in ("converge", "tables") else "json"
    cfg.fmt = getattr(args, "fmt", None) or default_fmt

    if command == "infsup":
        cfg.with_gamma = args.with_gamma
        cfg.with_alpha = args.with_alpha
        cfg.with_stokes = args.with_stokes
        cfg.dump_matrices = args.dump_matrices
        if args.sweep is not None:
            cfg.sweep = (list(SWEEP_THRESHOLDS) if args.sweep == "default"
                         else _float_list(args.sweep))
    elif command == "spectrum":
        cfg.pencil = args.pencil
        cfg.dump_matrices = args.dump_matrices
    elif command == "converge":
        cfg.r_values = _positive_int_list(args.r)
        bad = [r for r in cfg.r_values if not 1 <= r <= 4]
        if bad:
            raise UsageError(f"converge: r must be in 1..4, got {bad}")
        cfg.n_values = parse_n_values(args.n) if args.n else None
        cfg.plot_data = args.plot_data
        cfg.family = cfg.family or "diagonal"
    elif command == "tables":
        which = args.which.upper()
        if which not in ("T1", "T2", "T3", "T4"):
            raise UsageError(f"tables: unknown table {args.which!r}")
        cfg.which = which
        cfg.n_values = parse_n_values(args.n) if args.n else None
        cfg.r_values = _positive_int_list(args.r) if getattr(args, "r", None) else None
        cfg.jobs = max(1, args.jobs)
    return cfg


def _emit(cfg, text):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg, payload):
    body = {"provenance": cfg.provenance_dict()}
    body.update(payload)
    _emit(cfg, json.dumps(body, indent=2, sort_keys=True) + "\n")


def _case_mesh(cfg):
    if cfg.mesh is not None:
        return read_mesh(cfg.mesh)
    return generate(Family.parse(cfg.family), cfg.n)


def _report_payload(report):
    payload = {
        "family": report.family, "n": report.n, "r": report.r,
        "sigma": report.sigma, "dimN": report.dim_spurious,
        "beta_div": report.beta_div,
        "beta_div_reduced": report.beta_div_reduced,
        "threshold": report.threshold,
    }
    for key, value in (("alpha", report.alpha), ("gamma", report.gamma),
                       ("beta_h1", report.beta_h1),
                       ("beta_h1_reduced", report.beta_h1_reduced),
                       ("stokes_constant_mode", report.stokes_constant_mode)):
        if value is not None:
            payload[key] = value
    if report.warnings:
        payload["warnings"] = list(report.warnings)
    return payload


def cmd_mesh(cfg):
    mesh = generate(Family.parse(cfg.family), cfg.n)
    _emit(cfg, export_mesh(mesh))
    return 0


def cmd_infsup(cfg):
    mesh = _case_mesh(cfg)
    forms = case_forms(None, None, cfg.r, mesh=mesh)
    report = run_case(mesh=mesh, r=cfg.r, threshold=cfg.threshold,
                      with_alpha=cfg.with_alpha, with_gamma=cfg.with_gamma,
                      with_stokes=cfg.with_stokes, forms=forms)
    if cfg.dump_matrices:
        from .assembly import write_matrix_market
        write_matrix_market(forms, cfg.dump_matrices)
    sweep_rows = None
    if cfg.sweep:
        sweep_rows = threshold_sweep(forms, tuple(cfg.sweep))

    if cfg.fmt == "json":
        payload = _report_payload(report)
        if sweep_rows is not None:
            payload["sweep"] = [
                {"threshold": t, "dimN": d, "beta_reduced": b}
                for t, d, b in sweep_rows]
        _emit_json(cfg, payload)
    else:
        lines = [cfg.provenance_line(), StabilityReport.CSV_HEADER,
                 report.csv_row()]
        if sweep_rows is not None:
            lines.append("threshold,dimN,beta_reduced")
            lines += [f"{t:g},{d},{b:.6f}" for t, d, b in sweep_rows]
        _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_spectrum(cfg):
    mesh = _case_mesh(cfg)
    forms = case_forms(None, None, cfg.r, mesh=mesh)
    if cfg.dump_matrices:
        from .assembly import write_matrix_market
        write_matrix_market(forms, cfg.dump_matrices)
    if cfg.pencil == "infsup":
        spec = brezzi_infsup(forms, threshold=cfg.threshold).spectrum
    elif cfg.pencil == "laplace":
        spec = laplace_eigenvalue(forms, threshold=cfg.threshold).spectrum
    elif cfg.pencil == "stokes":
        spec = stokes_infsup(forms, threshold=cfg.threshold).spectrum
    elif cfg.pencil == "divdiv":
        spec = divdiv_spectrum(forms)
    else:
        spec = babuska_infsup(forms).spectrum
    values = [float(v) for v in spec.values]
    if cfg.fmt == "json":
        _emit_json(cfg, {"pencil": cfg.pencil, "count": len(values),
                         "values": values})
    else:
        lines = [cfg.provenance_line(), "index,value"]
        lines += [f"{i},{v:.12e}" for i, v in enumerate(values)]
        _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_coercivity(cfg):
    mesh = _case_mesh(cfg)
    forms = case_forms(None, None, cfg.r, mesh=mesh)
    res = brezzi_coercivity(forms)
    payload = {"alpha": res.alpha, "kernel_dim": res.kernel_dim, "r": cfg.r}
    if cfg.fmt == "json":
        _emit_json(cfg, payload)
    else:
        _emit(cfg, "\n".join([cfg.provenance_line(), "alpha,kernel_dim,r",
                              f"{res.alpha:.12f},{res.kernel_dim},{cfg.r}"]) + "\n")
    return 0


def cmd_laplace(cfg):
    mesh = _case_mesh(cfg)
    forms = case_forms(None, None, cfg.r, mesh=mesh)
    res = laplace_eigenvalue(forms, threshold=cfg.threshold)
    smallest = [float(v) for v in res.spectrum.values[:5]]
    payload = {"mu": res.mu, "threshold": cfg.threshold,
               "smallest_eigenvalues": smallest, "r": cfg.r}
    if cfg.fmt == "json":
        _emit_json(cfg, payload)
    else:
        _emit(cfg, "\n".join([cfg.provenance_line(), "mu,threshold,r",
                              f"{res.mu:.12f},{cfg.threshold:g},{cfg.r}"]) + "\n")
    return 0


def cmd_stokes(cfg):
    mesh = _case_mesh(cfg)
    forms = case_forms(None, None, cfg.r, mesh=mesh)
    res = stokes_infsup(forms, threshold=cfg.threshold)
    payload = {"beta_h1": res.beta, "beta_h1_reduced": res.beta_reduced,
               "dimN": res.dim_spurious, "constant_mode": res.constant_mode,
               "threshold": cfg.threshold, "r": cfg.r}
    if cfg.fmt == "json":
        _emit_json(cfg, payload)
    else:
        _emit(cfg, "\n".join([
            cfg.provenance_line(),
            "beta_h1,beta_h1_reduced,dimN,constant_mode,threshold,r",
            f"{res.beta:.6f},{res.beta_reduced:.6f},{res.dim_spurious},"
            f"{res.constant_mode:.6f},{cfg.threshold:g},{cfg.r}"]) + "\n")
    return 0


def _write_plot_data(cfg, reports):
    """Normalized-error panels, one whitespace table per norm."""
    directory = Path(cfg.plot_data)
    directory.mkdir(parents=True, exist_ok=True)
    panels = {"p_l2": "normalized_p_L2.dat", "u_l2": "normalized_u_L2.dat",
              "u_hdiv": "normalized_u_Hdiv.dat"}
    all_n = sorted({n for rep in reports for n in rep.n_values})
    for key, fname in panels.items():
        lines = [cfg.provenance_line(),
                 "# n " + " ".join(f"r={rep.r}" for rep in reports)]
        for n in all_n:
            cells = [str(n)]
            for rep in reports:
                if n in rep.n_values:
                    cells.append(f"{rep.normalized[key][rep.n_values.index(n)]:.6e}")
                else:
                    cells.append("-")
            lines.append(" ".join(cells))
        (directory / fname).write_text("\n".join(lines) + "\n")


def cmd_converge(cfg):
    family = Family.parse(cfg.family)
    reports = [convergence_study(r, n_values=cfg.n_values, family=family)
               for r in cfg.r_values]
    if cfg.plot_data:
        _write_plot_data(cfg, reports)
    if cfg.fmt == "json":
        payload = {"studies": [
            {"r": rep.r, "family": rep.family, "n_values": rep.n_values,
             "errors": rep.errors, "rates": rep.rates,
             "normalized": rep.normalized}
            for rep in reports]}
        _emit_json(cfg, payload)
    else:
        lines = [cfg.provenance_line(), reports[0].CSV_HEADER]
        for rep in reports:
            lines += rep.csv_rows()
        _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_tables(cfg):
    table = reproduce_table(cfg.which, n_values=cfg.n_values,
                            r_values=cfg.r_values, threshold=cfg.threshold,
                            jobs=cfg.jobs)
    if cfg.fmt == "json":
        _emit_json(cfg, {"which": table.which, "r": table.r,
                         "threshold": table.threshold,
                         "header": table.header, "rows": table.rows})
    else:
        _emit(cfg, cfg.provenance_line() + "\n" + table.to_csv())
    return 0


COMMANDS = {
    "mesh": cmd_mesh,
    "infsup": cmd_infsup,
    "spectrum": cmd_spectrum,
    "coercivity": cmd_coercivity,
    "laplace-eig": cmd_laplace,
    "stokes-infsup": cmd_stokes,
    "converge": cmd_converge,
    "tables": cmd_tables,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (UsageError, ValueError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[cfg.command](cfg)
    except MixedStabError as exc:
        print(f"{PROG}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
