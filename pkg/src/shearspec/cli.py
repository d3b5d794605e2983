"""Command-line front end: validated configs in, CSV/JSON artifacts out.

Commands print a short summary on stdout and, when an output directory
is given, write diff-able artifacts next to a manifest recording the
config hash, seed, and library versions.  Runs are deterministic for a
fixed config and seed, so rerunning a manifest reproduces its CSVs byte
for byte.  Exit codes: 0 success, 2 bad arguments or config, 3 solver
non-convergence, 4 inconclusive result.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .certificates import existence_certificate
from .cross_section import numeric_modes, rectangle_modes
from .geometry import MaskSection, Rect, Section, WaveguideSpec, beta_value
from .thresholds import BRANCH_POINT, beta_star, bound_factor, ess_threshold
from .waveguide import (CSV_COLUMNS, DiscretizationSpec, SweepResult,
                        compute_spectrum, separation_check, sweep_beta)
from .eigcore import EigOptions

__all__ = ["main", "ConfigError", "load_config", "load_mask"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INCONCLUSIVE = 4

MODE_ALIAS = {"half": "half_DN", "full": "full_sign", "reduced": "reduced2d",
              "half_DN": "half_DN", "full_sign": "full_sign",
              "reduced2d": "reduced2d"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

def _require_keys(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_mask(path: str) -> MaskSection:
    """Plain-text mask: a 'cell <h>' line, then rows of 0/1 characters
    (axis 0 is y1).  '#' and '.' are accepted as aliases of 1 and 0."""
    rows = []
    cell = None
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("//"):
                continue
            if line.startswith("cell"):
                cell = float(line.split()[1])
                continue
            trans = {"#": True, "1": True, ".": False, "0": False}
            try:
                rows.append([trans[ch] for ch in line])
            except KeyError as e:
                raise ConfigError(f"bad mask character {e} in {path}")
    if cell is None:
        raise ConfigError(f"mask file {path} lacks a 'cell <h>' line")
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError(f"mask file {path} needs equal-length rows")
    return MaskSection(inside=np.array(rows, dtype=bool), cell=cell)


def _parse_rect(values) -> Rect:
    if isinstance(values, str):
        values = values.split(",")
    vals = [float(v) for v in values]
    if len(vals) != 4:
        raise ConfigError(f"rect needs four numbers a,b,c,d, got {vals}")
    return Rect(*vals)


def _section_from(cfg: dict, base_dir: str) -> Section:
    if ("rect" in cfg) == ("mask" in cfg):
        raise ConfigError("give exactly one of 'rect' or 'mask'")
    if "rect" in cfg:
        return _parse_rect(cfg["rect"])
    path = cfg["mask"]
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    return load_mask(path)


def _disc_from(cfg: dict) -> DiscretizationSpec:
    _require_keys(cfg, {"nx", "n1", "n2", "L", "mode", "refine", "l_steps"},
                  "disc")
    kw = dict(cfg)
    if "mode" in kw:
        mode = kw["mode"]
        if mode not in MODE_ALIAS:
            raise ConfigError(f"unknown mode {mode!r}; use half, full or "
                              f"reduced")
        kw["mode"] = MODE_ALIAS[mode]
    missing = {"nx", "n1", "n2", "L"} - set(kw)
    if missing:
        raise ConfigError(f"disc lacks keys: {sorted(missing)}")
    kw["L"] = float(kw["L"])
    return DiscretizationSpec(**kw)


def _eig_from(cfg: dict) -> EigOptions:
    _require_keys(cfg, {"k", "block", "tol", "maxit", "seed"}, "eig")
    return EigOptions(**cfg)


TOP_KEYS = {"beta", "betas", "straight", "rect", "mask", "disc", "eig", "out"}


def load_config(path: str, sweep: bool = False):
    """Parse and validate one run config; raises ConfigError on any
    unknown key or inconsistent value before touching a solver."""
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(cfg, TOP_KEYS, "config")
    base = os.path.dirname(os.path.abspath(path))
    section = _section_from(cfg, base)
    if "disc" not in cfg:
        raise ConfigError("config lacks 'disc'")
    disc = _disc_from(cfg["disc"])
    opts = _eig_from(cfg.get("eig", {}))
    straight = bool(cfg.get("straight", False))
    if sweep:
        if "betas" not in cfg:
            raise ConfigError("sweep config needs 'betas'")
        betas = [float(b) for b in cfg["betas"]]
        return cfg, section, betas, disc, opts
    if "beta" not in cfg:
        raise ConfigError("config needs 'beta'")
    spec = WaveguideSpec(float(cfg["beta"]), section, straight=straight)
    return cfg, spec, disc, opts


# ---------------------------------------------------------------- output

def _round12(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round12(obj.tolist())
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit(data: dict, path=None) -> str:
    text = json.dumps(_round12(data), indent=2)
    if path is not None:
        with open(path, "w") as f:
            f.write(text + "\n")
    return text


def _manifest(command: str, cfg: dict, seed: int, outputs: list[str],
              out_dir: str) -> None:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    man = {
        "command": command,
        "config": cfg,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "seed": seed,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "shearspec": __version__,
        },
        "outputs": sorted(os.path.basename(p) for p in outputs),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        f.write(json.dumps(man, indent=2) + "\n")


def _report_exit(flags) -> int:
    if any(f.startswith("nonconverged") for f in flags):
        return EXIT_SOLVER
    if "inconclusive" in flags:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -------------------------------------------------------------- commands

def cmd_thresholds(args) -> int:
    section = _section_arg(args)
    beta = beta_value(args.beta)
    if isinstance(section, Rect):
        modes = rectangle_modes(beta, section, 2)
    else:
        modes = numeric_modes(beta, section, args.grid_factor, 2)
    out = {
        "beta": beta,
        "E1": modes[0].E,
        "E2": modes[1].E,
        "ess_threshold": ess_threshold(beta, section),
    }
    if isinstance(section, Rect):
        R = section.aspect
        out["R"] = R
        out["beta_star"] = beta_star(R)
        out["branch"] = "narrow" if R <= BRANCH_POINT else "wide"
    out["bound_factor"] = bound_factor(beta)
    print(_emit(out))
    return EXIT_OK


def cmd_certify(args) -> int:
    rect = _parse_rect(args.rect)
    beta = beta_value(args.beta)
    cert = existence_certificate(beta, rect)
    out = dataclasses.asdict(cert)
    out["cross_term"] = cert.piece_cross / (2.0 * cert.eps)
    out["rayleigh"] = cert.rayleigh
    text = _emit(out, _opt_path(args, "certificate.json"))
    print(text)
    if args.out:
        _manifest("certify", {"beta": beta, "rect": [rect.a, rect.b, rect.c,
                                                     rect.d]},
                  0, [os.path.join(args.out, "certificate.json")], args.out)
    return EXIT_OK if cert.verdict else EXIT_INCONCLUSIVE


def cmd_spectrum(args) -> int:
    cfg, spec, disc, opts = load_config(args.config)
    out_dir = args.out or cfg.get("out")
    rep = compute_spectrum(spec, disc, opts)
    print(f"count {rep.count}  stable {rep.stable}  "
          f"threshold {rep.threshold:.12g}  lam1 {rep.eigenvalues[0]:.12g}  "
          f"flags {rep.flags}")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        jpath = os.path.join(out_dir, "report.json")
        cpath = os.path.join(out_dir, "eigenvalues.csv")
        _emit(rep.as_dict(), jpath)
        SweepResult([rep]).to_csv(cpath)
        _manifest("spectrum", cfg, opts.seed, [jpath, cpath], out_dir)
    return _report_exit(rep.flags)


def cmd_sweep(args) -> int:
    cfg, section, betas, disc, opts = load_config(args.config, sweep=True)
    out_dir = args.out or cfg.get("out")
    sweep = sweep_beta(section, betas, disc, opts)
    for rep in sweep.reports:
        print(f"beta {rep.beta:.12g}  count {rep.count}  "
              f"gap {rep.gap:.12g}  flags {rep.flags}")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        cpath = os.path.join(out_dir, "sweep.csv")
        jpath = os.path.join(out_dir, "reports.json")
        sweep.to_csv(cpath)
        with open(jpath, "w") as f:
            f.write(json.dumps(_round12([r.as_dict() for r in sweep.reports]),
                               indent=2) + "\n")
        _manifest("sweep", cfg, opts.seed, [cpath, jpath], out_dir)
    worst = EXIT_OK
    for rep in sweep.reports:
        worst = max(worst, _report_exit(rep.flags))
    return worst


def cmd_convergence(args) -> int:
    cfg, spec, disc, opts = load_config(args.config)
    out_dir = args.out or cfg.get("out")
    rep = compute_spectrum(spec, disc, opts)
    rows = _convergence_rows(rep, disc)
    for row in rows:
        if row["j"] == 0:
            print(f"rung {row['rung']}  lam1 {row['lambda']}  "
                  f"diff {row['diff']}  ratio {row['ratio']}")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        cpath = os.path.join(out_dir, "convergence.csv")
        with open(cpath, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=CONVERGENCE_COLUMNS,
                               lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        _manifest("convergence", cfg, opts.seed, [cpath], out_dir)
    return _report_exit(rep.flags)


CONVERGENCE_COLUMNS = ("rung", "L", "nx", "n1", "n2", "j", "lambda", "diff",
                       "ratio", "extrapolated", "est")


def _convergence_rows(rep, disc: DiscretizationSpec) -> list[dict]:
    """Mesh-series table with successive differences and their ratios;
    a clean second-order run shows ratios near 4."""
    ts = disc.l_steps - 1
    series = [rr for rr in rep.rungs if rr.grid.s == ts]
    series.sort(key=lambda rr: rr.grid.r)
    vals = [rr.planar if rr.planar is not None else rr.eigenvalues
            for rr in series]
    rows = []
    k = min(len(v) for v in vals)
    ext = rep.planar if rep.planar is not None else rep.eigenvalues
    for j in range(k):
        prev_diff = None
        for i, rr in enumerate(series):
            g = rr.grid
            row = {"rung": f"r{g.r}s{g.s}", "L": f"{g.L:.12g}", "nx": g.nx,
                   "n1": g.n1, "n2": g.n2, "j": j,
                   "lambda": f"{vals[i][j]:.12g}", "diff": "", "ratio": "",
                   "extrapolated": "", "est": ""}
            if i > 0:
                diff = vals[i - 1][j] - vals[i][j]
                row["diff"] = f"{diff:.12g}"
                if prev_diff is not None and diff != 0.0:
                    row["ratio"] = f"{prev_diff / diff:.12g}"
                prev_diff = diff
            if i == len(series) - 1 and j < len(ext):
                row["extrapolated"] = f"{ext[j]:.12g}"
                row["est"] = f"{rep.est[j]:.12g}"
            rows.append(row)
    return rows


def cmd_oracle_compare(args) -> int:
    rect = _parse_rect(args.rect)
    spec = WaveguideSpec(beta_value(args.beta), rect)
    nx, n1, n2 = (int(v) for v in args.grid.split(","))
    disc = DiscretizationSpec(nx=nx, n1=n1, n2=n2, L=args.L,
                              refine=2, l_steps=2)
    sep = separation_check(spec, disc, EigOptions(k=args.k))
    out = {
        "beta": sep.beta,
        "max_rel": sep.max_rel,
        "values3d": sep.values3d.tolist(),
        "synthesized": sep.synthesized.tolist(),
        "pairs": [list(p) for p in sep.pairs],
    }
    text = _emit(out, _opt_path(args, "separation.json"))
    print(text)
    if args.out:
        _manifest("oracle-compare",
                  {"beta": sep.beta, "rect": [rect.a, rect.b, rect.c, rect.d],
                   "grid": args.grid, "L": args.L, "k": args.k},
                  0, [os.path.join(args.out, "separation.json")], args.out)
    return EXIT_OK


def _section_arg(args) -> Section:
    if (args.rect is None) == (args.mask is None):
        raise ConfigError("give exactly one of --rect or --mask")
    if args.rect is not None:
        return _parse_rect(args.rect)
    return load_mask(args.mask)


def _opt_path(args, name: str):
    if not getattr(args, "out", None):
        return None
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="shearspec",
        description="Spectra of Dirichlet Laplacians on broken sheared "
                    "waveguides.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("thresholds",
                       help="closed-form and numeric spectral thresholds")
    t.add_argument("--beta", type=float, required=True)
    t.add_argument("--rect", help="a,b,c,d")
    t.add_argument("--mask", help="mask file path")
    t.add_argument("--grid-factor", type=int, default=None,
                   help="mask refinement factor for the numeric modes")
    t.set_defaults(func=cmd_thresholds)

    c = sub.add_parser("certify",
                       help="variational existence certificate")
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--rect", required=True, help="a,b,c,d")
    c.add_argument("--out", help="output directory")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("spectrum", help="one ladder run from a JSON config")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (overrides config)")
    s.set_defaults(func=cmd_spectrum)

    w = sub.add_parser("sweep", help="ladder runs over a beta grid")
    w.add_argument("config")
    w.add_argument("--out", help="output directory (overrides config)")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("convergence",
                       help="mesh-series table with h^2 diagnostics")
    v.add_argument("config")
    v.add_argument("--out", help="output directory (overrides config)")
    v.set_defaults(func=cmd_convergence)

    o = sub.add_parser("oracle-compare",
                       help="discrete tensor-separation identity check")
    o.add_argument("--beta", type=float, required=True)
    o.add_argument("--rect", required=True, help="a,b,c,d")
    o.add_argument("--grid", default="10,8,8", help="nx,n1,n2")
    o.add_argument("--L", type=float, default=4.0)
    o.add_argument("--k", type=int, default=4)
    o.add_argument("--out", help="output directory")
    o.set_defaults(func=cmd_oracle_compare)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # pragma: no cover - last-resort solver guard
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
