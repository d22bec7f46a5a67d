"""Batch front end: ``python -m moebius <command> [options]``.

Commands write deterministic CSV or JSON into the output directory
(``--out-dir``, else ``$MOEBIUS_OUT_DIR``, else the working directory).
Exit codes: 0 success, 1 solver/runtime failure, 2 usage error.

A ``--config FILE`` of ``key=value`` lines (``#`` comments allowed)
supplies defaults; flags on the command line override it.
"""
import argparse
from dataclasses import dataclass, field
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import acceptance, classical, geometry, quantum
from .serialize import csv_text, json_text, write_text

COMMANDS = ("geometry", "classical", "spectrum-free", "spectrum-flux", "spectrum-coulomb",
            "validate")
DEFAULT_FORMAT = {"geometry": "csv", "classical": "csv", "spectrum-free": "json",
                  "spectrum-flux": "json", "spectrum-coulomb": "json", "validate": "json"}
DEFAULT_STEM = {"geometry": "mesh", "classical": "trajectory", "spectrum-free": "spectrum_free",
                "spectrum-flux": "flux_sweep", "spectrum-coulomb": "coulomb",
                "validate": "validation"}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    format: str = "json"
    out_dir: Path = Path(".")
    output: str = None

    @property
    def output_path(self):
        name = self.output or f"{DEFAULT_STEM[self.command]}.{self.format}"
        return self.out_dir / name

    def __getitem__(self, key):
        return self.params[key]


def _number(kind, lo=None, hi=None, strict_lo=False, even=False):
    def convert(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}")
        if kind is float and not math.isfinite(val):
            raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
        if lo is not None and (val <= lo if strict_lo else val < lo):
            raise argparse.ArgumentTypeError(
                f"must be {'>' if strict_lo else '>='} {lo}, got {text!r}")
        if hi is not None and val > hi:
            raise argparse.ArgumentTypeError(f"must be <= {hi}, got {text!r}")
        if even and val % 2:
            raise argparse.ArgumentTypeError(f"must be even, got {text!r}")
        return val
    convert.__name__ = kind.__name__
    return convert


positive = _number(float, 0.0, strict_lo=True)
nonneg = _number(float, 0.0)
real = _number(float)
ring_grid = _number(int, 16, even=True)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key=value defaults file")
    common.add_argument("--out-dir", metavar="DIR", help="output directory")
    common.add_argument("--output", metavar="NAME", help="output file name")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(
        prog="moebius",
        description="Spinning particle on a Moebius strip: geometry, dynamics, spectra.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("geometry", parents=[common], help="strip mesh with normals")
    p.add_argument("--radius", type=positive, default=1.0)
    p.add_argument("--half-width", type=positive, default=1.0 / 3.0)
    p.add_argument("--nu", type=_number(int, 3), default=100)
    p.add_argument("--nv", type=_number(int, 2), default=10)

    p = sub.add_parser("classical", parents=[common], help="meridian trajectory")
    p.add_argument("--mass", type=positive, default=1.0)
    p.add_argument("--rho", type=positive, default=1.0)
    p.add_argument("--spin", type=nonneg, default=0.0)
    p.add_argument("--orbit-radius", type=positive, default=1.0)
    p.add_argument("--p-theta", type=real, default=1.0)
    p.add_argument("--theta0", type=real, default=0.0)
    p.add_argument("--v-amplitude", type=real, default=0.0,
                   help="potential V(theta) = a cos(theta)")
    p.add_argument("--dtau", type=positive, default=1e-3)
    p.add_argument("--steps", type=_number(int, 1), default=10_000)

    p = sub.add_parser("spectrum-free", parents=[common], help="free ring levels")
    p.add_argument("--max-n", type=_number(int, 0), default=5)
    p.add_argument("--mass-eff", type=positive, default=1.0)
    p.add_argument("--hbar", type=positive, default=1.0)
    p.add_argument("--grid", type=ring_grid, default=None,
                   help="also solve numerically on this many points")
    p.add_argument("--eigenvectors", action="store_true")

    p = sub.add_parser("spectrum-flux", parents=[common], help="flux sweep")
    p.add_argument("--flux", type=real, default=None, help="single flux value A")
    p.add_argument("--flux-min", type=real, default=0.0)
    p.add_argument("--flux-max", type=real, default=1.0)
    p.add_argument("--flux-steps", type=_number(int, 1), default=11)
    p.add_argument("--grid", type=ring_grid, default=2048)
    p.add_argument("--levels", type=_number(int, 1), default=10)
    p.add_argument("--mass-eff", type=positive, default=1.0)
    p.add_argument("--hbar", type=positive, default=1.0)
    p.add_argument("--eigenvectors", action="store_true")

    p = sub.add_parser("spectrum-coulomb", parents=[common], help="Coulomb radial levels")
    p.add_argument("--k", type=_number(int), default=0)
    p.add_argument("--grid", type=_number(int, 200), default=4000)
    p.add_argument("--r-max", type=positive, default=200.0)
    p.add_argument("--levels", type=_number(int, 1), default=3)
    p.add_argument("--mass-eff", type=positive, default=1.0)
    p.add_argument("--hbar", type=positive, default=1.0)
    p.add_argument("--e2", type=positive, default=1.0)

    sub.add_parser("validate", parents=[common], help="run every acceptance criterion")
    return parser


def _config_tokens(parser, command, path):
    sub = parser._subparsers._group_actions[0].choices[command]
    flags = {opt: act for act in sub._actions for opt in act.option_strings}
    tokens = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        parser.error(f"argument --config: cannot read {path}: {exc.strerror}")
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"argument --config: line {num} is not key=value: {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        action = flags.get(flag)
        if action is None or flag == "--config":
            parser.error(f"unrecognized arguments: {flag} (from --config line {num})")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
        else:
            tokens += [flag, value]
    return tokens


def _find_config(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv=None):
    """Validated :class:`RunConfig`; exits with status 2 on bad input."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv and argv[0] in COMMANDS:
        cfg = _find_config(argv[1:])
        if cfg is not None:
            argv = [argv[0]] + _config_tokens(parser, argv[0], cfg) + argv[1:]
    ns = parser.parse_args(argv)

    command = ns.command
    fmt = ns.format or DEFAULT_FORMAT[command]
    out_dir = Path(ns.out_dir or os.environ.get("MOEBIUS_OUT_DIR") or ".")
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "config", "out_dir", "output", "format")}

    if command == "geometry" and not params["half_width"] < params["radius"]:
        parser.error(f"argument --half-width: must be < --radius ({params['radius']})")
    if command == "spectrum-flux":
        if params["levels"] > params["grid"] // 2:
            parser.error(f"argument --levels: must be <= grid/2 = {params['grid'] // 2}")
        if params["flux_max"] < params["flux_min"]:
            parser.error("argument --flux-max: must be >= --flux-min")
    if command == "spectrum-free" and params["grid"] is not None:
        if 2 * params["max_n"] + 1 > params["grid"] // 2:
            parser.error(f"argument --max-n: 2*max_n+1 levels exceed grid/2 = {params['grid'] // 2}")
    if command == "spectrum-free" and params["eigenvectors"] and params["grid"] is None:
        parser.error("argument --eigenvectors: requires --grid")
    if command == "spectrum-coulomb" and params["levels"] > params["grid"]:
        parser.error("argument --levels: must be <= --grid")
    return RunConfig(command=command, params=params, format=fmt, out_dir=out_dir,
                     output=ns.output)


def _emit(config, as_csv, as_json):
    path = config.output_path
    write_text(path, as_csv() if config.format == "csv" else as_json())
    print(f"wrote {path}")
    return path


def _sibling(path, suffix):
    return path.with_name(f"{path.stem}{suffix}")


def _run_geometry(cfg):
    shape = geometry.MoebiusShape(cfg["radius"], cfg["half_width"])
    mesh = geometry.emit_mesh(shape, cfg["nu"], cfg["nv"])
    _emit(cfg, mesh.to_csv, mesh.to_json)


def _run_classical(cfg):
    body = classical.SpinningBody(mass_m0=cfg["mass"], size_rho=cfg["rho"],
                                  spin_s=cfg["spin"], orbit_radius=cfg["orbit_radius"])
    a = cfg["v_amplitude"]
    V = dV = None
    if a != 0:
        V = lambda th: a * math.cos(th)  # noqa: E731
        dV = lambda th: -a * math.sin(th)  # noqa: E731
    init = classical.meridian_state(body, cfg["theta0"], cfg["p_theta"], V=V)
    traj = classical.evolve(init, body, V=V, dV=dV, dtau=cfg["dtau"], steps=cfg["steps"])
    path = _emit(cfg, traj.to_csv, traj.to_json)
    log = traj.residuals_json(_sibling(path, "_residuals.json"))
    print(f"wrote {log}")


def _run_spectrum_free(cfg):
    analytic = quantum.free_spectrum_analytic(cfg["mass_eff"], cfg["hbar"], cfg["max_n"])
    numerical = None
    if cfg["grid"] is not None:
        H = quantum.RingHamiltonian(m_eff=cfg["mass_eff"], hbar=cfg["hbar"], grid_n=cfg["grid"])
        numerical = quantum.ring_eigensolve(H, len(analytic), eigenvectors=cfg["eigenvectors"])

    def as_json():
        out = analytic.as_dict()
        if numerical is not None:
            out["numerical"] = numerical.as_dict()
        return json_text(out)

    def as_csv():
        if numerical is None:
            return analytic.to_csv()
        rows = [[i, int(n), e, w] for i, (n, e, w) in enumerate(
            zip(analytic.quantum_numbers, analytic.eigenvalues, numerical.eigenvalues))]
        return csv_text(("level", "n", "energy", "numerical"), rows)

    path = _emit(cfg, as_csv, as_json)
    if numerical is not None and cfg["eigenvectors"]:
        print(f"wrote {numerical.eigenvectors_csv(_sibling(path, '_eigenvectors.csv'))}")


def _run_spectrum_flux(cfg):
    if cfg["flux"] is not None:
        fluxes = [cfg["flux"]]
    else:
        fluxes = np.linspace(cfg["flux_min"], cfg["flux_max"], cfg["flux_steps"]).tolist()
    fluxes = sorted(fluxes)
    spectra = []
    for a in fluxes:
        H = quantum.RingHamiltonian(m_eff=cfg["mass_eff"], hbar=cfg["hbar"], flux_A=a,
                                    grid_n=cfg["grid"])
        spectra.append(quantum.ring_eigensolve(H, cfg["levels"],
                                               eigenvectors=cfg["eigenvectors"]))
        print(f"A = {a:.6g}: done", file=sys.stderr)
    sweep = quantum.FluxSweep(fluxes=np.array(fluxes), spectra=spectra)

    def as_json():
        points = []
        for a, spec in zip(fluxes, spectra):
            closed = quantum.flux_spectrum_analytic(cfg["mass_eff"], cfg["hbar"], a,
                                                    max_n=cfg["levels"] + 2 + 4 * math.ceil(abs(a)))
            entry = spec.as_dict()
            entry["minimal_coupling"] = closed.minimal_coupling.eigenvalues[:cfg["levels"]].tolist()
            entry["quarter_formula"] = closed.quarter.eigenvalues[:cfg["levels"]].tolist()
            points.append(entry)
        return json_text({"params": {"grid_n": cfg["grid"], "levels": cfg["levels"],
                                     "m_eff": cfg["mass_eff"], "hbar": cfg["hbar"]},
                          "sweep": points})

    path = _emit(cfg, sweep.to_csv, as_json)
    if cfg["eigenvectors"]:
        for i, spec in enumerate(spectra):
            print(f"wrote {spec.eigenvectors_csv(_sibling(path, f'_eigenvectors_{i}.csv'))}")


def _run_spectrum_coulomb(cfg):
    rows = quantum.coulomb_comparison(cfg["k"], cfg["mass_eff"], cfg["hbar"], cfg["e2"],
                                      cfg["r_max"], cfg["grid"], cfg["levels"])
    params = {k: cfg[k] for k in ("k", "grid", "r_max", "levels", "mass_eff", "hbar", "e2")}

    def as_json():
        return json_text({"params": params, "eigenvalues": [r["solver"] for r in rows],
                          "convergence_estimate": None, "grid_n": cfg["grid"],
                          "comparison": rows})

    _emit(cfg, lambda: quantum.coulomb_table_csv(rows), as_json)


def _run_validate(cfg):
    results = acceptance.run_all(echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")

    def as_json():
        return json_text({"passed": passed == len(results),
                          "criteria": [r.as_dict() for r in results]})

    def as_csv():
        return csv_text(("number", "name", "passed", "detail"),
                        [[r.number, r.name, r.passed, r.detail.replace(",", ";")]
                         for r in results])

    _emit(cfg, as_csv, as_json)
    return 0 if passed == len(results) else 1


HANDLERS = {"geometry": _run_geometry, "classical": _run_classical,
            "spectrum-free": _run_spectrum_free, "spectrum-flux": _run_spectrum_flux,
            "spectrum-coulomb": _run_spectrum_coulomb, "validate": _run_validate}


def run(config):
    try:
        code = HANDLERS[config.command](config)
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {config.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return code or 0


def main(argv=None):
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
