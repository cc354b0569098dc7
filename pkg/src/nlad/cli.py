"""Command-line front end: JSON config in, CSV/JSON artifacts out.

Subcommands cover simulation to steady state, dispersion tables, minimum-energy
classification, hysteresis sweeps, Groebner finiteness verdicts, the N=2
closed-form steady-state solver, and regime-map grids.  All randomness is
seeded through the config (or the --seed override), so outputs are
byte-identical across reruns; every artifact embeds the config digest and tool
version.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .chains import (DEFAULT_CHAIN_N2, DEFAULT_CHAIN_N3, build_chain,
                     solve_n2_detailed, steady_matrix)
from .energy import energy_report
from .groebner import ResourceCapExceeded, buchberger
from .kernels import KernelError, KernelSpec
from .minimizers import classify_regime, regime_map_csv
from .model import (Grid, ModelParams, ParameterError, State,
                    homogeneous_state, perturbed_state, state_to_csv,
                    template_state)
from .poly import Polynomial, determinant
from .solver import SolverConfig, SolverError, run_to_steady
from .stability import dispersion
from .sweep import SweepPlan, branch_to_csv, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_RESOURCE = 3


class ConfigError(ValueError):
    """Config file is malformed or violates the schema."""


# allowed keys per section; None marks scalar leaves
_SCHEMA = {
    "model": {"N", "D", "gamma", "p", "L", "kernel"},
    "grid": {"M"},
    "solver": {"dt", "cfl", "t_max", "steady_tol", "scheme"},
    "ic": {"kind", "amplitude", "seed", "template", "spike_width"},
    "sweep": {"param", "start", "stop", "step"},
    "symbolic": {"var_order", "chain", "polys"},
    "dispersion": {"q_max"},
    "regime_map": {"gamma11", "gamma12"},
    "output": {"directory", "record_every"},
}
_KERNEL_KEYS = {"kind", "alpha"}


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for section, body in cfg.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(body, dict):
            raise ConfigError(f"section {section!r} must be a JSON object")
        for key in body:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    kernel = cfg.get("model", {}).get("kernel")
    if kernel is not None:
        for key in kernel:
            if key not in _KERNEL_KEYS:
                raise ConfigError(f"unknown key model.kernel.{key}")
    return cfg


def config_digest(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _stamp(cfg: dict) -> str:
    return f"config={config_digest(cfg)} version={__version__}"


def build_params(cfg: dict) -> ModelParams:
    m = cfg.get("model")
    if m is None:
        raise ConfigError("config needs a 'model' section")
    kernel = m.get("kernel", {"kind": "delta"})
    try:
        spec = KernelSpec(kernel.get("kind", "tophat"), kernel.get("alpha"))
        return ModelParams(
            N=int(m.get("N", len(m["D"]))),
            D=np.asarray(m["D"], dtype=float),
            gamma=np.asarray(m["gamma"], dtype=float),
            p=np.asarray(m["p"], dtype=float),
            L=float(m.get("L", 1.0)),
            kernel=spec,
        )
    except KeyError as err:
        raise ConfigError(f"model section missing {err}") from err
    except (ParameterError, KernelError, TypeError, ValueError) as err:
        raise ConfigError(f"invalid model section: {err}") from err


def build_grid(cfg: dict, params: ModelParams) -> Grid:
    try:
        return Grid(int(cfg.get("grid", {}).get("M", 512)), params.L)
    except (ParameterError, ValueError) as err:
        raise ConfigError(f"invalid grid section: {err}") from err


def build_solver(cfg: dict) -> SolverConfig:
    s = cfg.get("solver", {})
    record_every = int(cfg.get("output", {}).get("record_every", 200))
    try:
        return SolverConfig(
            dt_init=float(s.get("dt", 1e-3)),
            cfl=float(s.get("cfl", 0.5)),
            t_max=float(s.get("t_max", 200.0)),
            steady_tol=float(s.get("steady_tol", 1e-6)),
            scheme=s.get("scheme", "upwind-fv"),
            record_every=record_every,
        )
    except ValueError as err:
        raise ConfigError(f"invalid solver section: {err}") from err


def build_ic(cfg: dict, params: ModelParams, grid: Grid,
             seed_override: int | None) -> State:
    ic = cfg.get("ic", {})
    kind = ic.get("kind", "perturbed-homogeneous")
    seed = int(ic.get("seed", 0)) if seed_override is None else seed_override
    amplitude = float(ic.get("amplitude", 1e-2))
    try:
        if kind == "homogeneous":
            return homogeneous_state(params, grid)
        if kind == "perturbed-homogeneous":
            return perturbed_state(homogeneous_state(params, grid), params,
                                   grid, amplitude, seed)
        if kind == "template":
            base = template_state(ic["template"], params, grid,
                                  ic.get("spike_width"))
            if amplitude == 0:
                return base
            return perturbed_state(base, params, grid, amplitude, seed)
    except (KeyError, ValueError) as err:
        raise ConfigError(f"invalid ic section: {err}") from err
    raise ConfigError(f"unknown ic kind {kind!r}")


def _write(out_dir: Path, name: str, text: str, quiet: bool):
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    if not quiet:
        print(f"wrote {path}")


def _json_with_stamp(payload: dict, cfg: dict) -> str:
    payload = dict(payload)
    payload["config_digest"] = config_digest(cfg)
    payload["version"] = __version__
    return json.dumps(payload, indent=2) + "\n"


# -- subcommands -----------------------------------------------------------


def cmd_simulate(cfg: dict, out_dir: Path, seed: int | None, quiet: bool) -> int:
    params = build_params(cfg)
    grid = build_grid(cfg, params)
    solver = build_solver(cfg)
    ic = build_ic(cfg, params, grid, seed)
    try:
        traj = run_to_steady(ic, params, grid, solver)
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    stamp = _stamp(cfg)
    _write(out_dir, "trajectory.csv", traj.to_csv(stamp), quiet)
    _write(out_dir, "final_state.csv",
           state_to_csv(traj.final_state, grid, stamp), quiet)
    if params.symmetric:
        report = energy_report(traj.final_state, params, grid)
        _write(out_dir, "energy.json",
               _json_with_stamp(json.loads(report.to_json()), cfg), quiet)
    if not traj.converged:
        if not quiet:
            print("no steady state before t_max")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_dispersion(cfg: dict, out_dir: Path, seed: int | None, quiet: bool) -> int:
    params = build_params(cfg)
    q_max = int(cfg.get("dispersion", {}).get("q_max", 16))
    table = dispersion(params, q_max)
    _write(out_dir, "dispersion.csv",
           f"# {_stamp(cfg)}\n" + table.to_csv(), quiet)
    return EXIT_OK


def cmd_classify(cfg: dict, out_dir: Path, seed: int | None, quiet: bool) -> int:
    params = build_params(cfg)
    if params.N != 2:
        raise ConfigError("classification is defined for two species")
    g11, g12 = float(params.gamma[0, 0]), float(params.gamma[0, 1])
    classes, case = classify_regime(g11, g12)
    _write(out_dir, "classification.json", _json_with_stamp({
        "gamma11": g11,
        "gamma12": g12,
        "classes": sorted(classes),
        "case": case,
    }, cfg), quiet)
    return EXIT_OK


def cmd_sweep(cfg: dict, out_dir: Path, seed: int | None, quiet: bool) -> int:
    params = build_params(cfg)
    grid = build_grid(cfg, params)
    s = cfg.get("sweep")
    if s is None:
        raise ConfigError("config needs a 'sweep' section")
    if s.get("param", "gamma12") != "gamma12":
        raise ConfigError("only gamma12 sweeps are supported")
    ic = build_ic(cfg, params, grid, seed)
    plan = SweepPlan(
        params=params,
        start=float(s["start"]),
        stop=float(s["stop"]),
        step=float(s["step"]),
        initial_state=ic,
        seed=int(cfg.get("ic", {}).get("seed", 0)) if seed is None else seed,
        solver=build_solver(cfg),
    )
    points = run_sweep(plan)
    _write(out_dir, "branch.csv", branch_to_csv(points, _stamp(cfg)), quiet)
    return EXIT_OK


def _symbolic_inputs(cfg: dict) -> tuple[list[Polynomial], tuple | None]:
    sym = cfg.get("symbolic", {})
    ranking = None
    if "var_order" in sym:
        ranking = tuple(int(v) - 1 for v in sym["var_order"])
    if "polys" in sym:
        texts = sym["polys"]
        # infer arity from the highest variable index used
        nvars = max((int(m) for t in texts
                     for m in re.findall(r"u(\d+)", t)), default=1)
        return [Polynomial.from_text(t, nvars) for t in texts], ranking
    m = cfg.get("model")
    if m is None:
        raise ConfigError("symbolic run needs 'symbolic.polys' or a 'model' section")
    D = [Fraction(str(d)) for d in m["D"]]
    gamma = [[Fraction(str(g)) for g in row] for row in m["gamma"]]
    n = len(D)
    chain = sym.get("chain")
    if chain is None:
        chain = DEFAULT_CHAIN_N2 if n == 2 else DEFAULT_CHAIN_N3
    else:
        chain = tuple((int(src), tuple(int(r) for r in rows)) for src, rows in chain)
    mats = build_chain(steady_matrix(D, gamma, n), chain)
    return [determinant(mm) for mm in mats], ranking


def cmd_groebner(cfg: dict, out_dir: Path, seed: int | None, quiet: bool) -> int:
    polys, ranking = _symbolic_inputs(cfg)
    try:
        result = buchberger([p for p in polys if p], ranking=ranking)
    except ResourceCapExceeded as err:
        print(f"resource cap: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    payload = json.loads(result.to_json())
    payload["inputs"] = [p.to_text() for p in polys]
    _write(out_dir, "groebner.json", _json_with_stamp(payload, cfg), quiet)
    return EXIT_OK


def cmd_solve_n2(cfg: dict, out_dir: Path, seed: int | None, quiet: bool) -> int:
    m = cfg.get("model")
    if m is None:
        raise ConfigError("config needs a 'model' section")
    D = [Fraction(str(d)) for d in m["D"]]
    gamma = [[Fraction(str(g)) for g in row] for row in m["gamma"]]
    if len(D) != 2:
        raise ConfigError("solve-n2 needs exactly two species")
    sols = solve_n2_detailed(D, gamma)
    _write(out_dir, "roots.json", _json_with_stamp({
        "roots": [[s.u1, s.u2] for s in sols],
        "residuals": [list(s.residuals) for s in sols],
        "degenerate": [s.degenerate for s in sols],
    }, cfg), quiet)
    return EXIT_OK


def cmd_regime_map(cfg: dict, out_dir: Path, seed: int | None, quiet: bool) -> int:
    rm = cfg.get("regime_map")
    if rm is None:
        raise ConfigError("config needs a 'regime_map' section")
    try:
        g11 = [float(v) for v in rm["gamma11"]]
        g12 = [float(v) for v in rm["gamma12"]]
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"invalid regime_map section: {err}") from err
    _write(out_dir, "regime_map.csv",
           f"# {_stamp(cfg)}\n" + regime_map_csv(g12, g11), quiet)
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "dispersion": cmd_dispersion,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
    "groebner": cmd_groebner,
    "solve-n2": cmd_solve_n2,
    "regime-map": cmd_regime_map,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nlad",
        description="Nonlocal advection-diffusion toolkit: simulation, "
                    "stability, classification, and symbolic finiteness checks.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config's random seed")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, Path(args.out), args.seed, args.quiet)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapExceeded as err:
        print(f"resource cap: {err}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
