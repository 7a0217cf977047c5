"""Command-line runner for named scenario suites.

Usage:
    mhdvac KIND --config PATH [--out DIR] [--seed N] [--refine {1,2,4}] [--s S]

KIND is one of matrix-audit, mode-scan, simulate, verify-54 (alias: verify),
convergence.  Configs are INI-style text with sections; see configs shipped
with the test suite for the schema.  Exit codes: 0 success, 1 validation
failure, 2 numerical failure; failures also emit a machine-readable error
JSON on stdout (and error.json in the output directory when known).
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys

import numpy as np

from . import artifacts
from .forcing import PulseSpec, make_pulse_source
from .geometry import LiftDerivatives
from .manufactured import ManufacturedCase
from .matrices import (
    build_A0,
    build_boundary_fluid,
    build_boundary_maxwell,
    build_secondary_boundary,
    build_secondary_symmetrizer,
)
from .modes import ModeSpec, growth_scan
from .rings import PRESETS, make_ring
from .solver import SolverConfig, UnstableRun, run_simulation
from .state import EosModel, FluidState, GridSpec, PhysicsParams

KINDS = ("matrix-audit", "mode-scan", "simulate", "verify-54", "convergence")


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(message)
        self.field = field_name


def _get(cp, section, key, cast, default=None):
    if not cp.has_option(section, key):
        if default is None:
            raise ConfigError(f"{section}.{key}", f"missing config field {section}.{key}")
        return default
    raw = cp.get(section, key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}", f"bad value for {section}.{key}: {raw}") from exc


def load_config(path, overrides):
    if not os.path.exists(path):
        raise ConfigError("config", f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.optionxform = str  # ring knobs are case-sensitive (E_amp vs e_amp)
    cp.read(path)
    if not cp.has_section("scenario"):
        raise ConfigError("scenario", "config must contain a [scenario] section")

    kind = _get(cp, "scenario", "kind", str, default="")
    seed = overrides.seed if overrides.seed is not None else _get(cp, "scenario", "seed", int, default=0)
    refine = overrides.refine or _get(cp, "scenario", "refine", int, default=1)

    eps = _get(cp, "physics", "epsilon", float, default=0.1)
    s_tension = _get(cp, "physics", "sTension", float, default=0.1)
    if overrides.s is not None:
        s_tension = overrides.s
    if eps <= 0.0:
        raise ConfigError("physics.epsilon", "epsilon must be positive")
    if eps > 0.5:
        raise ConfigError("physics.epsilon", "epsilon must be at most 0.5")
    if s_tension < 0.0:
        raise ConfigError("physics.sTension", "surface tension must be nonnegative")
    gamma = _get(cp, "eos", "gamma", float, default=5.0 / 3.0)
    entropy_scale = _get(cp, "eos", "entropyScale", float, default=1.0)

    base_n = _get(cp, "grid", "nx_cells", int, default=12)
    grid = GridSpec(
        nx1=base_n * refine,
        nx2=_get(cp, "grid", "nx2_cells", int, default=base_n) * refine,
        nx3=_get(cp, "grid", "nx3_cells", int, default=base_n) * refine,
        L1=_get(cp, "grid", "L1_length", float, default=4.0),
        L2=_get(cp, "grid", "L2_length", float, default=2 * np.pi),
        L3=_get(cp, "grid", "L3_length", float, default=2 * np.pi),
    )

    ring_name = _get(cp, "ring", "preset", str, default="trivial")
    if ring_name not in PRESETS:
        raise ConfigError("ring.preset", f"unknown ring preset {ring_name!r}")
    ring_kw = {}
    if cp.has_section("ring"):
        for key, raw in cp.items("ring"):
            if key not in ("preset",):
                ring_kw[key] = float(raw)

    resolved = {
        "kind": kind,
        "seed": seed,
        "refine": refine,
        "physics": {"epsilon": eps, "sTension": s_tension},
        "eos": {"gamma": gamma, "entropyScale": entropy_scale},
        "grid": {
            "nx1": grid.nx1,
            "nx2": grid.nx2,
            "nx3": grid.nx3,
            "L1": grid.L1,
            "L2": grid.L2,
            "L3": grid.L3,
        },
        "ring": {"preset": ring_name, **ring_kw},
        "run": {
            "tEnd_time": _get(cp, "run", "tEnd_time", float, default=0.3),
            "cfl": _get(cp, "run", "cfl", float, default=0.4),
            "snapEvery_steps": _get(cp, "run", "snapEvery_steps", int, default=5),
            "pulseAmp": _get(cp, "run", "pulseAmp", float, default=1.0),
            "pulseTime": _get(cp, "run", "pulseTime_time", float, default=0.25),
        },
        "scan": {
            "kMin": _get(cp, "scan", "kMin", float, default=1.0),
            "kMax": _get(cp, "scan", "kMax", float, default=10.0),
            "kCount": _get(cp, "scan", "kCount", int, default=10),
            "n1_cells": _get(cp, "scan", "n1_cells", int, default=40),
            "L1_length": _get(cp, "scan", "L1_length", float, default=2.0),
        },
        "audit": {"samples": _get(cp, "audit", "samples", int, default=1000)},
    }
    return resolved


def _build(resolved):
    phys = PhysicsParams(
        epsilon=resolved["physics"]["epsilon"],
        s_tension=resolved["physics"]["sTension"],
    )
    eos = EosModel(
        gamma=resolved["eos"]["gamma"],
        entropy_scale=resolved["eos"]["entropyScale"],
    )
    g = resolved["grid"]
    grid = GridSpec(nx1=g["nx1"], nx2=g["nx2"], nx3=g["nx3"], L1=g["L1"], L2=g["L2"], L3=g["L3"])
    kw = {k: v for k, v in resolved["ring"].items() if k != "preset"}
    ring = make_ring(resolved["ring"]["preset"], grid, eos, phys, **kw)
    return phys, eos, grid, ring


def run_matrix_audit(resolved, outdir):
    rng = np.random.default_rng(resolved["seed"])
    n = resolved["audit"]["samples"]
    eos = EosModel(
        gamma=resolved["eos"]["gamma"], entropy_scale=resolved["eos"]["entropyScale"]
    )
    H = rng.normal(size=(3, n))
    q = 0.5 * np.sum(H * H, axis=0) + rng.uniform(0.2, 2.0, size=n)
    U = FluidState(q=q, v=rng.normal(size=(3, n)), H=H, S=0.3 * rng.normal(size=n))
    A0 = build_A0(U, eos)
    checks = {"A0_symmetric": _sym(A0), "A0_spd": bool(np.all(np.linalg.eigvalsh(A0)[..., 0] > 0.0))}
    from .matrices import build_Ai, build_Bj

    for i in (1, 2, 3):
        checks[f"A{i}_symmetric"] = _sym(build_Ai(U, eos, i))
        checks[f"B{i}_symmetric"] = _sym(build_Bj(i))
    lift = LiftDerivatives(
        dt_Phi=0.2 * rng.normal(size=n),
        d1_Phi=1.0 + 0.2 * rng.uniform(-1, 1, size=n),
        d2_Phi=0.2 * rng.normal(size=n),
        d3_Phi=0.2 * rng.normal(size=n),
    )
    checks["Atilde1_symmetric"] = _sym(build_boundary_fluid(U, lift, eos))
    nu = rng.normal(size=(3, n))
    nu = 0.8 * nu / np.linalg.norm(nu, axis=0)
    for j in (0, 1, 2, 3):
        checks[f"Bsec{j}_symmetric"] = _sym(build_secondary_symmetrizer(nu, j))
    checks["Bfrak1_symmetric"] = _sym(build_secondary_boundary(rng.normal(size=(3, n)), lift, 0.1))
    for r in (0.9, 0.99, 1.01):
        nu_r = r * nu / np.linalg.norm(nu, axis=0)
        spd = bool(np.all(np.linalg.eigvalsh(build_secondary_symmetrizer(nu_r, 0))[..., 0] > 0.0))
        checks[f"Bsec0_spd_at_{r}"] = spd == (r < 1.0)

    spectra = []
    for s in range(3):
        d2, d3, dt = rng.normal(size=3) * 0.3
        B, eigs = build_boundary_maxwell(dt, d2, d3, resolved["physics"]["epsilon"])
        spectra.append(("B_phi", s, np.sort(eigs)))
        spectra.append(("B_phi_numeric", s, np.linalg.eigvalsh(B)))
    Utr = FluidState(
        q=np.array(2.0), v=np.zeros(3), H=np.array([0.0, 1.0, 0.0]), S=np.array(0.0)
    )
    flat = LiftDerivatives(
        dt_Phi=np.array(0.0), d1_Phi=np.array(1.0), d2_Phi=np.array(0.0), d3_Phi=np.array(0.0)
    )
    spectra.append(("Atilde1_interface", 0, np.linalg.eigvalsh(build_boundary_fluid(Utr, flat, eos))))
    spectra.append(
        ("Bfrak1_interface", 0, np.linalg.eigvalsh(build_secondary_boundary(np.array([0.0, 0.3, 0.1]), flat, 0.1)))
    )

    ok = all(checks.values())
    artifacts.write_json(
        os.path.join(outdir, "run.json"),
        {"config": resolved, "summary": {"checks": checks, "allPassed": ok, "samples": n}},
    )
    artifacts.write_spectra_csv(os.path.join(outdir, "spectra.csv"), spectra)
    return 0 if ok else 2


def _sym(A):
    return bool(np.all(A == np.swapaxes(A, -1, -2)))


def run_mode_scan(resolved, outdir):
    phys = PhysicsParams(
        epsilon=resolved["physics"]["epsilon"], s_tension=resolved["physics"]["sTension"]
    )
    preset = resolved["ring"]["preset"]
    kw = {k: v for k, v in resolved["ring"].items() if k != "preset"}
    if preset == "bigE":
        base = ModeSpec(
            k2=1.0,
            k3=0.0,
            H=(0.0, kw.get("H_amp", 0.5), 0.0),
            E=(kw.get("E_amp", 1.2), 0.0, 0.0),
            epsilon=phys.epsilon,
            s_tension=phys.s_tension,
        )
    elif preset == "trivial":
        base = ModeSpec(k2=1.0, k3=0.0, epsilon=phys.epsilon, s_tension=phys.s_tension)
    elif preset == "tangentialH":
        base = ModeSpec(
            k2=1.0,
            k3=0.0,
            H=(0.0, kw.get("H_amp", 1.0), 0.0),
            h=(0.0, 0.0, kw.get("h_amp", 1.0)),
            epsilon=phys.epsilon,
            s_tension=phys.s_tension,
        )
    else:
        raise ConfigError("ring.preset", f"mode-scan supports constant presets, not {preset!r}")
    scan = resolved["scan"]
    ks = np.linspace(scan["kMin"], scan["kMax"], scan["kCount"])
    rates = growth_scan(ks, base, n1=scan["n1_cells"], L1=scan["L1_length"])
    artifacts.write_growth_csv(os.path.join(outdir, "growth.csv"), ks, phys.s_tension, rates)
    artifacts.write_json(
        os.path.join(outdir, "run.json"),
        {
            "config": resolved,
            "summary": {"maxGrowth": float(np.max(rates)), "kAtMax": float(ks[int(np.argmax(rates))])},
        },
    )
    return 0


def run_simulate(resolved, outdir):
    phys, eos, grid, ring = _build(resolved)
    run = resolved["run"]
    cfg = SolverConfig(
        grid=grid,
        t_end=run["tEnd_time"],
        cfl=run["cfl"],
        snap_every=run["snapEvery_steps"],
    )
    src = make_pulse_source(grid, PulseSpec(amp=run["pulseAmp"], t_pulse=run["pulseTime"]))
    art = run_simulation(cfg, ring, src)
    art.config = {**art.config, "scenario": resolved}
    artifacts.write_run_artifact(outdir, art)
    return 0


def run_convergence(resolved, outdir):
    phys, eos, grid, _ = _build(resolved)
    run = resolved["run"]
    rows = []
    errs = []
    for level, factor in enumerate((1, 2, 4)):
        g = GridSpec(
            nx1=grid.nx1 * factor,
            nx2=grid.nx2 * factor,
            nx3=grid.nx3 * factor,
            L1=grid.L1,
            L2=grid.L2,
            L3=grid.L3,
        )
        ring = make_ring(resolved["ring"]["preset"], g, eos, phys)
        case = ManufacturedCase(ring, seed=resolved["seed"], tau=0.3)
        cfg = SolverConfig(grid=g, t_end=run["tEnd_time"], snap_every=10**9)
        art = run_simulation(cfg, ring, case.sources())
        eu, ev, ep = case.errors(art.final, cfg.t_end)
        errs.append((eu, ev, ep))
        rows.append({"level": level, "n": g.nx1, "errU": eu, "errV": ev, "errPhi": ep})
    orders = {}
    for name, idx in (("orderU", 0), ("orderV", 1), ("orderPhi", 2)):
        orders[name] = float(np.log2(errs[-2][idx] / errs[-1][idx]))
    with open(os.path.join(outdir, "convergence.csv"), "w") as fh:
        fh.write("level,n,errU,errV,errPhi\n")
        for r in rows:
            fh.write(
                f"{r['level']},{r['n']},{r['errU']!r},{r['errV']!r},{r['errPhi']!r}\n"
            )
    artifacts.write_json(
        os.path.join(outdir, "run.json"), {"config": resolved, "summary": orders}
    )
    return 0


def run_verify54(resolved, outdir):
    phys, eos, grid, ring = _build(resolved)
    if phys.s_tension <= 0.0:
        raise ConfigError("physics.sTension", "verify-54 requires positive surface tension")
    run = resolved["run"]
    cfg = SolverConfig(
        grid=grid, t_end=run["tEnd_time"], cfl=run["cfl"], snap_every=run["snapEvery_steps"]
    )
    src = make_pulse_source(grid, PulseSpec(amp=run["pulseAmp"], t_pulse=run["pulseTime"]))
    art = run_simulation(cfg, ring, src)
    art.config = {**art.config, "scenario": resolved}
    artifacts.write_run_artifact(outdir, art)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="mhdvac", description=__doc__)
    parser.add_argument("kind", choices=KINDS + ("verify",))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--refine", type=int, choices=(1, 2, 4), default=None)
    parser.add_argument("--s", type=float, default=None, help="surface tension override")
    args = parser.parse_args(argv)
    kind = "verify-54" if args.kind == "verify" else args.kind

    outdir = args.out or "out"
    try:
        resolved = load_config(args.config, args)
        if resolved["kind"] and resolved["kind"] != kind:
            raise ConfigError(
                "scenario.kind",
                f"config kind {resolved['kind']!r} does not match requested {kind!r}",
            )
        resolved["kind"] = kind
        os.makedirs(outdir, exist_ok=True)
        runner = {
            "matrix-audit": run_matrix_audit,
            "mode-scan": run_mode_scan,
            "simulate": run_simulate,
            "verify-54": run_verify54,
            "convergence": run_convergence,
        }[kind]
        return runner(resolved, outdir)
    except ConfigError as exc:
        _emit_error(outdir, 1, getattr(exc, "field", "config"), str(exc))
        return 1
    except (ValueError,) as exc:
        _emit_error(outdir, 1, "validation", str(exc))
        return 1
    except UnstableRun as exc:
        _emit_error(outdir, 2, "numerical", str(exc), getattr(exc, "diagnostics", {}))
        return 2


def _emit_error(outdir, code, field_name, message, extra=None):
    payload = {"error": {"code": code, "field": field_name, "message": message}}
    if extra:
        payload["error"]["diagnostics"] = extra
    print(json.dumps(payload, sort_keys=True))
    try:
        if os.path.isdir(outdir):
            artifacts.write_json(os.path.join(outdir, "error.json"), payload)
    except OSError:
        pass


if __name__ == "__main__":
    sys.exit(main())
