"""Command-line front end: ground-state energies, single runs, gamma0 sweeps.

Config files are JSON mirroring ScenarioConfig.to_dict(). When both --preset
and --config are given, top-level keys from the file replace the preset's
(whole blocks at a time).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .eigenbasis import load_or_build
from .grids import build_grid, interaction_matrix, potential_values
from .scenarios import (PRESETS, ScenarioConfig, prepare_shared, run_scenario,
                        sweep_gamma)
from .twobody import relax_imaginary_time


def _load_config(args) -> ScenarioConfig:
    if args.preset is None and args.config is None:
        raise SystemExit("error: need --preset and/or --config")
    base = PRESETS[args.preset]().to_dict() if args.preset else None
    if args.config is not None:
        override = json.loads(Path(args.config).read_text())
        if base is None:
            base = override
        else:
            base.update(override)
    cfg = ScenarioConfig.from_dict(base)
    if getattr(args, "gamma0", None):
        vals = tuple(float(v) for v in args.gamma0.split(","))
        cfg = dataclasses.replace(cfg, gamma0=vals)
    if getattr(args, "out", None):
        Path(args.out).mkdir(parents=True, exist_ok=True)
    cfg.validate()
    return cfg


def _cmd_groundstate(args) -> int:
    cfg = _load_config(args)
    grid = build_grid(cfg.L, cfg.n)
    V = potential_values(grid, cfg.potential)
    basis = load_or_build(grid, cfg.potential, cfg.cache_dir)
    result = {"one_particle_energy": float(basis.energies[0])}
    print(f"one-particle ground energy: {basis.energies[0]:.6f}")
    if cfg.interaction is not None and cfg.interaction.W0 != 0.0:
        W = interaction_matrix(grid, cfg.interaction)
        psi = None
        for tau_im, tol in cfg.relax_stages:
            psi, e2 = relax_imaginary_time(grid, V, W, tau_im=tau_im, tol=tol,
                                           init=psi)
        result["two_particle_energy"] = float(e2)
        print(f"two-particle ground energy: {e2:.6f}")
    if args.out:
        path = Path(args.out) / "groundstate.json"
        path.write_text(json.dumps(result, sort_keys=True, indent=1) + "\n")
        print(f"wrote {path}")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    if len(cfg.gamma0) != 1:
        raise SystemExit("error: run needs exactly one gamma0 "
                         "(use --gamma0 or a single-element ladder); "
                         "use sweep for ladders")
    rec = run_scenario(cfg, cfg.gamma0[0], out_dir=args.out)
    print(f"gamma0={rec.gamma0:g}  P2={rec.P2:.6g}  P1={rec.P1:.6g}  "
          f"p0={rec.p0_final:.6g}  residual<={rec.max_abs_residual:.2e}  "
          f"t_final={rec.t_final:g}  wall={rec.wall_time:.1f}s")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    shared = prepare_shared(cfg)
    records, failures = sweep_gamma(cfg, out_dir=args.out, shared=shared)
    for rec in records:
        print(f"gamma0={rec.gamma0:<12g} P2={rec.P2:<12.6g} P1={rec.P1:<12.6g} "
              f"neg={rec.neg_content:<12.4g} extent={rec.extent:<8g} "
              f"duration={rec.duration:g}")
    for g, msg in failures:
        print(f"gamma0={g:<12g} FAILED: {msg}", file=sys.stderr)
    return 1 if failures and not records else 0


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(
        prog="capspectra",
        description="Absorption-resolved energy spectra for 1D one- and "
                    "two-particle systems with quadratic absorbers.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=sorted(PRESETS),
                        help="named default configuration")
    common.add_argument("--config", help="JSON config path (overrides preset)")
    common.add_argument("--out", help="output directory")

    pg = sub.add_parser("groundstate", parents=[common],
                        help="relaxed ground-state energies only")
    pg.set_defaults(func=_cmd_groundstate)

    pr = sub.add_parser("run", parents=[common],
                        help="single run at one absorber strength")
    pr.add_argument("--gamma0", help="comma list overriding the config ladder")
    pr.set_defaults(func=_cmd_run)

    ps = sub.add_parser("sweep", parents=[common],
                        help="independent runs over the gamma0 ladder")
    ps.add_argument("--gamma0", help="comma list overriding the config ladder")
    ps.set_defaults(func=_cmd_sweep)

    args = p.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
