"""Command-line drivers and CSV emission.

Exit codes: 0 success (and, for flow runs, converged), 2 config error,
3 numerical failure (unstable stepping exhausted, or a run that did
not converge), 4 invalid bisection bracket.

Every CSV starts with a reproducibility stamp comment: tool version,
kernel backend, rng seed and the full resolved configuration.  Numbers
are written with shortest round-trip formatting (repr), so rerunning a
command with the same configuration and backend reproduces files
bit for bit.
"""

import argparse
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .config import (
    COMMANDS,
    RunConfig,
    merge,
    one_line,
    parse_file,
    serialize,
)
from .energy import (
    constant_energy,
    energy_density,
)
from .equilibria import constant_equilibria, regime_report
from .errors import BracketInvalid, ConfigError, NematorusError, StepUnstable
from .fields import Grid, seed_field, write_field_csv
from .geometry import (
    TorusGeometry,
    area_density,
    frame_vectors,
    principal_curvatures,
    spin_connection_phi,
)
from .relaxation import (
    FlowParams,
    find_critical_mu,
    flow_general,
    flow_one_constant,
    winding_table,
)

PI2 = math.pi**2


def _stamp(cfg: RunConfig) -> str:
    return (f"nematorus {__version__} | backend={BACKEND} | "
            f"rng_seed={cfg.rng_seed} | config: {one_line(cfg)}")


def _write_csv(path, stamp, header, rows):
    """Atomic CSV write: temp file in the target dir, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(f"# {stamp}\n")
            f.write(header + "\n")
            for row in rows:
                f.write(",".join(row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x) -> str:
    return repr(float(x))


def _warn_near_singular(geom):
    if geom.near_singular:
        print(f"warning: mu = {geom.mu:.6g} is near-singular; "
              "the energy scale diverges as mu -> 1", file=sys.stderr)


def cmd_constant_analysis(cfg: RunConfig, out: str) -> int:
    geom = cfg.geometry()
    _warn_near_singular(geom)
    k = cfg.constants()
    stamp = _stamp(cfg)

    rows = [(_num(e.alpha), e.kind, _num(e.energy), e.stability)
            for e in constant_equilibria(k, geom.mu)]
    _write_csv(os.path.join(out, "equilibria.csv"), stamp,
               "alpha,kind,energy,stability", rows)

    alphas = np.linspace(-math.pi / 2.0, math.pi / 2.0, 721)
    energies = constant_energy(alphas, k, geom.mu)
    scale = k.k1 * PI2  # figure convention: W / (k pi^2), k1 when anisotropic
    scan_rows = [(_num(a), _num(e / scale), _num(e)) for a, e in zip(alphas, energies)]
    _write_csv(os.path.join(out, "scan.csv"), stamp,
               "alpha,energy_scaled,energy", scan_rows)
    print(regime_report(k, geom.mu))
    return 0


def cmd_geometry_dump(cfg: RunConfig, out: str) -> int:
    geom = cfg.geometry()
    _warn_near_singular(geom)
    grid = cfg.grid()
    theta = grid.theta()
    phi = grid.phi()
    c1, c2 = principal_curvatures(geom, theta)
    omega = spin_connection_phi(geom, theta)
    w = area_density(geom, theta)
    rows = []
    for i, th in enumerate(theta):
        e_t, e_p, nu = frame_vectors(th, phi)
        for j, ph in enumerate(phi):
            rows.append((
                _num(th), _num(ph), _num(c1[i]), _num(c2[i]), _num(0.0),
                _num(omega[i]), _num(w[i]),
                *(_num(x) for x in e_t[j]), *(_num(x) for x in e_p[j]),
                *(_num(x) for x in nu[j]),
            ))
    header = ("theta,phi,c1,c2,spin_theta,spin_phi,sqrt_g,"
              "et_x,et_y,et_z,ep_x,ep_y,ep_z,nu_x,nu_y,nu_z")
    _write_csv(os.path.join(out, "geometry.csv"), _stamp(cfg), header, rows)
    return 0


def _write_report_csv(path, stamp, report):
    rows = [(str(s), _num(t), _num(e), _num(m), _num(d))
            for s, t, e, m, d in report.trace]
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"# {stamp}\n")
        f.write("step,t,energy,max_rhs,dissipation\n")
        for row in rows:
            f.write(",".join(row) + "\n")
        f.write(f"# summary: converged={int(report.converged)} steps={report.steps} "
                f"final_energy={_num(report.final_energy)} "
                f"dissipation={_num(report.dissipation_integral)} "
                f"balance_defect={_num(report.balance_defect)} "
                f"final_residual={_num(report.final_residual)} "
                f"winding={report.final_winding.h_theta},{report.final_winding.h_phi} "
                f"slow_manifold={int(report.slow_manifold)} dt={_num(report.dt)}\n")


def cmd_flow(cfg: RunConfig, out: str) -> int:
    geom = cfg.geometry()
    _warn_near_singular(geom)
    if cfg.physical_radii() is not None:
        R, r = cfg.physical_radii()
        print(f"normalized to r=1: physical (R={R:g}, r={r:g}) -> mu={geom.mu:.12g}")
    k = cfg.constants()
    grid = cfg.grid()
    params = cfg.flow_params()
    field0 = seed_field(grid, cfg.seed_winding(), cfg.base_angle, cfg.noise, cfg.rng_seed)
    stamp = _stamp(cfg)
    os.makedirs(out, exist_ok=True)

    def on_snapshot(step, t, fld, energy, max_rhs):
        path = os.path.join(out, f"snapshot_{step:09d}.csv")
        write_field_csv(path, fld, stamp, energy_density(fld, geom, k))

    if k.is_one_constant:
        final, report = flow_one_constant(field0, geom, params, on_snapshot=on_snapshot)
    else:
        final, report = flow_general(field0, geom, k, params, on_snapshot=on_snapshot)
    report.seed_spec = (f"winding={cfg.winding[0]},{cfg.winding[1]} "
                        f"base={_num(cfg.base_angle)} noise={_num(cfg.noise)} "
                        f"rng_seed={cfg.rng_seed}")
    write_field_csv(os.path.join(out, "final.csv"), final, stamp,
                    energy_density(final, geom, k))
    _write_report_csv(os.path.join(out, "report.csv"), stamp, report)
    print(f"converged={report.converged} steps={report.steps} "
          f"energy={report.final_energy:.12g} residual={report.final_residual:.3g}")
    return 0 if report.converged else 3


def cmd_sweep_mu(cfg: RunConfig, out: str) -> int:
    grid = cfg.grid()
    k = cfg.constants()
    if not k.is_one_constant:
        raise ConfigError("sweep-mu runs the one-constant flow; give a single constants.k")
    stamp = _stamp(cfg)
    probes = []

    def flush(mu_star=None):
        rows = [(str(i), _num(p.mu),
                 "nonconstant" if p.nonconstant else "constant",
                 str(int(p.converged)), str(p.steps), _num(p.deviation), _num(p.energy))
                for i, p in enumerate(probes)]
        if mu_star is not None:
            rows.append(("mu_star", _num(mu_star), "", "", "", "", ""))
        _write_csv(os.path.join(out, "sweep.csv"), stamp,
                   "probe,mu,class,converged,steps,deviation,energy", rows)

    def on_probe(p):
        probes.append(p)
        flush()
        print(f"mu={p.mu:.6f}: {'nonconstant' if p.nonconstant else 'constant'} "
              f"(deviation={p.deviation:.3g}, steps={p.steps})")

    result = find_critical_mu((cfg.mu_lo, cfg.mu_hi), grid,
                              flow_tol=cfg.tol, mu_tol=cfg.mu_tol, k=k.k1,
                              max_steps=cfg.max_steps, dt=cfg.dt, on_probe=on_probe)
    flush(mu_star=result.mu_star)
    print(f"mu_star = {result.mu_star:.6g} "
          f"(bracket [{result.bracket[0]:.6g}, {result.bracket[1]:.6g}])")
    return 0


def _table_row_args(cfg: RunConfig):
    for i, h in enumerate(cfg.table_windings):
        yield (cfg.geometry().mu, h, cfg.n_theta, cfg.n_phi, cfg.dt, cfg.tol,
               cfg.max_steps, cfg.constants().k1, cfg.table_noise, cfg.rng_seed + i)


def _table_worker(args):
    mu, h, n_theta, n_phi, dt, tol, max_steps, k, noise, seed = args
    rows = winding_table(TorusGeometry.from_ratio(mu), k, [h], Grid(n_theta, n_phi),
                         FlowParams(k=k, dt=dt, tol=tol, max_steps=max_steps,
                                    snapshot_every=0),
                         noise=noise, rng_seed=seed)
    return rows[0]


def cmd_winding_table(cfg: RunConfig, out: str) -> int:
    geom = cfg.geometry()
    _warn_near_singular(geom)
    k = cfg.constants()
    if not k.is_one_constant:
        raise ConfigError("winding-table runs the one-constant flow; give a single constants.k")
    stamp = _stamp(cfg)
    results = [None] * len(cfg.table_windings)

    def flush():
        done = [r for r in results if r is not None]
        ground = None
        for r in done:
            if r.winding.h_theta == 0 and r.winding.h_phi == 0 and not r.error:
                ground = r.energy
        if ground is None and any(not r.error for r in done):
            ground = min(r.energy for r in done if not r.error)
        rows = []
        for r in done:
            if r.error:
                rows.append((str(r.winding.h_theta), str(r.winding.h_phi),
                             "nan", "nan", "0"))
            else:
                rel = r.energy - ground if ground is not None else math.nan
                rows.append((str(r.winding.h_theta), str(r.winding.h_phi),
                             _num(r.energy), _num(rel), str(int(r.converged))))
        _write_csv(os.path.join(out, "windings.csv"), stamp,
                   "h_theta,h_phi,energy,energy_minus_ground,converged", rows)

    args = list(_table_row_args(cfg))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for i, row in enumerate(pool.map(_table_worker, args)):
                results[i] = row
                flush()
    else:
        for i, a in enumerate(args):
            results[i] = _table_worker(a)
            flush()
            r = results[i]
            status = r.error if r.error else (
                f"energy={r.energy:.12g} converged={r.converged} steps={r.steps}")
            print(f"h=({r.winding.h_theta},{r.winding.h_phi}): {status}")

    failed = [r for r in results if r.error or not r.converged]
    return 3 if failed else 0


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE")
    common.add_argument("--mu", type=float)
    common.add_argument("--R", type=float)
    common.add_argument("--r", type=float)
    common.add_argument("--k", type=float)
    common.add_argument("--k1", type=float)
    common.add_argument("--k2", type=float)
    common.add_argument("--k3", type=float)
    common.add_argument("--grid", metavar="NxM")
    common.add_argument("--winding", metavar="H,K")
    common.add_argument("--alpha0", type=float, metavar="RAD")
    common.add_argument("--noise", type=float, metavar="AMP")
    common.add_argument("--rng-seed", type=int, metavar="N")
    common.add_argument("--dt", metavar="auto|X")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-steps", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--jobs", type=int)
    parser = argparse.ArgumentParser(
        prog="nematorus",
        description="Equilibria of a surface director field on a torus.")
    parser.add_argument("--version", action="version", version=f"nematorus {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _overrides(args) -> dict:
    over = {
        "command": args.command,
        "mu": args.mu, "R": args.R, "r": args.r,
        "k": args.k, "k1": args.k1, "k2": args.k2, "k3": args.k3,
        "base_angle": args.alpha0, "noise": args.noise, "rng_seed": args.rng_seed,
        "tol": args.tol, "max_steps": args.max_steps,
        "output_dir": args.out, "jobs": args.jobs,
    }
    if args.grid is not None:
        parts = args.grid.lower().split("x")
        if len(parts) != 2:
            raise ConfigError(f"--grid expects NxM, got {args.grid!r}")
        try:
            over["n_theta"], over["n_phi"] = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError(f"--grid expects integers, got {args.grid!r}") from None
    if args.winding is not None:
        parts = args.winding.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--winding expects H,K, got {args.winding!r}")
        try:
            over["winding"] = (int(parts[0]), int(parts[1]))
        except ValueError:
            raise ConfigError(f"--winding expects integers, got {args.winding!r}") from None
    if args.dt is not None:
        if args.dt == "auto":
            over["dt"] = "auto"
        else:
            try:
                over["dt"] = float(args.dt)
            except ValueError:
                raise ConfigError(f"--dt expects 'auto' or a number, got {args.dt!r}") from None
    return over


_DISPATCH = {
    "constant-analysis": cmd_constant_analysis,
    "flow": cmd_flow,
    "sweep-mu": cmd_sweep_mu,
    "winding-table": cmd_winding_table,
    "geometry-dump": cmd_geometry_dump,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_file(args.config) if args.config else RunConfig()
        cfg = merge(cfg, _overrides(args))
        out = cfg.resolved_output_dir()
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "resolved-config.txt"), "w", newline="") as f:
            f.write(serialize(cfg))
        return _DISPATCH[cfg.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BracketInvalid as exc:
        print(f"bracket invalid: {exc} "
              f"(lo={exc.lo_class}, hi={exc.hi_class})", file=sys.stderr)
        return 4
    except StepUnstable as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except NematorusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
