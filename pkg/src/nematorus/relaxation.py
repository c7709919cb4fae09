"""Gradient-flow relaxation of the director angle.

The evolution  d(alpha)/dt = k Lap_s alpha + (k/2)(c1^2 - c2^2) sin(2 alpha)
is the L2(dA) gradient flow of the one-constant energy; it is not a
physical nematic flow, only a minimization device whose stationary
points solve the Euler-Lagrange equation.  The discrete right-hand
side produced by the kernels is the *exact* negative gradient of the
discrete energy in the dA-weighted inner product, so every accepted
forward-Euler step decreases that energy and the discrete energy
balance

    sum_steps dt * ||rhs||^2_dA  +  W(final) - W(initial)  =  O(dt)

holds with a pure time-discretization defect.

The winding linear part of the angle never enters the update: only
the periodic deviation is stepped, so the winding class is preserved
structurally (and re-measured from raw samples for the report).

Working units are r = 1, R = mu (the 2D energy is scale invariant);
constructors normalize.  Time stepping is plain forward Euler with
dt_auto = 0.2 min(r dtheta, (R - r) dphi)^2 / k; accuracy in time is
irrelevant here, only stability, which the monotone-decay guard plus
auto-halving enforces.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .energy import ElasticConstants, one_constant_offset
from .errors import BracketInvalid, StepUnstable
from .fields import AngleField, Grid, WindingNumber, seed_field
from .geometry import TorusGeometry, area_density, principal_curvatures

# Secondary-stop window: energy flat to this relative level over this
# many steps *while the residual has stopped improving* means the flow
# sits on a flat manifold and will not reach the residual tolerance.
FLAT_WINDOW = 100
FLAT_RTOL = 1e-14

# Energy increase beyond this relative level on a single step means dt
# is too large.
UNSTABLE_RTOL = 1e-9

MAX_DT_HALVINGS = 8


@dataclass(frozen=True)
class FlowParams:
    """Knobs of a relaxation run.

    dt is either the string "auto" (0.2 min(r dth, (R-r) dph)^2 / k,
    halved and restarted on instability up to 8 times) or an explicit
    positive step (no auto-halving).  tol is the stopping threshold on
    the max-node |d alpha/dt|.
    """

    k: object = 1.0  # float (one-constant) or ElasticConstants
    dt: object = "auto"
    tol: float = 1e-8
    max_steps: int = 1_000_000
    snapshot_every: int = 10_000

    def __post_init__(self):
        if self.dt != "auto" and not (isinstance(self.dt, float | int) and self.dt > 0):
            raise ValueError(f"dt must be 'auto' or a positive number, got {self.dt!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")


@dataclass
class FlowReport:
    """Trajectory diagnostics of one relaxation run."""

    converged: bool
    steps: int
    final_energy: float
    energy_history: list  # (t, energy) pairs at snapshot cadence
    dissipation_integral: float
    balance_defect: float
    final_residual: float
    final_winding: WindingNumber
    trace: list  # (step, t, energy, max_rhs, dissipation) at the same cadence
    slow_manifold: bool = False
    dt: float = 0.0
    dt_halvings: int = 0
    backend: str = _kernels.BACKEND
    seed_spec: str = ""


class _Problem:
    """Precomputed grid/geometry coefficient arrays for the kernels."""

    def __init__(self, geom: TorusGeometry, fld: AngleField):
        if geom.r != 1.0:
            geom = TorusGeometry.from_ratio(geom.mu)
        self.geom = geom
        g = fld.grid
        self.grid = g
        theta = g.theta()
        self.lin_t = 0.5 * fld.winding.h_theta * theta
        self.lin_p = 0.5 * fld.winding.h_phi * g.phi()
        self.slope_t0 = 0.5 * fld.winding.h_theta
        self.slope_p0 = 0.5 * fld.winding.h_phi
        self.w = area_density(geom, theta)
        self.w_half = area_density(geom, theta + 0.5 * g.d_theta)
        self.ginv = 1.0 / geom.tube_width(theta)
        c1, c2 = principal_curvatures(geom, theta)
        self.c2 = c2
        self.pot = c1 * c1 - c2 * c2
        self.sin_theta = np.sin(theta)

    def angle(self, u):
        return self.lin_t[:, None] + self.lin_p[None, :] + u


class _Evaluator:
    """Kernel bindings for one functional: rhs/energy evaluation plus
    the trig state the hot loop carries instead of calling sin/cos."""

    def __init__(self, evaluate, refresh, offset, angle_scale):
        self.evaluate = evaluate  # (u, cos, sin, rhs) -> (energy, max_rhs, diss_w)
        self.refresh = refresh    # u -> (cos, sin) of angle_scale * alpha
        self.offset = offset
        self.angle_scale = angle_scale


def _one_constant_evaluator(problem: _Problem, k: float) -> _Evaluator:
    p = problem
    g = p.grid

    def evaluate(u, cos2a, sin2a, rhs):
        return _kernels.one_constant_eval(
            u, cos2a, sin2a, p.slope_t0, p.slope_p0,
            p.w, p.w_half, p.ginv, p.pot, g.d_theta, g.d_phi, p.geom.r, k, rhs)

    def refresh(u):
        a2 = 2.0 * p.angle(u)
        return np.cos(a2), np.sin(a2)

    return _Evaluator(evaluate, refresh, k * one_constant_offset(p.geom.mu), 2.0)


def _general_evaluator(problem: _Problem, k: ElasticConstants) -> _Evaluator:
    p = problem
    g = p.grid

    def evaluate(u, cos_a, sin_a, rhs):
        return _kernels.general_eval(
            u, cos_a, sin_a, p.slope_t0, p.slope_p0,
            p.w, p.ginv, p.sin_theta, p.c2, g.d_theta, g.d_phi, p.geom.r,
            k.k1, k.k2, k.k3, rhs)

    def refresh(u):
        a = p.angle(u)
        return np.cos(a), np.sin(a)

    return _Evaluator(evaluate, refresh, 0.0, 1.0)


def auto_dt(geom: TorusGeometry, grid: Grid, k_scale: float) -> float:
    """0.2 min(r dtheta, (R - r) dphi)^2 / k, well inside the explicit
    diffusion stability limit on this metric."""
    h = min(geom.r * grid.d_theta, (geom.R - geom.r) * grid.d_phi)
    return 0.2 * h * h / k_scale


class _Unstable(Exception):
    pass


# Rebuild the carried trig pair from real sin/cos this often (steps);
# keeps the incremental-rotation drift at the roundoff floor.
TRIG_REFRESH = 1024


def _run(field0: AngleField, problem: _Problem, ev: _Evaluator,
         params: FlowParams, dt: float, on_snapshot=None):
    """One forward-Euler relaxation attempt at fixed dt.

    Raises _Unstable if any step raises the energy beyond roundoff.
    """
    u = field0.deviation.copy()
    rhs = np.empty_like(u)
    cos_a, sin_a = ev.refresh(u)
    cadence = params.snapshot_every
    history = []
    trace = []
    diss = 0.0
    t = 0.0
    energy_prev = None
    e_initial = None
    converged = False
    slow = False
    best_mx = math.inf
    win_best_mx = math.inf
    win_energy = None
    steps_taken = 0
    since_refresh = 0

    step = 0
    while True:
        # recorded energies must not carry incremental-trig drift: the
        # history is checked against a 1e-12 monotonicity slack
        if cadence and step % cadence == 0 and since_refresh > 0:
            cos_a, sin_a = ev.refresh(u)
            since_refresh = 0
        energy, max_rhs, diss_w = ev.evaluate(u, cos_a, sin_a, rhs)
        energy += ev.offset
        if step == 0:
            e_initial = energy
            win_energy = energy
        if step == 0 or (cadence and step % cadence == 0):
            history.append((t, energy))
            trace.append((step, t, energy, max_rhs, diss))
            if cadence and on_snapshot is not None:
                on_snapshot(step, t, AngleField(field0.winding, u.copy()), energy, max_rhs)
        if max_rhs < params.tol:
            converged = True
            break
        if energy_prev is not None and energy - energy_prev > UNSTABLE_RTOL * abs(energy_prev):
            raise _Unstable
        # flat-manifold detector: energy flat over the window while the
        # residual made no new minimum => the residual tolerance is
        # unreachable from here.
        win_best_mx = min(win_best_mx, max_rhs)
        if step > 0 and step % FLAT_WINDOW == 0:
            if (abs(energy - win_energy) < FLAT_RTOL * abs(energy)
                    and win_best_mx >= best_mx):
                converged = True
                slow = True
                break
            best_mx = min(best_mx, win_best_mx)
            win_best_mx = math.inf
            win_energy = energy
        if step >= params.max_steps:
            break
        _kernels.apply_step(u, cos_a, sin_a, rhs, dt, ev.angle_scale)
        since_refresh += 1
        if since_refresh >= TRIG_REFRESH:
            cos_a, sin_a = ev.refresh(u)
            since_refresh = 0
        diss += dt * diss_w
        t += dt
        energy_prev = energy
        steps_taken = step + 1
        step += 1

    final_energy = energy
    final_residual = max_rhs
    if not history or history[-1][0] != t:
        history.append((t, final_energy))
        trace.append((steps_taken, t, final_energy, final_residual, diss))
    final_field = AngleField(field0.winding, u)
    report = FlowReport(
        converged=converged,
        steps=steps_taken,
        final_energy=final_energy,
        energy_history=history,
        dissipation_integral=diss,
        balance_defect=abs(diss + final_energy - e_initial),
        final_residual=final_residual,
        final_winding=final_field.measure_winding(),
        trace=trace,
        slow_manifold=slow,
        dt=dt,
    )
    return final_field, report


def _flow(field0: AngleField, geom: TorusGeometry, params: FlowParams,
          make_evaluator, k_scale: float, on_snapshot=None):
    problem = _Problem(geom, field0)
    ev = make_evaluator(problem)
    if params.dt == "auto":
        dt = auto_dt(problem.geom, problem.grid, k_scale)
        for halving in range(MAX_DT_HALVINGS + 1):
            try:
                fld, report = _run(field0, problem, ev, params, dt,
                                   on_snapshot=on_snapshot)
                report.dt_halvings = halving
                return fld, report
            except _Unstable:
                dt *= 0.5
        raise StepUnstable(
            f"energy still increased after {MAX_DT_HALVINGS} dt halvings (dt={dt})")
    try:
        return _run(field0, problem, ev, params, float(params.dt),
                    on_snapshot=on_snapshot)
    except _Unstable:
        raise StepUnstable(f"energy increased at explicit dt={params.dt}") from None


def flow_one_constant(field0: AngleField, geom: TorusGeometry, params: FlowParams,
                      on_snapshot=None):
    """Relax the one-constant energy; returns (final field, report).

    The winding of field0 is kept fixed by construction; the report
    re-measures it from raw samples as a cross-check.
    """
    if isinstance(params.k, ElasticConstants):
        if not params.k.is_one_constant:
            raise ValueError("flow_one_constant needs a single modulus; use flow_general")
        k = float(params.k.k1)
    else:
        k = float(params.k)
    return _flow(field0, geom, params,
                 lambda pr: _one_constant_evaluator(pr, k), k, on_snapshot)


def flow_general(field0: AngleField, geom: TorusGeometry, k: ElasticConstants,
                 params: FlowParams, on_snapshot=None):
    """Steepest descent on the discrete anisotropic energy.

    The descent direction is the exact gradient of the node-centered
    discrete Darboux energy, so the reported history is monotone like
    the one-constant flow's.  At k1 = k2 = k3 the limit agrees with
    flow_one_constant up to stencil-level discretization differences.
    """
    return _flow(field0, geom, params,
                 lambda pr: _general_evaluator(pr, k), k.k_max, on_snapshot)


def el_residual(fld: AngleField, geom: TorusGeometry, k: float):
    """Pointwise Euler-Lagrange residual k Lap_s a + (k/2)(c1^2-c2^2) sin 2a.

    Evaluated with the same discrete operators the flow steps, so a
    converged flow satisfies max-norm < tol by construction.  Returns
    (residual array, max-norm).
    """
    problem = _Problem(geom, fld)
    ev = _one_constant_evaluator(problem, float(k))
    rhs = np.empty_like(fld.deviation)
    cos_a, sin_a = ev.refresh(fld.deviation)
    _, max_rhs, _ = ev.evaluate(fld.deviation, cos_a, sin_a, rhs)
    return rhs, max_rhs


def deviation_amplitude(fld: AngleField) -> float:
    """max |alpha - mean(alpha)| of the reconstructed angle (area-unweighted)."""
    alpha = fld.reconstruct()
    return float(np.max(np.abs(alpha - alpha.mean())))


@dataclass(frozen=True)
class MuProbe:
    """One classifier evaluation during the critical-ratio search."""

    mu: float
    nonconstant: bool
    deviation: float
    converged: bool
    steps: int
    energy: float


@dataclass(frozen=True)
class MuStarResult:
    mu_star: float
    bracket: tuple
    probes: list


def classify_mu(mu: float, grid: Grid, flow_tol: float, k: float = 1.0,
                max_steps: int = 1_000_000, dt="auto") -> MuProbe:
    """Relax the pi/4 constant datum and report whether the limit is
    nonconstant (max deviation from the mean above 10 * flow_tol)."""
    geom = TorusGeometry.from_ratio(mu)
    field0 = seed_field(grid, WindingNumber(0, 0), base_angle=math.pi / 4.0)
    params = FlowParams(k=k, dt=dt, tol=flow_tol, max_steps=max_steps, snapshot_every=0)
    final, report = flow_one_constant(field0, geom, params)
    dev = deviation_amplitude(final)
    return MuProbe(mu=mu, nonconstant=dev > 10.0 * flow_tol, deviation=dev,
                   converged=report.converged, steps=report.steps,
                   energy=report.final_energy)


def find_critical_mu(bracket, grid: Grid, flow_tol: float = 1e-8,
                     mu_tol: float = 0.01, k: float = 1.0,
                     max_steps: int = 1_000_000, dt="auto",
                     on_probe=None) -> MuStarResult:
    """Bisect the ratio separating nonconstant from constant limits.

    The classifier must be monotone across the bracket: the low end
    nonconstant, the high end constant, otherwise BracketInvalid is
    raised with both classifications attached.  Returns the bracket
    midpoint once its width drops below mu_tol.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (1.0 < lo < hi):
        raise ValueError(f"bracket must satisfy 1 < lo < hi, got {bracket}")
    probes = []

    def probe(mu):
        p = classify_mu(mu, grid, flow_tol, k=k, max_steps=max_steps, dt=dt)
        probes.append(p)
        if on_probe is not None:
            on_probe(p)
        return p

    p_lo = probe(lo)
    p_hi = probe(hi)
    if p_lo.nonconstant == p_hi.nonconstant:
        kind = "nonconstant" if p_lo.nonconstant else "constant"
        raise BracketInvalid(
            f"both endpoints of ({lo}, {hi}) classify as {kind}",
            lo_class="nonconstant" if p_lo.nonconstant else "constant",
            hi_class="nonconstant" if p_hi.nonconstant else "constant",
        )
    if not p_lo.nonconstant:
        raise BracketInvalid(
            f"classifier is not oriented: expected nonconstant at mu={lo}, constant at mu={hi}",
            lo_class="constant", hi_class="nonconstant",
        )
    while hi - lo >= mu_tol:
        mid = 0.5 * (lo + hi)
        if probe(mid).nonconstant:
            lo = mid
        else:
            hi = mid
    return MuStarResult(mu_star=0.5 * (lo + hi), bracket=(lo, hi), probes=probes)


@dataclass
class WindingRow:
    """One relaxed homotopy class in a winding table."""

    winding: WindingNumber
    energy: float = math.nan
    converged: bool = False
    steps: int = 0
    residual: float = math.nan
    seed_spec: str = ""
    error: str = ""


def _relax_winding(geom, h: WindingNumber, grid, params: FlowParams,
                   noise: float, rng_seed: int):
    field0 = seed_field(grid, h, base_angle=0.0,
                        perturbation_amplitude=noise, rng_seed=rng_seed)
    final, report = flow_one_constant(field0, geom, params)
    measured = final.measure_winding()
    if measured != h:
        raise AssertionError(f"winding changed during relaxation: {h} -> {measured}")
    return final, report


def winding_table(geom: TorusGeometry, k: float, windings, grid: Grid,
                  params: FlowParams, noise: float = 0.05, rng_seed: int = 0,
                  on_row=None) -> list:
    """Relax one seed per homotopy class and tabulate final energies.

    Seeds are base 0 plus `noise` amplitude uniform noise, row i using
    generator seed rng_seed + i, so tables are bit-reproducible.  A
    failing row records its error and the table continues.
    """
    run_params = replace(params, k=float(k), snapshot_every=0)
    rows = []
    for i, h in enumerate(windings):
        h = h if isinstance(h, WindingNumber) else WindingNumber(*h)
        row = WindingRow(winding=h, seed_spec=f"base=0.0 noise={noise} rng_seed={rng_seed + i}")
        try:
            final, report = _relax_winding(geom, h, grid, run_params, noise, rng_seed + i)
            row.energy = report.final_energy
            row.converged = report.converged
            row.steps = report.steps
            row.residual = report.final_residual
        except Exception as exc:  # per-row isolation is the contract
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows
