"""Explicit time stepping for the coupled stent/media/uptake system.

Fully discrete update (one step of size dt, all sources from level k):

    Psi_s y0' = (Psi_s - dt*A) y0 + dt*delta*P * y1[0] * e_last
    Psi_m y1' = (Psi_m - (dt/phi)*B) y1 + (dt*da/(phi*K)) Psi_m y2
                + (dt/phi)*delta*P * y0[last] * e_first
    y2'       = (1 - dt*da/((1-phi)*K)) y2 + (dt*da/(1-phi)) y1

Three coupling variants are provided.  ``monolithic`` takes every source
from level k.  ``alg1`` first advances y0 and y2 from level-k data (the
two updates are data-independent and could run concurrently), then
advances y1 using the fresh stent trace and fresh y2.  ``alg2`` is
sequential: y2 first, then y1 (fresh y2, stale stent trace), then y0
(fresh wall trace).

Multi-rate stepping advances one subdomain in ``substep_ratio`` equal
substeps per macro step while the trace it consumes stays frozen; which
value is frozen follows the variant's freshness rule, so a ratio of 1
reproduces the single-rate step bitwise.

Stability: the stated per-subdomain bounds dt_max_s/dt_max_m (see
DerivedConstants) are the lumped-operator heat bounds.  The consistent
P1 mass matrix tightens them by a factor three (the largest generalized
eigenvalue of stiffness against mass is 12/h^2, not 4/h^2), plus a small
interface-penalty correction; ``sharp_dt_limit`` computes that practical
limit.  The scheme-config gate checks the stated bounds scaled by
``cfl_safety`` (default 0.3, inside the sharp limit); a runaway run is
additionally caught by an energy monitor that aborts loudly instead of
writing non-finite output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg.lapack import dpttrf, dpttrs

from .errors import CflError, InstabilityError, SingularMatrixError, ValidationError
from .fem import MEDIA, STENT, FemOperators, Mesh1D, TridiagonalMatrix
from .params import DerivedConstants, ModelParams, derived_constants

VARIANTS = ("monolithic", "alg1", "alg2")
SUBSTEP_DOMAINS = (STENT, MEDIA)

# abort threshold: measured energy versus the theoretical growth envelope
ENERGY_GUARD_FACTOR = 10.0
DEFAULT_CFL_SAFETY = 0.3


@dataclass(eq=False)
class SimState:
    """Nodal coefficients of the three fields at one time level."""

    y0: np.ndarray  # stent concentration, n_s + 1 nodes
    y1: np.ndarray  # extracellular concentration, n_m + 1 nodes
    y2: np.ndarray  # intracellular concentration, n_m + 1 nodes
    t: float

    def copy(self) -> "SimState":
        return SimState(self.y0.copy(), self.y1.copy(), self.y2.copy(), self.t)


@dataclass(frozen=True)
class SchemeConfig:
    """Time-stepping choices for one run.

    dt_m is the macro step; the substepped subdomain (default: stent)
    advances substep_ratio times per macro step with step dt_m/ratio.
    """

    variant: str
    dt_m: float
    t_end: float
    substep_ratio: int = 1
    cfl_safety: float = DEFAULT_CFL_SAFETY
    substep_domain: str = STENT

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}"
            )
        if not self.dt_m > 0:
            raise ValidationError(f"dt_m must be positive, got {self.dt_m}")
        if self.t_end < 0:
            raise ValidationError(f"t_end must be nonnegative, got {self.t_end}")
        if not (isinstance(self.substep_ratio, int) and self.substep_ratio >= 1):
            raise ValidationError(
                f"substep_ratio must be an integer >= 1, got {self.substep_ratio}"
            )
        if not 0 < self.cfl_safety <= 1:
            raise ValidationError(
                f"cfl_safety must lie in (0, 1], got {self.cfl_safety}"
            )
        if self.substep_domain not in SUBSTEP_DOMAINS:
            raise ValidationError(
                f"substep_domain must be one of {SUBSTEP_DOMAINS}"
            )

    def step_limit(self, d: DerivedConstants) -> float:
        """Largest admissible dt_m under the stated per-subdomain bounds."""
        r = self.substep_ratio
        if self.substep_domain == STENT:
            return self.cfl_safety * min(r * d.dt_max_s, d.dt_max_m)
        return self.cfl_safety * min(d.dt_max_s, r * d.dt_max_m)

    def check_cfl(self, p: ModelParams, ops: FemOperators) -> None:
        d = derived_constants(p, ops.mesh_s.h, ops.mesh_m.h)
        limit = self.step_limit(d)
        if self.dt_m > limit:
            raise CflError(
                f"dt_m={self.dt_m:.6g} exceeds the stability allowance "
                f"{limit:.6g} (cfl_safety={self.cfl_safety}, "
                f"substep_ratio={self.substep_ratio})"
            )


@dataclass(eq=False)
class Snapshot:
    t_request: float
    t: float
    state: SimState


@dataclass(eq=False)
class InterfaceSeries:
    """Trace values per recorded step: c(0-), c1(0+), c1(1)."""

    t: np.ndarray
    c_at_0: np.ndarray
    c1_at_0: np.ndarray
    c1_at_1: np.ndarray


@dataclass(eq=False)
class MonitorSeries:
    """Conservation and energy diagnostics per recorded step.

    balance_residual is M^k - M^0 + pe*dt*sum_{j<k} c1^j(1): for the
    monolithic single-rate scheme it is pure roundoff.
    """

    t: np.ndarray
    mass: np.ndarray
    stent_mass: np.ndarray
    energy: np.ndarray
    balance_residual: np.ndarray


@dataclass(eq=False)
class SolutionRecord:
    """Everything one run produces."""

    mesh_s: Mesh1D
    mesh_m: Mesh1D
    snapshots: list[Snapshot]
    interface: InterfaceSeries
    monitors: MonitorSeries
    config: dict = field(default_factory=dict)


def initial_state(ops: FemOperators) -> SimState:
    """Unit concentration in the coating, nothing in the tissue."""
    return SimState(
        y0=np.ones(ops.mesh_s.n_elems + 1),
        y1=np.zeros(ops.mesh_m.n_elems + 1),
        y2=np.zeros(ops.mesh_m.n_elems + 1),
        t=0.0,
    )


def total_mass(s: SimState, ops: FemOperators, p: ModelParams) -> float:
    """Total drug content: stent integral + phi-weighted extracellular
    + (1-phi)-weighted intracellular integrals of the P1 interpolants."""
    w_s = ops.psi_s.matvec(np.ones_like(s.y0))
    w_m = ops.psi_m.matvec(np.ones_like(s.y1))
    return float(
        np.dot(w_s, s.y0)
        + p.phi * np.dot(w_m, s.y1)
        + (1.0 - p.phi) * np.dot(w_m, s.y2)
    )


def energy(s: SimState, ops: FemOperators) -> float:
    """Sum of squared discrete L2 norms of the three fields."""
    return float(
        np.dot(s.y0, ops.psi_s.matvec(s.y0))
        + np.dot(s.y1, ops.psi_m.matvec(s.y1))
        + np.dot(s.y2, ops.psi_m.matvec(s.y2))
    )


def sharp_dt_limit(
    p: ModelParams,
    h_s: float,
    h_m: float,
    substep_ratio: int = 1,
    substep_domain: str = STENT,
) -> float:
    """Practical explicit-step limit for the consistent-mass system.

    Uses 2/lambda_max estimates with lambda_max(Psi^-1 S) = 12/h^2 and a
    4/h bound for the interface rank-one terms; a factor three below the
    lumped bounds for small h.
    """
    dp = p.delta * p.p_tilde
    dt_s = h_s * h_s / (6.0 * p.delta + 2.0 * h_s * dp)
    dt_m = p.phi * h_m * h_m / (6.0 + 2.0 * h_m * (dp + p.pe) + p.da * h_m * h_m)
    if substep_domain == STENT:
        return min(substep_ratio * dt_s, dt_m)
    return min(dt_s, substep_ratio * dt_m)


def stable_step_count(
    p: ModelParams,
    h_s: float,
    h_m: float,
    t_end: float,
    substep_ratio: int = 1,
    substep_domain: str = STENT,
    margin: float = 1.05,
    multiple_of: int = 1,
) -> int:
    """Number of macro steps covering t_end at margin below sharp_dt_limit,
    rounded up to a multiple (so snapshot times can sit on the grid)."""
    limit = sharp_dt_limit(p, h_s, h_m, substep_ratio, substep_domain)
    n = max(1, math.ceil(margin * t_end / limit))
    if multiple_of > 1:
        n = ((n + multiple_of - 1) // multiple_of) * multiple_of
    return n


def _tri_arrays(m: TridiagonalMatrix):
    return m.lower, m.diag, m.upper


def _combo(mass: TridiagonalMatrix, op: TridiagonalMatrix, factor: float):
    """Diagonals of (mass - factor * op)."""
    return (
        mass.lower - factor * op.lower,
        mass.diag - factor * op.diag,
        mass.upper - factor * op.upper,
    )


class _MassFactor:
    """Prefactored LDL^T solve for a symmetric positive tridiagonal matrix."""

    def __init__(self, m: TridiagonalMatrix):
        d, e, info = dpttrf(m.diag, m.lower)
        if info != 0:
            raise SingularMatrixError("matrix numerically singular")
        self._d = d
        self._e = e

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = dpttrs(self._d, self._e, rhs)
        if info != 0:  # pragma: no cover - only reachable on bad arguments
            raise SingularMatrixError("matrix numerically singular")
        return x


class _Kernel:
    """Precomputed update operators and scratch space for one run.

    All variants route through here, including the single-step helpers,
    so a multi-rate run with ratio 1 is bitwise identical to repeated
    single steps.
    """

    def __init__(
        self,
        p: ModelParams,
        ops: FemOperators,
        dt_m: float,
        substep_ratio: int = 1,
        substep_domain: str = STENT,
    ):
        self.p = p
        self.ops = ops
        self.dt_m = dt_m
        self.r = substep_ratio
        self.substep_domain = substep_domain

        n_s = ops.mesh_s.n_elems + 1
        n_m = ops.mesh_m.n_elems + 1

        dt_stent = dt_m / substep_ratio if substep_domain == STENT else dt_m
        dt_media = dt_m / substep_ratio if substep_domain == MEDIA else dt_m
        self.dt_stent = dt_stent
        self.dt_media = dt_media

        dp = p.delta * p.p_tilde
        self.upd_s = _combo(ops.psi_s, ops.mat_a, dt_stent)
        self.src_s = dt_stent * dp
        self.upd_m = _combo(ops.psi_m, ops.mat_b, dt_media / p.phi)
        self.psi_m_arrays = _tri_arrays(ops.psi_m)
        self.src_m = dt_media / p.phi * dp
        self.coef_y2 = dt_media * p.da / (p.phi * p.k_part)
        self.ode_decay = 1.0 - dt_media * p.da / ((1.0 - p.phi) * p.k_part)
        self.ode_gain = dt_media * p.da / (1.0 - p.phi)

        self.fac_s = _MassFactor(ops.psi_s)
        self.fac_m = _MassFactor(ops.psi_m)

        self._rhs_s = np.empty(n_s)
        self._rhs_m = np.empty(n_m)
        self._tmp_m = np.empty(n_m)
        self._scr_s = np.empty(n_s)
        self._scr_m = np.empty(n_m)

        # row-sum vectors: 1' Psi y as a single dot product
        self.w_s = ops.psi_s.matvec(np.ones(n_s))
        self.w_m = ops.psi_m.matvec(np.ones(n_m))

    # -- primitive updates -------------------------------------------------

    @staticmethod
    def _matvec(tri, x, out, scr):
        lo, di, up = tri
        np.multiply(di, x, out=out)
        np.multiply(up, x[1:], out=scr[: len(x) - 1])
        out[:-1] += scr[: len(x) - 1]
        np.multiply(lo, x[:-1], out=scr[1 : len(x)])
        out[1:] += scr[1 : len(x)]
        return out

    def _stent_steps(self, y0, trace_w, n_sub):
        """n_sub stent substeps with the wall trace frozen at trace_w."""
        src = self.src_s * trace_w
        for _ in range(n_sub):
            rhs = self._matvec(self.upd_s, y0, self._rhs_s, self._scr_s)
            rhs[-1] += src
            y0 = self.fac_s.solve(rhs)
        return y0

    def _media_update(self, y1, y2_src, trace_s):
        """One media step consuming the given y2 source and stent trace."""
        rhs = self._matvec(self.upd_m, y1, self._rhs_m, self._scr_m)
        tmp = self._matvec(self.psi_m_arrays, y2_src, self._tmp_m, self._scr_m)
        tmp *= self.coef_y2
        rhs += tmp
        rhs[0] += self.src_m * trace_s
        return self.fac_m.solve(rhs)

    def _ode_update(self, y1_src, y2):
        out = self.ode_decay * y2
        out += self.ode_gain * y1_src
        return out

    def _media_cycle(self, y1, y2, trace_s, n_sub, fresh_y2):
        """n_sub media+uptake substeps with the stent trace frozen."""
        for _ in range(n_sub):
            y2_new = self._ode_update(y1, y2)
            y1 = self._media_update(y1, y2_new if fresh_y2 else y2, trace_s)
            y2 = y2_new
        return y1, y2

    # -- macro steps -------------------------------------------------------

    def macro_step(self, y0, y1, y2, variant):
        if self.substep_domain == STENT:
            return self._macro_stent_sub(y0, y1, y2, variant)
        return self._macro_media_sub(y0, y1, y2, variant)

    def _macro_stent_sub(self, y0, y1, y2, variant):
        r = self.r
        if variant == "monolithic":
            trace_w = y1[0]
            trace_s = y0[-1]
            y0n = self._stent_steps(y0, trace_w, r)
            y1n = self._media_update(y1, y2, trace_s)
            y2n = self._ode_update(y1, y2)
        elif variant == "alg1":
            y0n = self._stent_steps(y0, y1[0], r)
            y2n = self._ode_update(y1, y2)
            y1n = self._media_update(y1, y2n, y0n[-1])
        else:  # alg2
            y2n = self._ode_update(y1, y2)
            y1n = self._media_update(y1, y2n, y0[-1])
            y0n = self._stent_steps(y0, y1n[0], r)
        return y0n, y1n, y2n

    def _macro_media_sub(self, y0, y1, y2, variant):
        r = self.r
        if variant == "monolithic":
            trace_w = y1[0]
            trace_s = y0[-1]
            y0n = self._stent_steps(y0, trace_w, 1)
            y1n, y2n = self._media_cycle(y1, y2, trace_s, r, fresh_y2=False)
        elif variant == "alg1":
            y0n = self._stent_steps(y0, y1[0], 1)
            y1n, y2n = self._media_cycle(y1, y2, y0n[-1], r, fresh_y2=True)
        else:  # alg2
            y1n, y2n = self._media_cycle(y1, y2, y0[-1], r, fresh_y2=True)
            y0n = self._stent_steps(y0, y1n[0], 1)
        return y0n, y1n, y2n

    # -- monitors ----------------------------------------------------------

    def mass(self, y0, y1, y2):
        return (
            float(np.dot(self.w_s, y0))
            + self.p.phi * float(np.dot(self.w_m, y1))
            + (1.0 - self.p.phi) * float(np.dot(self.w_m, y2))
        )

    def stent_mass(self, y0):
        return float(np.dot(self.w_s, y0))

    def energy(self, y0, y1, y2):
        e = float(np.dot(y0, self._matvec(_tri_arrays(self.ops.psi_s), y0,
                                          self._rhs_s, self._scr_s)))
        e += float(np.dot(y1, self._matvec(self.psi_m_arrays, y1,
                                           self._rhs_m, self._scr_m)))
        e += float(np.dot(y2, self._matvec(self.psi_m_arrays, y2,
                                           self._rhs_m, self._scr_m)))
        return e


def _single_step(s, ops, p, dt, variant):
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    kern = _Kernel(p, ops, dt)
    y0, y1, y2 = kern.macro_step(s.y0, s.y1, s.y2, variant)
    if not (np.isfinite(y0).all() and np.isfinite(y1).all()
            and np.isfinite(y2).all()):
        raise InstabilityError("instability detected: non-finite state")
    return SimState(y0, y1, y2, s.t + dt)


def step_monolithic(s: SimState, ops: FemOperators, p: ModelParams, dt: float) -> SimState:
    """One fully explicit step: every source taken from the current level."""
    return _single_step(s, ops, p, dt, "monolithic")


def step_alg1(s: SimState, ops: FemOperators, p: ModelParams, dt: float) -> SimState:
    """Parallelizable decoupling: y0 and y2 from current data, then y1
    from the freshly updated stent trace and y2."""
    return _single_step(s, ops, p, dt, "alg1")


def step_alg2(s: SimState, ops: FemOperators, p: ModelParams, dt: float) -> SimState:
    """Sequential decoupling: y2, then y1 (fresh y2, stale stent trace),
    then y0 (fresh wall trace)."""
    return _single_step(s, ops, p, dt, "alg2")


class RunRecorder:
    """Collects monitors, interface traces, and snapshots during a run.

    Snapshot requests are snapped to the nearest completed step; requests
    landing on the same step are merged (first request wins).
    """

    def __init__(self, mesh_s, mesh_m, snapshot_times, dt, n_steps,
                 record_every, t_end, config):
        snapshot_times = [float(ts) for ts in snapshot_times]
        if any(b < a for a, b in zip(snapshot_times, snapshot_times[1:])):
            raise ValidationError("snapshot_times must be sorted ascending")
        tol = 1e-9 * max(1.0, t_end)
        for ts in snapshot_times:
            if ts < -tol or ts > t_end + tol:
                raise ValidationError(
                    f"snapshot time {ts} outside [0, {t_end}]"
                )
        self.mesh_s = mesh_s
        self.mesh_m = mesh_m
        self.record_every = max(1, int(record_every))
        self.n_steps = n_steps
        self.config = config
        self._snap_steps: dict[int, float] = {}
        for ts in snapshot_times:
            idx = min(n_steps, max(0, round(ts / dt))) if dt > 0 else 0
            self._snap_steps.setdefault(idx, ts)
        self.snapshots: list[Snapshot] = []
        self._mon = {k: [] for k in
                     ("t", "mass", "stent_mass", "energy", "resid")}
        self._ifc = {k: [] for k in ("t", "c0", "c1_0", "c1_1")}

    def wants_monitor(self, k: int) -> bool:
        return k % self.record_every == 0 or k == self.n_steps

    def monitor(self, k, t, y0, y1, mass, stent_mass, en, resid):
        self._mon["t"].append(t)
        self._mon["mass"].append(mass)
        self._mon["stent_mass"].append(stent_mass)
        self._mon["energy"].append(en)
        self._mon["resid"].append(resid)
        self._ifc["t"].append(t)
        self._ifc["c0"].append(float(y0[-1]))
        self._ifc["c1_0"].append(float(y1[0]))
        self._ifc["c1_1"].append(float(y1[-1]))

    def maybe_snapshot(self, k, t, y0, y1, y2):
        ts = self._snap_steps.get(k)
        if ts is not None:
            state = SimState(y0.copy(), y1.copy(), y2.copy(), t)
            self.snapshots.append(Snapshot(t_request=ts, t=t, state=state))

    def build(self) -> SolutionRecord:
        return SolutionRecord(
            mesh_s=self.mesh_s,
            mesh_m=self.mesh_m,
            snapshots=self.snapshots,
            interface=InterfaceSeries(
                t=np.array(self._ifc["t"]),
                c_at_0=np.array(self._ifc["c0"]),
                c1_at_0=np.array(self._ifc["c1_0"]),
                c1_at_1=np.array(self._ifc["c1_1"]),
            ),
            monitors=MonitorSeries(
                t=np.array(self._mon["t"]),
                mass=np.array(self._mon["mass"]),
                stent_mass=np.array(self._mon["stent_mass"]),
                energy=np.array(self._mon["energy"]),
                balance_residual=np.array(self._mon["resid"]),
            ),
            config=self.config,
        )


def run_simulation(
    p: ModelParams,
    ops: FemOperators,
    cfg: SchemeConfig,
    snapshot_times,
    record_every: int = 1,
) -> SolutionRecord:
    """Advance from t=0 to t_end recording monitors and snapshots.

    Raises CflError before stepping if dt_m violates the configured
    stability allowance, and InstabilityError if the state goes
    non-finite or the energy leaves the growth envelope by a factor
    ENERGY_GUARD_FACTOR.
    """
    cfg.check_cfl(p, ops)
    d = derived_constants(p, ops.mesh_s.h, ops.mesh_m.h)
    kern = _Kernel(p, ops, cfg.dt_m, cfg.substep_ratio, cfg.substep_domain)
    n_steps = int(round(cfg.t_end / cfg.dt_m)) if cfg.t_end > 0 else 0

    config_echo = {
        "solver": "fem",
        "variant": cfg.variant,
        "dt_m": cfg.dt_m,
        "t_end": cfg.t_end,
        "substep_ratio": cfg.substep_ratio,
        "substep_domain": cfg.substep_domain,
        "cfl_safety": cfg.cfl_safety,
        "record_every": int(record_every),
        "n_s": ops.mesh_s.n_elems,
        "n_m": ops.mesh_m.n_elems,
        "params": {
            "delta": p.delta, "p_tilde": p.p_tilde, "pe": p.pe, "da": p.da,
            "k_part": p.k_part, "phi": p.phi, "l": p.l,
        },
    }
    rec = RunRecorder(ops.mesh_s, ops.mesh_m, snapshot_times, cfg.dt_m,
                      n_steps, record_every, cfg.t_end, config_echo)

    state = initial_state(ops)
    y0, y1, y2 = state.y0, state.y1, state.y2
    mass0 = kern.mass(y0, y1, y2)
    energy0 = kern.energy(y0, y1, y2)
    outflow_sum = 0.0  # sum over completed steps of y1[last]

    for k in range(n_steps + 1):
        t = k * cfg.dt_m
        if rec.wants_monitor(k):
            mass_k = kern.mass(y0, y1, y2)
            en = kern.energy(y0, y1, y2)
            resid = mass_k - mass0 + p.pe * cfg.dt_m * outflow_sum
            if not (math.isfinite(mass_k) and math.isfinite(en)):
                raise InstabilityError(
                    f"instability detected: non-finite state at t={t:.6g}"
                )
            envelope = energy0 * math.exp(min(2.0 * d.big_m * t, 700.0))
            if en > ENERGY_GUARD_FACTOR * envelope:
                raise InstabilityError(
                    f"instability detected: energy {en:.6g} exceeds "
                    f"{ENERGY_GUARD_FACTOR}x the growth envelope "
                    f"{envelope:.6g} at t={t:.6g}"
                )
            rec.monitor(k, t, y0, y1, mass_k, kern.stent_mass(y0), en, resid)
        rec.maybe_snapshot(k, t, y0, y1, y2)
        if k == n_steps:
            break
        outflow_sum += float(y1[-1])
        y0, y1, y2 = kern.macro_step(y0, y1, y2, cfg.variant)

    return rec.build()
