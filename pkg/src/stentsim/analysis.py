"""Error norms between runs, refinement studies, and scheme comparisons.

References are fine-grid numerical runs, never manufactured solutions:
a test record is prolonged onto the reference mesh by exact P1
interpolation (nested uniform meshes), then discrete norms are taken
with the reference-mesh matrices.  Time norms use the left-endpoint
rectangle rule over the records' common snapshot times.  Relative errors
are normalized by the reference field's own max-in-time L2 magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fem import assemble_mass, assemble_stiffness, build_operators
from .params import ModelParams
from .stepping import (
    SchemeConfig,
    SolutionRecord,
    run_simulation,
    stable_step_count,
)

REL_FLOOR = 1e-14  # relative errors undefined below this reference magnitude

FIELDS = ("c", "c1", "c2")


@dataclass(frozen=True)
class FieldError:
    """Discrete error norms for one field against a reference run."""

    linf_l2: float
    l2_l2: float
    l2_h1: float | None  # None for the uptake field (no gradient norm)
    ref_linf_l2: float   # magnitude used for the relative versions

    def _rel(self, v):
        if v is None or self.ref_linf_l2 <= REL_FLOOR:
            return None
        return v / self.ref_linf_l2

    @property
    def rel_linf_l2(self) -> float | None:
        return self._rel(self.linf_l2)

    @property
    def rel_l2_l2(self) -> float | None:
        return self._rel(self.l2_l2)

    @property
    def rel_l2_h1(self) -> float | None:
        return self._rel(self.l2_h1)


@dataclass(frozen=True)
class ErrorReport:
    c: FieldError
    c1: FieldError
    c2: FieldError

    def field(self, name: str) -> FieldError:
        if name not in FIELDS:
            raise ValidationError(f"unknown field {name!r}")
        return getattr(self, name)

    def rows(self):
        """(field, norm, absolute, relative) tuples for tables/CSV."""
        out = []
        for name in FIELDS:
            fe = self.field(name)
            out.append((name, "linf_l2", fe.linf_l2, fe.rel_linf_l2))
            out.append((name, "l2_l2", fe.l2_l2, fe.rel_l2_l2))
            if fe.l2_h1 is not None:
                out.append((name, "l2_h1", fe.l2_h1, fe.rel_l2_h1))
        return out


def prolong(values: np.ndarray, n_test: int, n_ref: int) -> np.ndarray:
    """P1 interpolation from a uniform mesh with n_test elements onto a
    nested uniform refinement with n_ref elements.  Exact on shared nodes
    (prolong-then-restrict is the identity on nodal values)."""
    if n_ref % n_test != 0:
        raise ValidationError(
            f"reference mesh ({n_ref} elements) is not a refinement of the "
            f"test mesh ({n_test} elements)"
        )
    if len(values) != n_test + 1:
        raise ValidationError("nodal vector does not match the test mesh")
    k = n_ref // n_test
    if k == 1:
        return values.copy()
    idx = np.arange(n_ref + 1)
    elem = idx // k
    frac = (idx % k) / k
    left = values[np.minimum(elem, n_test)]
    right = values[np.minimum(elem + 1, n_test)]
    out = (1.0 - frac) * left + frac * right
    out[frac == 0.0] = values[elem[frac == 0.0]]
    return out


def _common_snapshots(test: SolutionRecord, ref: SolutionRecord):
    """Pairs of snapshots taken at the same requested time."""
    tol = 1e-9 * max(
        1.0,
        max((s.t for s in ref.snapshots), default=1.0),
    )
    ref_by_time = [(s.t_request, s) for s in ref.snapshots]
    pairs = []
    for snap in test.snapshots:
        for t_req, rsnap in ref_by_time:
            if abs(snap.t_request - t_req) <= tol:
                pairs.append((snap, rsnap))
                break
    if not pairs:
        raise ValidationError("disjoint snapshot time sets")
    return pairs


def compare_records(test: SolutionRecord, ref: SolutionRecord) -> ErrorReport:
    """Discrete-norm differences between a run and a nested-finer reference."""
    n_s_t, n_s_r = test.mesh_s.n_elems, ref.mesh_s.n_elems
    n_m_t, n_m_r = test.mesh_m.n_elems, ref.mesh_m.n_elems
    if abs(test.mesh_s.a - ref.mesh_s.a) > 1e-14 * max(1.0, abs(ref.mesh_s.a)):
        raise ValidationError("records use different stent thickness")
    if n_s_r % n_s_t or n_m_r % n_m_t:
        raise ValidationError(
            "reference meshes must be nested refinements of the test meshes"
        )
    mass_s = assemble_mass(ref.mesh_s)
    mass_m = assemble_mass(ref.mesh_m)
    stiff_s = assemble_stiffness(ref.mesh_s)
    stiff_m = assemble_stiffness(ref.mesh_m)

    def l2(v, mat):
        return math.sqrt(max(float(v @ mat.matvec(v)), 0.0))

    pairs = _common_snapshots(test, ref)
    times = np.array([r.t for _, r in pairs])
    err = {name: {"l2": [], "h1": []} for name in FIELDS}
    mag = {name: [] for name in FIELDS}
    for tsnap, rsnap in pairs:
        d0 = prolong(tsnap.state.y0, n_s_t, n_s_r) - rsnap.state.y0
        d1 = prolong(tsnap.state.y1, n_m_t, n_m_r) - rsnap.state.y1
        d2 = prolong(tsnap.state.y2, n_m_t, n_m_r) - rsnap.state.y2
        err["c"]["l2"].append(l2(d0, mass_s))
        err["c"]["h1"].append(l2(d0, stiff_s))
        err["c1"]["l2"].append(l2(d1, mass_m))
        err["c1"]["h1"].append(l2(d1, stiff_m))
        err["c2"]["l2"].append(l2(d2, mass_m))
        mag["c"].append(l2(rsnap.state.y0, mass_s))
        mag["c1"].append(l2(rsnap.state.y1, mass_m))
        mag["c2"].append(l2(rsnap.state.y2, mass_m))

    def time_l2(values):
        if len(times) < 2:
            return 0.0
        dt = np.diff(times)
        return math.sqrt(float(np.sum(dt * np.asarray(values[:-1]) ** 2)))

    def field(name, with_h1):
        e = err[name]
        return FieldError(
            linf_l2=float(np.max(e["l2"])),
            l2_l2=time_l2(e["l2"]),
            l2_h1=time_l2(e["h1"]) if with_h1 else None,
            ref_linf_l2=float(np.max(mag[name])),
        )

    return ErrorReport(
        c=field("c", True), c1=field("c1", True), c2=field("c2", False)
    )


def fit_rate(errors, widths) -> list[float]:
    """Observed orders log2(e_i / e_{i+1}) for widths halving per level."""
    errors = [float(e) for e in errors]
    widths = [float(w) for w in widths]
    if len(errors) != len(widths) or len(errors) < 2:
        raise ValidationError("need equally many errors and widths, at least 2")
    for a, b in zip(widths, widths[1:]):
        if abs(b - a / 2.0) > 1e-9 * a:
            raise ValidationError("widths must halve from level to level")
    if any(e <= 0.0 for e in errors):
        raise ValidationError("errors must be positive to fit a rate")
    return [math.log2(a / b) for a, b in zip(errors, errors[1:])]


@dataclass(frozen=True)
class RateTable:
    """Errors per refinement level plus fitted orders per adjacent pair."""

    h_values: list[float]
    reports: list[ErrorReport]
    rates_linf_l2: dict[str, list[float]]   # per field c, c1, c2
    rates_l2_h1: dict[str, list[float]]     # per field c, c1

    def rows(self):
        out = []
        for i, (h, rep) in enumerate(zip(self.h_values, self.reports)):
            for name, norm, absval, rel in rep.rows():
                rates = self.rates_linf_l2 if norm == "linf_l2" else (
                    self.rates_l2_h1 if norm == "l2_h1" else None)
                rate = ""
                if rates is not None and name in rates and i < len(rates[name]):
                    rate = rates[name][i]
                out.append((i, h, name, norm, absval, rel, rate))
        return out


def _plan_run(p, n_s, n_m, t_end, n_intervals, margin=1.05):
    """Step count on the sharp stability limit, landing snapshots on the grid."""
    h_s, h_m = p.l / n_s, 1.0 / n_m
    n_steps = stable_step_count(
        p, h_s, h_m, t_end, margin=margin, multiple_of=n_intervals
    )
    return n_steps, t_end / n_steps


def _study_run(p, n_s, n_m, t_end, dt, variant, snapshot_times, substep_ratio=1):
    ops = build_operators(p, n_s, n_m)
    cfg = SchemeConfig(
        variant, dt, t_end=t_end, substep_ratio=substep_ratio,
        cfl_safety=1.0 / 3.0,
    )
    n_steps = int(round(t_end / dt))
    record_every = max(1, n_steps // 200)
    return run_simulation(p, ops, cfg, snapshot_times, record_every=record_every)


def convergence_study(
    p: ModelParams,
    n_m0: int = 10,
    levels: int = 3,
    stent_ratio: int = 2,
    ref_refine: int = 3,
    t_end: float = 0.1,
    n_snapshots: int = 10,
    variant: str = "monolithic",
) -> RateTable:
    """Refinement study against a much finer run of the same scheme.

    Levels halve h starting from n_m0 media elements (stent elements a
    fixed multiple); the reference refines the finest level ref_refine
    more times.  Each level steps at the sharp stability limit, so dt
    scales with h^2 and the first-order time error stays subdominant.
    """
    if levels < 2:
        raise ValidationError("need at least two refinement levels")
    if ref_refine < 1:
        raise ValidationError("reference must be finer than the finest level")
    snapshot_times = [i * t_end / n_snapshots for i in range(n_snapshots + 1)]

    n_m_ref = n_m0 * 2 ** (levels - 1 + ref_refine)
    n_ref_steps, dt_ref = _plan_run(p, stent_ratio * n_m_ref, n_m_ref,
                                    t_end, n_snapshots)
    ref = _study_run(p, stent_ratio * n_m_ref, n_m_ref, t_end, dt_ref,
                     variant, snapshot_times)

    h_values, reports = [], []
    for level in range(levels):
        n_m = n_m0 * 2 ** level
        n_steps, dt = _plan_run(p, stent_ratio * n_m, n_m, t_end, n_snapshots)
        rec = _study_run(p, stent_ratio * n_m, n_m, t_end, dt,
                         variant, snapshot_times)
        h_values.append(1.0 / n_m)
        reports.append(compare_records(rec, ref))

    rates_linf = {
        name: fit_rate([r.field(name).linf_l2 for r in reports], h_values)
        for name in FIELDS
    }
    rates_h1 = {
        name: fit_rate([r.field(name).l2_h1 for r in reports], h_values)
        for name in ("c", "c1")
    }
    return RateTable(h_values, reports, rates_linf, rates_h1)


def make_reference(
    p: ModelParams,
    n_s: int,
    n_m: int,
    n_steps: int,
    t_end: float,
    snapshot_times,
    variant: str = "monolithic",
    record_every: int | None = None,
) -> SolutionRecord:
    """Fine-grid reference run used by the accuracy studies."""
    ops = build_operators(p, n_s, n_m)
    cfg = SchemeConfig(variant, t_end / n_steps, t_end=t_end,
                       cfl_safety=1.0 / 3.0)
    if record_every is None:
        record_every = max(1, n_steps // 200)
    return run_simulation(p, ops, cfg, snapshot_times, record_every=record_every)


def stepping_study(
    p: ModelParams,
    ref: SolutionRecord,
    n_m: int,
    ratios,
    n_steps: int,
    t_end: float,
    snapshot_times,
    variant: str = "alg1",
) -> dict[int, ErrorReport]:
    """Vary the stent/media element ratio at a fixed time step.

    For each ratio q the run uses q*n_m stent elements against the given
    fine reference; only the spatial ratio changes between rows.
    """
    ratios = [int(q) for q in ratios]
    if any(q < 1 for q in ratios):
        raise ValidationError("ratios must be positive integers")
    out = {}
    for q in ratios:
        rec = _study_run(p, q * n_m, n_m, t_end, t_end / n_steps,
                         variant, snapshot_times)
        out[q] = compare_records(rec, ref)
    return out


@dataclass(frozen=True)
class AlgComparison:
    alg1: ErrorReport
    alg2: ErrorReport
    monolithic: ErrorReport


def compare_algorithms(
    p: ModelParams,
    ref: SolutionRecord,
    n_s: int,
    n_m: int,
    n_steps: int,
    t_end: float,
    snapshot_times,
) -> AlgComparison:
    """Accuracy of the two decoupling strategies (and the fully explicit
    update) on identical meshes and steps, against one fine reference."""
    reports = {}
    for variant in ("alg1", "alg2", "monolithic"):
        rec = _study_run(p, n_s, n_m, t_end, t_end / n_steps,
                         variant, snapshot_times)
        reports[variant] = compare_records(rec, ref)
    return AlgComparison(
        alg1=reports["alg1"], alg2=reports["alg2"],
        monolithic=reports["monolithic"],
    )
