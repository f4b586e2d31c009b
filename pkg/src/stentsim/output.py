"""CSV serialization of solution records and standalone SVG line charts.

CSV formats (headers are normative):

    snapshots.csv   t,domain,x,field,value     long format; domain s|m,
                                               field c|c1|c2
    interface.csv   t,c_at_0,c1_at_0,c1_at_1
    monitors.csv    t,mass,energy,mass_balance_residual

Numbers are printed with 17 significant digits so values round-trip
exactly.  Rows are sorted by (t, domain, x, field).  Charts are written
as self-contained SVG with fixed formatting: identical input produces
byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .stepping import SolutionRecord


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def write_record_csv(rec: SolutionRecord, out_dir) -> list[Path]:
    """Write snapshots.csv, interface.csv, and monitors.csv under out_dir."""
    if not rec.snapshots and len(rec.monitors.t) == 0:
        raise ValidationError("record is empty; nothing to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for snap in rec.snapshots:
        t = snap.t
        for x, v in zip(rec.mesh_s.nodes, snap.state.y0):
            rows.append((t, "s", float(x), "c", v))
        for x, v in zip(rec.mesh_m.nodes, snap.state.y1):
            rows.append((t, "m", float(x), "c1", v))
        for x, v in zip(rec.mesh_m.nodes, snap.state.y2):
            rows.append((t, "m", float(x), "c2", v))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))

    snap_path = out / "snapshots.csv"
    with snap_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "domain", "x", "field", "value"])
        for t, dom, x, name, v in rows:
            w.writerow([_fmt(t), dom, _fmt(x), name, _fmt(v)])

    ifc_path = out / "interface.csv"
    ifc = rec.interface
    with ifc_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "c_at_0", "c1_at_0", "c1_at_1"])
        for t, a, b, c in zip(ifc.t, ifc.c_at_0, ifc.c1_at_0, ifc.c1_at_1):
            w.writerow([_fmt(t), _fmt(a), _fmt(b), _fmt(c)])

    mon_path = out / "monitors.csv"
    mon = rec.monitors
    with mon_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mass", "energy", "mass_balance_residual"])
        for t, m, e, r in zip(mon.t, mon.mass, mon.energy,
                              mon.balance_residual):
            w.writerow([_fmt(t), _fmt(m), _fmt(e), _fmt(r)])

    return [snap_path, ifc_path, mon_path]


@dataclass
class RecordData:
    """Values read back from a record's CSV files."""

    snapshots: list  # (t, y0, y1, y2) tuples, arrays ordered by x
    interface: dict  # column name -> array
    monitors: dict   # column name -> array


def read_record_csv(out_dir) -> RecordData:
    out = Path(out_dir)

    by_time: dict[float, dict[str, list]] = {}
    with (out / "snapshots.csv").open() as fh:
        rd = csv.DictReader(fh)
        for row in rd:
            t = float(row["t"])
            slot = by_time.setdefault(t, {"c": [], "c1": [], "c2": []})
            slot[row["field"]].append((float(row["x"]), float(row["value"])))
    snapshots = []
    for t in sorted(by_time):
        slot = by_time[t]
        arrays = []
        for name in ("c", "c1", "c2"):
            pairs = sorted(slot[name], key=lambda p: p[0])
            arrays.append(np.array([v for _, v in pairs]))
        snapshots.append((t, *arrays))

    def read_table(path):
        with path.open() as fh:
            rd = csv.DictReader(fh)
            cols = {name: [] for name in rd.fieldnames}
            for row in rd:
                for name in cols:
                    cols[name].append(float(row[name]))
        return {name: np.array(vals) for name, vals in cols.items()}

    return RecordData(
        snapshots=snapshots,
        interface=read_table(out / "interface.csv"),
        monitors=read_table(out / "monitors.csv"),
    )


def write_table_csv(path, header, rows) -> Path:
    """Small helper for study tables: floats get full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([
                _fmt(v) if isinstance(v, float) else v for v in row
            ])
    return path


# --------------------------------------------------------------- SVG plots

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")


@dataclass(frozen=True)
class PlotStyle:
    width: int = 640
    height: int = 420
    title: str = ""
    x_label: str = "t"
    y_label: str = ""
    palette: tuple = PALETTE


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / max(target, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = np.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * span:
        ticks.append(0.0 if abs(v) < 1e-12 * span else float(v))
        v += step
    return ticks


def _fmt_tick(v: float) -> str:
    return f"{v:.6g}"


def emit_svg_plot(series, style: PlotStyle | None = None, path=None) -> Path:
    """Line chart of (label, t, y) series as a standalone SVG file.

    Deterministic: identical input yields byte-identical output.
    """
    if not series:
        raise ValidationError("empty series")
    style = style or PlotStyle()
    cleaned = []
    for label, t, y in series:
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        if t.size == 0 or t.shape != y.shape:
            raise ValidationError(
                f"series {label!r}: t and y must be equal-length and nonempty"
            )
        cleaned.append((str(label), t, y))

    ml, mr, mt, mb = 62, 18, 34, 46
    pw = style.width - ml - mr
    ph = style.height - mt - mb
    x_lo = min(float(t.min()) for _, t, _ in cleaned)
    x_hi = max(float(t.max()) for _, t, _ in cleaned)
    y_lo = min(float(y.min()) for _, _, y in cleaned)
    y_hi = max(float(y.max()) for _, _, y in cleaned)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        pad = max(abs(y_lo), 1.0) * 0.05
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = (y_hi - y_lo) * 0.05
        y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
        f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
        f'<rect width="{style.width}" height="{style.height}" fill="white"/>',
    ]
    if style.title:
        parts.append(
            f'<text x="{style.width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{style.title}</text>'
        )
    # axes box
    parts.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="black" stroke-width="1"/>'
    )
    for tx in _nice_ticks(x_lo, x_hi):
        if tx < x_lo or tx > x_hi:
            continue
        px = sx(tx)
        parts.append(
            f'<line x1="{px:.2f}" y1="{mt + ph}" x2="{px:.2f}" '
            f'y2="{mt + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{mt + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt_tick(tx)}</text>'
        )
    for ty in _nice_ticks(y_lo, y_hi):
        if ty < y_lo or ty > y_hi:
            continue
        py = sy(ty)
        parts.append(
            f'<line x1="{ml - 5}" y1="{py:.2f}" x2="{ml}" y2="{py:.2f}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt_tick(ty)}</text>'
        )
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{style.height - 8}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">'
        f'{style.x_label}</text>'
    )
    if style.y_label:
        parts.append(
            f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{style.y_label}</text>'
        )
    for i, (label, t, y) in enumerate(cleaned):
        color = style.palette[i % len(style.palette)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t, y))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        ly = mt + 14 + 16 * i
        lx = ml + pw - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
    return path
