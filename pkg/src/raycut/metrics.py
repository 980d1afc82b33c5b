"""Mask overlap metrics and cohort summaries.

DSC = 2 V(A & Ref) / (V(A) + V(Ref)); volumes count voxels times the voxel
volume, reported in cm^3/cm^2 assuming mm spacing. Cohort summaries give
min, max, mean and sample standard deviation per column.
"""

import io as _stdio
from dataclasses import dataclass

import numpy as np

from .errors import EmptySet, ShapeMismatch


def _as_binary(mask):
    return np.asarray(mask) > 0


def check_congruent(a, ref):
    a, ref = _as_binary(a), _as_binary(ref)
    if a.shape != ref.shape:
        raise ShapeMismatch(f"mask shapes differ: {a.shape} vs {ref.shape}")
    return a, ref


def dice(a, ref):
    """Overlap in [0, 1]; defined as 0 when both masks are empty."""
    a, ref = check_congruent(a, ref)
    va = int(a.sum())
    vr = int(ref.sum())
    if va + vr == 0:
        return 0.0
    inter = int(np.logical_and(a, ref).sum())
    return 2.0 * inter / (va + vr)


def volume_cm(mask, spacing):
    """Voxel count times voxel volume, scaled mm^dim -> cm^dim."""
    count = int(_as_binary(mask).sum())
    return count * float(np.prod(spacing)) / 10 ** len(tuple(spacing))


@dataclass
class EvalReport:
    case: str
    dsc_percent: float
    vol_auto: float      # cm^3 (cm^2 in 2D)
    vol_ref: float
    voxels_auto: int
    voxels_ref: int
    both_empty: bool = False


def evaluate_pair(auto_mask, ref_mask, spacing, case=""):
    a, ref = check_congruent(auto_mask, ref_mask)
    return EvalReport(
        case=case,
        dsc_percent=100.0 * dice(a, ref),
        vol_auto=volume_cm(a, spacing),
        vol_ref=volume_cm(ref, spacing),
        voxels_auto=int(a.sum()),
        voxels_ref=int(ref.sum()),
        both_empty=bool(a.sum() == 0 and ref.sum() == 0),
    )


_COLUMNS = ("vol_auto", "vol_ref", "voxels_auto", "voxels_ref", "dsc_percent")


def summarize(reports):
    """Per-column min / max / mean / sample stddev (0 for a single report)."""
    if not reports:
        raise EmptySet("no reports to summarize")
    out = {}
    for col in _COLUMNS:
        vals = np.array([getattr(r, col) for r in reports], dtype=np.float64)
        std = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out[col] = {"min": float(vals.min()), "max": float(vals.max()),
                    "mean": float(vals.mean()), "std": std}
    return out


CSV_HEADER = "case,vol_auto_cm3,vol_ref_cm3,voxels_auto,voxels_ref,dsc_percent"


def to_csv(reports, summary=None):
    buf = _stdio.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in reports:
        buf.write(f"{r.case},{r.vol_auto:.6g},{r.vol_ref:.6g},"
                  f"{r.voxels_auto},{r.voxels_ref},{r.dsc_percent:.4f}\n")
    if summary is not None:
        for stat in ("min", "max", "mean", "std"):
            row = [stat] + [f"{summary[c][stat]:.6g}" for c in _COLUMNS]
            buf.write(",".join(row) + "\n")
    return buf.getvalue()


def to_table(reports, summary=None):
    """Aligned text table: volumes, voxel counts and DSC per case plus stats."""
    header = ["case", "Vol auto", "Vol ref", "Vox auto", "Vox ref", "DSC (%)"]
    rows = [[r.case, f"{r.vol_auto:.4g}", f"{r.vol_ref:.4g}",
             str(r.voxels_auto), str(r.voxels_ref), f"{r.dsc_percent:.2f}"]
            for r in reports]
    if summary is not None:
        rows.append(["-" * 4] * len(header))
        for stat in ("min", "max"):
            rows.append([stat] + [f"{summary[c][stat]:.2f}" for c in _COLUMNS])
        rows.append(["mean+-std"] + [
            f"{summary[c]['mean']:.2f}+-{summary[c]['std']:.2f}" for c in _COLUMNS])
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header)] + [fmt.format(*r) for r in rows]
    return "\n".join(lines) + "\n"
