"""Per-axis Euler error statistics laid out like the usual RMSE/ME comparison table."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch
from .quaternion import quats_to_euler

AXES = ("yaw", "roll", "pitch")


def wrap_deg(a):
    """Wrap degrees into (-180, 180]."""
    a = np.asarray(a, dtype=float)
    out = -((-a + 180.0) % 360.0 - 180.0)
    return out


def euler_errors(est, truth):
    """Estimate-minus-truth Z-Y-X angle errors in degrees, columns yaw, roll, pitch."""
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape:
        raise LengthMismatch(f"estimate has shape {est.shape}, truth has {truth.shape}")
    e = np.degrees(quats_to_euler(est))
    g = np.degrees(quats_to_euler(truth))
    d = wrap_deg(e - g)
    return d[:, [0, 2, 1]]


def total_angle_errors(est, truth):
    """Geodesic attitude error in degrees per sample."""
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape:
        raise LengthMismatch(f"estimate has shape {est.shape}, truth has {truth.shape}")
    dots = np.clip(np.abs(np.sum(est * truth, axis=1)), 0.0, 1.0)
    return np.degrees(2.0 * np.arccos(dots))


@dataclass(frozen=True)
class ErrorReport:
    algorithm: str
    n: int
    rmse_deg: dict
    max_err_deg: dict
    total_rmse_deg: float = float("nan")

    def as_rows(self):
        return [(self.algorithm, ax, self.rmse_deg[ax], self.max_err_deg[ax]) for ax in AXES]


def summarize(errors, algorithm="est", total=None) -> ErrorReport:
    """RMSE and maximum absolute error per axis from an ``(N, 3)`` error array."""
    errors = np.asarray(errors, dtype=float)
    if errors.ndim != 2 or errors.shape[0] == 0:
        raise EmptyInput("no error samples")
    rmse = np.sqrt(np.mean(errors * errors, axis=0))
    me = np.max(np.abs(errors), axis=0)
    total_rmse = float("nan") if total is None else float(np.sqrt(np.mean(np.square(total))))
    return ErrorReport(
        algorithm, errors.shape[0],
        {ax: float(v) for ax, v in zip(AXES, rmse)},
        {ax: float(v) for ax, v in zip(AXES, me)},
        total_rmse,
    )


def evaluate(est, truth, algorithm="est", t=None, skip_initial=0.0) -> ErrorReport:
    """Errors of ``est`` against ``truth``, dropping samples before ``skip_initial`` s."""
    errors = euler_errors(est, truth)
    total = total_angle_errors(est, truth)
    if skip_initial > 0:
        if t is None:
            raise ValueError("timestamps are needed to skip an initial window")
        keep = np.asarray(t) >= np.asarray(t)[0] + skip_initial
        errors, total = errors[keep], total[keep]
    return summarize(errors, algorithm, total)


def format_table(reports):
    """Aligned text: one row per axis, RMSE columns then ME columns."""
    names = [r.algorithm for r in reports]
    width = max(8, *(len(n) + 1 for n in names))
    head1 = "Axis".ljust(6) + "RMSE (deg)".center(width * len(names)) + " | " + "ME (deg)".center(width * len(names))
    head2 = "".ljust(6) + "".join(n.rjust(width) for n in names) + " | " + "".join(n.rjust(width) for n in names)
    lines = [head1, head2]
    for ax in AXES:
        rm = "".join(f"{r.rmse_deg[ax]:{width}.2f}" for r in reports)
        me = "".join(f"{r.max_err_deg[ax]:{width}.2f}" for r in reports)
        lines.append(ax.ljust(6) + rm + " | " + me)
    return "\n".join(lines)


def format_csv(reports):
    buf = io.StringIO()
    buf.write("algorithm,axis,rmse_deg,max_err_deg\n")
    for r in reports:
        for alg, ax, rm, me in r.as_rows():
            buf.write(f"{alg},{ax},{rm:.6f},{me:.6f}\n")
        if not math.isnan(r.total_rmse_deg):
            buf.write(f"{r.algorithm},total,{r.total_rmse_deg:.6f},\n")
    return buf.getvalue()
