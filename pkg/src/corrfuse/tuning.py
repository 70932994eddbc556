"""
Kernel bandwidth selection from disturbance-free residual statistics.

Rule of thumb: ``sigma = 2 d`` where ``d`` is the residual standard
deviation. Nominal residuals then sit inside ``[-sigma, sigma]`` where the
kernel loss behaves like least squares, while a residual at ``3 sigma`` keeps
only ``exp(-4.5) ~ 1.1%`` of its least-squares influence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .doe import _acc_corr, _mag_corr
from .errors import InsufficientData, LengthMismatch, ZeroResidual
from .gd import _errors
from .sensors import EarthField, ImuStream

MIN_SAMPLES = 30
MAD_SCALE = 1.4826

GD_FAMILY = ("gd", "cgd")
DOE_FAMILY = ("doe", "cdoe")


@dataclass(frozen=True)
class ResidualStats:
    d_a: float
    d_m: float
    n: int


def family_of(algo):
    algo = algo.lower()
    if algo in GD_FAMILY:
        return "gd"
    if algo in DOE_FAMILY:
        return "doe"
    raise ValueError(f"unknown algorithm family {algo!r}; expected one of gd, cgd, doe, cdoe")


def residuals(trajectory, stream: ImuStream, earth: EarthField, algo="gd"):
    """Per-sample residuals ``(acc, mag)`` evaluated at the given attitudes.

    For the gradient-descent family these are the six error-quaternion channels
    (accelerometer ``(N, 3)``, magnetometer ``(N, 3)``); for the decoupled
    family the two correction angles (``(N,)`` each, radians).
    """
    traj = np.asarray(trajectory, dtype=float)
    if traj.shape[0] != len(stream):
        raise LengthMismatch(f"trajectory has {traj.shape[0]} rows, stream has {len(stream)}")
    acc = stream.accel / np.linalg.norm(stream.accel, axis=1, keepdims=True)
    mag = stream.mag / np.linalg.norm(stream.mag, axis=1, keepdims=True)
    fam = family_of(algo)
    if fam == "gd":
        e = np.array([
            _errors(*q, earth.m_x, earth.m_z, *a, *m)
            for q, a, m in zip(traj.tolist(), acc.tolist(), mag.tolist())
        ])
        return e[:, :3], e[:, 3:]
    ra = np.array([_acc_corr(*q, *a)[0] for q, a in zip(traj.tolist(), acc.tolist())])
    rm = np.array([_mag_corr(*q, *m)[0] for q, m in zip(traj.tolist(), mag.tolist())])
    return ra, rm


def _spread(x, robust, about_zero):
    x = np.asarray(x, dtype=float).ravel()
    center = 0.0 if about_zero else (np.median(x) if robust else np.mean(x))
    if robust:
        return float(MAD_SCALE * np.median(np.abs(x - center)))
    return float(np.sqrt(np.mean((x - center) ** 2)))


def collect_residuals(trajectory, stream: ImuStream, earth: EarthField, algo="gd", robust=False) -> ResidualStats:
    """Pooled residual standard deviation per sensor.

    ``robust=True`` swaps the plain standard deviation for the scaled median
    absolute deviation, useful when the reference run was not entirely clean.
    """
    n = len(stream)
    if n < MIN_SAMPLES:
        raise InsufficientData(f"need at least {MIN_SAMPLES} samples, got {n}")
    ra, rm = residuals(trajectory, stream, earth, algo)
    # correction angles are magnitudes of a zero-mean signed error, so their
    # spread is taken about zero rather than about their (positive) mean
    about_zero = family_of(algo) == "doe"
    return ResidualStats(_spread(ra, robust, about_zero), _spread(rm, robust, about_zero), n)


def suggest_bandwidths(stats: ResidualStats):
    """``(sigma_a, sigma_m) = (2 d_a, 2 d_m)``."""
    if stats.d_a <= 0 or stats.d_m <= 0:
        raise ZeroResidual(f"residual spread is zero (d_a={stats.d_a}, d_m={stats.d_m}); set bandwidths manually")
    return 2.0 * stats.d_a, 2.0 * stats.d_m


def residual_histogram(ra, rm, bins=41):
    """Shared-edge histograms of both residual sets: ``(centers, count_acc, count_mag)``."""
    ra = np.asarray(ra).ravel()
    rm = np.asarray(rm).ravel()
    lim = float(max(np.max(np.abs(ra)), np.max(np.abs(rm)), 1e-12))
    lo = 0.0 if (ra.min() >= 0 and rm.min() >= 0) else -lim
    edges = np.linspace(lo, lim, bins + 1)
    ca, _ = np.histogram(ra, edges)
    cm, _ = np.histogram(rm, edges)
    return 0.5 * (edges[1:] + edges[:-1]), ca, cm
