"""
Multi-kernel correntropy loss (MKCL) toolbox.

The single-channel loss ``sigma^2 (1 - exp(-e^2 / 2 sigma^2))`` behaves like
``e^2 / 2`` for small residuals and saturates at ``sigma^2`` for large ones,
so its derivative (the influence function) redescends to zero. The density
``c exp(-loss)`` is the noise model for which minimizing the MKCL is the
maximum-likelihood choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DimensionMismatch, EmptyInput, QuadratureFailure

DEFAULT_SUPPORT_BOUND = 20.0
QUAD_ABS_TOL = 1e-10

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class KernelBandwidths:
    """Per-channel kernel bandwidths, one positive entry per residual channel."""

    sigma: tuple

    def __post_init__(self):
        sig = tuple(float(s) for s in np.atleast_1d(self.sigma))
        if len(sig) < 1:
            raise ValueError("at least one bandwidth is required")
        if not all(math.isfinite(s) and s > 0 for s in sig):
            raise ValueError(f"bandwidths must be finite and positive, got {sig}")
        object.__setattr__(self, "sigma", sig)

    def __len__(self):
        return len(self.sigma)

    def as_array(self):
        return np.array(self.sigma)

    @classmethod
    def accel_mag(cls, sigma_a, sigma_m):
        """Six channels: three accelerometer axes then three magnetometer axes."""
        return cls((sigma_a,) * 3 + (sigma_m,) * 3)


def gaussian_kernel(e, sigma):
    """``exp(-e^2 / (2 sigma^2))``; vectorizes over ``e``."""
    e = np.asarray(e, dtype=float)
    out = np.exp(-(e * e) / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


def _kernel_loss(e, sigma):
    # -expm1 keeps precision when e^2 / 2 sigma^2 is tiny (large bandwidths)
    return -(sigma * sigma) * np.expm1(-(e * e) / (2.0 * sigma * sigma))


def mkcl_loss(e, bw: KernelBandwidths):
    """MKCL of one residual vector: ``sum_i sigma_i^2 (1 - G_sigma_i(e_i))``."""
    e = np.atleast_1d(np.asarray(e, dtype=float))
    if e.shape != (len(bw),):
        raise DimensionMismatch(f"residual has shape {e.shape}, bandwidths have {len(bw)} channels")
    return float(np.sum(_kernel_loss(e, bw.as_array())))


def ls_loss(e):
    e = np.asarray(e, dtype=float)
    return 0.5 * float(np.sum(e * e))


def mkcl_influence(e, sigma):
    """Derivative of the single-channel MKCL: ``e exp(-e^2 / 2 sigma^2)``."""
    e = np.asarray(e, dtype=float)
    out = e * np.exp(-(e * e) / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


def _unnormalized_density(e, sigma):
    return np.exp(-_kernel_loss(e, sigma))


@dataclass(frozen=True)
class InducedPdf:
    """Density ``c exp(-sigma^2 (1 - G_sigma(e)))`` restricted to ``[-B, B]``."""

    sigma: float
    support_bound: float
    c: float

    def pdf(self, e):
        e = np.asarray(e, dtype=float)
        inside = np.abs(e) <= self.support_bound
        out = np.where(inside, self.c * _unnormalized_density(e, self.sigma), 0.0)
        return float(out) if out.ndim == 0 else out

    def logpdf(self, e):
        e = np.asarray(e, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(
                np.abs(e) <= self.support_bound,
                math.log(self.c) - _kernel_loss(e, self.sigma),
                -np.inf,
            )
        return float(out) if out.ndim == 0 else out


def induced_pdf_build(sigma, support_bound=DEFAULT_SUPPORT_BOUND, abs_tol=QUAD_ABS_TOL):
    """Normalize the MKCL-induced density on ``[-support_bound, support_bound]``.

    The integrand is even, so the integral is twice the one over ``[0, B]``.
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not (support_bound > 0 and math.isfinite(support_bound)):
        raise ValueError(f"support bound must be positive, got {support_bound}")
    half, err = integrate.quad(
        _unnormalized_density, 0.0, support_bound, args=(sigma,),
        epsabs=abs_tol / 2, epsrel=0.0, limit=500,
    )
    if not math.isfinite(half) or err > abs_tol / 2:
        raise QuadratureFailure(f"quadrature error {err:.3g} exceeds tolerance {abs_tol:.3g}")
    return InducedPdf(float(sigma), float(support_bound), 1.0 / (2.0 * half))


def loglik_compare(samples, sigma, support_bound=DEFAULT_SUPPORT_BOUND, pdf: InducedPdf | None = None):
    """Mean log-likelihood of ``samples`` under the MKCL density and under N(0, 1).

    Returns ``(logL_CL, logL_LS)``.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise EmptyInput("no samples given")
    if pdf is None:
        pdf = induced_pdf_build(sigma, support_bound)
    log_cl = float(np.mean(pdf.logpdf(samples)))
    log_ls = float(np.mean(-_LOG_SQRT_2PI - 0.5 * samples * samples))
    return log_cl, log_ls


@dataclass(frozen=True)
class MixtureNoiseModel:
    """``(1 - p) N(0, std^2) + p U(-bound, bound)``."""

    p: float
    gaussian_std: float = 1.0
    uniform_bound: float = 20.0

    def __post_init__(self):
        if not (0.0 <= self.p < 0.5):
            raise ValueError(f"mixture probability must be in [0, 0.5), got {self.p}")
        if self.gaussian_std < 0 or self.uniform_bound <= 0:
            raise ValueError("invalid mixture scale parameters")


def sample_mixture(model: MixtureNoiseModel, n, seed=None, rng=None):
    """Draw ``n`` i.i.d. samples; deterministic for a given ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed) if rng is None else rng
    gauss = rng.normal(0.0, model.gaussian_std, n)
    unif = rng.uniform(-model.uniform_bound, model.uniform_bound, n)
    pick = rng.random(n) < model.p
    return np.where(pick, unif, gauss)


def likelihood_sweep(p_grid, sigma_grid, n, seed, support_bound=DEFAULT_SUPPORT_BOUND):
    """Rows ``(p, sigma, logL_CL, logL_LS)`` over the product of both grids.

    One sample set is drawn per ``p`` (seeded from ``seed`` and the grid
    position) and reused across bandwidths so the curves are comparable.
    """
    pdfs = {s: induced_pdf_build(s, support_bound) for s in sigma_grid}
    rows = []
    for i, p in enumerate(p_grid):
        x = sample_mixture(MixtureNoiseModel(p, uniform_bound=support_bound), n,
                           rng=np.random.default_rng([seed, i]))
        for s in sigma_grid:
            cl, ls = loglik_compare(x, s, support_bound, pdf=pdfs[s])
            rows.append((p, s, cl, ls))
    return rows
