"""Shared builders for the test suite: smooth seeded fields, the Minkowski
gauge-wave extremal, and the BPST-type instanton data ('t Hooft symbols are
test-corpus data, not part of the library)."""

import numpy as np

from gvc.fields import ConnectionField, GridChart, prolong
from gvc.lagrangian import builtin_ym, hessian


def smooth_field(grid, comp_shape, amplitude, seed, waves=None):
    """Band-limited random field: low-mode trig polynomial, seeded."""
    rng = np.random.default_rng(seed)
    if waves is None:
        waves = [(1,) + (0,) * (grid.n - 1), (0, 1) + (0,) * (grid.n - 2), (1, 1) + (0,) * (grid.n - 2)]
        waves = [w[: grid.n] for w in waves]
    lengths = [grid.spacing[ax] * grid.shape[ax] for ax in range(grid.n)]
    out = np.zeros(grid.shape + comp_shape)
    for idx in np.ndindex(comp_shape):
        f = np.zeros(grid.shape)
        for w in waves:
            a, b = rng.normal(size=2)
            arg = sum(2 * np.pi * w[ax] * grid.coord(ax) / lengths[ax] for ax in range(grid.n))
            f += a * np.cos(arg) + b * np.sin(arg)
        out[(...,) + idx] = amplitude * f / np.sqrt(len(waves))
    return out


def gauge_wave(grid, amplitude=0.05, kx=1, kt=2):
    """Pure-gauge plane wave A = d(chi), chi = amplitude sin(2 pi (kx x^1 - kt x^0)).

    An exact continuum extremal for any quadratic curvature Lagrangian (the
    curvature vanishes identically); its discrete residuals are genuinely
    O(h^2) when kx != kt, which makes refinement ratios measurable.
    """
    phase = 2 * np.pi * (kx * grid.coord(1) - kt * grid.coord(0))
    a = np.zeros(grid.shape + (grid.n, 1))
    a[..., 0, 0] = -2 * np.pi * kt * amplitude * np.cos(phase)
    a[..., 1, 0] = 2 * np.pi * kx * amplitude * np.cos(phase)
    return ConnectionField(grid, a)


def radiative_wave(grid, amplitude=0.1):
    """Transverse null wave A_2 = amplitude sin(2 pi (x^1 - x^0)) (needs n >= 3)."""
    a = np.zeros(grid.shape + (grid.n, 1))
    a[..., 2, 0] = amplitude * np.sin(2 * np.pi * (grid.coord(1) - grid.coord(0)))
    return ConnectionField(grid, a)


def minkowski_wave_chart(shape=(64, 64)):
    return GridChart(shape=shape, spacing=tuple(1.0 / s for s in shape), metric="minkowski")


def thooft_symbols(dual=+1):
    """'t Hooft eta symbols (0-based; axis 3 is the euclidean-time slot)."""
    eps3 = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps3[i, j, k] = 1.0
        eps3[i, k, j] = -1.0
    eta = np.zeros((3, 4, 4))
    eta[:, :3, :3] = eps3
    for a in range(3):
        eta[a, a, 3] = dual
        eta[a, 3, a] = -dual
    return eta


def bpst_chart(npts=17, half_width=1.0):
    return GridChart(
        shape=(npts,) * 4,
        spacing=(2.0 * half_width / (npts - 1),) * 4,
        boundary="open",
        origin=(-half_width,) * 4,
    )


def bpst_field(grid, rho=1.0, dual=+1):
    """BPST-type instanton A_i^a = 2 eta^a_{ij} x^j / (|x|^2 + rho^2)."""
    eta = thooft_symbols(dual)
    x = np.stack([grid.coord(ax) for ax in range(4)], axis=-1)
    denom = (np.sum(x**2, axis=-1) + rho**2)[..., None, None]
    a = 2.0 * np.einsum("aij,...j->...ia", eta, x) / denom
    return ConnectionField(grid, a)


def embedded_abelian_su2(grid, values=(0.4, -0.25)):
    """Constant su(2) connection along a single algebra direction: flat, so
    an exact discrete extremal with nontrivial gauge couplings."""
    a = np.zeros(grid.shape + (grid.n, 3))
    for i, val in enumerate(values[: grid.n]):
        a[..., i, 0] = val
    return ConnectionField(grid, a)


def reduced_sigma_min(spec, grid, alg, at=None):
    zero = ConnectionField(grid, np.zeros(grid.shape + (grid.n, alg.dim_g)))
    at = at or tuple(d // 2 for d in grid.shape)
    rep = hessian(spec, prolong(zero), alg, at)
    return float(np.linalg.svd(rep.reduced, compute_uv=False)[-1])
