"""Euler-Lagrange and Hamilton-Cartan residual operators, plus the verifier
for the affine fibration of H-C solutions over E-L solutions.

The H-C residual splits into two groups evaluated literally along a jet
field sbar (with s the prolongation of its base):

* first (algebraic) group, indexed (alpha, i, k):
      (s_{h,j}^b - sbar_{h,j}^b) * d2L/dA_{i,k}^a dA_{h,j}^b
* second (divergence) group, indexed (alpha, i):
      -d/dx^j (dL/dA_{i,j}^a o sbar) + dL/dA_i^a o sbar
      + (s_{h,j}^b - sbar_{h,j}^b) * d2L/dA_i^a dA_{h,j}^b

On holonomic input the difference terms vanish identically and the second
group *is* the E-L residual, bit for bit (same code path).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lagrangian as lg
from .fields import (
    RESIDUAL_MASK_RADIUS,
    ConnectionField,
    GridChart,
    JetField,
    TwoTensorField,
    alt,
    delta_C,
    l2_norm,
    max_abs,
    partial,
    prolong,
)
from .lie import LieAlgebraSpec


@dataclass(frozen=True)
class ELResidualField:
    """E-L residual values e[x..., i, alpha] with norm summaries."""

    grid: GridChart
    e: np.ndarray

    def max_norm(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return max_abs(self.grid, self.e, mask_radius)

    def l2(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return l2_norm(self.grid, self.e, mask_radius)


@dataclass(frozen=True)
class HCResidualPair:
    """H-C residual groups: first[x..., alpha, i, k], second[x..., alpha, i]."""

    grid: GridChart
    first: np.ndarray
    second: np.ndarray

    def first_max(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return max_abs(self.grid, self.first, mask_radius)

    def second_max(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return max_abs(self.grid, self.second, mask_radius)

    def first_l2(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return l2_norm(self.grid, self.first, mask_radius)

    def second_l2(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return l2_norm(self.grid, self.second, mask_radius)


def _second_group(
    spec: lg.CurvatureLagrangian,
    sbar: JetField,
    alg: LieAlgebraSpec,
    sdiff: np.ndarray | None,
    R: np.ndarray,
    P: np.ndarray,
) -> np.ndarray:
    """Core of the divergence group, shape (x..., i, alpha).

    The divergence is the finite difference of the composed field
    dL/dA_{i,j} o sbar (not a chain rule), which keeps the holonomic
    reduction to the E-L residual exact: with sdiff identically zero the
    mixed-derivative term adds signed zeros, which leave every float intact.
    """
    grid = sbar.grid
    div = np.zeros(P.shape[:-2] + P.shape[-1:])
    for j in range(grid.n):
        div += partial(grid, P[..., :, j, :], j)
    core = lg.dl_dA(spec, sbar, alg, P=P) - div
    if sdiff is not None:
        Q2 = spec.d2_ltilde(R)
        core += lg.dl_dA_jet_direction(alg, sbar.base.a, lg.q2_contract(Q2, sdiff))
    return core


def el_residual(
    spec: lg.CurvatureLagrangian, s: ConnectionField, alg: LieAlgebraSpec
) -> ELResidualField:
    """E-L residual dL/dA_i^a o j1s - d/dx^j (dL/dA_{i,j}^a o j1s)."""
    sbar = prolong(s)
    R = lg.curvature(sbar, alg).r
    P = spec.d_ltilde(R)
    e = _second_group(spec, sbar, alg, None, R, P)
    return ELResidualField(grid=s.grid, e=e)


def hc_residual(
    spec: lg.CurvatureLagrangian, sbar: JetField, alg: LieAlgebraSpec
) -> HCResidualPair:
    """Both H-C residual groups along a jet field."""
    grid = sbar.grid
    R = lg.curvature(sbar, alg).r
    P = spec.d_ltilde(R)
    sdiff = prolong(sbar.base).da - sbar.da
    Q2 = spec.d2_ltilde(R)
    # first[..., i, k, a] = sum_{h,j,b} sdiff_{h,j}^b Q2[i,k,a,h,j,b]
    first = np.einsum("...ikahjb,...hjb->...ika", np.asarray(Q2), sdiff)
    first = np.moveaxis(first, -1, -3)  # -> (..., alpha, i, k)
    second = _second_group(spec, sbar, alg, sdiff, R, P)
    second = np.moveaxis(second, -1, -2)  # -> (..., alpha, i)
    return HCResidualPair(grid=grid, first=first, second=second)


# -- generic first-order fields (Lemma form of the H-C equations) ------------


@dataclass(frozen=True)
class GenericLagrangian:
    """First-order Lagrangian L(x, y, yx) over fields y^a(x), via callbacks.

    ``yx`` has shape (x..., m, n) (field slot, then derivative slot).  The
    callbacks return: dl_dy (x..., m), dl_dyi (x..., m, n), the velocity
    Hessian d2_dyi_dyj (x..., m, n, m, n) and the mixed block d2_dy_dyj
    (x..., m, m, n); constant arrays broadcast.
    """

    dl_dy: callable
    dl_dyi: callable
    d2_dyi_dyj: callable
    d2_dy_dyj: callable
    l: callable = None


@dataclass(frozen=True)
class GenericJetField:
    """Section of the first jet of a trivial fibration: y and independent yx."""

    grid: GridChart
    y: np.ndarray  # (x..., m)
    yx: np.ndarray  # (x..., m, n)


@dataclass(frozen=True)
class GenericHCResidual:
    grid: GridChart
    first: np.ndarray  # (x..., alpha, i)
    second: np.ndarray  # (x..., alpha)

    def first_max(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return max_abs(self.grid, self.first, mask_radius)

    def second_max(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return max_abs(self.grid, self.second, mask_radius)


def hc_residual_generic(L: GenericLagrangian, sbar: GenericJetField) -> GenericHCResidual:
    """Literal H-C residuals in a generic chart.

    first[a, i]  = (s_j^b - sbar_j^b) d2L/dy_i^a dy_j^b
    second[a]    = -d/dx^j(dL/dy_j^a o sbar) + dL/dy^a o sbar
                   + (s_j^b - sbar_j^b) d2L/dy^a dy_j^b
    """
    grid = sbar.grid
    sj = np.stack([partial(grid, sbar.y, j) for j in range(grid.n)], axis=-1)
    diff = sj - sbar.yx  # (x..., b, j)
    hess = np.asarray(L.d2_dyi_dyj(sbar.y, sbar.yx))
    first = np.einsum("...aibj,...bj->...ai", hess, diff)
    p = np.asarray(L.dl_dyi(sbar.y, sbar.yx))
    p = np.broadcast_to(p, sbar.yx.shape)
    div = np.zeros(sbar.y.shape)
    for j in range(grid.n):
        div += partial(grid, p[..., :, j], j)
    mixed = np.asarray(L.d2_dy_dyj(sbar.y, sbar.yx))
    second = -div + np.asarray(L.dl_dy(sbar.y, sbar.yx)) + np.einsum(
        "...abj,...bj->...a", mixed, diff
    )
    return GenericHCResidual(grid=grid, first=first, second=second)


# -- Theorem 1 verifier ------------------------------------------------------


@dataclass(frozen=True)
class FibrationReport:
    el_norm: float
    hc_first_norm: float
    hc_second_norm: float
    curv_defect: float
    alt_delta_norm: float
    kernel_dim: int | None = None
    kernel_dim_expected: int | None = None
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "el_norm": self.el_norm,
            "hc_first_norm": self.hc_first_norm,
            "hc_second_norm": self.hc_second_norm,
            "curv_defect": self.curv_defect,
            "alt_delta_norm": self.alt_delta_norm,
            "kernel_dim": self.kernel_dim,
            "kernel_dim_expected": self.kernel_dim_expected,
        }
        d.update(self.extras)
        return d


def kernel_dimension(
    spec: lg.CurvatureLagrangian,
    sbar: JetField,
    alg: LieAlgebraSpec,
    points: list[tuple[int, ...]],
    rcond: float = 1e-9,
) -> list[int]:
    """Pointwise kernel dimensions of the first H-C group linear system.

    At each point the sdiff unknowns form a vector of length m*n^2 and the
    first group is a square matrix acting on it; for a weakly regular
    Lagrangian the kernel is the symmetric subspace, dimension m*n(n+1)/2.
    """
    n, m = sbar.grid.n, sbar.m
    R = lg.curvature(sbar, alg).r
    Q2 = np.asarray(spec.d2_ltilde(R))
    dims = []
    for pt in points:
        q = Q2[tuple(pt)] if Q2.ndim > 6 else Q2
        # matrix M[(a,i,k), (b,h,j)] acting on vec(d_{h,j}^b)
        M = np.transpose(q, (2, 0, 1, 5, 3, 4)).reshape(m * n * n, m * n * n)
        rank = int(np.linalg.matrix_rank(M, tol=rcond * np.linalg.norm(M, 2)))
        dims.append(m * n * n - rank)
    return dims


def verify_fibration(
    spec: lg.CurvatureLagrangian,
    s: ConnectionField,
    t: TwoTensorField,
    alg: LieAlgebraSpec,
    kernel_points: int = 0,
    rng: np.random.Generator | None = None,
    mask_radius: int = RESIDUAL_MASK_RADIUS,
) -> FibrationReport:
    """Measure every quantity in the fibration statement for sbar = j1(s) + t.

    Reports the E-L norm of the base, both H-C residual norms of the shifted
    jet field, the curvature-constancy defect (algebraically zero for
    symmetric t), and the antisymmetrized jet deviation.
    """
    grid = s.grid
    el = el_residual(spec, s, alg)
    js = prolong(s)
    sbar = JetField(base=s, da=js.da + t.t, holonomic=False)
    hc = hc_residual(spec, sbar, alg)
    curv_defect = max_abs(
        grid,
        lg.curvature(sbar, alg).r - lg.curvature(js, alg).r,
        mask_radius,
    )
    alt_delta = max_abs(grid, alt(delta_C(sbar)).t, mask_radius)
    kdim = None
    expected = None
    if kernel_points > 0:
        rng = rng or np.random.default_rng(0)
        mask = grid.interior_mask(mask_radius)
        idx = np.argwhere(mask)
        sel = idx[rng.integers(0, len(idx), size=kernel_points)]
        dims = kernel_dimension(spec, sbar, alg, [tuple(p) for p in sel])
        kdim = int(dims[0]) if len(set(dims)) == 1 else -1
        expected = sbar.m * grid.n * (grid.n + 1) // 2
    return FibrationReport(
        el_norm=el.max_norm(mask_radius),
        hc_first_norm=hc.first_max(mask_radius),
        hc_second_norm=hc.second_max(mask_radius),
        curv_defect=curv_defect,
        alt_delta_norm=alt_delta,
        kernel_dim=kdim,
        kernel_dim_expected=expected,
    )
