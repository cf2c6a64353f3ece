"""Linearized E-L / H-C operators along a jet field: Jacobi residuals, the
finite-difference linearization oracle, and the kernel decomposition.

The two residual groups are evaluated literally.  Writing Y[w] for the
jet-fibre Hessian contraction sum_{r,i,a} d2L/dA_{r,i}^a dA_{h,j}^s w_{r,i}^a
and N[v] for the mixed contraction sum_{r,a} d2L/dA_r^a dA_{h,j}^s v_r^a:

* second group, free (s, h, j):
      Y[dx(v) - dv]  +  (third-derivative terms contracted with sdiff)
* first group, free (q, s):
      (d2L/dA dA) . v  -  explicit-x and field-derivative third-derivative
      coefficients . v  +  (M2aj^T - M2aj) . dx(v)  -  Y-terms in dx(dv)
      -  (third-derivative coefficients) . dv

Every third derivative of L is a directional derivative of a chain-rule
second derivative; they are computed as central differences in a scalar
parameter along the relevant field direction.  For quadratic curvature
Lagrangians those maps are linear or constant in the fields, so the central
differences are exact (and the identically-zero ones are skipped).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lagrangian as lg
from .fields import (
    RESIDUAL_MASK_RADIUS,
    ConnectionField,
    GridChart,
    JetField,
    JetVariationField,
    TwoTensorField,
    VariationField,
    alt,
    l2_norm,
    max_abs,
    partial,
    prolong,
    prolong_variation,
    second_partial,
)
from .lie import LieAlgebraSpec
from .variational import el_residual


@dataclass(frozen=True)
class JacobiResidual:
    """first[x..., q, sigma] and second[x..., sigma, h, j] residual groups."""

    grid: GridChart
    first: np.ndarray
    second: np.ndarray

    def first_max(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return max_abs(self.grid, self.first, mask_radius)

    def second_max(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return max_abs(self.grid, self.second, mask_radius)

    def first_l2(self, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
        return l2_norm(self.grid, self.first, mask_radius)


def _constant_hessian(spec) -> bool:
    return isinstance(spec, lg.QuadraticCurvatureLagrangian) and spec.q2.ndim == 6


def _has_x_dependence(spec) -> bool:
    return spec.x_shifted(0, +1) is not spec


def _tau(spec, center: np.ndarray, direction: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(center)))) if center.size else 1.0
    dscale = max(1.0, float(np.max(np.abs(direction)))) if direction.size else 1.0
    return spec.h_rel * scale / dscale


def _q2_at(spec, grid: GridChart, alg: LieAlgebraSpec, A: np.ndarray, da: np.ndarray):
    if _constant_hessian(spec):
        return spec.q2
    sbar = JetField(base=ConnectionField(grid, A), da=da)
    return spec.d2_ltilde(lg.curvature(sbar, alg).r)


def _N_of_v(spec, grid, alg, A, da, v):
    """Mixed-block contraction N[v]_{h,j}^s = (d2L/dA_r dA_{h,j}) v_r at (A, da).

    This is a chain rule through the independent curvature components, hence
    the half factor relative to the full coordinate contraction.
    """
    Q2 = _q2_at(spec, grid, alg, A, da)
    return lg.d_ltilde_direction(Q2, lg.domega_base(alg, A, v))


def _Y_of(spec, grid, alg, A, da, w):
    """Hessian contraction Y[w] at (A, da) (w lives in the jet slots)."""
    Q2 = _q2_at(spec, grid, alg, A, da)
    return lg.q2_contract(Q2, w)


def jacobi_residual(
    spec: lg.CurvatureLagrangian,
    sbar: JetField,
    xbar: JetVariationField,
    alg: LieAlgebraSpec,
) -> JacobiResidual:
    """Both linearized residual groups for a jet variation along a jet field."""
    grid = sbar.grid
    n = grid.n
    A = sbar.base.a
    da = sbar.da
    v, dv = xbar.v, xbar.dv
    R = lg.curvature(sbar, alg).r
    P = spec.d_ltilde(R)
    Q2 = spec.d2_ltilde(R)
    sdiff = prolong(sbar.base).da - da  # s_{h,j} - sbar_{h,j}
    dxv = prolong_variation(None, VariationField(grid, v)).dv  # dv_r/dx^i

    # ---- second group: Y[dx(v) - dv] + sdiff-weighted third derivatives ----
    second = lg.q2_contract(Q2, dxv - dv)
    if not _constant_hessian(spec):
        # d/dA_l [Y[sdiff]] . v  and  d/dA_{l,k} [Y[sdiff]] . dv
        tau = _tau(spec, A, v)
        second += (
            _Y_of(spec, grid, alg, A + tau * v, da, sdiff)
            - _Y_of(spec, grid, alg, A - tau * v, da, sdiff)
        ) / (2 * tau)
        tau = _tau(spec, da, dv)
        second += (
            _Y_of(spec, grid, alg, A, da + tau * dv, sdiff)
            - _Y_of(spec, grid, alg, A, da - tau * dv, sdiff)
        ) / (2 * tau)
    second = np.moveaxis(second, -1, -3)  # (x..., sigma, h, j)

    # ---- first group ----
    # (1) full base-base block contracted with v
    dP = lg.d_ltilde_direction(Q2, lg.domega_base(alg, A, v))
    first = lg.dl_dA_base_direction(alg, A, P, v, dP)

    # (2) explicit-x derivative of the mixed block, contracted with v
    if _has_x_dependence(spec):
        dOv = lg.domega_base(alg, A, v)
        for ax in range(n):
            h = grid.spacing[ax]
            Np = lg.d_ltilde_direction(spec.x_shifted(ax, +1).d2_ltilde(R), dOv)
            Nm = lg.d_ltilde_direction(spec.x_shifted(ax, -1).d2_ltilde(R), dOv)
            first -= ((Np - Nm) / (2 * h))[..., :, ax, :]

    # (3) base-derivative third-derivative coefficients: directions W_j = s_{.,j}
    sj = prolong(sbar.base).da
    for j in range(n):
        W = sj[..., :, j, :]
        tau = _tau(spec, A, W)
        dN = (
            _N_of_v(spec, grid, alg, A + tau * W, da, v)
            - _N_of_v(spec, grid, alg, A - tau * W, da, v)
        ) / (2 * tau)
        first -= dN[..., :, j, :]

    # (4) jet-derivative third-derivative coefficients along d2s (zero for
    # constant Hessians)
    d2A = None
    if not _constant_hessian(spec):
        d2A = np.empty(grid.shape + (n, n, n, sbar.m))
        for hh in range(n):
            for j in range(n):
                d2A[..., :, hh, j, :] = second_partial(grid, A, hh, j)
        for j in range(n):
            U = d2A[..., :, :, j, :]
            tau = _tau(spec, da, U)
            dN = (
                _N_of_v(spec, grid, alg, A, da + tau * U, v)
                - _N_of_v(spec, grid, alg, A, da - tau * U, v)
            ) / (2 * tau)
            first -= dN[..., :, j, :]

    # (5) antisymmetric mixed block against dx(v): the transposed mixed block
    # is a jet-coordinate contraction, the direct one a curvature chain rule
    first += lg.dl_dA_jet_direction(alg, A, lg.q2_contract(Q2, dxv))
    for i in range(n):
        Ni = lg.d_ltilde_direction(Q2, lg.domega_base(alg, A, dxv[..., :, i, :]))
        first -= Ni[..., :, i, :]

    # (6) Hessian against the derivative of the jet variation
    for i in range(n):
        Zi = lg.q2_contract(Q2, partial(grid, dv, i))
        first -= Zi[..., :, i, :]

    # (7) third-derivative coefficients contracted with dv
    if _has_x_dependence(spec):
        for ax in range(n):
            h = grid.spacing[ax]
            Yp = lg.q2_contract(spec.x_shifted(ax, +1).d2_ltilde(R), dv)
            Ym = lg.q2_contract(spec.x_shifted(ax, -1).d2_ltilde(R), dv)
            first -= ((Yp - Ym) / (2 * h))[..., :, ax, :]
    if not _constant_hessian(spec):
        for j in range(n):
            W = sj[..., :, j, :]
            tau = _tau(spec, A, W)
            dY = (
                _Y_of(spec, grid, alg, A + tau * W, da, dv)
                - _Y_of(spec, grid, alg, A - tau * W, da, dv)
            ) / (2 * tau)
            first -= dY[..., :, j, :]
            U = d2A[..., :, :, j, :]
            tau = _tau(spec, da, U)
            dY = (
                _Y_of(spec, grid, alg, A, da + tau * U, dv)
                - _Y_of(spec, grid, alg, A, da - tau * U, dv)
            ) / (2 * tau)
            first -= dY[..., :, j, :]

    return JacobiResidual(grid=grid, first=first, second=second)


def jacobi_residual_holonomic(
    spec: lg.CurvatureLagrangian,
    s: ConnectionField,
    X: VariationField,
    alg: LieAlgebraSpec,
) -> np.ndarray:
    """Residual of the second-order linearized E-L operator applied to X.

    Evaluates the first Jacobi group along the prolonged section with the
    holonomically prolonged variation, which is the literal linearization of
    the E-L operator; returns an array (x..., i, alpha).
    """
    jr = jacobi_residual(spec, prolong(s), prolong_variation(s, X), alg)
    return jr.first


def linearize_el_fd(
    spec: lg.CurvatureLagrangian,
    s: ConnectionField,
    X: VariationField,
    alg: LieAlgebraSpec,
    eps: float | None = None,
) -> np.ndarray:
    """Brute-force linearization oracle (el(s + eps X) - el(s - eps X)) / 2 eps.

    Serves as the independent check of both Jacobi operators; the default
    step is 1e-4 scaled by the field magnitudes.
    """
    if eps is None:
        eps = 1e-4 * max(1.0, float(np.max(np.abs(s.a)))) / max(
            1.0, float(np.max(np.abs(X.v)))
        )
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    grid = s.grid
    ep = el_residual(spec, ConnectionField(grid, s.a + eps * X.v), alg).e
    em = el_residual(spec, ConnectionField(grid, s.a - eps * X.v), alg).e
    return (ep - em) / (2 * eps)


def oracle_scale(
    grid: GridChart,
    X: VariationField,
    oracle: np.ndarray,
    mask_radius: int = RESIDUAL_MASK_RADIUS,
) -> float:
    """Smoothness scale for the oracle-equivalence bound.

    The truncation gap between the coefficient-form Jacobi operator and the
    finite-difference linearization is controlled by two extra derivatives of
    the linearized residual, so the bound 5 (eps^2 + h^2) * scale uses
    max(1, |X|, |oracle|, |second differences of the oracle|).
    """
    s = max(1.0, float(np.max(np.abs(X.v))), max_abs(grid, oracle, mask_radius))
    for ax in range(grid.n):
        d2 = partial(grid, partial(grid, oracle, ax), ax)
        s = max(s, max_abs(grid, d2, mask_radius))
    return s


def t2_decompose(
    spec: lg.CurvatureLagrangian,
    sbar: JetField,
    xbar: JetVariationField,
    alg: LieAlgebraSpec,
    mask_radius: int = RESIDUAL_MASK_RADIUS,
) -> tuple[VariationField, TwoTensorField, float]:
    """Split a jet variation as (prolonged variation) + 2-tensor.

    Returns the projected variation X, the tensor t = dv - dx(v), and the
    max-norm of alt(t); for a Jacobi variation along a weakly regular jet
    field the defect is O(h^2) and t is symmetric up to that defect.
    """
    grid = sbar.grid
    X = VariationField(grid, xbar.v)
    t = xbar.dv - prolong_variation(None, X).dv
    tt = TwoTensorField(grid=grid, t=t)
    sym_defect = max_abs(grid, alt(tt).t, mask_radius)
    return X, tt, sym_defect
