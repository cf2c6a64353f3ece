"""Curvature map and curvature-space Lagrangians with first/second partials.

A gauge-invariant Lagrangian never exists here as a free function of the jet
coordinates: it is represented as Ltilde composed with the curvature map

    R_ij^alpha = A_{i,j}^alpha - A_{j,i}^alpha - c^alpha_{bg} A_i^b A_j^g,

and all jet-coordinate partials are chain rules through that map.  The
derivative array conventions:

* ``d_ltilde(R)`` returns the independent partials dLtilde/dR_ij (i < j)
  extended antisymmetrically to full (x..., i, j, alpha) storage with zero
  diagonal; with this convention dL/dA_{i,j}^alpha equals the array entry.
* ``d2_ltilde(R)`` returns the second independent partials extended the same
  way in both index pairs, shape broadcastable to
  (x..., i, j, alpha, k, l, beta); this extension *is* the full jet-fibre
  Hessian dL/dA_{i,j} dA_{k,l} (rows with i == j vanish identically).

For constant-Hessian (quadratic) Lagrangians these arrays carry no grid axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import GridChart, JetField
from .hodge import form_basis
from .lie import AdInvariantPairing, LieAlgebraSpec


@dataclass(frozen=True)
class CurvatureField:
    """Curvature samples r[x..., i, j, alpha], bitwise antisymmetric in (i, j)."""

    grid: GridChart
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        n = self.grid.n
        expected = self.grid.shape + (n, n, r.shape[-1])
        if r.shape != expected:
            raise ValueError(f"curvature array must have shape {expected}, got {r.shape}")
        if np.max(np.abs(r + np.swapaxes(r, n, n + 1))) != 0.0:
            raise ValueError("curvature array is not exactly antisymmetric")
        object.__setattr__(self, "r", r)

    @property
    def m(self) -> int:
        return self.r.shape[-1]


def curvature(sbar: JetField, alg: LieAlgebraSpec) -> CurvatureField:
    """Evaluate the curvature map on a jet field.

    Only the antisymmetric part of the jet slots enters; the result is
    re-mirrored over i < j so antisymmetry is exact in floating point.
    """
    grid = sbar.grid
    n = grid.n
    if sbar.m != alg.dim_g:
        raise ValueError(f"jet field has m={sbar.m}, algebra has dim_g={alg.dim_g}")
    A = sbar.base.a
    da = sbar.da
    quad = np.einsum("abg,...ib,...jg->...ija", alg.c, A, A)
    r = da - np.swapaxes(da, -3, -2) - quad
    for i in range(n):
        r[..., i, i, :] = 0.0
        for j in range(i):
            r[..., i, j, :] = -r[..., j, i, :]
    return CurvatureField(grid=grid, r=r)


class CurvatureLagrangian:
    """Base class: a function of curvature with first/second partials.

    Subclasses implement ``ltilde``; the derivative arrays fall back to
    central differences in curvature space with a per-component step
    1e-4 * max(1, |R|) (nested, with the same step, for second derivatives).
    """

    analytic = False
    h_rel = 1e-4

    def ltilde(self, R: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- numeric fallbacks ------------------------------------------------

    def _steps(self, R: np.ndarray) -> np.ndarray:
        return self.h_rel * np.maximum(1.0, np.abs(R))

    def d_ltilde(self, R: np.ndarray) -> np.ndarray:
        n, m = R.shape[-3], R.shape[-1]
        out = np.zeros_like(R)
        steps = self._steps(R)
        for i, j in form_basis(n, 2):
            for a in range(m):
                d = steps[..., i, j, a]
                Rp = R.copy()
                Rp[..., i, j, a] += d
                Rp[..., j, i, a] -= d
                Rm = R.copy()
                Rm[..., i, j, a] -= d
                Rm[..., j, i, a] += d
                val = (self.ltilde(Rp) - self.ltilde(Rm)) / (2.0 * d)
                out[..., i, j, a] = val
                out[..., j, i, a] = -val
        return out

    def d2_ltilde(self, R: np.ndarray) -> np.ndarray:
        n, m = R.shape[-3], R.shape[-1]
        lead = R.shape[:-3]
        pairs = form_basis(n, 2)
        steps = self._steps(R)
        q = np.zeros(lead + (n, n, m, n, n, m))
        for k, l in pairs:
            for b in range(m):
                d = steps[..., k, l, b]
                Rp = R.copy()
                Rp[..., k, l, b] += d
                Rp[..., l, k, b] -= d
                Rm = R.copy()
                Rm[..., k, l, b] -= d
                Rm[..., l, k, b] += d
                col = (self.d_ltilde(Rp) - self.d_ltilde(Rm)) / (2.0 * d)[..., None, None, None]
                q[..., :, :, :, k, l, b] = col
                q[..., :, :, :, l, k, b] = -col
        # enforce symmetry under swapping the (i,j,alpha) and (k,l,beta) slots
        qt = np.moveaxis(q, (-6, -5, -4, -3, -2, -1), (-3, -2, -1, -6, -5, -4))
        return 0.5 * (q + qt)

    # -- hooks -------------------------------------------------------------

    def x_shifted(self, axis: int, sign: int) -> "CurvatureLagrangian":
        """Coefficients evaluated one grid step away (for explicit-x partials).

        The default has no explicit x-dependence and returns self, which makes
        the explicit-x third-derivative terms exactly zero.
        """
        return self


class QuadraticCurvatureLagrangian(CurvatureLagrangian):
    """Ltilde(R) = (1/8) q2[ij a, kl b] R_ij^a R_kl^b with constant Hessian q2.

    ``q2`` is the full antisymmetric extension in both pairs; over independent
    components this is Ltilde = sum_{I,J} coeff[I a, J b] R_I^a R_J^b with
    coeff = q2/2 on pairs.
    """

    analytic = True

    def __init__(self, q2: np.ndarray, chart: GridChart | None = None):
        q2 = np.asarray(q2, dtype=float)
        if q2.ndim < 6:
            raise ValueError(f"q2 must have at least 6 axes, got shape {q2.shape}")
        self.q2 = q2
        self.chart = chart

    def ltilde(self, R: np.ndarray) -> np.ndarray:
        return 0.125 * np.einsum("...ijaklb,...ija,...klb->...", self.q2, R, R)

    def d_ltilde(self, R: np.ndarray) -> np.ndarray:
        return 0.5 * np.einsum("...ijaklb,...klb->...ija", self.q2, R)

    def d2_ltilde(self, R: np.ndarray) -> np.ndarray:
        return self.q2

    def x_shifted(self, axis: int, sign: int) -> "QuadraticCurvatureLagrangian":
        if self.q2.ndim == 6:  # constant coefficients: no explicit x-dependence
            return self
        return QuadraticCurvatureLagrangian(np.roll(self.q2, -sign, axis=axis), self.chart)


def builtin_ym(chart: GridChart, pairing: AdInvariantPairing) -> QuadraticCurvatureLagrangian:
    """Quadratic curvature Lagrangian ((R, R)) from the chart metric and pairing.

    Ltilde = sum_{i<j, k<l} g2(dx^i^dx^j, dx^k^dx^l) k_ab R_ij^a R_kl^b, scaled
    by the volume density sqrt|det g| (a constant for constant metrics), so the
    residual operators see the full density coefficient.
    """
    k = pairing.k
    if abs(np.linalg.det(k)) < 1e-12:
        raise ValueError("builtin_ym requires a nondegenerate pairing (det k = 0)")
    g = chart.metric
    ginv = np.linalg.inv(g)
    dens = np.sqrt(np.abs(np.linalg.det(g)))
    # full-extension 2-form gram: G[i,j,k,l] = ginv_ik ginv_jl - ginv_il ginv_jk
    G = np.einsum("...ik,...jl->...ijkl", ginv, ginv) - np.einsum(
        "...il,...jk->...ijkl", ginv, ginv
    )
    q2 = 2.0 * np.einsum("...,...ijkl,ab->...ijaklb", np.asarray(dens), G, k)
    return QuadraticCurvatureLagrangian(q2, chart)


def custom_quadratic(
    coefficients: np.ndarray, n: int, m: int
) -> QuadraticCurvatureLagrangian:
    """Quadratic Lagrangian from a symmetric matrix over (alpha, i<j) pairs.

    ``coefficients`` is indexed [(a, I), (b, J)] with alpha slowest and I over
    the increasing pair basis; Ltilde = sum coeff * R_I^a R_J^b.
    """
    pairs = form_basis(n, 2)
    P = len(pairs)
    C = np.asarray(coefficients, dtype=float)
    if C.shape != (m * P, m * P):
        raise ValueError(
            f"coefficients must be ({m * P}, {m * P}) over (alpha, i<j) pairs, got {C.shape}"
        )
    if np.max(np.abs(C - C.T)) > 1e-12:
        raise ValueError("coefficients matrix must be symmetric")
    q2 = np.zeros((n, n, m, n, n, m))
    for a in range(m):
        for p, (i, j) in enumerate(pairs):
            for b in range(m):
                for q, (kk, ll) in enumerate(pairs):
                    v = 2.0 * C[a * P + p, b * P + q]
                    q2[i, j, a, kk, ll, b] = v
                    q2[j, i, a, kk, ll, b] = -v
                    q2[i, j, a, ll, kk, b] = -v
                    q2[j, i, a, ll, kk, b] = v
    return QuadraticCurvatureLagrangian(q2)


class CallbackCurvatureLagrangian(CurvatureLagrangian):
    """Wrap user callbacks; missing derivative callbacks use the FD fallback."""

    def __init__(self, ltilde, d_ltilde=None, d2_ltilde=None, analytic=False):
        self._lt = ltilde
        self._d1 = d_ltilde
        self._d2 = d2_ltilde
        self.analytic = analytic

    def ltilde(self, R):
        return self._lt(R)

    def d_ltilde(self, R):
        if self._d1 is not None:
            return self._d1(R)
        return super().d_ltilde(R)

    def d2_ltilde(self, R):
        if self._d2 is not None:
            return self._d2(R)
        return super().d2_ltilde(R)


#: spec-facing alias: a Lagrangian given by (ltilde, d_ltilde, d2_ltilde) callbacks
LagrangianSpec = CallbackCurvatureLagrangian


# -- pointwise evaluations -------------------------------------------------


def l_eval(spec: CurvatureLagrangian, sbar: JetField, alg: LieAlgebraSpec) -> np.ndarray:
    """Scalar density field of the Lagrangian along a jet field."""
    return spec.ltilde(curvature(sbar, alg).r)


def dl_dAij(spec: CurvatureLagrangian, sbar: JetField, alg: LieAlgebraSpec) -> np.ndarray:
    """dL/dA_{i,j}^alpha along a jet field: the curvature partials themselves."""
    P = spec.d_ltilde(curvature(sbar, alg).r)
    return np.broadcast_to(P, sbar.da.shape).copy() if P.shape != sbar.da.shape else P


def dl_dA(
    spec: CurvatureLagrangian,
    sbar: JetField,
    alg: LieAlgebraSpec,
    P: np.ndarray | None = None,
) -> np.ndarray:
    """dL/dA_i^alpha along a jet field, by the chain rule through the curvature.

    Differentiating the quadratic term of the curvature map gives
    dL/dA_i^a = -c^b_{a g} A_j^g dLtilde/dR_ij^b (summed over j, b, g).
    """
    if P is None:
        P = spec.d_ltilde(curvature(sbar, alg).r)
    A = sbar.base.a
    return -np.einsum("bag,...jg,...ijb->...ia", alg.c, A, P)


# -- chain-rule directional helpers (shared by variational and jacobi) ------


def domega_base(alg: LieAlgebraSpec, A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Directional derivative of the curvature map in a base direction w:
    dR_uv = -[w_u, A_v] - [A_u, w_v]."""
    t = np.einsum("abg,...ub,...vg->...uva", alg.c, w, A)
    t += np.einsum("abg,...ub,...vg->...uva", alg.c, A, w)
    return -t


def domega_jet(dw: np.ndarray) -> np.ndarray:
    """Directional derivative of the curvature map in a jet direction dw."""
    return dw - np.swapaxes(dw, -3, -2)


def q2_contract(Q2: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Full jet-coordinate contraction of the extended Hessian with w.

    Yw[..., h, j, s] = sum over all (r, i, a) of Q2[r,i,a,h,j,s] w[..., r,i,a];
    this is the jet-fibre Hessian d2L/dA_{r,i} dA_{h,j} acting on a
    coordinate-indexed array.  NOTE: a chain rule through the *independent*
    curvature components R_{u<v} is half of this full contraction (see
    :func:`d_ltilde_direction`).
    """
    return np.einsum("...riahjs,...ria->...hjs", Q2, w)


def d_ltilde_direction(Q2: np.ndarray, dR: np.ndarray) -> np.ndarray:
    """Variation of the curvature partials under a curvature variation dR.

    dP = (dP/dR_{u<v}) dR_{uv} summed over independent components, which for
    antisymmetric dR is half the full contraction.
    """
    return 0.5 * q2_contract(Q2, dR)


def dl_dA_base_direction(
    alg: LieAlgebraSpec, A: np.ndarray, P: np.ndarray, w: np.ndarray, dP: np.ndarray
) -> np.ndarray:
    """Derivative of dl_dA along the base direction w (the base-base Hessian
    contracted with w).

    ``dP`` must be d_ltilde_direction(Q2, domega_base(alg, A, w)).
    """
    out = np.einsum("bag,...jg,...ijb->...ia", alg.c, w, P)
    out += np.einsum("bag,...jg,...ijb->...ia", alg.c, A, dP)
    return -out


def dl_dA_jet_direction(alg: LieAlgebraSpec, A: np.ndarray, Yjet: np.ndarray) -> np.ndarray:
    """Mixed block d2L/dA_i^a dA_{h,j}^b contracted with a jet-coordinate
    array dw over all (h, j, b); ``Yjet`` must be q2_contract(Q2, dw)."""
    return -np.einsum("bag,...jg,...ijb->...ia", alg.c, A, Yjet)


# -- Hessian reports ---------------------------------------------------------


@dataclass(frozen=True)
class HessianReport:
    """Jet-fibre Hessian data of the induced Lagrangian at one grid point.

    ``full`` is indexed by (alpha, i, j) pairs (alpha slowest), ``reduced`` by
    (alpha, I) with I over the increasing pair basis: the reduced matrix is
    the curvature-space Hessian of Ltilde whose nondegeneracy is the weak
    regularity condition.
    """

    full: np.ndarray
    reduced: np.ndarray
    reduced_det: float
    reduced_cond: float
    singular_rows_ok: bool
    n: int
    m: int

    @property
    def weakly_regular(self) -> bool:
        return abs(self.reduced_det) > 0.0


def hessian(
    spec: CurvatureLagrangian,
    sbar: JetField,
    alg: LieAlgebraSpec,
    at: tuple[int, ...],
) -> HessianReport:
    """Assemble the full and reduced Hessians at a grid point."""
    grid = sbar.grid
    n, m = grid.n, sbar.m
    R = curvature(sbar, alg).r
    Q2 = np.asarray(spec.d2_ltilde(R))
    if Q2.ndim > 6:
        Q2 = Q2[tuple(at)]
    full = np.transpose(Q2, (2, 0, 1, 5, 3, 4)).reshape(m * n * n, m * n * n)
    pairs = form_basis(n, 2)
    P = len(pairs)
    reduced = np.empty((m * P, m * P))
    for a in range(m):
        for p, (i, j) in enumerate(pairs):
            for b in range(m):
                for q, (k, l) in enumerate(pairs):
                    reduced[a * P + p, b * P + q] = Q2[i, j, a, k, l, b]
    rows_ok = True
    for a in range(m):
        for i in range(n):
            if np.any(full[a * n * n + i * n + i, :] != 0.0):
                rows_ok = False
    det = float(np.linalg.det(reduced))
    svals = np.linalg.svd(reduced, compute_uv=False)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else float("inf")
    return HessianReport(
        full=full,
        reduced=reduced,
        reduced_det=det,
        reduced_cond=cond,
        singular_rows_ok=rows_ok,
        n=n,
        m=m,
    )
