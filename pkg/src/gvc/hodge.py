"""Metric machinery: form grams, Hodge star on algebra-valued forms, wedge
pairing, Yang-Mills covariant-divergence cross-check, self-duality verifier.

Degree-r forms are stored over the increasing multi-index basis,
``coeffs[x..., I, alpha]`` with ``I`` enumerating ``itertools.combinations``
of the axes.  The curvature field's full antisymmetric storage converts to
and from the degree-2 basis with :func:`pairs_from_full` / :func:`full_from_pairs`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fields import ConnectionField, GridChart, JetField, max_abs, partial
from .lie import AdInvariantPairing, LieAlgebraSpec


def form_basis(n: int, r: int) -> list[tuple[int, ...]]:
    """Increasing multi-indices of length r over n axes."""
    return list(itertools.combinations(range(n), r))


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def pairs_from_full(full: np.ndarray, n: int) -> np.ndarray:
    """(x..., i, j, alpha) antisymmetric storage -> (x..., P, alpha) pair storage."""
    basis = form_basis(n, 2)
    return np.stack([full[..., i, j, :] for (i, j) in basis], axis=-2)

def full_from_pairs(pairs: np.ndarray, n: int) -> np.ndarray:
    """(x..., P, alpha) pair storage -> full antisymmetric (x..., i, j, alpha)."""
    basis = form_basis(n, 2)
    lead = pairs.shape[:-2]
    m = pairs.shape[-1]
    full = np.zeros(lead + (n, n, m))
    for p, (i, j) in enumerate(basis):
        full[..., i, j, :] = pairs[..., p, :]
        full[..., j, i, :] = -pairs[..., p, :]
    return full


def gram(ginv: np.ndarray, r: int) -> np.ndarray:
    """Gram matrix of the induced metric on r-forms over the increasing basis.

    ``gram[I, J] = det( ginv[I_a, J_b] )_{a,b}`` per the determinant formula
    for the metric on wedge powers; ``ginv`` may carry leading grid axes.
    """
    n = ginv.shape[-1]
    basis = form_basis(n, r)
    lead = ginv.shape[:-2]
    out = np.empty(lead + (len(basis), len(basis)))
    for a, I in enumerate(basis):
        for b, J in enumerate(basis):
            minor = ginv[..., np.ix_(I, J)[0], np.ix_(I, J)[1]]
            out[..., a, b] = np.linalg.det(minor) if r > 1 else ginv[..., I[0], J[0]]
    return out


@dataclass(frozen=True)
class MetricContext:
    """Precomputed metric data for Hodge operations on a chart.

    Carries the inverse metric, the volume density sqrt|det g|, the sign of
    det g, and the 2-form Gram matrix; all broadcast against grid axes (a
    constant metric keeps plain matrix shapes).
    """

    chart: GridChart
    ginv: np.ndarray
    sqrt_det: np.ndarray
    det_sign: int
    gram2: np.ndarray

    @classmethod
    def from_chart(cls, chart: GridChart) -> "MetricContext":
        g = chart.metric
        det = np.linalg.det(g)
        signs = np.sign(np.atleast_1d(det))
        if np.min(np.abs(det)) < 1e-14:
            raise ValueError("degenerate metric: |det g| ~ 0")
        if not np.all(signs == signs.flat[0]):
            raise ValueError("metric determinant changes sign across the grid")
        ginv = np.linalg.inv(g)
        return cls(
            chart=chart,
            ginv=ginv,
            sqrt_det=np.sqrt(np.abs(det)),
            det_sign=int(signs.flat[0]),
            gram2=gram(ginv, 2),
        )

    @property
    def n(self) -> int:
        return self.chart.n

    @property
    def riemannian(self) -> bool:
        return self.chart.signature[1] == 0

    def gram_r(self, r: int) -> np.ndarray:
        if r == 2:
            return self.gram2
        return gram(self.ginv, r)


@dataclass(frozen=True)
class AdValuedForm:
    """Algebra-valued differential form: coeffs[x..., I, alpha] over the basis."""

    chart: GridChart
    degree: int
    coeffs: np.ndarray

    @property
    def basis(self) -> list[tuple[int, ...]]:
        return form_basis(self.chart.n, self.degree)

    @property
    def m(self) -> int:
        return self.coeffs.shape[-1]


def two_form(ctx_or_chart, full: np.ndarray) -> AdValuedForm:
    chart = ctx_or_chart.chart if isinstance(ctx_or_chart, MetricContext) else ctx_or_chart
    return AdValuedForm(chart=chart, degree=2, coeffs=pairs_from_full(full, chart.n))


def hodge_star_form(form: AdValuedForm, ctx: MetricContext) -> AdValuedForm:
    """Hodge star on an algebra-valued r-form (the algebra slot is untouched).

    Defined by ``dx^I wedge star(w) = gram_r(dx^I, w) * vol_g`` for every
    increasing I, which fixes the complementary coefficients as
    ``(star w)_{I^c} = sign(I, I^c) * sqrt|det g| * sum_J gram_r[I, J] w_J``.
    """
    n = ctx.n
    r = form.degree
    basis_r = form_basis(n, r)
    basis_c = form_basis(n, n - r)
    gr = ctx.gram_r(r)
    # paired[..., I, alpha] = sqrt|det g| * sum_J gram[I, J] w_J
    paired = np.einsum("...pq,...qa->...pa", gr, form.coeffs)
    paired = paired * np.asarray(ctx.sqrt_det)[..., None, None]
    out = np.empty(form.coeffs.shape[:-2] + (len(basis_c), form.m))
    pos = {K: k for k, K in enumerate(basis_c)}
    for p, I in enumerate(basis_r):
        comp = tuple(sorted(set(range(n)) - set(I)))
        out[..., pos[comp], :] = _perm_sign(I + comp) * paired[..., p, :]
    return AdValuedForm(chart=form.chart, degree=n - r, coeffs=out)


def hodge_star(F, ctx: MetricContext):
    """Star of a curvature field (full antisymmetric storage), n = 4 only.

    For other dimensions use :func:`hodge_star_form`, which returns the
    (n-2)-form over its own basis.
    """
    from .lagrangian import CurvatureField

    if not isinstance(F, CurvatureField):
        raise TypeError("hodge_star expects a CurvatureField; use hodge_star_form for raw forms")
    if ctx.n != 4:
        raise ValueError(f"curvature-to-curvature star needs n=4, got n={ctx.n}")
    starred = hodge_star_form(two_form(ctx, F.r), ctx)
    return CurvatureField(grid=F.grid, r=full_from_pairs(starred.coeffs, 4))


def wedge_dot(
    F: AdValuedForm,
    G: AdValuedForm,
    ctx: MetricContext,
    pairing: AdInvariantPairing,
) -> np.ndarray:
    """Top-form coefficient of F wedge-dot G relative to the volume form.

    ``(alpha_q ⊗ a) ∧. (beta_r ⊗ b) = (alpha_q ∧ beta_r) <<a, b>>``; the raw
    dx^1..dx^n coefficient is divided by sqrt|det g| so the result is the
    coefficient against vol_g.
    """
    n = ctx.n
    if F.degree + G.degree != n:
        raise ValueError(
            f"degree mismatch: {F.degree} + {G.degree} != n = {n}"
        )
    basis_f = form_basis(n, F.degree)
    basis_g = form_basis(n, G.degree)
    out = np.zeros(F.coeffs.shape[: -2])
    k = pairing.k
    for p, I in enumerate(basis_f):
        for q, J in enumerate(basis_g):
            if set(I) & set(J):
                continue
            sign = _perm_sign(I + J)
            out = out + sign * np.einsum(
                "ab,...a,...b->...", k, F.coeffs[..., p, :], G.coeffs[..., q, :]
            )
    return out / np.asarray(ctx.sqrt_det)


def covariant_exterior_derivative(
    form: AdValuedForm, A: ConnectionField, alg: LieAlgebraSpec
) -> AdValuedForm:
    """d^nabla w = dw + [A ∧ w] with the plain algebra bracket on coefficients."""
    chart = form.chart
    n = chart.n
    r = form.degree
    if r + 1 > n:
        raise ValueError("covariant exterior derivative would exceed top degree")
    basis_r = form_basis(n, r)
    basis_out = form_basis(n, r + 1)
    pos = {I: p for p, I in enumerate(basis_r)}
    out = np.zeros(form.coeffs.shape[:-2] + (len(basis_out), form.m))
    for q, K in enumerate(basis_out):
        acc = np.zeros(form.coeffs.shape[:-2] + (form.m,))
        for drop in range(r + 1):
            a = K[drop]
            rest = K[:drop] + K[drop + 1 :]
            sign = (-1) ** drop
            w = form.coeffs[..., pos[rest], :]
            acc = acc + sign * (
                partial(chart, w, a)
                + np.einsum("abg,...b,...g->...a", alg.c, A.a[..., a, :], w)
            )
        out[..., q, :] = acc
    return AdValuedForm(chart=chart, degree=r + 1, coeffs=out)


def ym_covariant_divergence(
    s: ConnectionField,
    alg: LieAlgebraSpec,
    ctx: MetricContext,
    pairing: AdInvariantPairing,
) -> np.ndarray:
    """Cross-check field star(d^nabla(star R)) contracted with the pairing.

    For the built-in quadratic curvature Lagrangian this equals half of the
    Euler-Lagrange residual (el = 2 * this), which the tests pin by a
    correlation check; both compute the same covariant-divergence operator.
    Returns an array (x..., i, alpha).
    """
    from .lagrangian import curvature

    if ctx.n != 4:
        raise ValueError(f"ym_covariant_divergence needs n=4, got n={ctx.n}")
    from .fields import prolong

    R = curvature(prolong(s), alg)
    starR = hodge_star_form(two_form(ctx, R.r), ctx)
    dstarR = covariant_exterior_derivative(starR, s, alg)
    oneform = hodge_star_form(dstarR, ctx)
    # basis of 1-forms is [(0,), (1,), ...], so the basis slot is the i slot
    w = oneform.coeffs
    return np.einsum("ab,...ib->...ia", pairing.k, w)


@dataclass(frozen=True)
class SelfDualReport:
    alt_defect: float
    sd_defect: float
    asd_defect: float
    el_norm: float

    def as_dict(self) -> dict:
        return {
            "alt_defect": self.alt_defect,
            "sd_defect": self.sd_defect,
            "asd_defect": self.asd_defect,
            "el_norm": self.el_norm,
        }


def selfdual_check(
    sbar: JetField,
    alg: LieAlgebraSpec,
    ctx: MetricContext,
    pairing: AdInvariantPairing | None = None,
    mask_radius: int | None = None,
) -> SelfDualReport:
    """Verify the self-dual / anti-self-dual characterization of jet fields.

    Reports the antisymmetric deviation of the jet part, the (anti-)self-dual
    defects of the curvature along the jet field, and the Yang-Mills residual
    norm of the base; the structural claim under test is that a vanishing
    alt-defect plus a vanishing sd-defect force the base to be extremal.
    """
    from . import variational
    from .fields import RESIDUAL_MASK_RADIUS, alt, delta_C
    from .lagrangian import builtin_ym, curvature

    if ctx.n != 4:
        raise ValueError(f"selfdual_check requires dim M = 4, got {ctx.n}")
    if not ctx.riemannian:
        raise ValueError(
            f"selfdual_check requires a Riemannian metric, got signature {ctx.chart.signature}"
        )
    if pairing is None:
        pairing = AdInvariantPairing(np.eye(alg.dim_g))
    radius = RESIDUAL_MASK_RADIUS if mask_radius is None else mask_radius
    chart = sbar.grid
    R = curvature(sbar, alg)
    starR = hodge_star(R, ctx)
    sd = max_abs(chart, starR.r - R.r, radius)
    asd = max_abs(chart, starR.r + R.r, radius)
    altdef = max_abs(chart, alt(delta_C(sbar)).t, radius)
    spec = builtin_ym(chart, pairing)
    el = variational.el_residual(spec, sbar.base, alg)
    return SelfDualReport(
        alt_defect=altdef,
        sd_defect=sd,
        asd_defect=asd,
        el_norm=el.max_norm(radius),
    )


def selfdual_parts(F, ctx: MetricContext):
    """F = F_plus + F_minus with star F_pm = pm F_pm (Euclidean n=4)."""
    from .lagrangian import CurvatureField

    starF = hodge_star(F, ctx)
    plus = CurvatureField(grid=F.grid, r=0.5 * (F.r + starF.r))
    minus = CurvatureField(grid=F.grid, r=0.5 * (F.r - starF.r))
    return plus, minus
