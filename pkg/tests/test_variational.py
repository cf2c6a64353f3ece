import numpy as np
import pytest

from gvc.fields import (
    ConnectionField,
    GridChart,
    JetField,
    TwoTensorField,
    alt,
    max_abs,
    prolong,
    sym,
)
from gvc.lagrangian import builtin_ym, hessian
from gvc.lie import preset
from gvc.variational import (
    GenericJetField,
    GenericLagrangian,
    el_residual,
    hc_residual,
    hc_residual_generic,
    kernel_dimension,
    verify_fibration,
)

from _util import gauge_wave, minkowski_wave_chart, radiative_wave, smooth_field


@pytest.fixture
def u1():
    return preset("u1")


@pytest.fixture
def su2():
    return preset("su2")


def test_el_flat_connection_zero(u1):
    alg, pairing = u1
    g = GridChart(shape=(8, 8), spacing=(0.1, 0.1))
    s = ConnectionField(g, np.full(g.shape + (2, 1), 0.3))
    assert el_residual(builtin_ym(g, pairing), s, alg).max_norm() <= 1e-12


def test_el_minkowski_gauge_wave_second_order(u1):
    # pure-gauge plane wave: an exact continuum extremal whose sampled
    # residual is genuinely O(h^2); halving h divides it by ~4
    alg, pairing = u1
    norms = {}
    for npts in (32, 64):
        g = minkowski_wave_chart((npts, npts))
        e = el_residual(builtin_ym(g, pairing), gauge_wave(g), alg)
        norms[npts] = e.max_norm()
        assert norms[npts] <= 10.0 * (2 * np.pi) ** 5 * 0.05 * (1.0 / npts) ** 2
    assert norms[32] / norms[64] == pytest.approx(4.0, rel=0.2)


def test_el_euclidean_single_mode_matches_laplacian(u1):
    # A_1 = sin(2 pi x^0), Euclidean: E-L component = 2 (2 pi)^2 sin(2 pi x^0)
    alg, pairing = u1
    g = GridChart(shape=(64, 8), spacing=(1 / 64, 1 / 8))
    a = np.zeros(g.shape + (2, 1))
    a[..., 1, 0] = np.sin(2 * np.pi * g.coord(0))
    e = el_residual(builtin_ym(g, pairing), ConnectionField(g, a), alg)
    expected = 2.0 * (2 * np.pi) ** 2 * np.sin(2 * np.pi * g.coord(0))
    h2 = (1 / 64) ** 2
    # composed central differences: truncation 2 (2pi)^4 h^2 / 3 ~ 1039 h^2
    err = np.max(np.abs(e.e[..., 1, 0] - expected))
    assert 900.0 * h2 <= err <= 1100.0 * h2
    assert np.max(np.abs(e.e[..., 0, 0])) <= 1e-10


def test_hc_holonomic_reduces_to_el_bitwise(su2):
    alg, pairing = su2
    g = GridChart(shape=(12, 12), spacing=(1 / 12, 1 / 12))
    s = ConnectionField(g, smooth_field(g, (2, 3), 0.3, seed=1))
    spec = builtin_ym(g, pairing)
    e = el_residual(spec, s, alg)
    hc = hc_residual(spec, prolong(s), alg)
    np.testing.assert_array_equal(hc.second, np.moveaxis(e.e, -1, -2))
    assert hc.first_max() <= 1e-13


def test_hc_symmetric_shift_keeps_both_groups(u1):
    alg, pairing = u1
    g = minkowski_wave_chart((32, 32))
    s = gauge_wave(g)
    spec = builtin_ym(g, pairing)
    el = el_residual(spec, s, alg).max_norm()
    t = sym(TwoTensorField(g, smooth_field(g, (2, 2, 1), 0.2, seed=2)))
    hc = hc_residual(spec, JetField(base=s, da=prolong(s).da + t.t), alg)
    h2 = g.spacing[0] ** 2
    assert hc.first_max() <= 1e-12
    assert hc.second_max() <= el + 10.0 * h2


def test_hc_antisymmetric_shift_first_group_lower_bound(su2):
    # first group = extended Hessian acting on 2u; bound it from below by the
    # smallest reduced-Hessian singular value
    alg, pairing = su2
    g = GridChart(shape=(8,) * 4, spacing=(1 / 8,) * 4)
    spec = builtin_ym(g, pairing)
    s = ConnectionField(g, smooth_field(g, (4, 3), 0.2, seed=3))
    u = alt(TwoTensorField(g, smooth_field(g, (4, 4, 3), 0.3, seed=4)))
    hc = hc_residual(spec, JetField(base=s, da=prolong(s).da + u.t), alg)
    rep = hessian(spec, prolong(s), alg, (4, 4, 4, 4))
    sigma_min = np.linalg.svd(rep.reduced, compute_uv=False)[-1]
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    u_pair = np.stack([u.t[..., i, j, :] for (i, j) in pairs], axis=-2)
    point_l2 = np.sqrt(np.sum(u_pair**2, axis=(-2, -1)))
    first_l2 = np.sqrt(np.sum(hc.first**2, axis=(-3, -2, -1)))
    # pointwise: |first|_2 = sqrt(2) |reduced . 2 u_pair|_2 >= 2 sqrt(2) sigma_min |u_pair|_2
    assert np.all(first_l2 >= 2 * np.sqrt(2) * sigma_min * point_l2 - 1e-9)
    assert hc.first_max() > 0.0


def test_hc_generic_regular_scalar_field():
    # L = 1/2 sum_i (y_i)^2, n=2, m=1: the velocity Hessian is the identity,
    # so the first group forces sbar_i = s_i; solving the pointwise linear
    # system recovers the prolongation
    g = GridChart(shape=(16, 16), spacing=(1 / 16, 1 / 16), boundary="open")
    lag = GenericLagrangian(
        dl_dy=lambda y, yx: np.zeros_like(y),
        dl_dyi=lambda y, yx: yx,
        d2_dyi_dyj=lambda y, yx: np.einsum("ab,ij->aibj", np.eye(1), np.eye(2)),
        d2_dy_dyj=lambda y, yx: np.zeros((1, 1, 2)),
        l=lambda y, yx: 0.5 * np.sum(yx**2, axis=(-2, -1)),
    )
    rng = np.random.default_rng(5)
    y = rng.normal(size=g.shape + (1,))
    yx = rng.normal(size=g.shape + (1, 2))
    res = hc_residual_generic(lag, GenericJetField(g, y, yx))
    # first[a, i] literally equals (s_i - sbar_i): solving the (identity)
    # system at each point must return the holonomic difference
    from gvc.fields import partial

    sj = np.stack([partial(g, y, j) for j in range(2)], axis=-1)
    np.testing.assert_allclose(res.first, sj - yx, atol=1e-13)
    # holonomic harmonic section solves both groups
    yh = (g.coord(0) ** 2 - g.coord(1) ** 2)[..., None].copy()  # discrete-harmonic
    yxh = np.stack([partial(g, yh, j) for j in range(2)], axis=-1)
    res_h = hc_residual_generic(lag, GenericJetField(g, yh, yxh))
    assert res_h.first_max() <= 1e-12
    assert res_h.second_max() <= 1e-10


def test_hc_generic_degenerate_lagrangian():
    g = GridChart(shape=(8, 8), spacing=(0.1, 0.1))
    lag = GenericLagrangian(
        dl_dy=lambda y, yx: np.zeros_like(y),
        dl_dyi=lambda y, yx: np.ones_like(yx),
        d2_dyi_dyj=lambda y, yx: np.zeros((1, 2, 1, 2)),
        d2_dy_dyj=lambda y, yx: np.zeros((1, 1, 2)),
    )
    rng = np.random.default_rng(6)
    res = hc_residual_generic(
        lag, GenericJetField(g, rng.normal(size=g.shape + (1,)), rng.normal(size=g.shape + (1, 2)))
    )
    assert np.all(res.first == 0.0)


def test_fibration_forward_symmetric_t(u1):
    alg, pairing = u1
    g = minkowski_wave_chart((32, 32))
    s = gauge_wave(g)
    spec = builtin_ym(g, pairing)
    t = sym(TwoTensorField(g, smooth_field(g, (2, 2, 1), 0.3, seed=7)))
    rep = verify_fibration(spec, s, t, alg, kernel_points=10)
    h2 = g.spacing[0] ** 2
    assert rep.hc_second_norm <= rep.el_norm + 10.0 * h2
    assert rep.hc_first_norm <= 1e-12
    assert rep.curv_defect <= 1e-12
    assert rep.alt_delta_norm <= 1e-15
    assert rep.kernel_dim == rep.kernel_dim_expected == 1 * 2 * 3 // 2


def test_fibration_antisymmetric_control(u1):
    alg, pairing = u1
    g = minkowski_wave_chart((32, 32))
    s = gauge_wave(g)
    spec = builtin_ym(g, pairing)
    u = alt(TwoTensorField(g, smooth_field(g, (2, 2, 1), 0.3, seed=8)))
    rep = verify_fibration(spec, s, u, alg)
    assert rep.hc_first_norm > 0.1
    assert rep.curv_defect > 0.1
    assert rep.alt_delta_norm > 0.1


def test_fibration_nonextremal_second_group_equals_el(su2):
    alg, pairing = su2
    g = GridChart(shape=(10, 10), spacing=(0.1, 0.1))
    s = ConnectionField(g, smooth_field(g, (2, 3), 0.4, seed=9))
    spec = builtin_ym(g, pairing)
    zero_t = TwoTensorField(g, np.zeros(g.shape + (2, 2, 3)), symmetry="symmetric")
    rep = verify_fibration(spec, s, zero_t, alg)
    assert rep.hc_second_norm == rep.el_norm


def test_kernel_dimension_su2_n4(su2):
    alg, pairing = su2
    g = GridChart(shape=(6,) * 4, spacing=(1 / 6,) * 4)
    spec = builtin_ym(g, pairing)
    sbar = prolong(ConnectionField(g, smooth_field(g, (4, 3), 0.2, seed=10)))
    rng = np.random.default_rng(0)
    pts = [tuple(rng.integers(0, 6, size=4)) for _ in range(10)]
    dims = kernel_dimension(spec, sbar, alg, pts)
    assert dims == [3 * 4 * 5 // 2] * 10


def test_mesh_convergence_of_residual_norms(u1):
    alg, pairing = u1
    g = minkowski_wave_chart((16, 16))
    vals = []
    for _ in range(3):
        e = el_residual(builtin_ym(g, pairing), gauge_wave(g), alg)
        vals.append(e.max_norm())
        g = g.refine()
    assert vals[0] / vals[1] == pytest.approx(4.0, rel=0.2)
    assert vals[1] / vals[2] == pytest.approx(4.0, rel=0.2)


def test_radiative_wave_is_extremal_n4(u1):
    # transverse null wave on a 12^4 Minkowski box solves the discrete
    # equations to roundoff (the two second differences cancel exactly)
    alg, pairing = u1
    g = GridChart(shape=(12,) * 4, spacing=(1 / 12,) * 4, metric="minkowski")
    e = el_residual(builtin_ym(g, pairing), radiative_wave(g), alg)
    assert e.max_norm() <= 1e-11
