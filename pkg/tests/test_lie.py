import numpy as np
import pytest

from gvc.lie import (
    AdInvariantPairing,
    LieAlgebraSpec,
    bracket,
    killing_form,
    preset,
    validate,
)


def brute_force_violations(c, k=None):
    """Index-loop oracle for the algebra axioms (independent of the einsum path)."""
    m = c.shape[0]
    anti = 0.0
    jac = 0.0
    for a in range(m):
        for b in range(m):
            for g in range(m):
                anti = max(anti, abs(c[a, b, g] + c[a, g, b]))
                for e in range(m):
                    s = 0.0
                    for d in range(m):
                        s += c[d, b, g] * c[a, d, e] + c[d, g, e] * c[a, d, b] + c[d, e, b] * c[a, d, g]
                    jac = max(jac, abs(s))
    adinv = 0.0
    if k is not None:
        for a in range(m):
            for b in range(m):
                for g in range(m):
                    s = 0.0
                    for d in range(m):
                        s += c[d, a, b] * k[d, g] + c[d, a, g] * k[b, d]
                    adinv = max(adinv, abs(s))
    return anti, jac, adinv


def brute_force_killing(c):
    m = c.shape[0]
    K = np.zeros((m, m))
    for a in range(m):
        for b in range(m):
            for g in range(m):
                for d in range(m):
                    K[a, b] += c[g, a, d] * c[d, b, g]
    return K


def test_bracket_abelian_zero():
    alg, _ = preset("u1")
    assert np.all(bracket(alg, np.array([2.0]), np.array([3.0])) == 0.0)


def test_bracket_su2_levi_civita():
    alg, _ = preset("su2")
    e1, e2, e3 = np.eye(3)
    np.testing.assert_array_equal(bracket(alg, e1, e2), e3)
    np.testing.assert_array_equal(bracket(alg, e2, e3), e1)


def test_bracket_antisymmetry_and_bilinearity():
    alg, _ = preset("su2")
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b, c = rng.normal(size=(3, 3))
        lam = rng.normal()
        assert np.max(np.abs(bracket(alg, a, a))) <= 1e-14
        lhs = bracket(alg, a, b) + bracket(alg, b, a)
        assert np.max(np.abs(lhs)) <= 1e-14
        lin = bracket(alg, a + lam * b, c) - bracket(alg, a, c) - lam * bracket(alg, b, c)
        assert np.max(np.abs(lin)) <= 1e-14 * max(1.0, abs(lam))


def test_bracket_broadcasts_over_grids():
    alg, _ = preset("su2")
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 5, 3))
    b = rng.normal(size=(4, 5, 3))
    out = bracket(alg, a, b)
    np.testing.assert_allclose(out[2, 3], bracket(alg, a[2, 3], b[2, 3]))


def test_bracket_dimension_mismatch():
    alg, _ = preset("su2")
    with pytest.raises(ValueError, match="trailing dimension"):
        bracket(alg, np.ones(2), np.ones(3))


def test_validate_su2_against_brute_force():
    alg, pairing = preset("su2")
    rep = validate(alg, pairing)
    anti, jac, adinv = brute_force_violations(alg.c, pairing.k)
    assert rep.antisymmetry == anti == 0.0
    assert rep.jacobi == jac == 0.0
    assert rep.ad_invariance == adinv == 0.0
    assert rep.pairing_det == pytest.approx(1.0)
    assert rep.ok()


def test_validate_matches_oracle_on_random_floats():
    rng = np.random.default_rng(7)
    c = rng.normal(size=(3, 3, 3))
    c = c - np.swapaxes(c, 1, 2)  # antisymmetric but jacobi-violating
    alg = LieAlgebraSpec(3, c)
    k = rng.normal(size=(3, 3))
    k = k + k.T
    rep = validate(alg, AdInvariantPairing(k))
    anti, jac, adinv = brute_force_violations(c, k)
    assert rep.antisymmetry == pytest.approx(anti, abs=1e-14)
    assert rep.jacobi == pytest.approx(jac, rel=1e-12)
    assert rep.ad_invariance == pytest.approx(adinv, rel=1e-12)


def test_validate_reports_constructed_antisymmetry_defect():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    c[0, 2, 1] = 1.0  # deliberately broken
    rep = validate(LieAlgebraSpec(3, c))
    assert rep.antisymmetry == 2.0


def test_validate_abelian_ad_invariance_any_symmetric_pairing():
    alg, _ = preset("u1")
    rep = validate(alg, AdInvariantPairing(np.array([[3.5]])))
    assert rep.ad_invariance == 0.0


def test_killing_form_abelian_zero():
    alg, _ = preset("u1")
    assert np.all(killing_form(alg) == 0.0)


def test_killing_form_su2_is_minus_two_identity():
    alg, _ = preset("su2")
    K = killing_form(alg)
    np.testing.assert_array_equal(K, brute_force_killing(alg.c))
    np.testing.assert_allclose(K, -2.0 * np.eye(3), atol=1e-15)


def test_killing_form_deterministic():
    alg, _ = preset("su2")
    np.testing.assert_array_equal(killing_form(alg), killing_form(alg))


def test_killing_form_is_ad_invariant():
    alg, _ = preset("su2")
    rep = validate(alg, AdInvariantPairing(killing_form(alg)))
    assert rep.ad_invariance <= 1e-14


def test_preset_unknown_name():
    with pytest.raises(ValueError, match="unknown algebra preset"):
        preset("so3x")


def test_structure_constant_shape_validation():
    with pytest.raises(ValueError, match="shape"):
        LieAlgebraSpec(2, np.zeros((3, 3, 3)))
    with pytest.raises(ValueError, match="positive"):
        LieAlgebraSpec(0, np.zeros((0, 0, 0)))
