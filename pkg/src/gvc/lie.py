"""Lie-algebra data: structure constants, brackets, pairings, consistency checks.

Index conventions (einsum letters used throughout the package):
``a, b, g, s, d`` run over the algebra basis (dimension ``m``); the structure
constant array is stored dense as ``c[a, b, g]`` meaning the coefficient of
basis vector ``a`` in the bracket of basis vectors ``b`` and ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Structure constants of a finite-dimensional real Lie algebra.

    ``c`` has shape ``(m, m, m)`` and must be antisymmetric in its last two
    slots and satisfy the Jacobi identity; use :func:`validate` to measure
    violations (deliberately broken inputs are allowed for negative tests).
    """

    dim_g: int
    c: np.ndarray
    basis_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if self.dim_g <= 0:
            raise ValueError(f"dim_g must be positive, got {self.dim_g}")
        if c.shape != (self.dim_g,) * 3:
            raise ValueError(
                f"structure constants must have shape {(self.dim_g,) * 3}, got {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.c)


@dataclass(frozen=True)
class AdInvariantPairing:
    """Symmetric bilinear form k[a, b] on the algebra, assumed ad-invariant."""

    k: np.ndarray
    nondegenerate: bool = True

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise ValueError(f"pairing must be a square matrix, got shape {k.shape}")
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @property
    def dim(self) -> int:
        return self.k.shape[0]


@dataclass(frozen=True)
class ValidationReport:
    """Maximum violations of the algebra/pairing axioms (0 means exact)."""

    antisymmetry: float
    jacobi: float
    ad_invariance: float = 0.0
    pairing_symmetry: float = 0.0
    pairing_det: float = float("nan")

    def ok(self, tol: float = 1e-12) -> bool:
        checks = [self.antisymmetry, self.jacobi, self.ad_invariance, self.pairing_symmetry]
        return all(v <= tol for v in checks)


def bracket(alg: LieAlgebraSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[a, b]^alpha = c^alpha_{beta gamma} a^beta b^gamma.

    Accepts leading grid axes on either argument (broadcasting applies).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != alg.dim_g or b.shape[-1] != alg.dim_g:
        raise ValueError(
            f"bracket arguments must have trailing dimension {alg.dim_g}, "
            f"got {a.shape[-1]} and {b.shape[-1]}"
        )
    return np.einsum("abg,...b,...g->...a", alg.c, a, b)


def validate(alg: LieAlgebraSpec, pairing: AdInvariantPairing | None = None) -> ValidationReport:
    """Measure violations of antisymmetry, Jacobi, and pairing ad-invariance.

    Violations are reported, never raised, so broken inputs stay usable in
    negative tests.
    """
    c = alg.c
    anti = float(np.max(np.abs(c + np.swapaxes(c, 1, 2)))) if alg.dim_g else 0.0
    # jac[a, b, g, e] = sum_d c^d_{bg} c^a_{de} + c^d_{ge} c^a_{db} + c^d_{eb} c^a_{dg}
    jac = (
        np.einsum("dbg,ade->abge", c, c)
        + np.einsum("dge,adb->abge", c, c)
        + np.einsum("deb,adg->abge", c, c)
    )
    jacobi = float(np.max(np.abs(jac)))
    if pairing is None:
        return ValidationReport(antisymmetry=anti, jacobi=jacobi)
    k = pairing.k
    if k.shape[0] != alg.dim_g:
        raise ValueError(f"pairing dimension {k.shape[0]} does not match dim_g {alg.dim_g}")
    sym = float(np.max(np.abs(k - k.T)))
    # ad-invariance: c^d_{ab} k_{dg} + c^d_{ag} k_{bd} = 0 for all a, b, g
    adinv = np.einsum("dab,dg->abg", c, k) + np.einsum("dag,bd->abg", c, k)
    return ValidationReport(
        antisymmetry=anti,
        jacobi=jacobi,
        ad_invariance=float(np.max(np.abs(adinv))),
        pairing_symmetry=sym,
        pairing_det=float(np.linalg.det(k)),
    )


def killing_form(alg: LieAlgebraSpec) -> np.ndarray:
    """Cartan-Killing matrix K_{ab} = c^g_{ad} c^d_{bg}."""
    return np.einsum("gad,dbg->ab", alg.c, alg.c)


def _epsilon3() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


_PRESETS = {
    "u1": lambda: (
        LieAlgebraSpec(1, np.zeros((1, 1, 1)), ("B1",)),
        AdInvariantPairing(np.eye(1)),
    ),
    "su2": lambda: (
        LieAlgebraSpec(3, _epsilon3(), ("B1", "B2", "B3")),
        AdInvariantPairing(np.eye(3)),
    ),
}


def preset(name: str) -> tuple[LieAlgebraSpec, AdInvariantPairing]:
    """Named algebra presets: "u1" and "su2" (Levi-Civita structure constants)."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown algebra preset: {name!r} (known: {sorted(_PRESETS)})") from None
    return factory()
