"""Discretized base chart, field storage, finite differences, jet prolongation.

Array layout: grid axes lead, component axes trail, always in this order:

* connection fields      ``a[x..., i, alpha]``
* jet / 2-tensor fields  ``da[x..., i, j, alpha]`` (``i`` fibre slot, ``j``
  derivative slot, so holonomically ``da[..., i, j, :] = d A_i / d x^j``)
* variation fields       ``v[x..., i, alpha]``, ``dv[x..., i, j, alpha]``

All operations are pure; fields are treated as immutable after construction.
Finite differences are second-order central stencils, with periodic wrap or
one-sided second-order edges (numpy.gradient) on open boxes.  Open-box
residuals are only meaningful on an interior mask; see
:meth:`GridChart.interior_mask`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: layers stripped from each face of an open box when summarizing residuals
#: that compose two finite differences (E-L divergence, Jacobi terms).
RESIDUAL_MASK_RADIUS = 2


def _as_metric(metric, n: int) -> np.ndarray:
    if isinstance(metric, str):
        if metric == "euclidean":
            return np.eye(n)
        if metric == "minkowski":
            g = -np.eye(n)
            g[0, 0] = 1.0
            return g
        raise ValueError(f"unknown metric preset: {metric!r}")
    g = np.asarray(metric, dtype=float)
    if g.shape[-2:] != (n, n):
        raise ValueError(f"metric must end in shape ({n}, {n}), got {g.shape}")
    return g


@dataclass(frozen=True)
class GridChart:
    """Uniform grid on a coordinate box, with metric data.

    ``shape`` is the number of samples per axis, ``spacing`` the step per
    axis, ``origin`` the coordinate of sample 0.  ``boundary`` is
    ``"periodic"`` (the box is a torus; the coordinate of sample k is
    ``origin + k*h``) or ``"open"``.  ``metric`` is either a constant
    ``(n, n)`` matrix or a pointwise field ``(*shape, n, n)``; it must be
    symmetric with ``|det g| > 0`` everywhere.
    """

    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    boundary: str = "periodic"
    metric: np.ndarray | str = "euclidean"
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        n = len(shape)
        spacing = tuple(float(h) for h in self.spacing)
        if len(spacing) != n:
            raise ValueError(f"spacing must have {n} entries, got {len(spacing)}")
        if any(s < 4 for s in shape):
            raise ValueError(f"each axis needs at least 4 samples, got {shape}")
        if any(h <= 0 for h in spacing):
            raise ValueError(f"spacing must be positive, got {spacing}")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")
        g = _as_metric(self.metric, n)
        if np.max(np.abs(g - np.swapaxes(g, -1, -2))) != 0.0:
            raise ValueError("metric must be symmetric")
        det = np.linalg.det(g)
        if np.min(np.abs(det)) < 1e-14:
            raise ValueError("metric is degenerate (|det g| ~ 0)")
        origin = self.origin if self.origin is not None else (0.0,) * n
        origin = tuple(float(o) for o in origin)
        if len(origin) != n:
            raise ValueError(f"origin must have {n} entries, got {len(origin)}")
        g.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "metric", g)
        object.__setattr__(self, "origin", origin)

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def metric_is_constant(self) -> bool:
        return self.metric.ndim == 2

    @property
    def signature(self) -> tuple[int, int]:
        """(n_plus, n_minus) eigenvalue signs of the metric (at the first point)."""
        g = self.metric if self.metric_is_constant else self.metric.reshape(-1, self.n, self.n)[0]
        ev = np.linalg.eigvalsh(g)
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coords(self, axis: int) -> np.ndarray:
        """1-D coordinate samples along ``axis``."""
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def coord(self, axis: int) -> np.ndarray:
        """Coordinate of ``axis`` broadcast to the full grid shape."""
        x = self.axis_coords(axis)
        sl = [None] * self.n
        sl[axis] = slice(None)
        return np.broadcast_to(x[tuple(sl)], self.shape)

    def interior_mask(self, radius: int = 1) -> np.ndarray:
        """Boolean grid mask; on open boxes the outermost ``radius`` layers are False."""
        mask = np.ones(self.shape, dtype=bool)
        if self.periodic or radius <= 0:
            return mask
        for ax in range(self.n):
            sl = [slice(None)] * self.n
            sl[ax] = slice(0, radius)
            mask[tuple(sl)] = False
            sl[ax] = slice(self.shape[ax] - radius, None)
            mask[tuple(sl)] = False
        return mask

    def refine(self) -> "GridChart":
        """Halve the spacing on the same box (periodic: 2N points; open: 2N-1)."""
        if not self.metric_is_constant:
            raise ValueError("refine is only supported for constant metrics")
        if self.periodic:
            shape = tuple(2 * s for s in self.shape)
        else:
            shape = tuple(2 * s - 1 for s in self.shape)
        return GridChart(
            shape=shape,
            spacing=tuple(h / 2 for h in self.spacing),
            boundary=self.boundary,
            metric=self.metric,
            origin=self.origin,
        )


def partial(chart: GridChart, f: np.ndarray, axis: int) -> np.ndarray:
    """Second-order finite difference of ``f`` along grid ``axis``.

    ``f`` may carry trailing component axes; only the leading ``chart.n``
    axes are grid axes.  Periodic charts wrap; open charts use one-sided
    second-order stencils at the two boundary layers.
    """
    if not 0 <= axis < chart.n:
        raise ValueError(f"axis {axis} out of range for {chart.n}-dimensional chart")
    f = np.asarray(f, dtype=float)
    h = chart.spacing[axis]
    if chart.periodic:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)
    return np.gradient(f, h, axis=axis, edge_order=2)


def second_partial(chart: GridChart, f: np.ndarray, ax1: int, ax2: int) -> np.ndarray:
    """Composed finite-difference second derivative, symmetrized over the order."""
    if ax1 == ax2:
        return partial(chart, partial(chart, f, ax1), ax1)
    d12 = partial(chart, partial(chart, f, ax2), ax1)
    d21 = partial(chart, partial(chart, f, ax1), ax2)
    return 0.5 * (d12 + d21)


@dataclass(frozen=True)
class ConnectionField:
    """Samples a[x..., i, alpha] of the connection coordinates A_i^alpha."""

    grid: GridChart
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape[: self.grid.n] != self.grid.shape or a.ndim != self.grid.n + 2:
            raise ValueError(
                f"connection array must have shape {self.grid.shape} + (n, m), got {a.shape}"
            )
        if a.shape[self.grid.n] != self.grid.n:
            raise ValueError(
                f"fibre slot must have size n={self.grid.n}, got {a.shape[self.grid.n]}"
            )
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return self.a.shape[-1]


@dataclass(frozen=True)
class JetField:
    """First-jet samples: base connection plus independent derivative slots.

    ``da[x..., i, j, alpha]`` holds the jet coordinate values; they agree with
    the finite-difference prolongation of ``base`` exactly when ``holonomic``
    (i.e. when produced by :func:`prolong`).
    """

    base: ConnectionField
    da: np.ndarray
    holonomic: bool = False

    def __post_init__(self):
        da = np.asarray(self.da, dtype=float)
        n = self.base.grid.n
        expected = self.base.grid.shape + (n, n, self.base.m)
        if da.shape != expected:
            raise ValueError(f"jet array must have shape {expected}, got {da.shape}")
        object.__setattr__(self, "da", da)

    @property
    def grid(self) -> GridChart:
        return self.base.grid

    @property
    def m(self) -> int:
        return self.base.m


@dataclass(frozen=True)
class TwoTensorField:
    """Algebra-valued 2-tensor t[x..., i, j, alpha]; symmetry tag is exact."""

    grid: GridChart
    t: np.ndarray
    symmetry: str = "none"  # "none" | "symmetric"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        n = self.grid.n
        if t.shape[: n + 2] != self.grid.shape + (n, n) or t.ndim != n + 3:
            raise ValueError(
                f"2-tensor array must have shape {self.grid.shape} + (n, n, m), got {t.shape}"
            )
        if self.symmetry not in ("none", "symmetric"):
            raise ValueError(f"symmetry must be 'none' or 'symmetric', got {self.symmetry!r}")
        if self.symmetry == "symmetric" and np.max(
            np.abs(t - np.swapaxes(t, n, n + 1))
        ) != 0.0:
            raise ValueError("tensor tagged symmetric is not exactly symmetric")
        object.__setattr__(self, "t", t)

    @property
    def m(self) -> int:
        return self.t.shape[-1]


@dataclass(frozen=True)
class VariationField:
    """Vertical variation v[x..., i, alpha] of a connection field."""

    grid: GridChart
    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.shape[: self.grid.n] != self.grid.shape or v.ndim != self.grid.n + 2:
            raise ValueError(
                f"variation array must have shape {self.grid.shape} + (n, m), got {v.shape}"
            )
        object.__setattr__(self, "v", v)

    @property
    def m(self) -> int:
        return self.v.shape[-1]


@dataclass(frozen=True)
class JetVariationField:
    """Jet-level variation: v[x..., i, alpha] plus independent dv[x..., i, j, alpha]."""

    grid: GridChart
    v: np.ndarray
    dv: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        dv = np.asarray(self.dv, dtype=float)
        n = self.grid.n
        if v.shape != self.grid.shape + (n, v.shape[-1]):
            raise ValueError(f"variation array has wrong shape {v.shape}")
        if dv.shape != self.grid.shape + (n, n, v.shape[-1]):
            raise ValueError(f"jet-variation array has wrong shape {dv.shape}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "dv", dv)

    @property
    def m(self) -> int:
        return self.v.shape[-1]


def prolong(s: ConnectionField) -> JetField:
    """Finite-difference first jet: da[..., i, j, :] = partial_j a[..., i, :]."""
    grid = s.grid
    da = np.stack([partial(grid, s.a, j) for j in range(grid.n)], axis=-2)
    # stack placed the derivative slot before alpha: shape (x..., i, j, alpha)
    return JetField(base=s, da=da, holonomic=True)


def prolong_variation(s: ConnectionField | None, X: VariationField) -> JetVariationField:
    """Holonomic jet variation: dv[..., i, j, :] = partial_j v[..., i, :].

    Along a section the prolonged vertical field depends only on the first
    jet of the composed variation, so the grid derivative of ``v`` is the
    whole formula; ``s`` is accepted for signature symmetry and unused.
    """
    grid = X.grid
    dv = np.stack([partial(grid, X.v, j) for j in range(grid.n)], axis=-2)
    return JetVariationField(grid=grid, v=X.v, dv=dv)


def delta_C(sbar: JetField) -> TwoTensorField:
    """Deviation of a jet field from the prolongation of its own base."""
    return TwoTensorField(grid=sbar.grid, t=sbar.da - prolong(sbar.base).da)


def alt(t: TwoTensorField) -> TwoTensorField:
    """Antisymmetric part 0.5*(t_ij - t_ji) in the two base slots."""
    n = t.grid.n
    return TwoTensorField(grid=t.grid, t=0.5 * (t.t - np.swapaxes(t.t, n, n + 1)))


def sym(t: TwoTensorField) -> TwoTensorField:
    """Symmetric part 0.5*(t_ij + t_ji) in the two base slots."""
    n = t.grid.n
    # IEEE addition commutes, so 0.5*(t + t^T) is bitwise symmetric
    ts = 0.5 * (t.t + np.swapaxes(t.t, n, n + 1))
    return TwoTensorField(grid=t.grid, t=ts, symmetry="symmetric")


def max_abs(chart: GridChart, f: np.ndarray, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
    """Max |f| over the interior mask (component axes trail the grid axes)."""
    f = np.asarray(f)
    mask = chart.interior_mask(mask_radius)
    comp_axes = f.ndim - chart.n
    vals = np.abs(f[mask]) if comp_axes == 0 else np.abs(f[mask, ...])
    return float(vals.max()) if vals.size else 0.0


def l2_norm(chart: GridChart, f: np.ndarray, mask_radius: int = RESIDUAL_MASK_RADIUS) -> float:
    """h-weighted L2 norm sqrt(sum |f|^2 * cell_volume) over the interior mask."""
    f = np.asarray(f)
    mask = chart.interior_mask(mask_radius)
    vals = f[mask, ...] if f.ndim > chart.n else f[mask]
    return float(np.sqrt(np.sum(vals**2) * chart.cell_volume))
