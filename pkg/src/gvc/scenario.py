"""Scenario files: JSON descriptions of algebra + grid + Lagrangian + fields.

A scenario fully determines every random field through its 64-bit seed; the
same scenario and seed produce bit-identical fields.  Supported initializer
types: "zero", "constant", "plane_wave", "linear", "random" (band-limited
trigonometric polynomial with seeded coefficients); there is no expression
language.

Field slots and their shapes:

* ``s``, ``X``   connection / variation values  (n, m) per point
* ``t``, ``u``   2-tensor values                (n, n, m) per point
* ``eps``        gauge parameter                (m,) per point
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .fields import ConnectionField, GridChart, TwoTensorField, VariationField, alt, sym
from .gauge import GaugeParameterField, NonInvariantControl
from .lagrangian import CurvatureLagrangian, builtin_ym, custom_quadratic
from .lie import AdInvariantPairing, LieAlgebraSpec, preset


class ScenarioError(ValueError):
    """Malformed scenario input; the message names the offending field."""


#: seed lane per field slot, so each field draws an independent stream
_FIELD_LANES = {"s": 1, "t": 2, "u": 3, "eps": 4, "X": 5}


@dataclass
class Scenario:
    raw: dict
    seed: int
    algebra: LieAlgebraSpec
    pairing: AdInvariantPairing
    grid: GridChart
    lagrangian: CurvatureLagrangian | NonInvariantControl
    field_specs: dict
    tolerances: dict = field(default_factory=dict)

    def eps0(self) -> float:
        return float(self.tolerances.get("eps0", 1e-8))

    def C(self) -> float:
        return float(self.tolerances.get("C", 10.0))

    def h_max(self) -> float:
        return max(self.grid.spacing)

    def with_grid(self, grid: GridChart) -> "Scenario":
        lag = self.lagrangian
        if isinstance(lag, CurvatureLagrangian):
            lag = _build_lagrangian(self.raw.get("lagrangian", {"type": "yang_mills"}),
                                    grid, self.algebra, self.pairing)
        return Scenario(
            raw=self.raw,
            seed=self.seed,
            algebra=self.algebra,
            pairing=self.pairing,
            grid=grid,
            lagrangian=lag,
            field_specs=self.field_specs,
            tolerances=self.tolerances,
        )

    # -- field construction -------------------------------------------------

    def _rng(self, name: str, offset: int = 0) -> np.random.Generator:
        lane = _FIELD_LANES.get(name, 9)
        return np.random.default_rng([self.seed, lane, offset])

    def connection(self, name: str = "s", required: bool = True) -> ConnectionField | None:
        spec = self.field_specs.get(name)
        if spec is None:
            if required:
                raise ScenarioError(f"missing field: fields.{name}")
            return None
        arr = _init_array(spec, self.grid, (self.grid.n, self.algebra.dim_g), self._rng(name))
        return ConnectionField(grid=self.grid, a=arr)

    def variation(self, name: str = "X", required: bool = True) -> VariationField | None:
        spec = self.field_specs.get(name)
        if spec is None:
            if required:
                raise ScenarioError(f"missing field: fields.{name}")
            return None
        arr = _init_array(spec, self.grid, (self.grid.n, self.algebra.dim_g), self._rng(name))
        return VariationField(grid=self.grid, v=arr)

    def tensor(self, name: str = "t", required: bool = False) -> TwoTensorField | None:
        spec = self.field_specs.get(name)
        if spec is None:
            if required:
                raise ScenarioError(f"missing field: fields.{name}")
            return None
        n, m = self.grid.n, self.algebra.dim_g
        arr = _init_array(spec, self.grid, (n, n, m), self._rng(name))
        t = TwoTensorField(grid=self.grid, t=arr)
        if spec.get("symmetric"):
            t = sym(t)
        elif spec.get("antisymmetric"):
            t = alt(t)
        return t

    def gauge_parameter(self, name: str = "eps", required: bool = True) -> GaugeParameterField | None:
        spec = self.field_specs.get(name)
        if spec is None:
            if required:
                raise ScenarioError(f"missing field: fields.{name}")
            return None
        arr = _init_array(spec, self.grid, (self.algebra.dim_g,), self._rng(name))
        return GaugeParameterField(grid=self.grid, eps=arr)


def _require(d: dict, key: str, where: str = "") -> object:
    if key not in d:
        name = f"{where}.{key}" if where else key
        raise ScenarioError(f"missing field: {name}")
    return d[key]


def _build_algebra(raw) -> tuple[LieAlgebraSpec, AdInvariantPairing]:
    if isinstance(raw, str):
        try:
            return preset(raw)
        except ValueError as e:
            raise ScenarioError(f"algebra: {e}") from None
    if not isinstance(raw, dict):
        raise ScenarioError("algebra: expected preset name or object")
    dim = int(_require(raw, "dim_g", "algebra"))
    c = np.asarray(_require(raw, "c", "algebra"), dtype=float)
    try:
        alg = LieAlgebraSpec(dim_g=dim, c=c)
    except ValueError as e:
        raise ScenarioError(f"algebra: {e}") from None
    praw = raw.get("pairing", "identity")
    k = np.eye(dim) if praw == "identity" else np.asarray(praw, dtype=float)
    try:
        pairing = AdInvariantPairing(k=k)
    except ValueError as e:
        raise ScenarioError(f"algebra.pairing: {e}") from None
    return alg, pairing


def _build_grid(raw: dict) -> GridChart:
    if not isinstance(raw, dict):
        raise ScenarioError("grid: expected object")
    shape = tuple(int(v) for v in _require(raw, "shape", "grid"))
    if "spacing" in raw:
        spacing = tuple(float(v) for v in raw["spacing"])
    elif "length" in raw:
        lengths = [float(v) for v in raw["length"]]
        if len(lengths) != len(shape):
            raise ScenarioError("grid.length: must match the number of axes")
        boundary = raw.get("boundary", "periodic")
        # periodic boxes exclude the right endpoint; open boxes include it
        spacing = tuple(
            L / s if boundary == "periodic" else L / (s - 1)
            for L, s in zip(lengths, shape)
        )
    else:
        raise ScenarioError("missing field: grid.spacing (or grid.length)")
    try:
        return GridChart(
            shape=shape,
            spacing=spacing,
            boundary=raw.get("boundary", "periodic"),
            metric=raw.get("metric", "euclidean"),
            origin=tuple(raw["origin"]) if "origin" in raw else None,
        )
    except ValueError as e:
        raise ScenarioError(f"grid: {e}") from None


def _build_lagrangian(raw: dict, grid: GridChart, alg: LieAlgebraSpec, pairing: AdInvariantPairing):
    if not isinstance(raw, dict):
        raise ScenarioError("lagrangian: expected object")
    kind = raw.get("type", "yang_mills")
    if kind == "yang_mills":
        return builtin_ym(grid, pairing)
    if kind == "custom_quadratic":
        coeff = np.asarray(_require(raw, "coefficients", "lagrangian"), dtype=float)
        try:
            return custom_quadratic(coeff, grid.n, alg.dim_g)
        except ValueError as e:
            raise ScenarioError(f"lagrangian.coefficients: {e}") from None
    if kind == "non_invariant_control":
        return NonInvariantControl()
    raise ScenarioError(f"lagrangian.type: unknown type {kind!r}")


def load_scenario(raw: dict, seed_override: int | None = None) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario: expected a JSON object")
    alg_raw = _require(raw, "algebra")
    alg, pairing = _build_algebra(alg_raw)
    if isinstance(raw.get("pairing"), list):
        pairing = AdInvariantPairing(k=np.asarray(raw["pairing"], dtype=float))
    grid = _build_grid(_require(raw, "grid"))
    lagr = _build_lagrangian(raw.get("lagrangian", {"type": "yang_mills"}), grid, alg, pairing)
    seed = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)
    fields = raw.get("fields", {})
    if not isinstance(fields, dict):
        raise ScenarioError("fields: expected object")
    return Scenario(
        raw=raw,
        seed=seed,
        algebra=alg,
        pairing=pairing,
        grid=grid,
        lagrangian=lagr,
        field_specs=fields,
        tolerances=raw.get("tolerances", {}),
    )


# -- initializers -------------------------------------------------------------


def _init_array(spec: dict, grid: GridChart, comp_shape: tuple[int, ...], rng) -> np.ndarray:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ScenarioError("field initializer: expected object with a 'type'")
    kind = spec["type"]
    full_shape = grid.shape + comp_shape
    if kind == "zero":
        return np.zeros(full_shape)
    if kind == "constant":
        vals = np.asarray(_require(spec, "values", "initializer"), dtype=float)
        if vals.shape != comp_shape:
            raise ScenarioError(
                f"initializer.values: expected shape {comp_shape}, got {vals.shape}"
            )
        return np.broadcast_to(vals, full_shape).copy()
    if kind == "plane_wave":
        return _plane_wave(spec, grid, comp_shape)
    if kind == "linear":
        return _linear(spec, grid, comp_shape)
    if kind == "random":
        return _random_smooth(spec, grid, comp_shape, rng)
    raise ScenarioError(f"initializer.type: unknown type {kind!r}")


def _component_index(comp: dict, comp_shape: tuple[int, ...]) -> tuple[int, ...]:
    names = {1: ("alpha",), 2: ("i", "alpha"), 3: ("i", "j", "alpha")}[len(comp_shape)]
    idx = []
    for name, size in zip(names, comp_shape):
        v = int(_require(comp, name, "plane_wave component"))
        if not 0 <= v < size:
            raise ScenarioError(f"plane_wave component: index {name}={v} out of range")
        idx.append(v)
    return tuple(idx)


def _plane_wave(spec: dict, grid: GridChart, comp_shape) -> np.ndarray:
    out = np.zeros(grid.shape + comp_shape)
    comps = _require(spec, "components", "plane_wave")
    for comp in comps:
        k = [float(v) for v in _require(comp, "k", "plane_wave component")]
        if len(k) != grid.n:
            raise ScenarioError("plane_wave component: wave vector length != n")
        amp = float(comp.get("amplitude", 1.0))
        phase = float(comp.get("phase", 0.0))
        arg = sum(2.0 * np.pi * k[ax] * grid.coord(ax) for ax in range(grid.n)) + phase
        out[(...,) + _component_index(comp, comp_shape)] += amp * np.sin(arg)
    return out


def _linear(spec: dict, grid: GridChart, comp_shape) -> np.ndarray:
    slopes = np.asarray(_require(spec, "slopes", "linear"), dtype=float)
    if slopes.shape != comp_shape + (grid.n,):
        raise ScenarioError(
            f"linear.slopes: expected shape {comp_shape + (grid.n,)}, got {slopes.shape}"
        )
    out = np.zeros(grid.shape + comp_shape)
    for ax in range(grid.n):
        out += slopes[..., ax] * grid.coord(ax)[(...,) + (None,) * len(comp_shape)]
    if "offset" in spec:
        out += np.asarray(spec["offset"], dtype=float)
    return out


def _random_smooth(spec: dict, grid: GridChart, comp_shape, rng) -> np.ndarray:
    """Band-limited trigonometric polynomial with seeded normal coefficients.

    modes = highest integer frequency per axis; each component gets
    independent cos/sin coefficients for every nonzero integer wave vector in
    the band, scaled so the expected amplitude is about ``amplitude``.
    """
    amp = float(spec.get("amplitude", 0.1))
    modes = int(spec.get("modes", 1))
    if modes < 1:
        raise ScenarioError("random.modes: must be >= 1")
    waves = [
        kvec
        for kvec in itertools.product(range(-modes, modes + 1), repeat=grid.n)
        if any(kvec)
    ]
    # keep one representative of each +-k pair (cos/sin already span both)
    waves = [k for k in waves if k > tuple(-v for v in k)]
    out = np.zeros(grid.shape + comp_shape)
    ncomp = int(np.prod(comp_shape))
    coeff = rng.normal(size=(len(waves), 2, ncomp)) * (amp / np.sqrt(len(waves)))
    # periodic boxes need integer cycles across the length to stay smooth
    lengths = [grid.spacing[ax] * grid.shape[ax] for ax in range(grid.n)]
    for w, kvec in enumerate(waves):
        arg = sum(
            2.0 * np.pi * kvec[ax] * grid.coord(ax) / lengths[ax] for ax in range(grid.n)
        )
        basis = np.stack([np.cos(arg), np.sin(arg)], axis=-1)  # (x..., 2)
        contrib = np.einsum("...w,wc->...c", basis, coeff[w])
        out += contrib.reshape(grid.shape + comp_shape)
    return out
