"""Numerical variational calculus of gauge-invariant Lagrangians on bundles
of connections: Euler-Lagrange and Hamilton-Cartan residuals, Jacobi
linearizations, gauge actions, and self-duality at desk scale."""

__version__ = "0.1.0"

from .fields import (
    ConnectionField,
    GridChart,
    JetField,
    JetVariationField,
    TwoTensorField,
    VariationField,
    alt,
    delta_C,
    partial,
    prolong,
    prolong_variation,
    sym,
)
from .gauge import (
    GaugeParameterField,
    check_gauge_invariance,
    check_rho_equivariance,
    check_solution_preservation,
    infinitesimal_gauge,
)
from .hodge import MetricContext, hodge_star, selfdual_check, wedge_dot, ym_covariant_divergence
from .jacobi import (
    JacobiResidual,
    jacobi_residual,
    jacobi_residual_holonomic,
    linearize_el_fd,
    t2_decompose,
)
from .lagrangian import (
    CurvatureField,
    HessianReport,
    LagrangianSpec,
    builtin_ym,
    curvature,
    custom_quadratic,
    dl_dA,
    dl_dAij,
    hessian,
    l_eval,
)
from .lie import AdInvariantPairing, LieAlgebraSpec, bracket, killing_form, preset, validate
from .variational import (
    ELResidualField,
    HCResidualPair,
    el_residual,
    hc_residual,
    hc_residual_generic,
    verify_fibration,
)

__all__ = [name for name in dir() if not name.startswith("_")]
