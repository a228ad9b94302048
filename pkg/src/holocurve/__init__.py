"""Numerical value-distribution toolkit for holomorphic curves in projective space."""

from holocurve.config import ExperimentConfig, parse_config, parse_config_text
from holocurve.connection import (
    MeromorphicConnection,
    autoparallel_wronskian,
    covariant_jets,
    is_autoparallel,
    nadel_transform,
    pole_membership,
    siu_smt_residual,
)
from holocurve.errors import (
    BoundaryZeroError,
    ChartError,
    DegenerateConfigurationError,
    DomainError,
    ExpressionSyntaxError,
    HolocurveError,
    NonReducedError,
    PoleError,
    QuadratureError,
    SingularPointError,
    StationaryPointError,
)
from holocurve.expression import jet_eval, parse, to_text
from holocurve.exterior import (
    ExteriorElement,
    complement,
    enumerate_multiindices,
    interior_product,
    pair,
    perm_sign,
    wedge,
)
from holocurve.jacobian import (
    HolomorphicField,
    MeromorphicVectorField,
    PoleSection,
    effectivity_test,
    find_effective_multiindex,
    first_integral_check,
    g_ratio,
    jacobian_scalar,
    jacobian_zeros,
    ramification,
    smt_identity,
    smt_identity_residual,
    smt_inequality,
)
from holocurve.jets import Jet
from holocurve.nevanlinna import (
    Divisor,
    GrowthTable,
    ProjectiveCurve,
    calculus_lemma_diagnostic,
    characteristic,
    counting,
    fmt_residual,
    fmt_tables,
    jensen_check,
    proximity,
)
from holocurve.runner import ExperimentReport, run_experiment
from holocurve.zeros import ZeroList, count_zeros

__version__ = "0.1.0"
