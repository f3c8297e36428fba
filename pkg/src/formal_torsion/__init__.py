"""p-adic formal groups, their [p]-series, strictness, and the ramification of p-torsion."""

from .errors import *  # noqa: F401,F403
from .formal_group import (
    FormalGroupLaw,
    build_additive,
    build_elliptic,
    build_lubin_tate,
    build_multiplicative,
    build_product,
    change_coordinates,
    default_truncation,
    verify_group_axioms,
)
from .power_series import MultiSeries, SeriesTuple
from .ramified_ext import EisensteinExtension, RamifiedElement, delta, delta_properties_check
from .scalar_arith import PadicScalar, PrimeConfig, Valuation
from .strictness import FormSystem, StrictnessVerdict, brute_force_common_zero, decide_strict, extract_forms, transform_forms
from .torsion import (
    NewtonPolygon,
    TorsionReport,
    eisenstein_root_geometry,
    lift_torsion_root,
    newton_polygon,
    torsion_valuations,
    verify_O1_exclusion,
    verify_theorem_B,
)

__version__ = "0.1.0"
