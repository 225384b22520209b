"""Exact Chevalley-Eilenberg algebras, invariant cohomology and Massey products."""

from nilforge.scalar import QQ, QuadExt, QuadField, RationalField, field_of
from nilforge.exterior import Form, GeneratorSet, basis_of_degree, lin_comb, wedge
from nilforge.cdga import (
    CheckReport,
    CohomologyBasis,
    CohomologyClass,
    DGA,
    Subcomplex,
    tensor_product,
)
from nilforge.symmetry import (
    AlgebraMorphism,
    FiniteCyclicAction,
    average,
    change_of_basis,
    invariant_cohomology,
    invariant_complex,
    verify_action,
)
from nilforge.massey import (
    DefiningSystem,
    MasseyValue,
    ObstructionCertificate,
    TripleMasseyResult,
    equivariant_average_system,
    massey_degree_scan,
    massey_value,
    quad_nontriv_certificate,
    solve_defining_system,
    triple_massey,
)
from nilforge.lattice import (
    AffineTorusAction,
    GroupLaw,
    PolyForm,
    Polynomial,
    fixed_points,
    group_law_check,
    orbifold_euler,
    smith_normal_form,
)
from nilforge.dsl import ParseError, Workspace, format_form, load_workspace, parse_form, parse_workspace, print_workspace

__version__ = "0.1.0"
