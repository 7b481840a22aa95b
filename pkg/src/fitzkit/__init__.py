"""fitzkit: desk-scale computations with monotone operator representations.

Construct polyhedral convex functions and finite operator graphs, evaluate
Fitzpatrick functions and maximal representatives, measure representation
gaps, and certify n-cyclic monotonicity, with brute-force oracles and a
scenario-driven CLI for reproducible reports.
"""

__version__ = "0.1.0"

from .config import DEFAULT_TOL
from .geometry import (
    DimensionMismatch,
    HalfspaceCone,
    PolyhedralCone,
    Polytope,
    cone_support_value,
    minkowski_membership,
    orthogonality_check,
    polar_cone,
    polytope_membership,
    support_value,
)
from .linprog import LPResult, solve_lp
from .convexfn import (
    AffineMax,
    Composite,
    ConvexFunction,
    FieldGrid,
    FnSum,
    GridAxis,
    GridSampled,
    IndicatorPolyhedron,
    InvalidVKCSpec,
    SupportOfPolytope,
    VKCSpec,
    conjugate_grid,
    conjugate_vkc,
    eps_subgradient_test,
    eval_vkc,
    inf_convolution_grid,
    subdifferential_affine_max,
    subdifferential_vkc,
    vkc_function,
)
from .operators import (
    DualPair,
    LinearOperator,
    OperatorGraph,
    is_skew,
    lattice_points,
    linear_graph,
    sample_subdifferential,
    transform_graph,
)
from .fitzpatrick import (
    argmax_set,
    fitzpatrick_value,
    gap_value,
    marginal_dual,
    marginal_primal,
    p_value,
    p_via_conjugate,
    representative_check,
    sandwich_test,
    singleton_criterion,
    singleton_criterion_vkc,
    singleton_test,
)
from .monotonicity import (
    CapExceeded,
    CycleWitness,
    is_cyclically_monotone,
    is_n_monotone,
    rockafellar_potential,
    theorem_a_suite,
)
