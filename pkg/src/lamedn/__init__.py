"""Identification of piecewise-constant elastic moduli from boundary data.

Forward FEM modelling of the local Dirichlet-to-Neumann map of a layered
isotropic body, exact parameter derivatives, closed-form half-space and
bimaterial kernels, Gauss-Newton reconstruction, and empirical probes of the
stability and unique-continuation machinery behind the inversion.
"""

from .backend import BACKEND
from .core import (
    DEFAULT_BOX,
    AdmissibleBox,
    IsotropicTensor,
    LameVector,
    SigmaModulus,
    check_admissible,
    poisson_bounds,
    poisson_ratio,
    propbv_constant,
    sample_admissible,
    sigma,
    sigma_compose,
    sigma_inverse,
)
from .geometry import (
    ConeChain,
    PartitionedMesh,
    build_cone_chain,
    build_layered_cube,
    eta_r,
    load_mesh,
    nesting_margins,
    rho1,
    save_mesh,
    tau_r,
    validate_mesh,
    walkway_h0,
)
from .kernels import (
    AxisSource,
    BiphaseParams,
    dgamma33_dt,
    f1_alpha,
    f2_gamma,
    gamma33_ondiag_difference,
    gamma_e3_upper,
    kelvin_gradient,
    kelvin_matrix,
    lame_lambda,
)
from .fem import (
    DnMatrix,
    FemSystem,
    MeshCache,
    alessandrini_residual,
    assemble,
    build_cache,
    dn_bilinear,
    dn_matrix,
    dn_operator_norm,
    green_function,
    h1_seminorm_error,
    sensitivity_identity_check,
    sensitivity_kernel,
    solve_dirichlet,
)
from .inverse import (
    ForwardContext,
    Jacobian,
    build_context,
    forward,
    frechet_derivative,
    lipschitz_probe,
    q0_estimate,
    reconstruct,
    star_norm,
)
from .ucp import (
    SolutionEnsemble,
    SolutionMember,
    ball_l2,
    caccioppoli_check,
    cone_l2,
    cone_propagation_experiment,
    interface_chain_experiment,
    kelvin_ensemble,
    linear_ensemble,
    mixed_ensemble,
    three_sphere_fit,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
