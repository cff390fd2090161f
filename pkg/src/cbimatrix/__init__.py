"""Complex bimatrix variate generalised beta distributions.

Samplers, exact densities, matrix-argument hypergeometric series built on
complex zonal polynomials, determinant moments, eigenvalue densities and
Monte Carlo / quadrature oracles for all of them.
"""

__version__ = "0.1.0"

from .errors import DivergenceError, DomainError
from .hermitian import (
    EigenSpectrum,
    as_hermitian,
    eig_hermitian,
    herm_sqrt,
    logdet,
    matrix_from_json,
    matrix_to_json,
)
from .partitions import (
    Partition,
    enumerate_partitions,
    ghc,
    zonal_C,
    zonal_at_identity,
)
from .matfun import (
    BimatrixParams,
    SeriesValue,
    TruncationPolicy,
    euler_lift_estimate,
    hyp_pfq,
    mv_beta,
    mv_beta_star,
    mv_gamma,
    vol_stiefel,
)
from .mc import MCEstimate
from .rng import make_rng

__all__ = [
    "__version__",
    "BimatrixParams",
    "DivergenceError",
    "DomainError",
    "EigenSpectrum",
    "MCEstimate",
    "Partition",
    "SeriesValue",
    "TruncationPolicy",
    "as_hermitian",
    "eig_hermitian",
    "enumerate_partitions",
    "euler_lift_estimate",
    "ghc",
    "herm_sqrt",
    "hyp_pfq",
    "logdet",
    "make_rng",
    "matrix_from_json",
    "matrix_to_json",
    "mv_beta",
    "mv_beta_star",
    "mv_gamma",
    "vol_stiefel",
    "zonal_C",
    "zonal_at_identity",
]
