"""Third-order tensor algebra under the tubal product.

Tensor-tensor products, the tubal SVD / CS decomposition / generalized
SVD, and closed-form Tikhonov regularization for deblurring problems,
all computed slice-wise in the Fourier domain.

The environment variable ``TPROD_THREADS`` caps the BLAS/FFT thread
pools; it must be honored before numpy starts, which is why this block
runs ahead of the imports below.
"""

import os as _os

_threads = _os.environ.get("TPROD_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _threads)

from .decomp import (  # noqa: E402
    TCsdFactors,
    TCsdGeneralFactors,
    TGsvdFactors,
    TSvdFactors,
    tcsd_general,
    tcsd_thin,
    tgsvd,
    tsvd,
)
from .errors import (  # noqa: E402
    ConjugateSymmetryError,
    FormatError,
    OrthogonalityError,
    ShapeMismatchError,
    SingularFilterError,
    SingularSliceError,
    TubalError,
)
from .problems import (  # noqa: E402
    BlurSpec,
    add_noise,
    build_blur_tensor,
    gaussian_blur_matrices,
    gravity_matrix,
    ones_solution,
    prolate_matrix,
    separable_blur_tensor,
    standard_normal_field,
)
from .t3b import read_t3b, write_t3b  # noqa: E402
from .tensor import (  # noqa: E402
    FourierStack,
    Tensor3,
    TubalScalar,
    bcirc,
    block_compose,
    dft3,
    fnorm,
    fold,
    identity_tensor,
    idft3,
    tinv,
    tprod,
    ttranspose,
    unfold,
)
from .tikhonov import (  # noqa: E402
    GsvdTikhonovSolver,
    RegularizerKind,
    TikhonovRun,
    choose_mu_discrepancy,
    make_regularizer,
    normal_equation_residual,
    relative_error,
    run_tikhonov,
    solve_tikhonov_gsvd,
    solve_tikhonov_normal,
    sweep_mu,
)

__version__ = "0.1.0"

__all__ = [
    "BlurSpec",
    "ConjugateSymmetryError",
    "FormatError",
    "FourierStack",
    "GsvdTikhonovSolver",
    "OrthogonalityError",
    "RegularizerKind",
    "ShapeMismatchError",
    "SingularFilterError",
    "SingularSliceError",
    "TCsdFactors",
    "TCsdGeneralFactors",
    "TGsvdFactors",
    "TSvdFactors",
    "Tensor3",
    "TikhonovRun",
    "TubalError",
    "TubalScalar",
    "add_noise",
    "bcirc",
    "block_compose",
    "build_blur_tensor",
    "choose_mu_discrepancy",
    "dft3",
    "fnorm",
    "fold",
    "gaussian_blur_matrices",
    "gravity_matrix",
    "identity_tensor",
    "idft3",
    "make_regularizer",
    "normal_equation_residual",
    "ones_solution",
    "prolate_matrix",
    "read_t3b",
    "relative_error",
    "run_tikhonov",
    "separable_blur_tensor",
    "solve_tikhonov_gsvd",
    "solve_tikhonov_normal",
    "standard_normal_field",
    "sweep_mu",
    "tcsd_general",
    "tcsd_thin",
    "tgsvd",
    "tinv",
    "tprod",
    "tsvd",
    "ttranspose",
    "unfold",
    "write_t3b",
]
