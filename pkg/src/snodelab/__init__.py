"""Numerical laboratory for self-adjoint S-nodes.

Evaluate transfer-matrix frames, generate Herglotz-class functions through
property-J linear-fractional transformations, spectrally factorize the
boundary densities, and verify the entropy inequality

    2 pi G(z)* G(z) <= rho(z, conj z)^{-1}

together with its equality case, plus the Smirnov-class and resolvent-growth
hypothesis diagnostics.
"""

from .backends import BACKEND, HAS_NUMBA, backend_info
from .conformal import (
    CircleGrid,
    DensityGrid,
    MoebiusMap,
    breve_transport,
    extract_density,
    hat_transport,
    weight_transform,
)
from .entropy import (
    DiskFrameSample,
    EntropyReport,
    GrowthReport,
    SmirnovReport,
    VerificationRun,
    build_disk_frame,
    chi,
    delta,
    disk_lft,
    growth_diagnostics,
    smirnov_diagnostics,
    verify_inequality,
)
from .frame import (
    FrameSample,
    JReport,
    RhoValue,
    calV,
    check_j_inequality,
    eval_frame,
    eval_transfer,
    inverse_frame,
    kernel_identity_residual,
    rho,
    rho_inverse,
    upsilon,
)
from .lft import (
    HerglotzEval,
    HerglotzRepresentation,
    herglotz_representation,
    PairJ,
    PairReport,
    check_herglotz,
    check_pair,
    constant_pair,
    equality_pair,
    estimate_gamma_theta,
    eval_phi,
    identity_pair,
    pair_from_disk_pair,
)
from .snode import (
    SNode,
    SignatureConstants,
    SpectrumReport,
    ToleranceSet,
    ValidationReport,
    build_moment_node,
    flip_node,
    signature_constants,
    spectrum_report,
    validate_node,
)
from .specfact import (
    CertificateReport,
    SpectralFactor,
    SzegoReport,
    evaluate_interior,
    outer_certificate,
    scalar_outer,
    szego_check,
    wilson_factorize,
)

__version__ = "0.1.0"
