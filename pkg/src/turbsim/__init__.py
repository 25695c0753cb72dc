"""Anisoplanatic atmospheric turbulence simulation and dataset tooling.

The package models long-range imaging through turbulence as a spatially
varying degradation: a Zernike-coefficient random field drives a per-pixel
tilt warp followed by a spatially varying blur expressed in a fixed PSF
basis, plus sensor noise.  The operator pair (forward, vector-Jacobian
product) is exactly adjoint, which makes the simulator usable inside
gradient-based restoration loops, and every sampled degradation is
replayable bit-for-bit from a small sidecar record.

Module map:

- ``optics``: protocols, Zernike modes, Kolmogorov scalars.
- ``field``: stationary Zernike-coefficient random fields.
- ``psf``: exact PSF rendering, the learned kernel basis, and the
  coefficient-to-weights surrogate; artifact (de)serialization.
- ``operators``: tilt warp, spatially varying blur, their adjoints, and
  the composed forward/VJP pair.
- ``dataset``: protocol tables, sidecars, reproducible generation.
- ``inverse``: consistency loss and gradient-descent inversion.
- ``metrics`` / ``imageio``: PSNR/SSIM and PNG/raw-float image IO.
- ``estimators`` / ``validation``: scikit-learn style facade.
- ``cli``: the ``turbsim`` command.
"""

from turbsim.optics import (
    TurbulenceProtocol,
    ZernikeSpec,
    ModalCovariance,
    noll_to_nm,
    fried_parameter,
    isoplanatic_angle,
    zernike_eval,
    zernike_raster,
    noll_covariance,
    tilt_pixel_scale,
)
from turbsim.field import (
    FieldAutocorrelation,
    ZernikeField,
    build_autocorrelation,
    sample_field,
    field_statistics,
)
from turbsim.psf import (
    PsfBasis,
    P2sMap,
    CoeffMaps,
    FitQualityError,
    ArtifactError,
    render_psf_exact,
    render_psf_batch,
    build_psf_basis,
    fit_p2s_surrogate,
    project_coeffs_exact,
    p2s_eval,
    save_artifact,
    load_artifact,
    artifact_hash,
)
from turbsim.operators import (
    ShiftField,
    DegradationRealization,
    tilt_shifts,
    tilt_warp,
    tilt_warp_adjoint,
    sv_blur,
    sv_blur_adjoint,
    realize,
    simulate_forward,
    simulate_vjp,
)
from turbsim.dataset import (
    ProtocolTable,
    TableRow,
    StrengthLabel,
    SampleSidecar,
    SidecarVersionError,
    default_table,
    sample_protocol,
    classify_strength,
    generate_dataset,
    reproduce_sample,
)
from turbsim.inverse import InverseConfig, consistency_loss, invert
from turbsim.metrics import psnr, ssim
from turbsim.estimators import TurbulenceDegrader

__version__ = "0.1.0"

__all__ = [
    "TurbulenceProtocol",
    "ZernikeSpec",
    "ModalCovariance",
    "noll_to_nm",
    "fried_parameter",
    "isoplanatic_angle",
    "zernike_eval",
    "zernike_raster",
    "noll_covariance",
    "tilt_pixel_scale",
    "FieldAutocorrelation",
    "ZernikeField",
    "build_autocorrelation",
    "sample_field",
    "field_statistics",
    "PsfBasis",
    "P2sMap",
    "CoeffMaps",
    "FitQualityError",
    "ArtifactError",
    "render_psf_exact",
    "render_psf_batch",
    "build_psf_basis",
    "fit_p2s_surrogate",
    "project_coeffs_exact",
    "p2s_eval",
    "save_artifact",
    "load_artifact",
    "artifact_hash",
    "ShiftField",
    "DegradationRealization",
    "tilt_shifts",
    "tilt_warp",
    "tilt_warp_adjoint",
    "sv_blur",
    "sv_blur_adjoint",
    "realize",
    "simulate_forward",
    "simulate_vjp",
    "ProtocolTable",
    "TableRow",
    "StrengthLabel",
    "SampleSidecar",
    "SidecarVersionError",
    "default_table",
    "sample_protocol",
    "classify_strength",
    "generate_dataset",
    "reproduce_sample",
    "InverseConfig",
    "consistency_loss",
    "invert",
    "psnr",
    "ssim",
    "TurbulenceDegrader",
    "__version__",
]
