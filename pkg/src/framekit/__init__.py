"""framekit: finite frames, RIP certification and the fusion frames built from them."""

__version__ = "0.1.0"

from .errors import FrameKitError  # noqa: E402
from .numerics import DEFAULT_TOL, Tolerances, spectral_power, svd, sym_eigen  # noqa: E402
from .frames import (Frame, FrameBounds, analysis_apply, canonical_parseval,  # noqa: E402
                     frame_bounds, frame_operator_apply, make_harmonic_frame,
                     make_random_unit_tight_frame, orthonormal_frame, reconstruct)
from .partition import Partition  # noqa: E402
from .rip import (RieszBounds, RipReport, check_operator_power_bounds,  # noqa: E402
                  check_partition_inequality, riesz_bounds, rip_exhaustive, rip_randomized)
from .fusion import (FusionFrame, NearTightnessReport, Subspace, certify_near_tightness,  # noqa: E402
                     check_block_energy, check_local_global, fusion_bounds,
                     fusion_frame_from_partition, fusion_reconstruct, measure, project)
from .geometry import (IsoclinicReport, PrincipalAngles, certify_equi_isoclinic,  # noqa: E402
                       certify_near_orthogonality, check_correlation_bound, isoclinic_parameter,
                       near_orthogonality, principal_angles)
from .replacement import (ReplacedFrame, ReplacementReport, certify_replacement,  # noqa: E402
                          check_projection_residual, k1_limit, replace_blocks, whiten_block)
