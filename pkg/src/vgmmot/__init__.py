"""Optimal transport between scalar, vector-valued and unbalanced Gaussian mixtures."""

from .errors import (
    DimensionMismatchError,
    InfeasibleError,
    MarginalMismatchError,
    ModelValidationError,
    NotPSDError,
    NumericalError,
    SingularCovarianceError,
    UnbalancedInputError,
    VGMMError,
    ZeroMassError,
)
from .fit import WeightedSamples, fit_gmm_em, fit_gmm_em_detailed, fit_image, image_to_channels
from .gaussian import Gaussian, gaussian_interpolate, w2_gaussian, w2_squared
from .gmm import gmm_distance, gmm_interpolate, unbalanced_gmm_distance, unbalanced_gmm_interpolate
from .graph import ChannelGraph, GraphPosition, delta_vector, path_interpolate, position_distance, shortest_path
from .io import load_model, model_from_json, model_to_json, save_model
from .linalg import psd_inv_sqrt, psd_sqrt, sym_eig
from .models import MixtureModel, TransportResult, VectorInterpolant, VectorMixtureModel
from .render import GridSpec, rasterize, write_frames
from .transport import Coupling, Infeasible, TransportSolution, solve_transport, solve_transport_masked
from .vector import (
    channel_mask,
    cost_matrix_v0,
    cost_matrix_v1,
    cost_matrix_v2,
    unbalanced_vgmm_distance,
    unbalanced_vgmm_interpolate,
    vgmm_distance,
    vgmm_interpolate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
