"""Vector diffusion maps, connection-Laplacian heat kernels and vector spectral distances."""

from .models import (
    ManifoldModel,
    PointCloud,
    analytic_spectra,
    comparison_radius,
    geodesic,
    make_model,
    sample,
    shape_constant_a,
    sphere_partition,
)
from .spectra import ScalarSpectrum, TangentSpectrum
from .discrete import default_bandwidth, discrete_spectra
from .heat import kernel_block, partition
from .vdm import BasisRotation, apply_rotation, embed, vdm_distance, vdm_distances
from .specdist import hausdorff, isometry_test, vector_spectral_distance

__version__ = "0.1.0"
