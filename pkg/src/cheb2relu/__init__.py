"""Compile Chebyshev expansions and continuous piecewise polynomials into ReLU networks."""

from .calculus import concat, full_parallel, identity_net, parallel, sparse_concat
from .chebyshev import ChebSeries, cc_grid, cc_interpolate, interpolate
from .emulator import build_cheb_tower, build_interval_emulator, build_poly_emulator
from .errors import DataError, ParameterError, StructuralError
from .nn_core import Layer, NeuralNetwork, SizeMetrics, realize, realize_with_derivative
from .product import ProductSpec, build_product, product_constants
from .sobolev import ErrorReport, diff_norms, singular_diff_norms
from .splines import Mesh, PiecewiseCheb, build_spline_emulator, sample_to_spline
from .studies import GeometricMeshSpec, StudyRecord, geometric_mesh

__all__ = [
    "ChebSeries", "DataError", "ErrorReport", "GeometricMeshSpec", "Layer", "Mesh",
    "NeuralNetwork", "ParameterError", "PiecewiseCheb", "ProductSpec", "SizeMetrics",
    "StructuralError", "StudyRecord", "build_cheb_tower", "build_interval_emulator",
    "build_poly_emulator", "build_product", "build_spline_emulator", "cc_grid",
    "cc_interpolate", "concat", "diff_norms", "full_parallel", "geometric_mesh",
    "identity_net", "interpolate", "parallel", "product_constants", "realize",
    "realize_with_derivative", "sample_to_spline", "singular_diff_norms", "sparse_concat",
]
