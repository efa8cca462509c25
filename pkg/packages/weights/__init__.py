"""
Spatial weight matrices: k-NN construction, row normalization, spatial lags
"""

from packages.weights.matrix import WeightMatrix, row_normalize
from packages.weights.knn import build_knn
from packages.weights.lag import spatial_lag
from packages.weights.io import load_coordinates, save_coordinates, load_triplets, save_triplets

__all__ = [
    "WeightMatrix",
    "row_normalize",
    "build_knn",
    "spatial_lag",
    "load_coordinates",
    "save_coordinates",
    "load_triplets",
    "save_triplets",
]
