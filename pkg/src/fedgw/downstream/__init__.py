"""Consumers of GW distance matrices: clustering, classification, studies."""

from .ged import ged_bruteforce
from .kmeans import ClusterAssignment, adjusted_rand_index, gw_kmeans
from .knn import knn_classify
from .mds import classical_mds
from .studies import SensitivityResult, SweepRow, epsilon_sweep, neighbor_sensitivity, write_sweep_csv
from .svm import SvmModel, gw_kernel, svm_decision, svm_predict, svm_train
from .validation import C_GRID, GAMMA_GRID, CvResult, cross_validate, stratified_split

__all__ = [
    "C_GRID", "ClusterAssignment", "CvResult", "GAMMA_GRID", "SensitivityResult", "SvmModel", "SweepRow",
    "adjusted_rand_index", "classical_mds", "cross_validate", "epsilon_sweep", "ged_bruteforce",
    "gw_kernel", "gw_kmeans", "knn_classify", "neighbor_sensitivity", "stratified_split", "svm_decision",
    "svm_predict", "svm_train", "write_sweep_csv",
]
