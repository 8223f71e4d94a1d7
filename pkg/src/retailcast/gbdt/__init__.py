"""Histogram gradient-boosted trees: leaf-wise growth, GOSS, feature bundling, categorical splits."""

from .binning import BinMapper, Histogram, build_histograms
from .boosting import GbdtModel, feature_importance, predict, train
from .bundling import Bundle, efb_bundle
from .estimator import GBDTRegressor
from .objectives import poisson_grad_hess, squared_grad_hess
from .params import LAMBDA, GbdtParams
from .sampling import goss_sample
from .splitting import SplitCandidate, best_split
from .tree import Tree, grow_tree_leafwise

__all__ = [
    "BinMapper",
    "Bundle",
    "GBDTRegressor",
    "GbdtModel",
    "GbdtParams",
    "Histogram",
    "LAMBDA",
    "SplitCandidate",
    "Tree",
    "best_split",
    "build_histograms",
    "efb_bundle",
    "feature_importance",
    "goss_sample",
    "grow_tree_leafwise",
    "poisson_grad_hess",
    "predict",
    "squared_grad_hess",
    "train",
]
