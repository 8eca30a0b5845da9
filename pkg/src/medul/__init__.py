"""Regression from mediated uncoupled data.

Given ``S_X = {(X_i, U_i)}`` and an independent ``S_Y = {(U'_j, Y'_j)}`` with no
(X, Y) pairs, learn ``f: X -> Y``. See :mod:`medul.estimators` for the fitting
routines and :mod:`medul.oracle` for exact population checks.
"""
from medul.datasets import PairSet, SyntheticConfig, gen_synthetic, read_csv, write_csv
from medul.estimators import (
    LinearModel,
    NaiveChainModel,
    empirical_J,
    fit_joint_block,
    fit_joint_full,
    fit_method,
    fit_naive_chain,
    fit_two_step,
    load_model,
    mse,
    predict,
    save_model,
)
from medul.features import FeatureMap, FeatureMapSpec, fit_feature_map
from medul.kernels import BACKEND

__version__ = "0.1.0"
