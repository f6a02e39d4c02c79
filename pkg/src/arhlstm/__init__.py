"""Functional time series prediction: ARH(1) plug-in estimator and a numpy LSTM."""

from arhlstm.arh import ArhModel, fit_arh, predict_next, select_kn
from arhlstm.covariance import (
    EigenSystem,
    eigendecompose_symmetric,
    empirical_covariance,
    empirical_cross_covariance,
    ridge_regularized_inverse,
    spectral_regularized_inverse,
)
from arhlstm.evaluation import mare, normalize_dataset, split
from arhlstm.function_space import (
    CurveDataset,
    FunctionSample,
    GridSpec,
    LinearOperatorMatrix,
    apply_operator,
    hs_norm,
    inner_product,
    rank_one,
)
from arhlstm.lstm import LstmParams, TrainConfig, lstm_backward, lstm_forward, train_lstm
from arhlstm.simulate import SimConfig, build_rho_matrix, nonlinear_transform, simulate_arh

__version__ = "0.1.0"
