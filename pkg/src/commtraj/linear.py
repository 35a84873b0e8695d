"""Linear models for the prediction experiments: min-max feature scaling,
weighted L2-regularized logistic classification, and L2-regularized
epsilon-insensitive support vector regression. Solved with a quasi-Newton
optimizer on the (sub)smooth primal objectives."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

CONVERGENCE_TOL = 1e-8  # relative objective change
MAX_ITER = 10000


@dataclass(frozen=True)
class MinMaxScaler:
    mins: np.ndarray
    ranges: np.ndarray  # zero for constant features


def fit_scaler(X: np.ndarray) -> MinMaxScaler:
    """Per-feature affine map sending the training min to 0 and max to 1.
    Constant features map everything to 0."""
    if X.shape[0] == 0:
        raise ValueError("cannot fit a scaler on an empty training set")
    mins = X.min(axis=0)
    ranges = X.max(axis=0) - mins
    return MinMaxScaler(mins, ranges)


def apply_scaler(scaler: MinMaxScaler, X: np.ndarray) -> np.ndarray:
    """Apply the training affine map; out-of-range values extrapolate
    (no clipping)."""
    out = np.zeros_like(X, dtype=float)
    nz = scaler.ranges != 0
    out[:, nz] = (X[:, nz] - scaler.mins[nz]) / scaler.ranges[nz]
    return out


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    converged: bool


def _minimize(objective, x0: np.ndarray, tol: float, max_iter: int):
    result = optimize.minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "maxfun": 20 * max_iter, "ftol": tol, "gtol": 0.0},
    )
    if not result.success and result.status != 0:
        warnings.warn(
            f"optimizer stopped early ({result.message}); using best iterate",
            RuntimeWarning,
            stacklevel=3,
        )
    return result


def _class_weights(y: np.ndarray) -> np.ndarray:
    """Inverse-class-frequency sample weights, normalized so they sum to n."""
    n = y.shape[0]
    n_pos = int(y.sum())
    w = np.where(y == 1, n / (2.0 * n_pos), n / (2.0 * (n - n_pos)))
    return w


def train_linear_classifier(
    X: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    weighted: bool = True,
    tol: float = CONVERGENCE_TOL,
    max_iter: int = MAX_ITER,
) -> LinearModel:
    """Weighted L2-regularized logistic regression. ``y`` holds 0/1 labels;
    minimizes 0.5 ||w||^2 + c * sum_i s_i log(1 + exp(-y~_i z_i)) where s_i is
    the inverse-class-frequency weight of example i."""
    y = np.asarray(y, dtype=float)
    if y.min() == y.max():
        raise ValueError("training labels are all one class")
    X = np.asarray(X, dtype=float)
    signs = 2.0 * y - 1.0
    sample_w = _class_weights(y) if weighted else np.ones_like(y)

    def objective(theta: np.ndarray):
        w, b = theta[:-1], theta[-1]
        z = X @ w + b
        margins = signs * z
        # log(1 + exp(-m)) computed stably
        losses = np.logaddexp(0.0, -margins)
        value = 0.5 * float(w @ w) + c * float(sample_w @ losses)
        # d/dm log(1+exp(-m)) = -sigmoid(-m)
        coeff = -sample_w * signs * _sigmoid(-margins)
        grad_w = w + c * (X.T @ coeff)
        grad_b = c * float(coeff.sum())
        return value, np.concatenate([grad_w, [grad_b]])

    result = _minimize(objective, np.zeros(X.shape[1] + 1), tol, max_iter)
    return LinearModel(result.x[:-1], float(result.x[-1]), bool(result.success))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def train_linear_svr(
    X: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    epsilon: float = 0.1,
    tol: float = CONVERGENCE_TOL,
    max_iter: int = MAX_ITER,
) -> LinearModel:
    """L2-regularized linear support vector regression with the squared
    epsilon-insensitive loss max(0, |y - z| - eps)^2, which is continuously
    differentiable and well suited to quasi-Newton solvers."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)

    def objective(theta: np.ndarray):
        w, b = theta[:-1], theta[-1]
        residual = X @ w + b - y
        excess = np.maximum(0.0, np.abs(residual) - epsilon)
        value = 0.5 * float(w @ w) + c * float(excess @ excess)
        coeff = 2.0 * c * np.sign(residual) * excess
        grad_w = w + X.T @ coeff
        grad_b = float(coeff.sum())
        return value, np.concatenate([grad_w, [grad_b]])

    result = _minimize(objective, np.zeros(X.shape[1] + 1), tol, max_iter)
    return LinearModel(result.x[:-1], float(result.x[-1]), bool(result.success))


def decision_function(model: LinearModel, X: np.ndarray) -> np.ndarray:
    return np.asarray(X, dtype=float) @ model.weights + model.bias


def predict_labels(model: LinearModel, X: np.ndarray) -> np.ndarray:
    return (decision_function(model, X) > 0.0).astype(int)


def predict_values(model: LinearModel, X: np.ndarray) -> np.ndarray:
    return decision_function(model, X)


def evaluate_f1(predictions: np.ndarray, labels: np.ndarray, positive: int = 1) -> float:
    """Harmonic mean of precision and recall on the positive class; 0 by
    convention when precision + recall is 0."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    tp = int(np.sum((predictions == positive) & (labels == positive)))
    fp = int(np.sum((predictions == positive) & (labels != positive)))
    fn = int(np.sum((predictions != positive) & (labels == positive)))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def evaluate_rmse(predictions: np.ndarray, targets: np.ndarray) -> float:
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    return float(np.sqrt(np.mean((predictions - targets) ** 2)))
