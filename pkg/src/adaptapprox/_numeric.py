"""Stable scalar maps shared by the solvers."""

import numpy as np
from scipy.special import expit, xlogy

sigmoid = expit


def softplus(x):
    """log(1 + exp(x)) without overflow."""
    return np.logaddexp(0.0, x)


def log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def logistic_loss(margin):
    """log(1 + exp(-margin)) where margin = y * score."""
    return np.logaddexp(0.0, -margin)


def binary_entropy(q):
    q = np.asarray(q, dtype=float)
    return -xlogy(q, q) - xlogy(1.0 - q, 1.0 - q)


def logit(q):
    q = np.asarray(q, dtype=float)
    return np.log(q) - np.log1p(-q)
