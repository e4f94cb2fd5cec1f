"""Independent oracles used across the test suite.

Everything here is deliberately written without the package's tensor ops so
the checks stay independent of the code paths they verify.
"""

import numpy as np


def central_difference(f, x0, h=1e-5):
    """Central finite-difference gradient of scalar f at array x0 (in place probing)."""
    x0 = np.asarray(x0, dtype=np.float64)
    g = np.zeros_like(x0)
    flat, gf = x0.ravel(), g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x0)
        flat[i] = orig - h
        fm = f(x0)
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def rel_gradient_error(analytic, numeric):
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    denom = max(float(np.linalg.norm(numeric)), 1e-8)
    return float(np.linalg.norm(analytic - numeric)) / denom


def straightline_mlp(X, weights, biases, activations):
    """Hand-rolled forward pass: activation(X @ W.T + b) per layer."""
    acts = {
        "identity": lambda v: v,
        "tanh": np.tanh,
        "relu": lambda v: np.maximum(v, 0.0),
        "softplus": lambda v: np.logaddexp(0.0, v),
    }
    H = np.asarray(X, dtype=np.float64)
    for W, b, a in zip(weights, biases, activations):
        H = acts[a](H @ np.asarray(W).T + np.asarray(b))
    return H


def adam_single_step(p, g, lr=0.001, b1=0.9, b2=0.999, eps=1e-8, t=1):
    """One bias-corrected adaptive update from fresh moment buffers."""
    m = (1 - b1) * g
    v = (1 - b2) * g * g
    m_hat = m / (1 - b1 ** t)
    v_hat = v / (1 - b2 ** t)
    return p - lr * m_hat / (np.sqrt(v_hat) + eps)


def compression_via_det(mu):
    """Half log-determinant of diag(second moments) + identity, via a generic det."""
    mu = np.asarray(mu, dtype=np.float64)
    m = np.mean(mu * mu, axis=0)
    return 0.5 * np.log(np.linalg.det(np.diag(m) + np.eye(m.size)))


def gaussian_kl_closed_form(mu, sigma):
    """Mean over rows of KL(N(mu_i, diag sigma^2) || N(0, I))."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    per_row = 0.5 * np.sum(mu ** 2 + sigma ** 2 - 1.0 - 2.0 * np.log(sigma), axis=1)
    return float(np.mean(per_row))


def rotated_quadratic(points, semi_axes, rotation_deg):
    """Level-set property: squared coordinates in the rotated frame over axes^2."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    theta = np.deg2rad(rotation_deg)
    c, s = np.cos(theta), np.sin(theta)
    r = pts.copy()
    r[:, 0] = c * pts[:, 0] + s * pts[:, 1]
    r[:, 1] = -s * pts[:, 0] + c * pts[:, 1]
    axes = np.asarray(semi_axes, dtype=np.float64)
    return np.sum(r ** 2 / axes ** 2, axis=1)
