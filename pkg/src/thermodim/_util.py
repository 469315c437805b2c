"""Small numeric helpers used by several modules."""

import numpy as np


def as_point(x):
    """Coerce scalars / lists to a 1-D float array (points are 1-D arrays)."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValueError(f"point must be 1-D, got shape {p.shape}")
    return p


def torus_delta(a, b):
    """Componentwise displacement on the flat torus, folded into [-1/2, 1/2)."""
    d = np.asarray(a, float) - np.asarray(b, float)
    return d - np.round(d)


def wrap_unit(x):
    """x mod 1 landing strictly in [0, 1): results within 1e-12 of the seam
    (including the exact 1.0 that float mod of tiny negatives produces) are
    identified with 0."""
    y = np.asarray(x, float) % 1.0
    return np.where(y >= 1.0 - 1e-12, 0.0, y)


def torus_distance(a, b):
    return float(np.linalg.norm(torus_delta(a, b)))


def euclidean_distance(a, b):
    return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))


def orthonormalize(frame):
    """Thin QR with positive diagonal; returns (Q, R) with Q orthonormal columns."""
    q, r = np.linalg.qr(frame)
    sign = np.sign(np.diag(r))
    sign[sign == 0.0] = 1.0
    return q * sign, r * sign[:, None]


def principal_angles(a, b):
    """Principal angles between the column spans of two orthonormal frames."""
    if a.shape[1] == 0 and b.shape[1] == 0:
        return np.zeros(0)
    s = np.linalg.svd(a.T @ b, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))
