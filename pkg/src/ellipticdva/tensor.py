"""Small helpers for operators on (C^N)^{(x)2} and (C^N)^{(x)3}.

Basis ordering is the Kronecker one: |i j> has index i*N + j.
"""

import numpy as np


def permutation(N):
    """The flip P |i j> = |j i>."""
    P = np.zeros((N * N, N * N))
    for i in range(N):
        for j in range(N):
            P[i * N + j, j * N + i] = 1.0
    return P


def swap_sites(R, N):
    """R_21 = P R_12 P."""
    P = permutation(N)
    return P @ R @ P


def partial_transpose(R, N, site=2):
    """Transpose in the first or second tensor factor."""
    T = np.asarray(R).reshape(N, N, N, N)
    if site == 2:
        T = T.transpose(0, 3, 2, 1)
    elif site == 1:
        T = T.transpose(2, 1, 0, 3)
    else:
        raise ValueError("site must be 1 or 2")
    return T.reshape(N * N, N * N)


def embed(R, i, j, N):
    """Place a two-site operator on sites (i, j) of three sites, i < j in {1,2,3}."""
    eye = np.eye(N)
    if (i, j) == (1, 2):
        return np.kron(R, eye)
    if (i, j) == (2, 3):
        return np.kron(eye, R)
    if (i, j) == (1, 3):
        P23 = np.kron(eye, permutation(N))
        return P23 @ np.kron(R, eye) @ P23
    raise ValueError("sites must be (1,2), (1,3) or (2,3)")


def max_norm(A) -> float:
    return float(np.max(np.abs(A)))
