"""Pure-NumPy implementations of the hot kernels.

Mirror of the compiled extension `_speedups`; `backend` picks whichever is
available.  Both produce the same element blocks and kernel values to
floating-point roundoff.
"""

from __future__ import annotations

import math

import numpy as np


def stiffness_blocks(coords: np.ndarray):
    """Per-tet P1 element data for the isotropic stiffness split.

    coords: (nt, 4, 3) vertex coordinates.
    Returns (vol, grads, a_lam, a_mu):
      vol   (nt,)        signed volumes (positive for valid meshes)
      grads (nt, 4, 3)   gradients of the four barycentric hat functions
      a_lam (nt, 12, 12) blocks of int div(phi_p) div(phi_q)
      a_mu  (nt, 12, 12) blocks of int sym-grad(phi_p) : sym-grad(phi_q)
    Local dof ordering p = 3*i + a for vertex i, component a; the global
    stiffness is sum_j lambda_j A_j^lam + 2 mu_j A_j^mu.
    """
    coords = np.asarray(coords, dtype=np.float64)
    nt = coords.shape[0]
    edges = coords[:, 1:, :] - coords[:, :1, :]
    vol = np.linalg.det(edges) / 6.0
    inv = np.linalg.inv(edges)

    grads = np.empty((nt, 4, 3))
    grads[:, 1, :] = inv[:, :, 0]
    grads[:, 2, :] = inv[:, :, 1]
    grads[:, 3, :] = inv[:, :, 2]
    grads[:, 0, :] = -(grads[:, 1] + grads[:, 2] + grads[:, 3])

    flat = grads.reshape(nt, 12)
    a_lam = vol[:, None, None] * np.einsum("np,nq->npq", flat, flat)

    dots = np.einsum("nia,nja->nij", grads, grads)
    term1 = np.einsum("nij,ab->niajb", dots, np.eye(3)).reshape(nt, 12, 12)
    outer = np.einsum("nia,njb->niajb", grads, grads)
    term2 = outer.transpose(0, 3, 2, 1, 4).reshape(nt, 12, 12)
    a_mu = vol[:, None, None] * 0.5 * (term1 + term2)
    return vol, grads, a_lam, a_mu


def kelvin_batch(points: np.ndarray, y, mu: float, nu: float) -> np.ndarray:
    """Kelvin matrices Gamma(x_m, y) for a batch of evaluation points: (m,3,3)."""
    pts = np.asarray(points, dtype=np.float64)
    r = pts - np.asarray(y, dtype=np.float64)
    dist = np.linalg.norm(r, axis=1)
    if (dist == 0.0).any():
        raise ValueError("coincident evaluation and source points")
    pref = 1.0 / (16.0 * math.pi * mu * (1.0 - nu))
    out = np.einsum("mi,mj->mij", r, r) / dist[:, None, None] ** 3
    out += (3.0 - 4.0 * nu) / dist[:, None, None] * np.eye(3)
    return pref * out
