"""Pure numpy implementations of the relation-attention hot kernels.

Shapes: q, k, v are (heads, N, d_head); gamma is (heads, N, N, d_head);
attention weights are (heads, N, N). These are the inner loop of the
structure-aware encoder; the compiled module mirrors them exactly.
"""

from __future__ import annotations

import numpy as np


def rel_attn_scores(q, k, gamma):
    """scores[h,i,j] = sum_d q[h,i,d] * (k[h,j,d] + gamma[h,i,j,d])."""
    return np.matmul(q, k.swapaxes(-1, -2)) + np.einsum("hid,hijd->hij", q, gamma)


def rel_attn_scores_backward(g, q, k, gamma):
    dq = np.matmul(g, k) + np.einsum("hij,hijd->hid", g, gamma)
    dk = np.matmul(g.swapaxes(-1, -2), q)
    dgamma = g[..., None] * q[:, :, None, :]
    return dq, dk, dgamma


def rel_attn_context(a, v, gamma):
    """ctx[h,i,d] = sum_j a[h,i,j] * (v[h,j,d] + gamma[h,i,j,d])."""
    return np.matmul(a, v) + np.einsum("hij,hijd->hid", a, gamma)


def rel_attn_context_backward(g, a, v, gamma):
    da = np.matmul(g, v.swapaxes(-1, -2)) + np.einsum("hid,hijd->hij", g, gamma)
    dv = np.matmul(a.swapaxes(-1, -2), g)
    dgamma = a[..., None] * g[:, :, None, :]
    return da, dv, dgamma
