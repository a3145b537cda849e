"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set GRAPH2TEXT_KERNELS=pure to force the numpy fallback (used by the
benchmark and the cross-backend tests). The compiled kernels cover
float64 inputs, strided or contiguous; float32 always takes the numpy
path.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_FORCED_PURE = os.environ.get("GRAPH2TEXT_KERNELS", "").lower() == "pure"
_compiled = None
if not _FORCED_PURE:
    try:
        from . import _kernels_cy as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "pure"


def _compiled_ok(*arrays: np.ndarray) -> bool:
    return _compiled is not None and all(a.dtype == np.float64 for a in arrays)


def rel_attn_scores(q, k, gamma):
    if _compiled_ok(q, k, gamma):
        return _compiled.rel_attn_scores(q, k, gamma)
    return _kernels_py.rel_attn_scores(q, k, gamma)


def rel_attn_scores_backward(g, q, k, gamma):
    if _compiled_ok(g, q, k, gamma):
        return _compiled.rel_attn_scores_backward(g, q, k, gamma)
    return _kernels_py.rel_attn_scores_backward(g, q, k, gamma)


def rel_attn_context(a, v, gamma):
    if _compiled_ok(a, v, gamma):
        return _compiled.rel_attn_context(a, v, gamma)
    return _kernels_py.rel_attn_context(a, v, gamma)


def rel_attn_context_backward(g, a, v, gamma):
    if _compiled_ok(g, a, v, gamma):
        return _compiled.rel_attn_context_backward(g, a, v, gamma)
    return _kernels_py.rel_attn_context_backward(g, a, v, gamma)
