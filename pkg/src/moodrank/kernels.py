"""Hot numeric kernels: batched head forward/backward, Adam step, scoring.

Each kernel is written once as a plain numpy function over flat float64
arrays and compiled with numba's ``@njit`` when available. Backend selection
is driven by the ``MOODRANK_BACKEND`` environment variable:

    auto   (default) compile with numba when importable, else pure numpy
    numba  require numba, fail loudly if missing
    numpy  force the pure-numpy path

Both paths execute the same source, so results agree to float rounding
(matrix products hit the same BLAS and are bit-identical; reductions may
differ in the last ulp). ``benchmarks/bench_kernels.py`` compares the two.

Parameter layout: one flat vector holding, in order, each deep layer's
weight matrix (row-major) then bias, each wide layer's likewise, then the
fusion layer's. ``deep_dims`` / ``wide_dims`` give the branch widths
(including input width); activation flags are 1 for relu, 0 for identity.
The fusion layer is always identity with 2 outputs.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import MoodRankError

OUT_DIM = 2


def _head_forward(x_deep, x_wide, params, deep_dims, wide_dims, deep_act, wide_act):
    off = 0
    a = x_deep
    for i in range(deep_dims.shape[0] - 1):
        n_in = deep_dims[i]
        n_out = deep_dims[i + 1]
        w = params[off:off + n_out * n_in].reshape(n_out, n_in)
        off += n_out * n_in
        b = params[off:off + n_out]
        off += n_out
        z = np.dot(a, w.T) + b
        a = np.maximum(z, 0.0) if deep_act[i] == 1 else z
    a_deep = a

    a = x_wide
    for i in range(wide_dims.shape[0] - 1):
        n_in = wide_dims[i]
        n_out = wide_dims[i + 1]
        w = params[off:off + n_out * n_in].reshape(n_out, n_in)
        off += n_out * n_in
        b = params[off:off + n_out]
        off += n_out
        z = np.dot(a, w.T) + b
        a = np.maximum(z, 0.0) if wide_act[i] == 1 else z
    a_wide = a

    cat = np.concatenate((a_deep, a_wide), axis=1)
    fuse_in = deep_dims[deep_dims.shape[0] - 1] + wide_dims[wide_dims.shape[0] - 1]
    fw = params[off:off + OUT_DIM * fuse_in].reshape(OUT_DIM, fuse_in)
    off += OUT_DIM * fuse_in
    fb = params[off:off + OUT_DIM]
    return np.dot(cat, fw.T) + fb


def _head_loss_grad(x_deep, x_wide, target, params, deep_dims, wide_dims,
                    deep_act, wide_act, beta):
    # Forward, caching pre-activations and activations for backprop.
    n = x_deep.shape[0]

    deep_zs = []
    deep_as = [x_deep]
    off = 0
    a = x_deep
    for i in range(deep_dims.shape[0] - 1):
        n_in = deep_dims[i]
        n_out = deep_dims[i + 1]
        w = params[off:off + n_out * n_in].reshape(n_out, n_in)
        off += n_out * n_in
        b = params[off:off + n_out]
        off += n_out
        z = np.dot(a, w.T) + b
        deep_zs.append(z)
        a = np.maximum(z, 0.0) if deep_act[i] == 1 else z
        deep_as.append(a)

    wide_zs = []
    wide_as = [x_wide]
    a = x_wide
    for i in range(wide_dims.shape[0] - 1):
        n_in = wide_dims[i]
        n_out = wide_dims[i + 1]
        w = params[off:off + n_out * n_in].reshape(n_out, n_in)
        off += n_out * n_in
        b = params[off:off + n_out]
        off += n_out
        z = np.dot(a, w.T) + b
        wide_zs.append(z)
        a = np.maximum(z, 0.0) if wide_act[i] == 1 else z
        wide_as.append(a)

    cat = np.concatenate((deep_as[len(deep_as) - 1], wide_as[len(wide_as) - 1]), axis=1)
    deep_out = deep_dims[deep_dims.shape[0] - 1]
    fuse_in = deep_out + wide_dims[wide_dims.shape[0] - 1]
    fuse_off = off
    fw = params[off:off + OUT_DIM * fuse_in].reshape(OUT_DIM, fuse_in)
    off += OUT_DIM * fuse_in
    fb = params[off:off + OUT_DIM]
    pred = np.dot(cat, fw.T) + fb

    # Smooth-L1, mean over the n * 2 output elements.
    diff = pred - target
    abs_diff = np.abs(diff)
    quad = abs_diff < beta
    elem = np.where(quad, 0.5 * diff * diff / beta, abs_diff - 0.5 * beta)
    n_elems = n * OUT_DIM
    loss = np.sum(elem) / n_elems
    dpred = np.where(quad, diff / beta, np.sign(diff)) / n_elems

    grad = np.zeros_like(params)

    # Fusion layer. Transposed operands are copied contiguous before np.dot;
    # BLAS sees the same values either way, so results are unchanged.
    grad[fuse_off:fuse_off + OUT_DIM * fuse_in] = (
        np.dot(np.ascontiguousarray(dpred.T), cat).ravel()
    )
    grad[fuse_off + OUT_DIM * fuse_in:fuse_off + OUT_DIM * fuse_in + OUT_DIM] = (
        np.sum(dpred, axis=0)
    )
    dcat = np.dot(dpred, fw)
    d_deep = dcat[:, :deep_out]
    d_wide = dcat[:, deep_out:]

    # Deep branch, walked backwards; offsets recomputed per layer.
    offs_deep = np.zeros(deep_dims.shape[0] - 1, dtype=np.int64)
    o = 0
    for i in range(deep_dims.shape[0] - 1):
        offs_deep[i] = o
        o += deep_dims[i + 1] * deep_dims[i] + deep_dims[i + 1]
    offs_wide = np.zeros(wide_dims.shape[0] - 1, dtype=np.int64)
    for i in range(wide_dims.shape[0] - 1):
        offs_wide[i] = o
        o += wide_dims[i + 1] * wide_dims[i] + wide_dims[i + 1]

    da = d_deep
    for i in range(deep_dims.shape[0] - 2, -1, -1):
        n_in = deep_dims[i]
        n_out = deep_dims[i + 1]
        dz = np.ascontiguousarray(da * (deep_zs[i] > 0.0) if deep_act[i] == 1 else da)
        lo = offs_deep[i]
        grad[lo:lo + n_out * n_in] = (
            np.dot(np.ascontiguousarray(dz.T), deep_as[i]).ravel()
        )
        grad[lo + n_out * n_in:lo + n_out * n_in + n_out] = np.sum(dz, axis=0)
        if i > 0:
            w = params[lo:lo + n_out * n_in].reshape(n_out, n_in)
            da = np.dot(dz, w)

    da = d_wide
    for i in range(wide_dims.shape[0] - 2, -1, -1):
        n_in = wide_dims[i]
        n_out = wide_dims[i + 1]
        dz = np.ascontiguousarray(da * (wide_zs[i] > 0.0) if wide_act[i] == 1 else da)
        lo = offs_wide[i]
        grad[lo:lo + n_out * n_in] = (
            np.dot(np.ascontiguousarray(dz.T), wide_as[i]).ravel()
        )
        grad[lo + n_out * n_in:lo + n_out * n_in + n_out] = np.sum(dz, axis=0)
        if i > 0:
            w = params[lo:lo + n_out * n_in].reshape(n_out, n_in)
            da = np.dot(dz, w)

    return loss, grad


def _adam_update(params, grad, m, v, t, lr, beta1, beta2, eps):
    # In-place Adam step with bias correction; t is the 1-based update count.
    m[:] = beta1 * m + (1.0 - beta1) * grad
    v[:] = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    params -= lr * m_hat / (np.sqrt(v_hat) + eps)


def _score_candidates(song_va, q_valence, q_arousal, mem_ea, mem_ue, w_ue, w_ea):
    # score = -||q - s||_2 + w_ue * mem_ue + w_ea * mem_ea, elementwise over songs.
    dv = song_va[:, 0] - q_valence
    da = song_va[:, 1] - q_arousal
    dist = np.sqrt(dv * dv + da * da)
    return dist, -dist + w_ue * mem_ue + w_ea * mem_ea


_KERNELS = {
    "head_forward": _head_forward,
    "head_loss_grad": _head_loss_grad,
    "adam_update": _adam_update,
    "score_candidates": _score_candidates,
}


def _select_backend():
    choice = os.environ.get("MOODRANK_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise MoodRankError(
            f"MOODRANK_BACKEND must be auto, numba, or numpy; got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", dict(_KERNELS)
    try:
        from numba import njit
    except ImportError:
        if choice == "numba":
            raise MoodRankError("MOODRANK_BACKEND=numba but numba is not importable") from None
        return "numpy", dict(_KERNELS)
    compiled = {name: njit(cache=True)(fn) for name, fn in _KERNELS.items()}
    return "numba", compiled


_BACKEND_NAME, _ACTIVE = _select_backend()

head_forward = _ACTIVE["head_forward"]
head_loss_grad = _ACTIVE["head_loss_grad"]
adam_update = _ACTIVE["adam_update"]
score_candidates = _ACTIVE["score_candidates"]


def active_backend() -> str:
    return _BACKEND_NAME


def numpy_kernels() -> dict:
    """The uncompiled reference implementations, regardless of backend."""
    return dict(_KERNELS)
