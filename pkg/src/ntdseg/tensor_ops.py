"""Dense order-3 tensor arithmetic: unfoldings, mode products, HOSVD."""
from __future__ import annotations

import numpy as np


def _check_mode(mode: int) -> None:
    if mode not in (0, 1, 2):
        raise ValueError(f"mode must be 0, 1 or 2, got {mode}")


def unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    """Mode-n unfolding with Kolda-Bader column ordering.

    Fibers along `mode` become columns; the remaining indices vary
    fastest-first (Fortran order), so ``fold(unfold(t, n), n, t.shape)``
    is an exact inverse.
    """
    _check_mode(mode)
    return np.reshape(
        np.moveaxis(tensor, mode, 0), (tensor.shape[mode], -1), order="F"
    )


def fold(matrix: np.ndarray, mode: int, shape: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the given shape."""
    _check_mode(mode)
    moved = (shape[mode],) + tuple(s for i, s in enumerate(shape) if i != mode)
    return np.moveaxis(np.reshape(matrix, moved, order="F"), 0, mode)


def mode_product(tensor: np.ndarray, matrix: np.ndarray, mode: int) -> np.ndarray:
    """Contract `matrix` with `tensor` along `mode` (the n-mode product)."""
    _check_mode(mode)
    if matrix.ndim != 2 or matrix.shape[1] != tensor.shape[mode]:
        raise ValueError(
            f"matrix of shape {matrix.shape} cannot contract mode {mode} "
            f"of tensor with shape {tensor.shape}"
        )
    new_shape = list(tensor.shape)
    new_shape[mode] = matrix.shape[0]
    return fold(matrix @ unfold(tensor, mode), mode, tuple(new_shape))


def reconstruct(
    core: np.ndarray, w: np.ndarray, h: np.ndarray, q: np.ndarray
) -> np.ndarray:
    """Expand a core tensor through one factor matrix per mode."""
    out = mode_product(core, w, 0)
    out = mode_product(out, h, 1)
    return mode_product(out, q, 2)


def frobenius_norm(tensor: np.ndarray) -> float:
    return float(np.linalg.norm(tensor))


def truncated_hosvd(
    tensor: np.ndarray,
    ranks: tuple[int, int, int],
    nonnegative: bool = True,
    skip_modes: tuple[int, ...] = (),
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Truncated higher-order SVD of an order-3 tensor.

    Returns ``(w, h, q, core)`` where each factor holds the leading left
    singular vectors of the corresponding unfolding and
    ``core = tensor x0 w.T x1 h.T x2 q.T``. With ``nonnegative=True``
    (the default) every output is passed through an element-wise absolute
    value, which is the usual nonnegative initialization. Modes listed in
    `skip_modes` get an identity factor instead of an SVD; their rank must
    equal the tensor dimension.
    """
    for mode in range(3):
        if ranks[mode] > tensor.shape[mode]:
            raise ValueError(
                f"rank {ranks[mode]} exceeds dimension {tensor.shape[mode]} "
                f"of mode {mode}"
            )
    factors = []
    for mode in range(3):
        if mode in skip_modes:
            if ranks[mode] != tensor.shape[mode]:
                raise ValueError(
                    f"skipped mode {mode} requires full rank {tensor.shape[mode]}"
                )
            factors.append(np.eye(tensor.shape[mode]))
            continue
        u, _, _ = np.linalg.svd(unfold(tensor, mode), full_matrices=False)
        factors.append(u[:, : ranks[mode]])
    core = tensor
    for mode, factor in enumerate(factors):
        core = mode_product(core, factor.T, mode)
    if nonnegative:
        factors = [np.abs(f) for f in factors]
        core = np.abs(core)
    return factors[0], factors[1], factors[2], core
