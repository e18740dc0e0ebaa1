"""Deblurring test problems: operators, true solutions, and noise.

Two operator families are provided, both separable: the frontal slices of
the blur tensor are a fixed matrix ``K2`` scaled by the entries of the
first column of a matrix ``K1`` (``A_i = K1[i, 0] * K2``).

* ``gravity_prolate`` — ``K1`` discretizes a gravity surveying kernel at
  depth ``d`` on the unit interval, ``K2`` is a prolate symmetric
  positive-definite ill-conditioned Toeplitz matrix with bandwidth
  parameter ``alpha``.
* ``gaussian`` — ``K1`` and ``K2`` are Toeplitz matrices built from a
  truncated Gaussian point-spread row of width ``band`` and spread
  ``sigma``; ``K1`` wraps the kernel circulantly, ``K2`` is symmetric.

The noise model adds ``E = level * (E0 / |E0|_F) * |B_true|_F`` with
``E0`` standard normal.  Normal deviates come from a fixed, portable
recipe — the Philox 4x64 counter generator and an explicit Box-Muller
transform — so seeded experiments reproduce bit-for-bit everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ShapeMismatchError
from .tensor import Tensor3, fnorm


def gravity_matrix(n: int, d: float) -> np.ndarray:
    """Midpoint discretization of the 1-D gravity surveying kernel.

    Entry ``(i, j)`` is ``(1/n) d (d^2 + (s_i - t_j)^2)^{-3/2}`` with both
    grids at the cell midpoints ``(i - 1/2)/n`` of the unit interval; the
    matrix is symmetric and severely ill conditioned as ``n`` grows.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d <= 0:
        raise ValueError(f"depth d must be positive, got {d}")
    s = (np.arange(n) + 0.5) / n
    diff = s[:, None] - s[None, :]
    return d / n * (d * d + diff * diff) ** -1.5


def prolate_matrix(n: int, alpha: float) -> np.ndarray:
    """Symmetric Toeplitz matrix with first column ``2 alpha,
    sin(2 pi alpha k) / (pi k)`` — positive definite and ill conditioned
    for ``0 < alpha < 0.5``."""
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    col = np.empty(n)
    col[0] = 2.0 * alpha
    if n > 1:
        k = np.arange(1, n)
        col[1:] = np.sin(2.0 * np.pi * alpha * k) / (np.pi * k)
    return scipy.linalg.toeplitz(col)


def gaussian_blur_matrices(n: int, sigma: float, band: int):
    """Toeplitz pair ``(K1, K2)`` from a truncated Gaussian kernel row.

    The kernel row is ``z1_k = exp(-(k-1)^2 / (2 sigma^2))`` for
    ``k <= band``, zero-padded to length ``n``.  ``K2`` is the symmetric
    Toeplitz matrix of ``z1``; ``K1`` uses first row
    ``[z1_1, z1_n, z1_{n-1}, ..., z1_2]``, wrapping the kernel around
    circulantly.  Both carry the Gaussian normalization
    ``1 / (sigma sqrt(2 pi))``.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 1 <= band <= n:
        raise ValueError(f"band must lie in [1, {n}], got {band}")
    z1 = np.zeros(n)
    z1[:band] = np.exp(-(np.arange(band) ** 2) / (2.0 * sigma * sigma))
    scale = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    k2 = scale * scipy.linalg.toeplitz(z1)
    z2 = np.concatenate(([z1[0]], z1[1:][::-1]))
    k1 = scale * scipy.linalg.toeplitz(z1, z2)
    return k1, k2


def separable_blur_tensor(k1col, k2: np.ndarray) -> Tensor3:
    """Blur tensor with frontal slices ``A_i = k1col[i] * K2``."""
    k1col = np.asarray(k1col, dtype=np.float64)
    k2 = np.asarray(k2, dtype=np.float64)
    if k1col.ndim != 1 or k2.ndim != 2:
        raise ShapeMismatchError("expected a vector and a matrix")
    if k1col.size != k2.shape[0]:
        raise ShapeMismatchError(
            f"slice count {k1col.size} does not match matrix rows {k2.shape[0]}"
        )
    return Tensor3(k1col[:, None, None] * k2[None, :, :])


@dataclass(frozen=True)
class BlurSpec:
    """Parameters of a blur operator.

    ``kind`` selects the family: ``gravity_prolate`` uses ``d`` and
    ``alpha``; ``gaussian`` uses ``sigma`` and ``band``.
    """

    kind: str
    n: int
    d: float = 0.8
    alpha: float = 0.46
    sigma: float = 3.0
    band: int = 9

    def __post_init__(self):
        if self.kind not in ("gravity_prolate", "gaussian"):
            raise ValueError(f"unknown blur kind {self.kind!r}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.kind == "gravity_prolate":
            if self.d <= 0:
                raise ValueError(f"depth d must be positive, got {self.d}")
            if not 0.0 < self.alpha < 0.5:
                raise ValueError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        else:
            if self.sigma <= 0:
                raise ValueError(f"sigma must be positive, got {self.sigma}")
            if not 1 <= self.band <= self.n:
                raise ValueError(
                    f"band must lie in [1, {self.n}], got {self.band}"
                )


def build_blur_tensor(spec: BlurSpec) -> Tensor3:
    """Assemble the ``n x n x n`` blur tensor described by ``spec``."""
    if spec.kind == "gravity_prolate":
        k1 = gravity_matrix(spec.n, spec.d)
        k2 = prolate_matrix(spec.n, spec.alpha)
    else:
        k1, k2 = gaussian_blur_matrices(spec.n, spec.sigma, spec.band)
    return separable_blur_tensor(k1[:, 0], k2)


def ones_solution(m: int, k: int, n3: int) -> Tensor3:
    """All-ones solution tensor with ``k`` lateral slices."""
    return Tensor3(np.ones((n3, m, k)))


def standard_normal_field(n1: int, n2: int, n3: int, seed: int) -> Tensor3:
    """Seeded standard-normal tensor, identical on every platform.

    Uniform 53-bit doubles are drawn from the Philox 4x64 counter
    generator keyed with ``seed`` and paired through the Box-Muller
    transform: ``z = sqrt(-2 log(1 - u1)) * (cos, sin)(2 pi u2)``, filled
    into the tensor in frontal-slice-major order.
    """
    count = n1 * n2 * n3
    gen = np.random.Generator(np.random.Philox(key=seed))
    npairs = (count + 1) // 2
    u1 = gen.random(npairs)
    u2 = gen.random(npairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    pairs = np.empty((npairs, 2))
    pairs[:, 0] = radius * np.cos(angle)
    pairs[:, 1] = radius * np.sin(angle)
    return Tensor3(pairs.ravel()[:count].reshape(n3, n1, n2))


def add_noise(b_true: Tensor3, level: float, seed: int):
    """Data perturbed to a prescribed relative noise level.

    Returns ``(B, E)`` with ``B = B_true + E`` and
    ``|E|_F / |B_true|_F = level`` exactly by construction.
    """
    if level < 0:
        raise ValueError(f"noise level must be >= 0, got {level}")
    if level == 0.0:
        return b_true, Tensor3(np.zeros_like(b_true.data))
    e0 = standard_normal_field(b_true.n1, b_true.n2, b_true.n3, seed)
    e = Tensor3(e0.data * (level * fnorm(b_true) / fnorm(e0)))
    return b_true + e, e
