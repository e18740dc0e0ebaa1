"""Image I/O glue: images as lateral-slice stacks, plus plot helpers.

An ``m x n`` image with ``c`` channels maps to an ``m x c x n`` tensor:
pixel ``(i, j)`` of channel ``k`` sits at row ``i``, lateral slice ``k``,
frontal slice ``j``.  Blurring the image columns then amounts to one
tensor-tensor product with an ``m x m x n`` operator.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from PIL import Image

from .errors import ShapeMismatchError
from .tensor import Tensor3

_GRAY_MODES = ("1", "L", "P", "I", "I;16", "F")


def array_to_tensor(img: np.ndarray) -> Tensor3:
    """Pack an ``(m, n)`` or ``(m, n, c)`` pixel array into a tensor."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3:
        raise ShapeMismatchError(f"expected 2-D or 3-D pixel array, got {img.shape}")
    return Tensor3(np.ascontiguousarray(img.transpose(1, 0, 2)))


def tensor_to_array(x: Tensor3) -> np.ndarray:
    """Unpack a tensor into an ``(m, n, c)`` pixel array."""
    return np.ascontiguousarray(x.data.transpose(1, 0, 2))


def load_image(path) -> Tensor3:
    """Read an image file into a tensor with intensities in ``[0, 1]``."""
    with Image.open(path) as img:
        img = img.convert("L" if img.mode in _GRAY_MODES else "RGB")
        pixels = np.asarray(img, dtype=np.float64) / 255.0
    return array_to_tensor(pixels)


def save_image(x: Tensor3, path) -> None:
    """Write a tensor as an 8-bit image, clipping intensities to [0, 1]."""
    pixels = np.clip(tensor_to_array(x), 0.0, 1.0)
    if pixels.shape[2] == 1:
        pixels = pixels[:, :, 0]
    elif pixels.shape[2] != 3:
        raise ShapeMismatchError(
            f"expected 1 or 3 lateral slices, got {pixels.shape[2]}"
        )
    Image.fromarray(np.round(pixels * 255.0).astype(np.uint8)).save(path)


def synthetic_image(n: int) -> Tensor3:
    """Deterministic piecewise-smooth grayscale test scene."""
    if n < 8:
        raise ValueError(f"scene size must be >= 8, got {n}")
    grid = (np.arange(n) + 0.5) / n
    yy, xx = np.meshgrid(grid, grid, indexing="ij")
    img = 0.15 + 0.25 * np.sin(np.pi * xx) * np.sin(np.pi * yy)
    disk = (xx - 0.34) ** 2 + (yy - 0.38) ** 2 < 0.20**2
    img[disk] = 0.95
    hole = (xx - 0.34) ** 2 + (yy - 0.38) ** 2 < 0.07**2
    img[hole] = 0.05
    box = (xx > 0.58) & (xx < 0.88) & (yy > 0.55) & (yy < 0.85)
    img[box] = 0.55 + 0.35 * xx[box]
    bar = np.abs(xx + yy - 0.55) < 0.025
    img[bar] = 0.8
    return array_to_tensor(img)


def save_panel(panels, path, suptitle=None) -> None:
    """Save images side by side; ``panels`` is a list of (title, tensor)."""
    fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.4))
    if len(panels) == 1:
        axes = [axes]
    for ax, (title, x) in zip(axes, panels):
        pixels = np.clip(tensor_to_array(x), 0.0, 1.0)
        if pixels.shape[2] == 1:
            ax.imshow(pixels[:, :, 0], cmap="gray", vmin=0.0, vmax=1.0)
        else:
            ax.imshow(pixels)
        ax.set_title(title, fontsize=10)
        ax.set_axis_off()
    if suptitle:
        fig.suptitle(suptitle)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_mu_sweep(mus, errors, path, chosen_mu=None) -> None:
    """Log-log plot of relative error against the regularization weight."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(mus, errors, "o-", markersize=4)
    if chosen_mu is not None:
        ax.axvline(chosen_mu, color="tab:red", linestyle="--", linewidth=1.0)
    ax.set_xlabel(r"regularization weight $\mu$")
    ax.set_ylabel("relative error")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
