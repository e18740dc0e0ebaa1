"""Real third-order tensors under the tubal (circular-convolution) product.

A tensor ``A`` of shape ``n1 x n2 x n3`` is a stack of ``n3`` frontal slices
``A_k = A(:, :, k)``; the tube ``A(i, j, :)`` acts as the scalar of the
algebra.  The product of two tensors is defined through the block-circulant
matrix of the frontal slices, which the length-``n3`` DFT block-diagonalizes:
every algebraic operation here therefore reduces to independent complex
matrix operations on the Fourier slices.

Storage is frontal-slice-major: ``Tensor3.data`` has shape ``(n3, n1, n2)``
so that ``data[k]`` is a contiguous view of slice ``k``.  All values are
real float64; complex data only ever lives in :class:`FourierStack`.
Instances are immutable and every operation is a pure function, so
concurrent reads and per-slice parallel evaluation are safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConjugateSymmetryError,
    ShapeMismatchError,
    SingularSliceError,
)

# Default relative tolerance for algebraic identity checks.  All checks are
# scale invariant: a residual r passes when r <= tol * (1 + norm).
DEFAULT_TOL = 1e-10

# Bound on the imaginary residue discarded when an inverse DFT must produce
# a real tensor.
IMAG_RESIDUE_TOL = 1e-8


def _as_slice_major(values, dtype=np.float64):
    arr = np.ascontiguousarray(values, dtype=dtype)
    if arr.ndim != 3:
        raise ShapeMismatchError(f"expected a 3-d array, got ndim={arr.ndim}")
    if min(arr.shape) < 1:
        raise ShapeMismatchError(f"all dimensions must be >= 1, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Tensor3:
    """Real third-order tensor, stored as ``data[k, i, j] = A(i, j, k)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_slice_major(self.data)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, values) -> "Tensor3":
        """Build from an ``(n1, n2, n3)`` array indexed ``A[i, j, k]``."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 3:
            raise ShapeMismatchError(f"expected a 3-d array, got ndim={values.ndim}")
        return cls(np.transpose(values, (2, 0, 1)))

    @classmethod
    def zeros(cls, n1: int, n2: int, n3: int) -> "Tensor3":
        return cls(np.zeros((n3, n1, n2)))

    @property
    def n1(self) -> int:
        return self.data.shape[1]

    @property
    def n2(self) -> int:
        return self.data.shape[2]

    @property
    def n3(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    def slice(self, k: int) -> np.ndarray:
        """Frontal slice ``A(:, :, k)`` (contiguous read-only view)."""
        return self.data[k]

    def lateral(self, j: int) -> "Tensor3":
        """Lateral slice ``A(:, j, :)`` as an ``n1 x 1 x n3`` tensor."""
        return Tensor3(self.data[:, :, j : j + 1])

    def tube(self, i: int, j: int) -> "TubalScalar":
        return TubalScalar(self.data[:, i, j].copy())

    def to_array(self) -> np.ndarray:
        """Copy out as an ``(n1, n2, n3)`` array indexed ``A[i, j, k]``."""
        return np.transpose(self.data, (1, 2, 0)).copy()

    def __add__(self, other):
        if not isinstance(other, Tensor3):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeMismatchError(f"cannot add {self.shape} and {other.shape}")
        return Tensor3(self.data + other.data)

    def __sub__(self, other):
        if not isinstance(other, Tensor3):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeMismatchError(f"cannot subtract {other.shape} from {self.shape}")
        return Tensor3(self.data - other.data)

    def __neg__(self):
        return Tensor3(-self.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Tensor3(self.data * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"Tensor3(n1={self.n1}, n2={self.n2}, n3={self.n3})"


@dataclass(frozen=True, eq=False)
class FourierStack:
    """Complex stack of Fourier slices, ``data[k] = Ahat_k``.

    ``origin_real`` records whether the stack came from a real tensor, in
    which case the slices must be conjugate symmetric:
    ``Ahat_{n3+2-i} = conj(Ahat_i)`` for ``i = 2..n3``.
    """

    data: np.ndarray
    origin_real: bool = True

    def __post_init__(self):
        arr = _as_slice_major(self.data, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n1(self) -> int:
        return self.data.shape[1]

    @property
    def n2(self) -> int:
        return self.data.shape[2]

    @property
    def n3(self) -> int:
        return self.data.shape[0]

    def slice(self, k: int) -> np.ndarray:
        return self.data[k]

    def conjugate_symmetry_residual(self) -> float:
        """Relative size of ``Ahat_{n3+2-i} - conj(Ahat_i)`` over i = 2..n3."""
        n3 = self.n3
        if n3 == 1:
            mirror_defect = float(np.max(np.abs(self.data[0].imag), initial=0.0))
        else:
            idx = np.arange(1, n3)
            diff = self.data[n3 - idx] - np.conj(self.data[idx])
            mirror_defect = float(np.linalg.norm(diff.ravel()))
        scale = 1.0 + float(np.linalg.norm(self.data.ravel()))
        return mirror_defect / scale

    def __repr__(self):
        return (
            f"FourierStack(n1={self.n1}, n2={self.n2}, n3={self.n3}, "
            f"origin_real={self.origin_real})"
        )


@dataclass(frozen=True, eq=False)
class TubalScalar:
    """A ``1 x 1 x n3`` tube, the scalar of the tubal algebra."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ShapeMismatchError("a tube is a nonempty 1-d array")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n3(self) -> int:
        return self.values.size

    def fourier(self) -> np.ndarray:
        return np.fft.fft(self.values)

    def is_invertible(self, tol: float = 1e-13) -> bool:
        """Invertible under the tubal product iff no Fourier coefficient vanishes."""
        f = np.abs(self.fourier())
        return bool(f.min() > tol * max(1.0, f.max()))

    def inverse(self, tol: float = 1e-13) -> "TubalScalar":
        f = self.fourier()
        mags = np.abs(f)
        bad = np.flatnonzero(mags <= tol * max(1.0, mags.max()))
        if bad.size:
            raise SingularSliceError(
                f"tube has a vanishing Fourier coefficient at index {bad[0] + 1}",
                slice_index=int(bad[0] + 1),
            )
        inv = np.fft.ifft(1.0 / f)
        return TubalScalar(inv.real.copy())

    def __mul__(self, other):
        if not isinstance(other, TubalScalar):
            return NotImplemented
        if self.n3 != other.n3:
            raise ShapeMismatchError("tube lengths differ")
        prod = np.fft.ifft(self.fourier() * other.fourier())
        return TubalScalar(prod.real.copy())


# ---------------------------------------------------------------------------
# unfold / fold / block circulant


def unfold(a: Tensor3) -> np.ndarray:
    """Stack the frontal slices vertically into an ``(n1*n3) x n2`` matrix."""
    return a.data.reshape(a.n3 * a.n1, a.n2).copy()


def fold(mat, n1: int, n3: int) -> Tensor3:
    """Inverse of :func:`unfold`; ``mat`` must have ``n1 * n3`` rows."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise ShapeMismatchError("fold expects a matrix")
    if mat.shape[0] != n1 * n3:
        raise ShapeMismatchError(
            f"fold needs {n1 * n3} rows for n1={n1}, n3={n3}, got {mat.shape[0]}"
        )
    return Tensor3(mat.reshape(n3, n1, mat.shape[1]))


def bcirc(a: Tensor3) -> np.ndarray:
    """Block circulant matrix of the frontal slices.

    Block ``(r, c)`` equals slice ``1 + ((r - c) mod n3)``, so the first
    block column is ``[A_1; A_2; ...; A_{n3}]``.
    """
    n1, n2, n3 = a.shape
    out = np.empty((n1 * n3, n2 * n3))
    for r in range(n3):
        for c in range(n3):
            out[r * n1 : (r + 1) * n1, c * n2 : (c + 1) * n2] = a.data[(r - c) % n3]
    return out


# ---------------------------------------------------------------------------
# DFT machinery

# The forward transform along tubes is the plain unnormalized DFT with root
# of unity exp(-2*pi*1j/n3); the inverse carries the 1/n3 factor.  numpy's
# fft/ifft use exactly these conventions and handle arbitrary tube lengths.


def half_spectrum_size(n3: int) -> int:
    """Number of Fourier slices that determine a real tensor's spectrum."""
    return n3 // 2 + 1


def mirror_spectrum(half: np.ndarray, n3: int) -> np.ndarray:
    """Expand slices ``0..n3//2`` to the full conjugate-symmetric stack."""
    h1 = half_spectrum_size(n3)
    if half.shape[0] != h1:
        raise ShapeMismatchError(
            f"expected {h1} leading Fourier slices for n3={n3}, got {half.shape[0]}"
        )
    full = np.empty((n3,) + half.shape[1:], dtype=np.complex128)
    full[:h1] = half
    if n3 > 1:
        idx = np.arange(h1, n3)
        full[idx] = np.conj(half[n3 - idx])
    return full


def inverse_dft_real(full: np.ndarray, tol: float = IMAG_RESIDUE_TOL):
    """Inverse DFT along axis 0 of a stack expected to yield a real result.

    Returns ``(real_data, imag_residue)`` where the residue is the largest
    absolute imaginary component seen before truncation.  Raises when the
    residue exceeds ``tol * (1 + frobenius norm)``.
    """
    x = np.fft.ifft(full, axis=0)
    real = np.ascontiguousarray(x.real)
    residue = float(np.max(np.abs(x.imag), initial=0.0))
    bound = tol * (1.0 + float(np.linalg.norm(real.ravel())))
    if residue > bound:
        raise ConjugateSymmetryError(
            f"inverse DFT left an imaginary residue {residue:.3e} > {bound:.3e}; "
            "the frequency stack is not conjugate symmetric"
        )
    return real, residue


def dft3(a: Tensor3) -> FourierStack:
    """DFT along every tube: slice ``i`` of the result is ``Ahat_i``."""
    return FourierStack(np.fft.fft(a.data, axis=0), origin_real=True)


def idft3(f: FourierStack, symmetry_tol: float = IMAG_RESIDUE_TOL) -> Tensor3:
    """Inverse DFT along tubes; the result must be real.

    A stack flagged ``origin_real`` is first checked for conjugate symmetry
    and rejected when it violates it beyond ``symmetry_tol``.
    """
    if f.origin_real:
        res = f.conjugate_symmetry_residual()
        if res > symmetry_tol:
            raise ConjugateSymmetryError(
                f"stack flagged real-origin has symmetry residual {res:.3e} "
                f"> {symmetry_tol:.3e}"
            )
    real, _ = inverse_dft_real(f.data, tol=symmetry_tol)
    return Tensor3(real)


# ---------------------------------------------------------------------------
# algebra


def tprod(a: Tensor3, b: Tensor3) -> Tensor3:
    """Tubal product ``A * B``, computed slice-wise in the Fourier domain.

    Equivalent to folding ``bcirc(A) @ unfold(B)``; the Fourier route does
    one ``n1 x n2`` by ``n2 x l`` complex product per frequency instead.
    """
    if a.n2 != b.n1:
        raise ShapeMismatchError(
            f"inner dimensions differ: {a.shape} cannot multiply {b.shape}"
        )
    if a.n3 != b.n3:
        raise ShapeMismatchError(f"tube lengths differ: {a.n3} vs {b.n3}")
    ah = np.fft.rfft(a.data, axis=0)
    bh = np.fft.rfft(b.data, axis=0)
    ch = ah @ bh
    return Tensor3(np.fft.irfft(ch, n=a.n3, axis=0))


def ttranspose(a: Tensor3) -> Tensor3:
    """Transpose every frontal slice and reverse the order of slices 2..n3."""
    d = a.data
    out = np.empty((a.n3, a.n2, a.n1))
    out[0] = d[0].T
    if a.n3 > 1:
        out[1:] = d[:0:-1].transpose(0, 2, 1)
    return Tensor3(out)


def identity_tensor(n: int, n3: int) -> Tensor3:
    """First frontal slice is ``I_n``, the other slices are zero."""
    d = np.zeros((n3, n, n))
    d[0] = np.eye(n)
    return Tensor3(d)


def fnorm(a: Tensor3) -> float:
    """Frobenius norm: square root of the sum of squared entries."""
    return float(np.linalg.norm(a.data.ravel()))


def tinv(a: Tensor3, rank_tol: float | None = None) -> Tensor3:
    """Tubal inverse of a tensor with square frontal slices.

    Inverts each Fourier slice; a slice whose smallest singular value falls
    at or below ``rank_tol`` (relative to the largest) raises
    :class:`SingularSliceError` carrying the 1-based Fourier index.
    """
    if a.n1 != a.n2:
        raise ShapeMismatchError(f"tinv needs square frontal slices, got {a.shape}")
    n, n3 = a.n1, a.n3
    if rank_tol is None:
        rank_tol = np.finfo(np.float64).eps * n
    h1 = half_spectrum_size(n3)
    ah = np.fft.rfft(a.data, axis=0)
    inv_half = np.empty_like(ah)
    eye = np.eye(n)
    for i in range(h1):
        s = ah[i]
        if i == 0 or (n3 % 2 == 0 and i == n3 // 2):
            s = s.real
        sv = np.linalg.svd(s, compute_uv=False)
        if sv.size == 0 or sv[-1] <= rank_tol * max(sv[0], 1e-300):
            raise SingularSliceError(
                f"Fourier slice {i + 1} is rank deficient "
                f"(smallest singular value {0.0 if sv.size == 0 else sv[-1]:.3e})",
                slice_index=i + 1,
            )
        inv_half[i] = np.linalg.solve(s, eye)
    full = mirror_spectrum(inv_half, n3)
    real, _ = inverse_dft_real(full)
    return Tensor3(real)


def block_compose(blocks) -> Tensor3:
    """Composite the frontal slices of a 2x2 grid of tensors.

    ``blocks`` is ``((A, B), (C, D))``; slice ``k`` of the result is the
    2x2 block matrix of the inputs' ``k``-th slices.
    """
    (a, b), (c, d) = blocks
    n3 = a.n3
    for t in (b, c, d):
        if t.n3 != n3:
            raise ShapeMismatchError("block tensors must share the tube length")
    if a.n1 != b.n1 or c.n1 != d.n1:
        raise ShapeMismatchError("row counts differ within a block row")
    if a.n2 != c.n2 or b.n2 != d.n2:
        raise ShapeMismatchError("column counts differ within a block column")
    top = np.concatenate([a.data, b.data], axis=2)
    bot = np.concatenate([c.data, d.data], axis=2)
    return Tensor3(np.concatenate([top, bot], axis=1))
