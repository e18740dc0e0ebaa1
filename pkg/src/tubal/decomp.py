"""Tensor decompositions assembled from per-frequency matrix kernels.

Every decomposition here follows the same scheme: transform the input
along tubes, factor each frequency slice with a kernel from
:mod:`tubal.kernels`, stack the per-slice factors, and inverse-transform
the stacks back to real tensors.

For real input the frequency slices come in conjugate pairs, so only
slices ``1 .. floor(n3/2) + 1`` are factored; the remaining slices are
filled in by conjugation.  Besides halving the work, this guarantees the
assembled factors are real by construction: the self-paired slices (the
first, and the middle one when ``n3`` is even) are handed to the kernels
as real matrices so their factors stay real, and the mirrored slices are
exact conjugates.  The largest imaginary residue discarded during
assembly is recorded on every factor set as a diagnostic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OrthogonalityError, ShapeMismatchError
from .tensor import (
    Tensor3,
    fnorm,
    half_spectrum_size,
    identity_tensor,
    inverse_dft_real,
    mirror_spectrum,
    tprod,
    ttranspose,
)

# Default tolerance of the (partial) orthogonality input gates.
DEFAULT_ORTH_TOL = 1e-8


def _self_paired(i: int, n3: int) -> bool:
    return i == 0 or (n3 % 2 == 0 and i == n3 // 2)


def half_fourier_slices(a: Tensor3) -> list[np.ndarray]:
    """Frequency slices ``1 .. floor(n3/2)+1`` of a real tensor.

    Self-paired slices are returned as real matrices (their imaginary part
    is identically zero for real input), the others as complex.  Slices are
    contiguous so that BLAS sees the same memory layout as a plain matrix
    call; for ``n3 = 1`` this keeps the result bit-identical to the matrix
    kernels.
    """
    ah = np.fft.rfft(a.data, axis=0)
    out = []
    for i in range(ah.shape[0]):
        sl = ah[i].real if _self_paired(i, a.n3) else ah[i]
        out.append(np.ascontiguousarray(sl))
    return out


class _Assembler:
    """Collects per-slice factor matrices and inverse-transforms them."""

    def __init__(self, n3: int):
        self.n3 = n3
        self.h1 = half_spectrum_size(n3)
        self.max_residue = 0.0

    def build(self, mats: list[np.ndarray]) -> Tensor3:
        full = mirror_spectrum(np.stack([np.asarray(m) for m in mats]), self.n3)
        real, residue = inverse_dft_real(full)
        self.max_residue = max(self.max_residue, residue)
        return Tensor3(real)


@dataclass(frozen=True)
class TSvdFactors:
    """``A = U * S * V'`` with orthogonal ``U, V`` and f-diagonal ``S``."""

    u: Tensor3
    s: Tensor3
    v: Tensor3
    imag_residue: float


def tsvd(a: Tensor3) -> TSvdFactors:
    """Tubal SVD; singular values are non-increasing within each
    frequency slice and the factor phases follow the kernel convention."""
    n1, n2 = a.n1, a.n2
    k = min(n1, n2)
    us, ss, vs = [], [], []
    for sl in half_fourier_slices(a):
        u, sig, vh = np.linalg.svd(sl, full_matrices=True)
        v = vh.conj().T
        for j in range(v.shape[1]):
            ph = kernels._first_significant_phase(v[:, j])
            if ph is not None and ph != 1.0:
                v[:, j] *= np.conj(ph)
                if j < k:
                    u[:, j] *= np.conj(ph)
        kernels._phase_fix_columns(u, start=k)
        sm = np.zeros((n1, n2))
        np.fill_diagonal(sm, sig)
        us.append(u)
        ss.append(sm)
        vs.append(v)
    asm = _Assembler(a.n3)
    u_t, s_t, v_t = asm.build(us), asm.build(ss), asm.build(vs)
    return TSvdFactors(u=u_t, s=s_t, v=v_t, imag_residue=asm.max_residue)


@dataclass(frozen=True)
class TCsdFactors:
    """Thin tubal CSD: ``Q1 = U * C * Z'``, ``Q2 = V * S * Z'`` with
    ``C' * C + S' * S = I``."""

    u: Tensor3
    v: Tensor3
    z: Tensor3
    c: Tensor3
    s: Tensor3
    imag_residue: float


def _check_partial_orthogonality(q: Tensor3, tol: float, both_sides: bool) -> None:
    n = q.n2
    resid = fnorm(tprod(ttranspose(q), q) - identity_tensor(n, q.n3))
    if resid > tol * np.sqrt(n):
        raise OrthogonalityError(
            f"tensor is not partially orthogonal: |Q'*Q - I| = {resid:.3e} "
            f"> {tol * np.sqrt(n):.3e}",
            residual=resid,
        )
    if both_sides:
        m = q.n1
        resid = fnorm(tprod(q, ttranspose(q)) - identity_tensor(m, q.n3))
        if resid > tol * np.sqrt(m):
            raise OrthogonalityError(
                f"tensor is not orthogonal: |Q*Q' - I| = {resid:.3e} "
                f"> {tol * np.sqrt(m):.3e}",
                residual=resid,
            )


def tcsd_thin(
    q: Tensor3, m1: int, orth_tol: float = DEFAULT_ORTH_TOL
) -> TCsdFactors:
    """Thin tubal CSD of a partially orthogonal ``(m1+m2) x n1 x n3``
    tensor split after row ``m1``; needs ``m1 >= n1`` and ``m2 >= n1``."""
    mt, nc = q.n1, q.n2
    if not (1 <= m1 < mt):
        raise ShapeMismatchError(f"m1 = {m1} must split {mt} rows in two")
    m2 = mt - m1
    if m1 < nc or m2 < nc:
        raise ShapeMismatchError(
            f"thin CSD needs m1 >= n1 and m2 >= n1, got {m1}, {m2} vs {nc}"
        )
    _check_partial_orthogonality(q, orth_tol, both_sides=False)

    slice_tol = orth_tol * np.sqrt(q.n3)
    us, vs, zs, cs, ss = [], [], [], [], []
    for sl in half_fourier_slices(q):
        f = kernels.csd_thin(sl[:m1], sl[m1:], orth_tol=slice_tol)
        us.append(f.u)
        vs.append(f.v)
        zs.append(f.z)
        cs.append(f.c)
        ss.append(f.s)
    asm = _Assembler(q.n3)
    return TCsdFactors(
        u=asm.build(us),
        v=asm.build(vs),
        z=asm.build(zs),
        c=asm.build(cs),
        s=asm.build(ss),
        imag_residue=asm.max_residue,
    )


@dataclass(frozen=True)
class TCsdGeneralFactors:
    """General tubal CSD: ``diag(U', V') * Q * diag(W, Z) = D`` with the
    bordered block pattern of :class:`tubal.kernels.MatCsdGeneral` in every
    frequency slice (block sizes set by ``m1``, ``n1``, ``p``, ``q``)."""

    u: Tensor3
    v: Tensor3
    w: Tensor3
    z: Tensor3
    d: Tensor3
    p: int
    q: int
    m1: int
    n1: int
    imag_residue: float

    def c_block(self) -> Tensor3:
        """The ``C`` block of ``D`` (rows and columns ``p .. n1``)."""
        return Tensor3(self.d.data[:, self.p : self.n1, self.p : self.n1])

    def s_block(self) -> Tensor3:
        """The ``S`` block of ``D`` (rows ``p .. n1``, columns
        ``n1 .. 2 n1 - p``)."""
        nb = self.n1 - self.p
        return Tensor3(self.d.data[:, self.p : self.n1, self.n1 : self.n1 + nb])


def tcsd_general(
    q: Tensor3, m1: int, n1: int, orth_tol: float = DEFAULT_ORTH_TOL
) -> TCsdGeneralFactors:
    """General tubal CSD of an orthogonal ``(m1+m2) x (n1+n2) x n3`` tensor
    with splits ``m1`` (rows) and ``n1`` (columns); needs ``m1 >= n1`` and
    ``m1 >= m2``."""
    mt, nt = q.n1, q.n2
    if mt != nt:
        raise ShapeMismatchError(
            f"general CSD needs square frontal slices, got {mt} x {nt}"
        )
    if not (1 <= m1 < mt) or not (1 <= n1 < nt):
        raise ShapeMismatchError(f"splits ({m1}, {n1}) out of range for {mt}")
    m2 = mt - m1
    if m1 < n1 or m1 < m2:
        raise ShapeMismatchError(
            f"general CSD needs m1 >= n1 and m1 >= m2, got m1={m1}, n1={n1}, m2={m2}"
        )
    _check_partial_orthogonality(q, orth_tol, both_sides=True)

    slice_tol = orth_tol * np.sqrt(q.n3)
    us, vs, ws, zs, ds = [], [], [], [], []
    p = qq = 0
    for sl in half_fourier_slices(q):
        f = kernels.csd_general(sl, m1, n1, orth_tol=slice_tol)
        p, qq = f.p, f.q
        us.append(f.u)
        vs.append(f.v)
        ws.append(f.w)
        zs.append(f.z)
        ds.append(f.d)
    asm = _Assembler(q.n3)
    return TCsdGeneralFactors(
        u=asm.build(us),
        v=asm.build(vs),
        w=asm.build(ws),
        z=asm.build(zs),
        d=asm.build(ds),
        p=p,
        q=qq,
        m1=m1,
        n1=n1,
        imag_residue=asm.max_residue,
    )


@dataclass(frozen=True)
class TGsvdFactors:
    """Tubal GSVD: ``U' * A * X = D_A`` and ``V' * B * X = D_B``.

    ``ranks[i]`` and ``splits[i]`` are the stacked-slice rank ``r`` and
    identity-block size ``p`` of frequency slice ``i + 1``; ``da_diag`` and
    ``db_diag`` hold the (real) diagonals of the transformed slices, one
    row per frequency slice.  ``uniform_structure`` is true when every
    slice shares the same ``(r, p)``, which is what makes the combined
    cosine-sine identity hold across slices.
    """

    u: Tensor3
    v: Tensor3
    x: Tensor3
    d_a: Tensor3
    d_b: Tensor3
    ranks: tuple[int, ...]
    splits: tuple[int, ...]
    da_diag: np.ndarray
    db_diag: np.ndarray
    uniform_structure: bool
    imag_residue: float


def tgsvd(a: Tensor3, b: Tensor3, rank_tol: float | None = None) -> TGsvdFactors:
    """Tubal GSVD of a pair ``(A, B)`` sharing column and tube counts;
    needs ``m1 >= n1``.

    Factors are returned for any rank pattern; when the per-slice ranks
    disagree a warning is emitted, since the combined cosine-sine identity
    then holds only slice-wise.
    """
    if a.n2 != b.n2 or a.n3 != b.n3:
        raise ShapeMismatchError(
            f"pair must share columns and tubes, got {a.shape} and {b.shape}"
        )
    m1, n1, n3 = a.n1, a.n2, a.n3
    if m1 < n1:
        raise ShapeMismatchError(f"tgsvd needs m1 >= n1, got {m1} < {n1}")

    ah = half_fourier_slices(a)
    bh = half_fourier_slices(b)
    h1 = half_spectrum_size(n3)
    us, vs, xs, das, dbs = [], [], [], [], []
    r_half = np.empty(h1, dtype=int)
    p_half = np.empty(h1, dtype=int)
    da_half = np.zeros((h1, n1))
    db_half = np.zeros((h1, n1))
    for i in range(h1):
        f = kernels.gsvd_pair(ah[i], bh[i], rank_tol=rank_tol)
        r_half[i] = f.r
        p_half[i] = f.p
        da_half[i] = np.diagonal(f.d_a)
        diag_b = np.diagonal(f.d_b)
        db_half[i, : diag_b.size] = diag_b
        us.append(f.u)
        vs.append(f.v)
        xs.append(f.x)
        das.append(f.d_a)
        dbs.append(f.d_b)

    def _mirror_meta(half: np.ndarray) -> np.ndarray:
        full = np.empty((n3,) + half.shape[1:], dtype=half.dtype)
        full[:h1] = half
        if n3 > 1:
            idx = np.arange(h1, n3)
            full[idx] = half[n3 - idx]
        return full

    ranks = tuple(int(x) for x in _mirror_meta(r_half))
    splits = tuple(int(x) for x in _mirror_meta(p_half))
    uniform = len(set(ranks)) == 1 and len(set(splits)) == 1
    if not uniform:
        warnings.warn(
            "per-slice ranks of the stacked pair differ across frequency "
            f"slices (ranks {sorted(set(ranks))}); the combined "
            "cosine-sine identity holds only slice-wise",
            RuntimeWarning,
            stacklevel=2,
        )

    asm = _Assembler(n3)
    return TGsvdFactors(
        u=asm.build(us),
        v=asm.build(vs),
        x=asm.build(xs),
        d_a=asm.build(das),
        d_b=asm.build(dbs),
        ranks=ranks,
        splits=splits,
        da_diag=_mirror_meta(da_half),
        db_diag=_mirror_meta(db_half),
        uniform_structure=uniform,
        imag_residue=asm.max_residue,
    )
