"""Dense matrix kernels applied to one frequency slice at a time.

These routines work on plain real or complex matrices and know nothing
about tensors: numerical rank, the thin and general CS decompositions of a
matrix with orthonormal column blocks, and the generalized SVD of a matrix
pair in the bordered block layout used by the tensor layer
(``D_A = [S_A 0 0; 0 I_p 0; 0 0 0]``, ``D_B = [S_B 0 0; 0 0 0; 0 0 0]``).

All functions are pure and dtype-generic: real float64 input yields real
factors, complex128 yields complex factors with the same code path.  Column
phases follow a fixed convention (see :func:`_phase_fix_columns`) so that
repeated calls on identical input return identical factors and conjugated
input yields conjugated factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrthogonalityError, ShapeMismatchError

# Relative magnitude below which a column entry is not trusted to carry a
# phase; columns of unitary matrices always have an entry well above this.
_PHASE_EPS = 1e-8

# Default relative tolerance of the orthonormal-input checks.
DEFAULT_ORTH_TOL = 1e-8


def numerical_rank(m: np.ndarray, tol: float | None = None) -> int:
    """Number of singular values exceeding ``tol`` times the largest one.

    ``tol`` defaults to machine epsilon times the larger matrix dimension.
    """
    m = np.asarray(m)
    if m.size == 0:
        return 0
    if tol is None:
        tol = np.finfo(np.float64).eps * max(m.shape)
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def _first_significant_phase(col: np.ndarray):
    """Unit phase (sign, for real data) of the first significant entry."""
    mags = np.abs(col)
    top = mags.max(initial=0.0)
    if top == 0.0:
        return None
    idx = int(np.argmax(mags > _PHASE_EPS * top))
    return col[idx] / mags[idx]


def _phase_fix_columns(m: np.ndarray, start: int = 0) -> None:
    """Scale columns ``start:`` in place so their leading entry is positive.

    The leading entry is the first one whose magnitude is significant
    relative to the column's largest; zero columns are left untouched.
    """
    for j in range(start, m.shape[1]):
        ph = _first_significant_phase(m[:, j])
        if ph is not None and ph != 1.0:
            m[:, j] *= np.conj(ph)


def _check_orthonormal_columns(q: np.ndarray, tol: float, what: str) -> None:
    n = q.shape[1]
    resid = float(np.linalg.norm(q.conj().T @ q - np.eye(n)))
    if resid > tol * np.sqrt(max(n, 1)):
        raise OrthogonalityError(
            f"{what}: columns are not orthonormal "
            f"(residual {resid:.3e} > {tol * np.sqrt(max(n, 1)):.3e})",
            residual=resid,
        )


def _csd_2x1(q1: np.ndarray, q2: np.ndarray):
    """Simultaneous diagonalization of a 2x1 block of orthonormal columns.

    Given ``[Q1; Q2]`` (``m1 x k`` over ``m2 x k``) with orthonormal columns
    and ``m1 >= k``, returns ``(U, V, Z, c, s)`` with unitary ``U, V, Z``
    and nonnegative vectors ``c`` (non-increasing) and ``s`` such that

    * ``U* Q1 Z`` is ``m1 x k`` diagonal with diagonal ``c``;
    * ``V* Q2 Z`` has entry ``s[j]`` at row ``j - p``, column ``j`` for
      ``j >= p`` and zero elsewhere, where ``p = max(k - m2, 0)`` counts the
      sines forced to zero by ``Q2`` having fewer rows than columns
      (``s[:p] == 0``);
    * ``c**2 + s**2 = 1`` entrywise up to roundoff.

    The cosines come from the SVD of ``Q1``.  The sines are measured, not
    derived as ``sqrt(1 - c**2)``: the columns of ``T = Q2 Z`` are
    orthogonal with norms equal to the sines, so a Householder QR of ``T``
    (taken in decreasing column-norm order, which keeps the triangular
    factor's off-diagonal growth bounded) yields ``V`` and the sines as the
    magnitudes of the triangular factor's diagonal.  This keeps both the
    reconstruction and the cosine-sine identity at roundoff level even for
    angles near 0, where ``sqrt(1 - c**2)`` loses half the digits.
    """
    m1, k = q1.shape
    m2 = q2.shape[0]
    if m1 < k:
        raise ShapeMismatchError(f"top block needs at least {k} rows, got {m1}")
    p = max(k - m2, 0)

    u, c, zh = np.linalg.svd(q1, full_matrices=True)
    z = zh.conj().T

    # Fix Z's column phases; rotate the paired U columns by the same factor
    # so that U* Q1 Z keeps its real nonnegative diagonal.
    for j in range(k):
        ph = _first_significant_phase(z[:, j])
        if ph is not None and ph != 1.0:
            z[:, j] *= np.conj(ph)
            u[:, j] *= np.conj(ph)
    _phase_fix_columns(u, start=k)

    t = q2 @ z
    s = np.zeros(k)
    if k - p > 0:
        norms = np.linalg.norm(t[:, p:], axis=0)
        order = np.argsort(-norms, kind="stable")
        v, r = np.linalg.qr(t[:, p + order], mode="complete")
        # Absorb the triangular factor's diagonal phases into V so the
        # measured sines are nonnegative, then undo the norm sort.
        nq = k - p
        for pos in range(nq):
            rj = r[pos, pos]
            mag = abs(rj)
            if mag != 0.0:
                v[:, pos] *= rj / mag
            s[p + order[pos]] = mag
        vfixed = v.copy()
        for pos in range(nq):
            vfixed[:, order[pos]] = v[:, pos]
        v = vfixed
        _phase_fix_columns(v, start=nq)
    else:
        v = np.eye(m2, dtype=t.dtype)

    return u, v, z, c, s


@dataclass(frozen=True)
class MatCsdThin:
    """Thin CS decomposition ``U* Q1 Z = C``, ``V* Q2 Z = S``.

    ``C`` and ``S`` are real diagonal (cosines / sines of the angles, which
    are non-decreasing in ``[0, pi/2]``) and satisfy ``C'C + S'S = I``.
    """

    u: np.ndarray
    v: np.ndarray
    z: np.ndarray
    c: np.ndarray
    s: np.ndarray
    angles: np.ndarray


def csd_thin(
    q1: np.ndarray, q2: np.ndarray, orth_tol: float = DEFAULT_ORTH_TOL
) -> MatCsdThin:
    """Thin CS decomposition of orthonormal-column blocks ``Q1`` over ``Q2``.

    Requires ``m1 >= n1`` and ``m2 >= n1``; the stacked ``[Q1; Q2]`` must
    have orthonormal columns to ``orth_tol`` (relative, scaled by
    ``sqrt(n1)``).
    """
    q1 = np.asarray(q1)
    q2 = np.asarray(q2)
    if q1.ndim != 2 or q2.ndim != 2 or q1.shape[1] != q2.shape[1]:
        raise ShapeMismatchError(
            f"incompatible blocks {q1.shape} and {q2.shape}"
        )
    m1, n1 = q1.shape
    m2 = q2.shape[0]
    if m1 < n1 or m2 < n1:
        raise ShapeMismatchError(
            f"thin CSD needs m1 >= n1 and m2 >= n1, got {m1}, {m2} vs {n1}"
        )
    _check_orthonormal_columns(np.vstack([q1, q2]), orth_tol, "csd_thin")

    u, v, z, c, s = _csd_2x1(q1, q2)
    cm = np.zeros((m1, n1))
    sm = np.zeros((m2, n1))
    np.fill_diagonal(cm, c)
    np.fill_diagonal(sm, s)
    return MatCsdThin(u=u, v=v, z=z, c=cm, s=sm, angles=np.arctan2(s, c))


@dataclass(frozen=True)
class MatCsdGeneral:
    """General CS decomposition of a square unitary ``Q``.

    ``diag(U, V)* Q diag(W, Z) = D`` where ``D`` is the bordered pattern
    with row blocks ``(p, n1-p, m1-n1, n1-p, q)`` and column blocks
    ``(p, n1-p, n1-p, q, m1-n1)``::

        [ I  0  0  0  0 ]
        [ 0  C  S  0  0 ]
        [ 0  0  0  0  I ]
        [ 0  S -C  0  0 ]
        [ 0  0  0  I  0 ]

    ``cos`` and ``sin`` hold the diagonals of the ``C`` and ``S`` blocks.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    z: np.ndarray
    d: np.ndarray
    cos: np.ndarray
    sin: np.ndarray
    p: int
    q: int


def csd_general(
    q: np.ndarray, m1: int, n1: int, orth_tol: float = DEFAULT_ORTH_TOL
) -> MatCsdGeneral:
    """General CS decomposition of a unitary matrix split at ``(m1, n1)``.

    Requires ``m1 >= n1`` and ``m1 >= m2`` where ``m2`` is the remaining
    row count.  ``p = max(0, n1 - m2)`` and ``q = max(0, m2 - n1)`` size
    the outer identity blocks.
    """
    q = np.asarray(q)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got {q.shape}")
    mt = q.shape[0]
    if not (1 <= m1 <= mt) or not (1 <= n1 <= mt):
        raise ShapeMismatchError(f"split sizes ({m1}, {n1}) out of range for {mt}")
    m2 = mt - m1
    n2 = mt - n1
    if m2 < 1 or n2 < 1:
        raise ShapeMismatchError("both blocks of the split must be nonempty")
    if m1 < n1 or m1 < m2:
        raise ShapeMismatchError(
            f"general CSD needs m1 >= n1 and m1 >= m2, got m1={m1}, n1={n1}, m2={m2}"
        )
    _check_orthonormal_columns(q, orth_tol, "csd_general")

    p = max(0, n1 - m2)
    qq = max(0, m2 - n1)

    u, v, w, c, s = _csd_2x1(q[:m1, :n1], q[m1:, :n1])
    cd = c[p:]
    sd = s[p:]
    nb = n1 - p

    # The second block column is determined up to the right unitary Z: the
    # transformed blocks G = [U* Q12; V* Q22] span the orthogonal
    # complement of the first transformed block column, and the target
    # pattern P below is an orthonormal basis of that same complement, so
    # Z = G* P is unitary up to roundoff; a polar polish restores exact
    # unitarity.
    g = np.vstack([u.conj().T @ q[:m1, n1:], v.conj().T @ q[m1:, n1:]])
    pat = np.zeros((mt, n2), dtype=g.dtype)
    pat[p : p + nb, :nb] = np.diag(sd)
    if m1 > n1:
        pat[n1:m1, nb + qq :] = np.eye(m1 - n1)
    pat[m1 : m1 + nb, :nb] = -np.diag(cd)
    if qq > 0:
        pat[m1 + nb : m1 + nb + qq, nb : nb + qq] = np.eye(qq)
    pu, _, pvh = np.linalg.svd(g.conj().T @ pat)
    z = pu @ pvh

    d = np.zeros((mt, mt))
    if p > 0:
        d[:p, :p] = np.eye(p)
    d[p : p + nb, p:n1] = np.diag(cd)
    d[p : p + nb, n1 : n1 + nb] = np.diag(sd)
    if m1 > n1:
        d[n1:m1, n1 + nb + qq :] = np.eye(m1 - n1)
    d[m1 : m1 + nb, p:n1] = np.diag(sd)
    d[m1 : m1 + nb, n1 : n1 + nb] = -np.diag(cd)
    if qq > 0:
        d[m1 + nb : m1 + nb + qq, n1 + nb : n1 + nb + qq] = np.eye(qq)

    return MatCsdGeneral(u=u, v=v, w=w, z=z, d=d, cos=cd, sin=sd, p=p, q=qq)


@dataclass(frozen=True)
class MatGsvd:
    """Generalized SVD of a pair ``(A, B)`` with common column count.

    ``U* A X = D_A`` and ``V* B X = D_B`` with unitary ``U, V`` and
    invertible ``X``.  With ``r`` the rank of the stacked ``[A; B]`` and
    ``p = max(r - m2, 0)``::

        D_A = [ S_A  0    0 ]        D_B = [ S_B  0  0 ]
              [ 0    I_p  0 ]              [ 0    0  0 ]
              [ 0    0    0 ]              [ 0    0  0 ]

    ``alpha`` (non-increasing) and ``beta`` are the diagonals of ``S_A``
    and ``S_B`` (length ``r - p``) with ``alpha**2 + beta**2 = 1``.
    """

    u: np.ndarray
    v: np.ndarray
    x: np.ndarray
    d_a: np.ndarray
    d_b: np.ndarray
    r: int
    p: int
    alpha: np.ndarray
    beta: np.ndarray


def gsvd_pair(
    a: np.ndarray, b: np.ndarray, rank_tol: float | None = None
) -> MatGsvd:
    """Generalized SVD of ``(A, B)``; requires ``m1 >= n1``.

    The stacked matrix is factored through its SVD (rank revealing), the
    orthonormal factor's blocks are simultaneously diagonalized by the CS
    decomposition, and ``X`` combines the pseudo-inverse of the remaining
    full-row-rank factor with a basis of its null space.  The column order
    follows the block layout above: generic columns first (ratio
    ``alpha/beta`` non-increasing), then the ``p`` columns annihilated by
    ``B``, then ``n1 - r`` null-space columns.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeMismatchError(f"incompatible pair {a.shape} and {b.shape}")
    m1, n1 = a.shape
    m2 = b.shape[0]
    if m1 < n1:
        raise ShapeMismatchError(f"gsvd_pair needs m1 >= n1, got {m1} < {n1}")
    dtype = np.result_type(a.dtype, b.dtype, np.float64)
    a = a.astype(dtype, copy=False)
    b = b.astype(dtype, copy=False)

    stacked = np.vstack([a, b])
    ps, sig, wh = np.linalg.svd(stacked, full_matrices=False)
    if rank_tol is None:
        rank_tol = np.finfo(np.float64).eps * max(m1 + m2, n1)
    if sig.size == 0 or sig[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(sig > rank_tol * sig[0]))

    if r == 0:
        return MatGsvd(
            u=np.eye(m1, dtype=dtype),
            v=np.eye(m2, dtype=dtype),
            x=np.eye(n1, dtype=dtype),
            d_a=np.zeros((m1, n1)),
            d_b=np.zeros((m2, n1)),
            r=0,
            p=0,
            alpha=np.zeros(0),
            beta=np.zeros(0),
        )

    u, v, z, c, s = _csd_2x1(ps[:m1, :r], ps[m1:, :r])
    p = max(r - m2, 0)

    # Reorder to the block layout: the p structurally-zero-sine columns
    # (which the cosine-descending CSD puts first) move behind the generic
    # block.  V needs no reordering: its columns were already assigned to
    # the rows hit by the nonzero sines.
    perm = np.concatenate([np.arange(p, r), np.arange(p)])
    cp = c[perm]
    sp = s[perm]
    u = u.copy()
    u[:, :r] = u[:, perm]
    z = z[:, perm]

    # X = [pinv(T) | null(T)] for the full-row-rank factor T with A = Q1 T,
    # B = Q2 T; then T X = [I_r | 0] and the diagonal targets follow.
    t = z.conj().T @ (sig[:r, None] * wh[:r])
    pt, st, qth = np.linalg.svd(t, full_matrices=True)
    qt = qth.conj().T
    x = np.empty((n1, n1), dtype=dtype)
    x[:, :r] = (qt[:, :r] / st) @ pt.conj().T
    x[:, r:] = qt[:, r:]

    d_a = np.zeros((m1, n1))
    d_b = np.zeros((m2, n1))
    for j in range(r - p):
        d_a[j, j] = cp[j]
        d_b[j, j] = sp[j]
    for j in range(r - p, r):
        d_a[j, j] = 1.0

    return MatGsvd(
        u=u,
        v=v,
        x=x,
        d_a=d_a,
        d_b=d_b,
        r=r,
        p=p,
        alpha=cp[: r - p].copy(),
        beta=sp[: r - p].copy(),
    )
