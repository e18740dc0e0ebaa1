"""Shared oracles and generators for the test suite.

The oracles here are written from the definitions with explicit loops and
plain numpy, independent of the library's Fourier-domain code paths, so
they can arbitrate library results.
"""

from __future__ import annotations

import numpy as np
import pytest

from tubal import Tensor3, tsvd

# One pass/fail line per acceptance criterion, surfaced at the end of the
# pytest run by the terminal-summary hook below.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# loop oracles (definition-level, no FFT)


def loop_bcirc(arr: np.ndarray) -> np.ndarray:
    """Block circulant of an ``(n1, n2, n3)``-indexed array, by loops."""
    n1, n2, n3 = arr.shape
    out = np.zeros((n1 * n3, n2 * n3))
    for r in range(n3):
        for c in range(n3):
            out[r * n1 : (r + 1) * n1, c * n2 : (c + 1) * n2] = arr[:, :, (r - c) % n3]
    return out


def loop_unfold(arr: np.ndarray) -> np.ndarray:
    n1, n2, n3 = arr.shape
    out = np.zeros((n1 * n3, n2))
    for k in range(n3):
        out[k * n1 : (k + 1) * n1] = arr[:, :, k]
    return out


def loop_fold(mat: np.ndarray, n1: int, n3: int) -> np.ndarray:
    out = np.zeros((n1, mat.shape[1], n3))
    for k in range(n3):
        out[:, :, k] = mat[k * n1 : (k + 1) * n1]
    return out


def tprod_oracle(a: Tensor3, b: Tensor3) -> np.ndarray:
    """``fold(bcirc(A) @ unfold(B))`` from the loop oracles, as an
    ``(n1, n2, n3)`` array."""
    aa = a.to_array()
    bb = b.to_array()
    return loop_fold(loop_bcirc(aa) @ loop_unfold(bb), a.n1, a.n3)


def assert_tensor_close(x: Tensor3, y: Tensor3, tol: float):
    resid = float(np.linalg.norm((x.data - y.data).ravel()))
    scale = 1.0 + float(np.linalg.norm(y.data.ravel()))
    assert resid <= tol * scale, f"tensors differ: {resid:.3e} > {tol * scale:.3e}"


# ---------------------------------------------------------------------------
# input generators


def random_tensor(rng: np.random.Generator, n1: int, n2: int, n3: int) -> Tensor3:
    return Tensor3(rng.standard_normal((n3, n1, n2)))


def random_orthogonal(rng: np.random.Generator, n: int, n3: int) -> Tensor3:
    """Orthogonal tensor: the left factor of a random tensor's tubal SVD."""
    return tsvd(random_tensor(rng, n, n, n3)).u


def lateral_block(t: Tensor3, n2: int) -> Tensor3:
    """The first ``n2`` lateral slices as a tensor (partially orthogonal
    when ``t`` is orthogonal)."""
    return Tensor3(t.data[:, :, :n2])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
