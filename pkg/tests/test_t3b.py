"""T3B container: round trips, byte determinism, malformed files."""

import struct

import numpy as np
import pytest

from tubal import FormatError, read_t3b, write_t3b

from conftest import random_tensor


def test_round_trip_is_exact(tmp_path, rng):
    t = random_tensor(rng, 5, 3, 7)
    path = tmp_path / "x.t3b"
    write_t3b(path, t)
    back = read_t3b(path)
    assert back.shape == t.shape
    assert np.array_equal(back.data, t.data)


def test_header_layout(tmp_path, rng):
    t = random_tensor(rng, 4, 2, 3)
    path = tmp_path / "x.t3b"
    write_t3b(path, t)
    raw = path.read_bytes()
    magic, n1, n2, n3 = struct.unpack_from("<4sQQQ", raw)
    assert magic == b"T3B1"
    assert (n1, n2, n3) == (4, 2, 3)
    assert len(raw) == 28 + 8 * 4 * 2 * 3
    # payload is frontal-slice-major float64
    first_slice = np.frombuffer(raw, dtype="<f8", count=8, offset=28).reshape(4, 2)
    assert np.array_equal(first_slice, t.slice(0))


def test_write_is_deterministic(tmp_path, rng):
    t = random_tensor(rng, 3, 3, 3)
    write_t3b(tmp_path / "a.t3b", t)
    write_t3b(tmp_path / "b.t3b", t)
    assert (tmp_path / "a.t3b").read_bytes() == (tmp_path / "b.t3b").read_bytes()


def _valid_bytes(rng):
    t = random_tensor(rng, 2, 2, 2)
    return struct.pack("<4sQQQ", b"T3B1", 2, 2, 2) + t.data.tobytes()


@pytest.mark.parametrize(
    "mangle, message",
    [
        (lambda b: b"XXXX" + b[4:], "bad magic"),
        (lambda b: b[:20], "truncated header"),
        (lambda b: b[:-8], "payload holds"),
        (lambda b: b + b"\x00", "trailing bytes"),
        (lambda b: b[:4] + struct.pack("<QQQ", 0, 2, 2) + b[28:], "invalid dimensions"),
        (
            lambda b: b[:4] + struct.pack("<QQQ", 1 << 60, 2, 2) + b[28:],
            "implausible element count",
        ),
    ],
)
def test_rejects_malformed_files(tmp_path, rng, mangle, message):
    path = tmp_path / "bad.t3b"
    path.write_bytes(mangle(_valid_bytes(rng)))
    with pytest.raises(FormatError, match=message):
        read_t3b(path)
