import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdvlab import snapshot
from gkdvlab.snapshot import SnapshotFormatError
from gkdvlab.spectral import SpectralField, TorusGrid, random_field


def hand_encoded(M, period, flags, coeffs):
    out = b"GKDV" + bytes([1]) + struct.pack("<I", M) + struct.pack("<d", period) + bytes([flags])
    for c in coeffs:
        out += struct.pack("<dd", c.real, c.imag)
    return out


def test_layout_matches_hand_encoding():
    g = TorusGrid(2.5, 4)
    c = np.array([0, 1 + 2j, -3.5, 1 - 2j])
    f = SpectralField(g, c, real=True, mean_zero=True)
    data = snapshot.encode(f)
    assert data == hand_encoded(4, 2.5, 0b11, c)
    assert len(data) == 4 + 1 + 4 + 8 + 1 + 16 * 4


def test_flags():
    g = TorusGrid(1.0, 4)
    f = SpectralField(g, np.array([1, 2j, 0, 0]))
    assert snapshot.encode(f)[17] == 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1.0, 3.0, 32.0]), st.sampled_from([4, 16, 64]), st.integers(0, 10**6))
def test_bit_exact_round_trip(period, M, seed):
    f = random_field(TorusGrid(period, M), 1.0, seed)
    back = snapshot.decode(snapshot.encode(f))
    assert back.grid == f.grid and back.real == f.real and back.mean_zero == f.mean_zero
    assert back.coeffs.tobytes() == f.coeffs.tobytes()


def test_stream_and_files(tmp_path):
    g = TorusGrid(1.0, 8)
    fs = [random_field(g, 1.0, s) for s in range(3)]
    p = tmp_path / "traj.gkdv"
    snapshot.write(p, fs)
    back = snapshot.read(p)
    assert len(back) == 3 and all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(fs, back))
    assert not list(tmp_path.glob("*.part"))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: b"XKDV" + d[4:], "magic"),
        (lambda d: d[:4] + bytes([2]) + d[5:], "version"),
        (lambda d: d[:10], "header"),
        (lambda d: d[:-3], "coefficient"),
        (lambda d: d + b"\x00", "trailing"),
    ],
)
def test_malformed_input(mutate, message):
    d = snapshot.encode(random_field(TorusGrid(1.0, 8), 1.0, 0))
    with pytest.raises(SnapshotFormatError, match=message):
        snapshot.decode(mutate(d))


def test_csv_rows_in_fft_order():
    g = TorusGrid(2.0, 4)
    f = SpectralField(g, np.array([0, 1 + 1j, 2, 1 - 1j]), real=True)
    rows = list(snapshot.to_csv_rows(f))
    assert [r[0] for r in rows] == [0, 1, 2, -1]
    assert rows[1] == (1, 0.5, 1.0, 1.0)
