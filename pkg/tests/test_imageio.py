import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from midal.imageio import (
    ImageFormatError,
    MalformedHeaderError,
    TruncatedPayloadError,
    UnsupportedMaxvalError,
    detect_format,
    dump_json,
    quantize,
    read_image,
    read_trace_csv,
    write_image,
    write_trace_csv,
)
from midal.metrics import evaluate
from midal.solver import SolveTrace, TraceRecord


@settings(max_examples=30, deadline=None)
@given(arrays(np.float32, st.tuples(st.integers(1, 9), st.integers(1, 9)), elements=st.floats(width=32, allow_nan=False, allow_infinity=False)))
def test_pfm_roundtrip_bit_exact(tmp_path_factory, img):
    path = tmp_path_factory.mktemp("pfm") / "x.pfm"
    write_image(img, path, "pfm")
    back = read_image(path)
    assert back.dtype == np.float64
    assert back.astype(np.float32).tobytes() == img.tobytes()


def test_pfm_layout(tmp_path):
    img = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    path = tmp_path / "a.pfm"
    write_image(img, path)
    raw = path.read_bytes()
    assert raw.startswith(b"Pf\n2 3\n-1.0\n")
    payload = np.frombuffer(raw[len(b"Pf\n2 3\n-1.0\n"):], dtype="<f4")
    # bottom row first
    assert payload.tolist() == [5, 6, 3, 4, 1, 2]
    assert detect_format(path) == "pfm"


def test_pfm_big_endian_read(tmp_path):
    path = tmp_path / "be.pfm"
    path.write_bytes(b"Pf\n2 1\n1.0\n" + np.array([1.5, -2.0], dtype=">f4").tobytes())
    np.testing.assert_array_equal(read_image(path), [[1.5, -2.0]])


def test_pfm_preserves_err_of_float32_estimate(tmp_path):
    rng = np.random.default_rng(0)
    truth = rng.uniform(0.03, 0.9, (32, 32))
    est = (truth * rng.gamma(30, 1 / 30, truth.shape)).astype(np.float32)
    write_image(est, tmp_path / "e.pfm")
    assert evaluate(read_image(tmp_path / "e.pfm"), truth).err == evaluate(est.astype(np.float64), truth).err


def test_pgm8_values(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 128, 255, 7]))
    np.testing.assert_array_equal(read_image(path), [[0, 128], [255, 7]])
    assert detect_format(path) == "pgm8"


def test_pgm_with_comment(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1 # trailing\n255\n" + bytes([3, 4]))
    np.testing.assert_array_equal(read_image(path), [[3, 4]])


def test_pgm16_roundtrip(tmp_path):
    vals = np.array([[0, 1, 256], [40000, 65535, 12345]], dtype=float)
    path = tmp_path / "b.pgm"
    write_image(vals, path, "pgm16", display_range=(0, 65535))
    assert detect_format(path) == "pgm16"
    np.testing.assert_array_equal(read_image(path), vals)
    assert read_image(path, "pgm16").tolist() == vals.tolist()


def test_pgm8_constant_one_is_255(tmp_path):
    path = tmp_path / "one.pgm"
    write_image(np.ones((3, 4)), path, "pgm8", display_range=(0, 1))
    assert path.read_bytes()[-12:] == bytes([255] * 12)


def test_pgm_clips_and_rounds_half_up():
    q = quantize(np.array([[-1.0, 0.5 / 255, 1.5 / 255, 2.0]]), (0, 1), 255)
    assert q.tolist() == [[0, 1, 2, 255]]


def test_display_gamma():
    x = np.array([[0.25, 0.5]])
    q = quantize(x, (0, 1), 255, display_gamma=0.7)
    assert q.tolist() == np.floor(x**0.7 * 255 + 0.5).astype(int).tolist()


def test_pgm_quantization_error_bound():
    rng = np.random.default_rng(1)
    x = rng.uniform(2, 5, (50, 50))
    q = quantize(x, (2, 5), 255)
    step = 3 / 255
    assert np.abs(2 + q * step - x).max() <= step / 2 + 1e-12


def test_pgm_rejects_nan_and_missing_range(tmp_path):
    with pytest.raises(ValueError):
        write_image(np.array([[np.nan]]), tmp_path / "n.pgm", "pgm8", display_range=(0, 1))
    with pytest.raises(ValueError):
        write_image(np.ones((2, 2)), tmp_path / "n.pgm", "pgm8")


@pytest.mark.parametrize(
    "raw,exc,offset",
    [
        (b"P5\n2 x\n255\n\x00\x00", MalformedHeaderError, 5),
        (b"P5\n2 2\n255\n\x00\x00", TruncatedPayloadError, 13),
        (b"P5\n1 1\n70000\n\x00\x00\x00", UnsupportedMaxvalError, 7),
        (b"P5\n1 1\n", MalformedHeaderError, 7),
        (b"Pf\n1 1\nabc\n\x00\x00\x00\x00", MalformedHeaderError, 7),
        (b"Pf\n2 2\n-1.0\n\x00\x00\x00\x00", TruncatedPayloadError, 16),
        (b"P5\n2 1\n100\n\x05\xc8", ImageFormatError, 12),
    ],
)
def test_distinct_errors_with_offsets(tmp_path, raw, exc, offset):
    path = tmp_path / "bad.img"
    path.write_bytes(raw)
    fmt = "pfm" if raw.startswith(b"Pf") else "pgm8" if b"70000" not in raw else None
    with pytest.raises(exc) as info:
        read_image(path, fmt)
    assert info.value.offset == offset


def test_unknown_magic(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(MalformedHeaderError):
        read_image(path)


def test_json_and_trace_csv(tmp_path):
    tr = SolveTrace([TraceRecord(1, 10.0, 2.0, float("inf"), 20, 0.1), TraceRecord(2, 9.5, 1e-3, 0.25, 40, 0.2)])
    text = dump_json(tr)
    assert json.loads(text)["records"][1]["constraint_sq"] == 1e-3
    assert json.loads(text)["records"][0]["rel_change"] is None
    path = tmp_path / "t.csv"
    write_trace_csv(tr, path, {"mu": 4.0})
    lines = path.read_text().splitlines()
    assert lines[0] == "# mu=4.0"
    assert lines[1] == "iter,objective,constraint_sq,rel_change,inner_iters_cum,seconds"
    meta, rows = read_trace_csv(path)
    assert meta == {"mu": "4.0"}
    assert float(rows[1]["constraint_sq"]) == 1e-3 and int(rows[1]["inner_iters_cum"]) == 40
