"""PFM / PGM image files plus JSON and CSV helpers.

PFM ("Pf", single channel, float32) is the lossless interchange format.
Rows are stored bottom-to-top as the format requires; a negative scale
marks little-endian data, which is what we write.  PGM ("P5", maxval 255
or 65535) is for viewing only and quantizes with round-half-up.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

FORMATS = ("pfm", "pgm8", "pgm16")


class ImageFormatError(ValueError):
    """Base class for unreadable image files; ``offset`` is a byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class MalformedHeaderError(ImageFormatError):
    pass


class TruncatedPayloadError(ImageFormatError):
    pass


class UnsupportedMaxvalError(ImageFormatError):
    pass


_TOKEN = re.compile(rb"\S+")


def _header_tokens(buf: bytes, count: int) -> tuple[list[tuple[bytes, int]], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns ``(token, offset)`` pairs and the offset just past the single
    whitespace byte that terminates the last one.
    """
    tokens: list[tuple[bytes, int]] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(buf):
            raise MalformedHeaderError("unexpected end of header", pos)
        if buf[pos : pos + 1] == b"#":
            end = buf.find(b"\n", pos)
            if end < 0:
                raise MalformedHeaderError("unterminated comment in header", pos)
            pos = end + 1
            continue
        m = _TOKEN.match(buf, pos)
        tok = m.group(0)
        if b"#" in tok:
            tok = tok[: tok.index(b"#")]
        tokens.append((tok, pos))
        pos += len(tok)
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise MalformedHeaderError("header must end with a single whitespace byte", pos)
    return tokens, pos + 1


def _int_token(item: tuple[bytes, int], what: str) -> int:
    tok, offset = item
    try:
        value = int(tok)
    except ValueError:
        raise MalformedHeaderError(f"bad {what} {tok!r}", offset) from None
    if value < 1:
        raise MalformedHeaderError(f"{what} must be positive, got {value}", offset)
    return value


def detect_format(path) -> str:
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"Pf":
        return "pfm"
    if magic == b"P5":
        buf = Path(path).read_bytes()
        tokens, _ = _header_tokens(buf, 4)
        maxval = _int_token(tokens[3], "maxval")
        return "pgm8" if maxval < 256 else "pgm16"
    raise MalformedHeaderError(f"unknown magic number {magic!r}", 0)


def read_image(path, format: str | None = None) -> np.ndarray:
    """Read a PFM or binary PGM file into a 2-D float64 array.

    PGM samples come back as their integer values in ``[0, maxval]``.
    """
    buf = Path(path).read_bytes()
    fmt = format or detect_format(path)
    if fmt == "pfm":
        return _read_pfm(buf)
    if fmt in ("pgm8", "pgm16"):
        return _read_pgm(buf, expect=fmt if format else None)
    raise ValueError(f"unknown image format {fmt!r}; expected one of {FORMATS}")


def _read_pfm(buf: bytes) -> np.ndarray:
    tokens, start = _header_tokens(buf, 4)
    if tokens[0][0] != b"Pf":
        raise MalformedHeaderError(f"expected 'Pf' magic, got {tokens[0][0]!r}", 0)
    width = _int_token(tokens[1], "width")
    height = _int_token(tokens[2], "height")
    scale_tok, scale_at = tokens[3]
    try:
        scale = float(scale_tok)
    except ValueError:
        raise MalformedHeaderError(f"bad scale {scale_tok!r}", scale_at) from None
    if scale == 0 or not np.isfinite(scale):
        raise MalformedHeaderError("scale must be finite and nonzero", scale_at)
    dtype = "<f4" if scale < 0 else ">f4"
    need = 4 * width * height
    if len(buf) - start < need:
        raise TruncatedPayloadError(f"expected {need} payload bytes, found {len(buf) - start}", len(buf))
    data = np.frombuffer(buf, dtype=dtype, count=width * height, offset=start)
    return data.reshape(height, width)[::-1].astype(np.float64)


def _read_pgm(buf: bytes, expect: str | None = None) -> np.ndarray:
    tokens, start = _header_tokens(buf, 4)
    if tokens[0][0] != b"P5":
        raise MalformedHeaderError(f"expected 'P5' magic, got {tokens[0][0]!r}", 0)
    width = _int_token(tokens[1], "width")
    height = _int_token(tokens[2], "height")
    maxval = _int_token(tokens[3], "maxval")
    maxval_at = tokens[3][1]
    if maxval > 65535:
        raise UnsupportedMaxvalError(f"maxval {maxval} exceeds 65535", maxval_at)
    if expect == "pgm8" and maxval > 255:
        raise UnsupportedMaxvalError(f"maxval {maxval} is not 8-bit", maxval_at)
    if expect == "pgm16" and maxval < 256:
        raise UnsupportedMaxvalError(f"maxval {maxval} is not 16-bit", maxval_at)
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    need = dtype.itemsize * width * height
    if len(buf) - start < need:
        raise TruncatedPayloadError(f"expected {need} payload bytes, found {len(buf) - start}", len(buf))
    data = np.frombuffer(buf, dtype=dtype, count=width * height, offset=start)
    over = np.flatnonzero(data > maxval)
    if over.size:
        raise ImageFormatError(f"sample exceeds maxval {maxval}", start + int(over[0]) * dtype.itemsize)
    return data.reshape(height, width).astype(np.float64)


def quantize(img: np.ndarray, display_range: tuple[float, float], maxval: int, display_gamma: float | None = None) -> np.ndarray:
    """Map ``display_range`` onto ``[0, maxval]`` with clipping and round-half-up.

    ``display_gamma`` (e.g. 0.7) is applied to the normalized values before
    rounding.
    """
    lo, hi = map(float, display_range)
    if not hi > lo:
        raise ValueError(f"display range must be increasing, got {display_range}")
    if np.any(np.isnan(img)):
        raise ValueError("cannot quantize NaN pixels")
    t = np.clip((np.asarray(img, dtype=np.float64) - lo) / (hi - lo), 0.0, 1.0)
    if display_gamma is not None:
        t = t**display_gamma
    return np.floor(t * maxval + 0.5).astype(np.int64)


def write_image(
    img,
    path,
    format: str = "pfm",
    *,
    display_range: tuple[float, float] | None = None,
    display_gamma: float | None = None,
) -> None:
    """Write ``img`` as PFM (float32) or binary PGM.

    PGM needs a ``display_range``; values outside it are clipped.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    height, width = img.shape
    if format == "pfm":
        header = f"Pf\n{width} {height}\n-1.0\n".encode("ascii")
        payload = np.ascontiguousarray(img[::-1], dtype="<f4").tobytes()
    elif format in ("pgm8", "pgm16"):
        if display_range is None:
            raise ValueError("PGM output requires a display_range")
        maxval = 255 if format == "pgm8" else 65535
        q = quantize(img, display_range, maxval, display_gamma)
        header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
        payload = q.astype("u1" if maxval == 255 else ">u2").tobytes()
    else:
        raise ValueError(f"unknown image format {format!r}; expected one of {FORMATS}")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def format_from_suffix(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        return "pfm"
    if suffix == ".pgm":
        return "pgm8"
    raise ValueError(f"cannot infer image format from {path!r}; use .pfm or .pgm")


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if is_dataclass(obj):
        return asdict(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dump_json(obj, path=None) -> str:
    """Serialize dataclasses / numpy scalars to JSON with stable key order."""
    text = json.dumps(obj, default=_plain, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_json(path):
    return json.loads(Path(path).read_text())


TRACE_COLUMNS = ("iter", "objective", "constraint_sq", "rel_change", "inner_iters_cum", "seconds")


def write_trace_csv(trace, path, meta: dict | None = None) -> None:
    """One row per outer iteration; ``meta`` goes into leading ``#`` lines."""
    with open(path, "w", newline="") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in trace.records:
            writer.writerow([repr(getattr(rec, c)) if isinstance(getattr(rec, c), float) else getattr(rec, c) for c in TRACE_COLUMNS])


def read_trace_csv(path) -> tuple[dict, list[dict]]:
    meta: dict = {}
    lines = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            else:
                lines.append(line)
    rows = list(csv.DictReader(lines))
    return meta, rows
