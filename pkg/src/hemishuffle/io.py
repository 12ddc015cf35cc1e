"""Raster and CSV output."""

from __future__ import annotations

import csv
import os
import tempfile

import numpy as np

SWEEP_HEADER = ["alpha_deg", "beta_deg", "gamma_deg", "phi", "epsilon", "iters", "res"]
CURVE_HEADER = ["alpha_deg", "beta_deg", "gamma_deg", "value"]
GRID_HEADER = ["X", "Z", "hit", "first_hit"]
SYMMETRY_HEADER = ["symmetry", "alpha_deg", "beta_deg", "gamma_deg", "max_residual"]
HEATMAP_COMMENT = "phi linear: 0 = black (low coverage), 1 = white (full coverage)"


def _atomic_write(path, data: bytes):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_pnm(img, comment=None):
    """Binary PGM (2-D) or PPM (``(h, w, 3)``) bytes; 16-bit when ``img`` is ``uint16``."""
    img = np.asarray(img)
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError("expected a (h, w) or (h, w, 3) array")
    if img.dtype == np.uint8:
        maxval, body = 255, img.tobytes()
    elif img.dtype == np.uint16:
        maxval, body = 65535, img.astype(">u2").tobytes()
    else:
        raise ValueError("image must be uint8 or uint16")
    h, w = img.shape[:2]
    head = magic + b"\n"
    if comment:
        for line in str(comment).splitlines():
            head += b"# " + line.encode("ascii", "replace") + b"\n"
    head += f"{w} {h}\n{maxval}\n".encode()
    return head + body


def decode_pnm(data: bytes):
    """Inverse of :func:`encode_pnm` (comments skipped)."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    ch = 3 if magic == b"P6" else 1
    arr = np.frombuffer(data[pos:], dtype=dtype, count=w * h * ch)
    arr = arr.reshape((h, w, 3) if ch == 3 else (h, w))
    return arr.astype(np.uint8 if maxval < 256 else np.uint16)


def write_image(path, img, comment=None):
    """Write ``.pgm``/``.ppm`` natively, or ``.png`` through Pillow."""
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".ppm", ".pnm"):
        _atomic_write(path, encode_pnm(img, comment))
        return path
    if ext == ".png":
        try:
            from PIL import Image
        except ImportError as exc:
            raise RuntimeError("PNG output needs Pillow; use .pgm/.ppm instead") from exc
        img = np.asarray(img)
        mode = None
        if img.dtype == np.uint16:
            mode = "I;16"
        Image.fromarray(img, mode=mode).save(path)
        return path
    raise ValueError(f"unsupported image extension {ext!r}")


def read_image(path):
    path = os.fspath(path)
    if path.lower().endswith((".pgm", ".ppm", ".pnm")):
        with open(path, "rb") as fh:
            return decode_pnm(fh.read())
    from PIL import Image

    return np.asarray(Image.open(path).convert("RGB"))


def fmt(v):
    """Stable text form of a float used in every CSV."""
    return f"{float(v):.12g}"


def write_rows(path, header, rows):
    path = os.fspath(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([x if isinstance(x, str) else fmt(x) if isinstance(x, float) else x for x in r])
    return path


def write_grid_csv(path, cgrid):
    """One row per grid point: ``X, Z, hit, first_hit``."""
    planar = cgrid.grid.planar
    rows = (
        (float(planar[i, 0]), float(planar[i, 1]), int(cgrid.first_hit[i] >= 0), int(cgrid.first_hit[i]))
        for i in range(cgrid.grid.size)
    )
    return write_rows(path, GRID_HEADER, rows)


def sweep_row(alpha, beta, gamma, phi, epsilon, iters, res):
    return ",".join([fmt(alpha), fmt(beta), fmt(gamma), fmt(phi), fmt(epsilon), str(int(iters)), str(int(res))]) + "\n"


class PartialFileError(RuntimeError):
    """An output file does not match the run being resumed."""


def read_sweep_csv(path, repair=True):
    """Parse a (possibly partial) sweep CSV.

    A trailing line without a newline is an interrupted write: it is dropped
    and, with ``repair``, truncated from the file.  Returns the list of rows
    as tuples of strings.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if not data:
        return []
    if not data.endswith(b"\n"):
        cut = data.rfind(b"\n") + 1
        data = data[:cut]
        if repair:
            with open(path, "r+b") as fh:
                fh.truncate(cut)
    lines = data.decode().splitlines()
    if not lines:
        return []
    if lines[0].split(",") != SWEEP_HEADER:
        raise PartialFileError(f"{path}: unexpected header {lines[0]!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(SWEEP_HEADER):
            raise PartialFileError(f"{path}: malformed row {ln!r}")
        rows.append(tuple(parts))
    return rows


def append_line(fh, line):
    fh.write(line)
    fh.flush()
    os.fsync(fh.fileno())
