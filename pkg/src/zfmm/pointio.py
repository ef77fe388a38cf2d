"""Binary point-cloud / result files and a CSV fallback.

Binary layout (little endian):
    magic  4 bytes  b"ZFMM"
    u32    format version (1)
    u32    dimension (2 or 3)
    u64    count
    u32    flags     bit 0: charges present
    then per point 2*d float64 (Re, Im per coordinate), then optionally
    2 float64 per charge (Re, Im).

Result files reuse the header (flags 0) with 2 float64 per target value.
CSV files with columns re1,im1,...,red,imd[,re_q,im_q] are accepted for
interop wherever a binary cloud is expected.
"""

import struct

import numpy as np

MAGIC = b"ZFMM"
VERSION = 1
HEADER = struct.Struct("<4sIIQI")
FLAG_CHARGES = 1


def write_points(path, points, charges=None):
    pts = np.asarray(points, np.complex128)
    n, d = pts.shape
    flags = FLAG_CHARGES if charges is not None else 0
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, d, n, flags))
        inter = np.empty((n, 2 * d))
        inter[:, 0::2] = pts.real
        inter[:, 1::2] = pts.imag
        fh.write(inter.astype("<f8").tobytes())
        if charges is not None:
            q = np.asarray(charges, np.complex128)
            qi = np.empty((n, 2))
            qi[:, 0] = q.real
            qi[:, 1] = q.imag
            fh.write(qi.astype("<f8").tobytes())


def read_points(path):
    """Returns (points, charges-or-None). Accepts binary or CSV clouds."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != MAGIC:
            return _read_csv(path)
        rest = fh.read(HEADER.size - 4)
        _, version, d, n, flags = HEADER.unpack(MAGIC + rest)
        if version != VERSION or d not in (2, 3):
            raise ValueError(f"unsupported cloud file header in {path}")
        raw = np.frombuffer(fh.read(n * 2 * d * 8), dtype="<f8").reshape(n, 2 * d)
        pts = raw[:, 0::2] + 1j * raw[:, 1::2]
        charges = None
        if flags & FLAG_CHARGES:
            qr = np.frombuffer(fh.read(n * 16), dtype="<f8").reshape(n, 2)
            charges = qr[:, 0] + 1j * qr[:, 1]
        return pts, charges


def _read_csv(path):
    # 4 columns: 2-D points; 6: 3-D points; 8: 3-D points + charges
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    cols = data.shape[1]
    if cols in (4, 6):
        d = cols // 2
        return data[:, 0 : 2 * d : 2] + 1j * data[:, 1 : 2 * d : 2], None
    if cols == 8:
        pts = data[:, 0:6:2] + 1j * data[:, 1:6:2]
        return pts, data[:, 6] + 1j * data[:, 7]
    raise ValueError(f"cannot interpret CSV columns in {path}")


def write_result(path, values, dimension):
    vals = np.asarray(values, np.complex128)
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, dimension, vals.size, 0))
        out = np.empty((vals.size, 2))
        out[:, 0] = vals.real
        out[:, 1] = vals.imag
        fh.write(out.astype("<f8").tobytes())


def read_result(path):
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
        magic, version, d, n, flags = HEADER.unpack(head)
        if magic != MAGIC or version != VERSION:
            raise ValueError(f"not a result file: {path}")
        raw = np.frombuffer(fh.read(n * 16), dtype="<f8").reshape(n, 2)
        return raw[:, 0] + 1j * raw[:, 1]
