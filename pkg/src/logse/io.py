"""File formats.

Snapshot (binary, little-endian)::

    b"LOGSE1"                       6-byte magic
    int64 dim, int64 basis, int64 kind
    per axis: float64 a, float64 b, int64 N
    payload

``basis`` is 0 periodic, 1 dirichlet, 2 neumann.  ``kind`` 0 is a complex
spectral field: coefficients in natural index order, C order, interleaved
(re, im) float64.  ``kind`` 1 is a real nodal field (e.g. a potential):
float64 nodal values, C order.
"""

import csv
import struct

import numpy as np

from .spectral import BASES, Grid, SpectralField

MAGIC = b"LOGSE1"
COMPLEX_FIELD, REAL_FIELD = 0, 1


def _header(grid, kind):
    out = [MAGIC, struct.pack("<qqq", grid.dim, BASES.index(grid.basis), kind)]
    for (a, b), n in zip(grid.bounds, grid.n):
        out.append(struct.pack("<ddq", a, b, n))
    return b"".join(out)


def write_snapshot(path, field):
    data = np.empty(field.coeffs.shape + (2,), dtype="<f8")
    data[..., 0] = field.coeffs.real
    data[..., 1] = field.coeffs.imag
    with open(path, "wb") as fh:
        fh.write(_header(field.grid, COMPLEX_FIELD))
        fh.write(data.tobytes(order="C"))


def write_real_snapshot(path, grid, values):
    values = np.asarray(values, dtype="<f8")
    if values.shape != grid.shape:
        raise ValueError(f"values of shape {values.shape} do not match grid shape {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(_header(grid, REAL_FIELD))
        fh.write(values.tobytes(order="C"))


def read_snapshot(path):
    """Return a :class:`SpectralField`, or ``(grid, values)`` for a real field."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:6] != MAGIC:
        raise ValueError(f"{path}: not a snapshot file (bad magic)")
    try:
        dim, basis, kind = struct.unpack_from("<qqq", blob, 6)
        if dim not in (1, 2) or not 0 <= basis < len(BASES) or kind not in (0, 1):
            raise ValueError("bad header fields")
        off = 6 + 24
        bounds, n = [], []
        for _ in range(dim):
            a, b, m = struct.unpack_from("<ddq", blob, off)
            off += 24
            bounds.append((a, b))
            n.append(m)
        grid = Grid(tuple(bounds), tuple(n), BASES[basis])
    except (struct.error, ValueError) as exc:
        raise ValueError(f"{path}: corrupt snapshot header ({exc})") from None
    width = 1 if kind == REAL_FIELD else 2
    if len(blob) - off != 8 * width * int(np.prod(grid.shape)):
        raise ValueError(f"{path}: payload size does not match the header")
    payload = np.frombuffer(blob, dtype="<f8", offset=off)
    if kind == REAL_FIELD:
        return grid, payload.reshape(grid.shape).copy()
    data = payload.reshape(grid.shape + (2,))
    return SpectralField(grid, data[..., 0] + 1j * data[..., 1])


def write_potential_csv(path, grid, values):
    if grid.dim != 1:
        raise ValueError("potential CSV export is 1D")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "V"])
        for x, v in zip(grid.nodes(0), values):
            w.writerow([repr(float(x)), repr(float(v))])


def read_potential_csv(path):
    """Return ``(x, V)`` arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return (np.array([float(r["x"]) for r in rows]),
            np.array([float(r["V"]) for r in rows]))


def read_profile_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return (np.array([float(r["r"]) for r in rows]),
            np.array([float(r["u"]) for r in rows]))
