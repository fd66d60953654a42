"""Uniform rectangular grids and binary/CSV field I/O.

Grids are cell-centered: sample [i, j] sits at (x0 + i*hx, y0 + j*hy) where
x0 is half a spacing inside the domain edge, so every sample owns a full
hx*hy cell and the Neumann (reflecting) closure is symmetric without boundary
weights. Scalar fields are float64 arrays of shape (nx, ny); complex fields
complex128 of the same shape.

Binary formats (little-endian):
    VLGRID1  magic b"VLGRID1", u32 nx, ny, f64 hx, hy, x0, y0, row-major f64
    VLCPLX1  same header, row-major interleaved f64 (re, im) pairs

x0, y0 in the header are the coordinates of sample [0, 0].
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, GeometryMismatch

GRID_MAGIC = b"VLGRID1"
CPLX_MAGIC = b"VLCPLX1"
_HEADER = struct.Struct("<II4d")


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    hx: float
    hy: float
    x0: float
    y0: float

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2 or self.hx <= 0 or self.hy <= 0:
            raise BadParams("need nx, ny >= 2 and positive spacings")

    @classmethod
    def from_bounds(cls, xmin, xmax, ymin, ymax, nx, ny):
        """Cell-centered cover of [xmin, xmax] x [ymin, ymax] with nx x ny cells."""
        hx = (xmax - xmin) / nx
        hy = (ymax - ymin) / ny
        return cls(nx, ny, hx, hy, float(xmin) + 0.5 * hx, float(ymin) + 0.5 * hy)

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def xmin(self):
        return self.x0 - 0.5 * self.hx

    @property
    def ymin(self):
        return self.y0 - 0.5 * self.hy

    @property
    def xmax(self):
        return self.x0 + (self.nx - 0.5) * self.hx

    @property
    def ymax(self):
        return self.y0 + (self.ny - 0.5) * self.hy

    def xs(self):
        return self.x0 + self.hx * np.arange(self.nx)

    def ys(self):
        return self.y0 + self.hy * np.arange(self.ny)

    def meshgrid(self):
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def points(self):
        X, Y = self.meshgrid()
        return np.column_stack([X.ravel(), Y.ravel()])

    def cell_weights(self):
        """Quadrature weights: every cell-centered sample owns hx*hy."""
        return np.full(self.shape, self.hx * self.hy)

    def integrate(self, samples):
        return float(np.sum(samples)) * self.hx * self.hy

    def domain(self):
        from .geometry import Domain
        return Domain.rectangle(self.xmin, self.xmax, self.ymin, self.ymax)

    def matches(self, other):
        return (self.shape == other.shape
                and np.isclose(self.hx, other.hx) and np.isclose(self.hy, other.hy)
                and np.isclose(self.x0, other.x0) and np.isclose(self.y0, other.y0))

    def require_match(self, other):
        if not self.matches(other):
            raise GeometryMismatch(f"{self} vs {other}")


def _check_samples(grid, samples):
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise BadParams(f"samples shape {samples.shape} != grid shape {grid.shape}")
    return samples


def save_scalar_field(path, grid, samples):
    samples = _check_samples(grid, samples).astype(np.float64)
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(_HEADER.pack(grid.nx, grid.ny, grid.hx, grid.hy, grid.x0, grid.y0))
        fh.write(samples.astype("<f8").tobytes(order="C"))


def save_complex_field(path, grid, samples):
    samples = _check_samples(grid, samples).astype(np.complex128)
    with open(path, "wb") as fh:
        fh.write(CPLX_MAGIC)
        fh.write(_HEADER.pack(grid.nx, grid.ny, grid.hx, grid.hy, grid.x0, grid.y0))
        fh.write(samples.astype("<c16").tobytes(order="C"))


def _load(path, magic, dtype, itemsize):
    with open(path, "rb") as fh:
        got = fh.read(len(magic))
        if got != magic:
            raise BadParams(f"{path}: bad magic {got!r}, expected {magic!r}")
        nx, ny, hx, hy, x0, y0 = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(nx * ny * itemsize), dtype=dtype)
        if data.size != nx * ny:
            raise BadParams(f"{path}: truncated payload")
    grid = Grid2D(nx, ny, hx, hy, x0, y0)
    return grid, data.reshape(nx, ny).copy()


def load_scalar_field(path):
    return _load(path, GRID_MAGIC, "<f8", 8)


def load_complex_field(path):
    return _load(path, CPLX_MAGIC, "<c16", 16)


def export_scalar_csv(path, grid, samples, header="x,y,value"):
    samples = _check_samples(grid, samples)
    X, Y = grid.meshgrid()
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for x, y, v in zip(X.ravel(), Y.ravel(), np.asarray(samples).ravel()):
            fh.write(f"{x!r},{y!r},{v!r}\n")


def export_complex_csv(path, grid, samples):
    """CSV of |w| and phase per node."""
    samples = _check_samples(grid, samples)
    X, Y = grid.meshgrid()
    mag = np.abs(samples).ravel()
    ph = np.angle(samples).ravel()
    with open(path, "w") as fh:
        fh.write("x,y,abs,phase\n")
        for x, y, m, p in zip(X.ravel(), Y.ravel(), mag, ph):
            fh.write(f"{x!r},{y!r},{m!r},{p!r}\n")
