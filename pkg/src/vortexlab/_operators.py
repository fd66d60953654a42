"""Shared finite-difference stencils with ghost-cell Neumann closure.

All operators act on (nx, ny) cell-centered arrays. The ghost convention
mirrors the first interior cell across the boundary face (ghost value equals
the boundary sample), which zeroes the boundary flux; the resulting matrices
are symmetric with uniform hx*hy weights and are the exact Euler-Lagrange
operators of the edge-sum discrete energies used elsewhere. The constant
-coefficient operator is diagonal in the type-II cosine basis.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def laplacian_neumann(u, hx, hy, out=None):
    """5-point Laplacian with reflecting (zero-flux) boundary closure."""
    if out is None:
        out = np.empty_like(u)
    ihx2, ihy2 = 1.0 / (hx * hx), 1.0 / (hy * hy)
    out[1:-1, :] = (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) * ihx2
    out[0, :] = (u[1, :] - u[0, :]) * ihx2
    out[-1, :] = (u[-2, :] - u[-1, :]) * ihx2
    out[:, 1:-1] += (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) * ihy2
    out[:, 0] += (u[:, 1] - u[:, 0]) * ihy2
    out[:, -1] += (u[:, -2] - u[:, -1]) * ihy2
    return out


def edge_coefficients(eta_sq):
    """Arithmetic means of a coefficient field on interior x- and y-edges."""
    ex = 0.5 * (eta_sq[1:, :] + eta_sq[:-1, :])
    ey = 0.5 * (eta_sq[:, 1:] + eta_sq[:, :-1])
    return ex, ey


def div_coef_grad(u, ex, ey, hx, hy, out=None):
    """div(c grad u) with edge coefficients and zero boundary flux.

    Reduces to laplacian_neumann when c is identically 1.
    """
    if out is None:
        out = np.empty_like(u)
    ihx2, ihy2 = 1.0 / (hx * hx), 1.0 / (hy * hy)
    fx = ex * (u[1:, :] - u[:-1, :])  # flux on interior x-edges, (nx-1, ny)
    out[1:-1, :] = (fx[1:, :] - fx[:-1, :]) * ihx2
    out[0, :] = fx[0, :] * ihx2
    out[-1, :] = -fx[-1, :] * ihx2
    fy = ey * (u[:, 1:] - u[:, :-1])
    out[:, 1:-1] += (fy[:, 1:] - fy[:, :-1]) * ihy2
    out[:, 0] += fy[:, 0] * ihy2
    out[:, -1] += -fy[:, -1] * ihy2
    return out


def _second_difference_1d(n, h):
    """1-D zero-flux second difference matrix (n x n, symmetric, CSR)."""
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([main, off, off], [0, 1, -1], format="csr") / (h * h)


def laplacian_matrix(grid):
    """Sparse matrix of laplacian_neumann on a Grid2D (row-major cell order)."""
    dxx = _second_difference_1d(grid.nx, grid.hx)
    dyy = _second_difference_1d(grid.ny, grid.hy)
    ix = sp.identity(grid.nx, format="csr")
    iy = sp.identity(grid.ny, format="csr")
    return (sp.kron(dxx, iy) + sp.kron(ix, dyy)).tocsc()


def neumann_laplacian_symbol(grid):
    """Eigenvalues of laplacian_neumann on the DCT-II basis, shape (nx, ny).

    The modes cos(pi k (i + 1/2) / n) diagonalize the zero-flux closure with
    eigenvalues -(2 - 2 cos(pi k / n)) / h^2 per direction.
    """
    lx = -(2.0 - 2.0 * np.cos(np.pi * np.arange(grid.nx) / grid.nx)) / grid.hx ** 2
    ly = -(2.0 - 2.0 * np.cos(np.pi * np.arange(grid.ny) / grid.ny)) / grid.hy ** 2
    return lx[:, None] + ly[None, :]


def centered_gradient(u, hx, hy):
    """Centered first derivatives, one-sided at the boundary (safe for fields
    that do not satisfy the discrete Neumann condition). Returns (du/dx, du/dy)."""
    gx = np.empty_like(u)
    gx[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2.0 * hx)
    gx[0, :] = (u[1, :] - u[0, :]) / hx
    gx[-1, :] = (u[-1, :] - u[-2, :]) / hx
    gy = np.empty_like(u)
    gy[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2.0 * hy)
    gy[:, 0] = (u[:, 1] - u[:, 0]) / hy
    gy[:, -1] = (u[:, -1] - u[:, -2]) / hy
    return gx, gy
