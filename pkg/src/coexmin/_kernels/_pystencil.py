"""Pure-numpy stencil kernels (fallback backend).

Arithmetic is arranged so each cell's value is produced by the exact same
expression tree as the compiled backend: neighbor contributions are
accumulated in E, W, N, S order and absent neighbors add +0.0.  The two
backends therefore agree to the last bit (up to signed zeros).
"""

import numpy as np


def laplacian(u, mask):
    """Unscaled masked 5-point sum: out_c = sum over in-mask 4-neighbors of (u_n - u_c).

    Missing neighbors contribute zero flux (homogeneous Neumann by
    reflection).  Caller divides by h**2.  Cells outside the mask get 0.
    """
    out = np.zeros_like(u)
    c = u[mask]
    acc = np.zeros_like(c)
    for shifted_u, shifted_m in _neighbor_views(u, mask):
        acc = acc + np.where(shifted_m[mask], shifted_u[mask] - c, 0.0)
    out[mask] = acc
    return out


def face_energy_density(u, mask):
    """Per-cell sum of 0.5*(difference)^2 over the east and north faces the cell owns.

    A face exists only when both cells are in the mask; summing the result
    over all cells gives the forward-difference Dirichlet energy
    sum_faces 0.5*(u_b - u_a)^2.
    """
    ny, nx = u.shape
    out = np.zeros_like(u)
    east = np.zeros_like(u)
    de = u[:, 1:] - u[:, :-1]
    fe = mask[:, 1:] & mask[:, :-1]
    east[:, :-1] = np.where(fe, 0.5 * de * de, 0.0)
    north = np.zeros_like(u)
    dn = u[1:, :] - u[:-1, :]
    fn = mask[1:, :] & mask[:-1, :]
    north[:-1, :] = np.where(fn, 0.5 * dn * dn, 0.0)
    out = east + north
    return out


def logistic_energy_arrays(u, lam, p, A, FA):
    """(Ftil, G) for the logistic family, cellwise, in one pass."""
    t = u
    F = lam * t * t / 2.0 - np.power(np.abs(t), p + 1.0) / (p + 1.0)
    Ftil = np.where(t <= 0.0, 0.0, np.where(t <= A, F, A * t + FA - A * A))
    at = np.abs(t)
    G = np.where(at <= A, t * t, 2.0 * A * at - A * A)
    return Ftil, G


def logistic_grad_arrays(u, lam, p, A, FA):
    """(ftil, g, G) for the logistic family, cellwise, in one pass."""
    t = u
    f = lam * t - np.power(np.abs(t), p - 1.0) * t
    ftil = np.where(t <= 0.0, 0.0, np.where(t <= A, f, A))
    at = np.abs(t)
    G = np.where(at <= A, t * t, 2.0 * A * at - A * A)
    g = np.where(at <= A, 2.0 * t, np.where(t > 0, 2.0 * A, -2.0 * A))
    return ftil, g, G


def _neighbor_views(u, mask):
    """Shifted copies of (u, mask) in E, W, N, S order; out-of-grid cells masked off."""
    ny, nx = u.shape
    for axis, step in ((1, 1), (1, -1), (0, 1), (0, -1)):
        su = np.zeros_like(u)
        sm = np.zeros_like(mask)
        if axis == 1 and step == 1:
            su[:, :-1] = u[:, 1:]
            sm[:, :-1] = mask[:, 1:]
        elif axis == 1 and step == -1:
            su[:, 1:] = u[:, :-1]
            sm[:, 1:] = mask[:, :-1]
        elif axis == 0 and step == 1:
            su[:-1, :] = u[1:, :]
            sm[:-1, :] = mask[1:, :]
        else:
            su[1:, :] = u[:-1, :]
            sm[1:, :] = mask[:-1, :]
        yield su, sm
