"""Fields on a DomainGrid and the discrete energy machinery.

The gradient part of every energy uses one forward difference per interior
face (both cells in the mask), so the discrete penalized energy is a
function whose exact cellwise gradient is the 5-point Neumann residual.
Gradient checks therefore certify the Laplacian, the quadrature and the
nonlinear terms in one shot.

Species pairs in the competition penalty are counted ordered, i.e. the
(i, j) and (j, i) integrals both appear.  The exact gradient of that
penalty carries the factor 2*kappa*g_i accordingly (the correctly scaled
strong form; see grad_I).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import DomainGrid
from .reaction import ReactionModel, eval_truncated


@dataclass
class State:
    """k density fields sharing one grid; u has shape (k, ny, nx), zero off-mask."""

    grid: DomainGrid
    u: np.ndarray

    @property
    def k(self) -> int:
        return self.u.shape[0]

    def copy(self) -> "State":
        return State(self.grid, self.u.copy())

    def species(self, i: int) -> np.ndarray:
        return self.u[i]


@dataclass
class EnergyBreakdown:
    internal: list[float]     # per species: 0.5*||u_i||_H1^2 - integral of Ftil_i(u_i)
    coupling: float           # kappa * sum over ordered pairs of integral G_i*G_j
    total: float
    total_J: float | None     # untruncated free energy; None when some u_i leaves [0, A_i]


def zero_state(grid: DomainGrid, k: int) -> State:
    return State(grid, np.zeros((k, grid.ny, grid.nx)))


def build_state_W(grid: DomainGrid, models: list[ReactionModel]) -> State:
    """The segregated reference k-tuple: u_i = A_i on core i, zero elsewhere."""
    if len(models) != grid.k:
        raise ValueError(f"{len(models)} species for {grid.k} cores")
    st = zero_state(grid, len(models))
    for i, m in enumerate(models):
        st.u[i][grid.core_mask(i + 1)] = m.A
    return st


def neumann_laplacian(grid: DomainGrid, field: np.ndarray) -> np.ndarray:
    """Masked 5-point Laplacian; absent neighbors contribute zero flux."""
    return _kernels.laplacian(field, grid.mask) / grid.cell_area


def dirichlet_energy(grid: DomainGrid, field: np.ndarray, region_mask=None) -> float:
    """sum over faces inside region_mask of 0.5*(u_b - u_a)^2 (defaults to the whole mask)."""
    m = grid.mask if region_mask is None else region_mask
    return float(np.sum(_kernels.face_energy_density(field, m)[m]))


def _energy_arrays(model: ReactionModel, u: np.ndarray):
    """(Ftil, G) cellwise; fused kernel for the logistic family, generic otherwise."""
    prm = model.params
    if prm.get("family") == "logistic":
        return _kernels.logistic_energy_arrays(u, prm["lam"], prm["p"], model.A, model.FA)
    Ftil, _, G, _ = eval_truncated(model, u)
    return Ftil, G


def _grad_arrays(model: ReactionModel, u: np.ndarray):
    """(ftil, g, G) cellwise; fused kernel for the logistic family, generic otherwise."""
    prm = model.params
    if prm.get("family") == "logistic":
        return _kernels.logistic_grad_arrays(u, prm["lam"], prm["p"], model.A, model.FA)
    _, ftil, G, g = eval_truncated(model, u)
    return ftil, g, G


def coupling_density(state: State, models: list[ReactionModel]) -> np.ndarray:
    """Cellwise sum over ordered pairs of G_i(u_i)*G_j(u_j)."""
    Gs = [_energy_arrays(m, state.u[i])[1] for i, m in enumerate(models)]
    return _pair_sum(Gs)


def _pair_sum(Gs: list[np.ndarray]) -> np.ndarray:
    total = np.zeros_like(Gs[0])
    for i in range(len(Gs)):
        for j in range(len(Gs)):
            if i != j:
                total = total + Gs[i] * Gs[j]
    return total


def energy_I(state: State, models: list[ReactionModel], kappa: float,
             with_J: bool = True) -> EnergyBreakdown:
    """Penalized free energy with truncated potentials.

    with_J=False skips the untruncated-energy side computation (the solver's
    inner loop calls this once per trial step).
    """
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    grid = state.grid
    mask = grid.mask
    h2 = grid.cell_area
    internal = []
    Gs = []
    for i, m in enumerate(models):
        u = state.u[i]
        Ftil, G = _energy_arrays(m, u)
        Gs.append(G)
        cells = float(np.sum((0.5 * u * u - Ftil)[mask])) * h2
        internal.append(dirichlet_energy(grid, u) + cells)
    coupling = 0.0
    if kappa > 0 and len(models) > 1:
        coupling = kappa * float(np.sum(_pair_sum(Gs)[mask])) * h2
    total = float(np.sum(internal) + coupling)
    total_J = None
    if with_J and _in_range(state, models):
        total_J = _energy_J_unchecked(state, models)
    return EnergyBreakdown(internal, coupling, total, total_J)


def energy_J(state: State, models: list[ReactionModel]) -> float:
    """Untruncated free energy; only defined on 0 <= u_i <= A_i (within 1e-9)."""
    ok, worst = _range_violation(state, models)
    if not ok:
        i, iy, ix, val = worst
        raise ValueError(
            f"energy_J needs 0 <= u_i <= A_i: species {i + 1} at cell "
            f"({ix}, {iy}) has value {val:.6g} outside [0, {models[i].A:.6g}]"
        )
    return _energy_J_unchecked(state, models)


def _energy_J_unchecked(state: State, models) -> float:
    grid = state.grid
    mask = grid.mask
    total = 0.0
    for i, m in enumerate(models):
        u = state.u[i]
        cells = float(np.sum((0.5 * u * u - m.F(u))[mask])) * grid.cell_area
        total += dirichlet_energy(grid, u) + cells
    return total


def _range_violation(state: State, models, tol=1e-9):
    worst = None
    worst_mag = tol
    for i, m in enumerate(models):
        u = state.u[i]
        dev = np.maximum(-u, u - m.A)
        dev[~state.grid.mask] = 0.0
        mag = float(dev.max())
        if mag > worst_mag:
            iy, ix = np.unravel_index(int(np.argmax(dev)), dev.shape)
            val = float(u[iy, ix])
            worst = (i, iy, ix, val)
            worst_mag = mag
    return worst is None, worst


def _in_range(state: State, models, tol=1e-9) -> bool:
    return _range_violation(state, models, tol)[0]


def grad_I(state: State, models: list[ReactionModel], kappa: float) -> State:
    """Cellwise residual r_i = -lap(u_i) + u_i - ftil_i(u_i) + 2*kappa*g_i(u_i)*sum_{j!=i} G_j(u_j).

    h^2 * r is the exact gradient of energy_I with respect to the cell
    values, including the ordered-pair factor 2 on the coupling term.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    grid = state.grid
    mask = grid.mask
    k = state.k
    trunc = [_grad_arrays(m, state.u[i]) for i, m in enumerate(models)]
    out = np.zeros_like(state.u)
    for i in range(k):
        u = state.u[i]
        ftil, g, _ = trunc[i]
        r = -neumann_laplacian(grid, u) + u - ftil
        if kappa > 0 and k > 1:
            others = np.zeros_like(u)
            for j in range(k):
                if j != i:
                    others = others + trunc[j][2]
            r = r + 2.0 * kappa * g * others
        r[~mask] = 0.0
        out[i] = r
    return State(grid, out)


def h1_core_distance(state: State, ref: State) -> float:
    """H1 distance restricted to the union of cores (faces crossing into the
    channel are excluded, so channel values never contribute)."""
    if state.grid is not ref.grid and (state.grid.nx, state.grid.ny) != (ref.grid.nx, ref.grid.ny):
        raise ValueError("states live on different grids")
    grid = state.grid
    core = grid.core_mask()
    h2 = grid.cell_area
    total = 0.0
    for i in range(state.k):
        d = state.u[i] - ref.u[i]
        grad_sq = 2.0 * dirichlet_energy(grid, d, core)  # faces carry (diff)^2, not 0.5*
        total += grad_sq + float(np.sum((d * d)[core])) * h2
    return float(np.sqrt(total))


def clamp(state: State, models: list[ReactionModel]) -> State:
    """Cellwise projection onto the box 0 <= u_i <= A_i (never raises energy_I)."""
    out = state.copy()
    for i, m in enumerate(models):
        np.clip(out.u[i], 0.0, m.A, out=out.u[i])
        out.u[i][~state.grid.mask] = 0.0
    return out


def dump_fields_csv(state: State, path) -> None:
    """x,y,label,u_1,...,u_k rows for every in-domain cell, 9 significant digits."""
    grid = state.grid
    gx, gy = grid.cell_centers()
    mask = grid.mask
    label = grid.label
    k = state.k
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,label," + ",".join(f"u_{i + 1}" for i in range(k)) + "\n")
        ys, xs = np.nonzero(mask)
        for iy, ix in zip(ys, xs):
            lab = "channel" if label[iy, ix] == 0 else f"core_{label[iy, ix]}"
            vals = ",".join(f"{state.u[i][iy, ix]:.9g}" for i in range(k))
            fh.write(f"{gx[iy, ix]:.9g},{gy[iy, ix]:.9g},{lab},{vals}\n")
