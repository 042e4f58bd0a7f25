"""Verification of the theory's conclusions on computed states.

Everything here is read-only diagnostics: segregation metrics, the
two-sided energy bound pinning minimizers near the segregated reference
tuple W, comparison against the trivial single-species global minimizer,
the quadratic-expansion remainder bound, and the discrete form of the 2k
extremality inequalities satisfied by segregated local minimizers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .discretization import (
    State,
    build_state_W,
    energy_I,
    energy_J,
    h1_core_distance,
)
from .geometry import DomainGrid
from .reaction import AssumptionReport, ReactionModel
from .solver import SolveResult, initial_state, overlap_integral

SUPPORT_THRESHOLD = 1e-6  # omega_i = {u_i > threshold * A_i}


@dataclass
class SegregationMetrics:
    overlap_pairs: dict[tuple[int, int], float]   # ordered pairs, integral u_i^2 u_j^2
    support_measures: list[float]                 # |omega_i|
    product_max: float                            # max over cells and pairs of u_i * u_j

    @property
    def overlap_total(self) -> float:
        return float(sum(self.overlap_pairs.values()))


@dataclass
class SandwichReport:
    mu: float
    tau_eps: float
    sigma_eps: float
    eta: float
    channel_measure: float
    sum_mu_measure: float      # |R_eps| * sum_i mu_i
    distance: float            # ||U - W||_{H1(cores)}
    energy: float              # converged I
    lower_bound: float         # mu + eta*d^2 - |R_eps|*sum mu_i
    upper_bound: float         # mu + tau_eps
    slack: float
    lower_applicable: bool     # requires kappa above the threshold
    lower_ok: bool | None
    upper_ok: bool
    distance_ok: bool          # d^2 <= sigma_eps + slack

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class TrivialMinReport:
    lam: float                 # -max_i mu_i * |domain|
    best_species: int          # 0-based index attaining max mu_i
    energy_J: float
    nontrivial_components: int
    margin: float              # energy_J - lam
    is_coexistence: bool       # >= 2 nontrivial components

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class ExtremalityReport:
    applicable: bool              # input was segregated within tolerance
    product_max: float
    tol: float
    worst_single: list[float]     # per species, worst positive normalized residual of a(u_i,.) - <f_i(u_i),.>  (must be <= 0)
    worst_hat: list[float]        # per species, worst negative normalized residual of a(uhat_i,.) - <fhat,.> (must be >= 0)
    interior_inequality: float    # worst positive (-lap u - f(u)) over in-domain cells
    interior_equality: list[float]  # per species, worst |(-lap u + u - f(u))| over segregated interior of omega_i
    interior_cells: list[int]

    @property
    def worst_violation(self) -> float:
        vals = [v for v in self.worst_single + self.worst_hat]
        return max(vals) if vals else 0.0

    @property
    def passes(self) -> bool:
        return self.worst_violation <= self.tol

    def to_json(self) -> dict:
        return {
            "applicable": self.applicable,
            "product_max": self.product_max,
            "tol": self.tol,
            "worst_single": self.worst_single,
            "worst_hat": self.worst_hat,
            "worst_violation": self.worst_violation,
            "passes": self.passes,
            "interior_inequality": self.interior_inequality,
            "interior_equality": self.interior_equality,
            "interior_cells": self.interior_cells,
        }


@dataclass
class TaylorReport:
    remainder: float      # L, integral of the third-order leftovers over the cores
    bound: float          # eta * d^2
    margin: float         # bound - remainder
    distance: float
    asserted: bool        # only claimed inside the configured radius

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def segregation_metrics(state: State, grid: DomainGrid | None = None,
                        models: list[ReactionModel] | None = None) -> SegregationMetrics:
    """Overlap integrals per ordered pair, support measures, pointwise product max.

    Supports are thresholded at SUPPORT_THRESHOLD * A_i; when no models are
    given the per-species maximum stands in for A_i.
    """
    grid = grid or state.grid
    mask = grid.mask
    h2 = grid.cell_area
    k = state.k
    pairs = {}
    sq = [state.u[i] * state.u[i] for i in range(k)]
    prod_max = 0.0
    for i in range(k):
        for j in range(k):
            if i != j:
                pairs[(i, j)] = float(np.sum((sq[i] * sq[j])[mask])) * h2
                if j > i:
                    prod_max = max(prod_max, float((state.u[i] * state.u[j])[mask].max()))
    scales = [models[i].A for i in range(k)] if models else [_scale(state, i) for i in range(k)]
    supports = [
        float(np.count_nonzero((state.u[i] > SUPPORT_THRESHOLD * scales[i]) & mask)) * h2
        for i in range(k)
    ]
    return SegregationMetrics(pairs, supports, prod_max)


def _scale(state: State, i: int) -> float:
    m = float(np.abs(state.u[i]).max())
    return m if m > 0 else 1.0


def hard_segregate(state: State, models: list[ReactionModel]) -> State:
    """Segregated candidate: per cell keep only the largest component (ties to
    the lower index), clamped into the box; the pointwise products vanish."""
    winner = np.argmax(state.u, axis=0)
    out = state.copy()
    for i, m in enumerate(models):
        out.u[i][winner != i] = 0.0
        np.clip(out.u[i], 0.0, m.A, out=out.u[i])
        out.u[i][~state.grid.mask] = 0.0
    return out


def reference_energies(grid: DomainGrid, models: list[ReactionModel]):
    """(mu, tau_eps) from the discrete reference tuple and ramp competitor.

    mu is the free energy of W on the cores (exactly -sum_i mu_i*|core_i|
    in the discrete quadrature); tau_eps is the ramp competitor's excess,
    so energy_I(ramp tuple) = mu + tau_eps identically.
    """
    mu = -sum(m.mu * grid.cell_area * np.count_nonzero(grid.core_mask(i + 1))
              for i, m in enumerate(models))
    phi = initial_state(grid, models)
    tau = energy_I(phi, models, 0.0).total - mu
    return float(mu), float(tau)


def energy_sandwich(result: SolveResult, grid: DomainGrid, models: list[ReactionModel],
                    kappa: float, assumptions: AssumptionReport) -> SandwichReport:
    mu, tau = reference_energies(grid, models)
    eta = assumptions.eta
    channel = grid.cell_area * float(np.count_nonzero(grid.channel_mask))
    summu = channel * sum(m.mu for m in models)
    W = build_state_W(grid, models)
    d = h1_core_distance(result.state, W)
    sigma = (tau + summu) / eta
    slack = 1e-6 * (1.0 + abs(mu))
    lower = mu + eta * d * d - summu
    upper = mu + tau
    e = result.energy
    applicable = kappa > assumptions.kappa_threshold
    return SandwichReport(
        mu=mu, tau_eps=tau, sigma_eps=sigma, eta=eta,
        channel_measure=channel, sum_mu_measure=summu,
        distance=d, energy=e,
        lower_bound=lower, upper_bound=upper, slack=slack,
        lower_applicable=applicable,
        lower_ok=(lower - slack <= e) if applicable else None,
        upper_ok=e <= upper + slack,
        distance_ok=d * d <= sigma + slack,
    )


def trivial_min_comparison(state: State, grid: DomainGrid,
                           models: list[ReactionModel]) -> TrivialMinReport:
    mus = [m.mu for m in models]
    best = int(np.argmax(mus))
    domain = grid.cell_area * float(np.count_nonzero(grid.mask))
    lam = -mus[best] * domain
    J = energy_J(state, models)
    masses = [float(np.sum(state.u[i][grid.mask])) * grid.cell_area for i in range(state.k)]
    nontrivial = sum(1 for i, mass in enumerate(masses)
                     if mass > 1e-12 * models[i].A * domain)
    return TrivialMinReport(
        lam=lam, best_species=best, energy_J=J,
        nontrivial_components=nontrivial,
        margin=J - lam,
        is_coexistence=nontrivial >= 2,
    )


def trivial_tuple(grid: DomainGrid, models: list[ReactionModel]) -> State:
    """The global minimizer: the best species at capacity everywhere, the rest zero."""
    best = int(np.argmax([m.mu for m in models]))
    st = State(grid, np.zeros((len(models), grid.ny, grid.nx)))
    st.u[best][grid.mask] = models[best].A
    return st


def check_2kvar(state: State, grid: DomainGrid, models: list[ReactionModel],
                tol: float = 1e-6, product_tol: float | None = None) -> ExtremalityReport:
    """Discrete extremality inequalities against every nonnegative nodal hat.

    A hat test function concentrated on cell c gives
    a(v, hat_c) = (-lap_unscaled v)_c + h^2 v_c and <w, hat_c> = h^2 w_c,
    and its H1 norm is sqrt(deg(c) + h^2), which normalizes the reported
    violations.  The first family must be <= 0, the one for
    uhat_i = u_i - sum_{h != i} u_h must be >= 0.
    """
    mask = grid.mask
    h2 = grid.cell_area
    k = state.k
    metrics = segregation_metrics(state, grid, models)
    if product_tol is None:
        product_tol = 0.05 * max(m.A for m in models) ** 2
    applicable = metrics.product_max <= product_tol

    hat_norm = np.sqrt(_neighbor_count(mask) + h2)
    hat_norm[~mask] = 1.0

    fs = [m.f(state.u[i]) for i, m in enumerate(models)]
    worst_single = []
    worst_hat = []
    interior_eq = []
    interior_cells = []
    interior_ineq = -np.inf

    for i in range(k):
        u = state.u[i]
        lap_u = _kernels.laplacian(u, mask)
        # a(u_i, hat_c) - <f_i(u_i), hat_c>, normalized; must be <= 0
        r_single = (-lap_u + h2 * (u - fs[i])) / hat_norm
        worst_single.append(float(r_single[mask].max()))

        uhat = u - sum(state.u[j] for j in range(k) if j != i)
        fhat = fs[i] - sum(fs[j] for j in range(k) if j != i)
        lap_uhat = _kernels.laplacian(uhat, mask)
        r_hat = (-lap_uhat + h2 * (uhat - fhat)) / hat_norm
        worst_hat.append(float(-r_hat[mask].min()) if mask.any() else 0.0)

        # strong inequality -lap u_i <= f_i(u_i); boundary cells use the
        # zero-flux stencil, the natural discrete reading
        interior_ineq = max(interior_ineq, float((-lap_u / h2 - fs[i])[mask].max()))

        omega = (u > SUPPORT_THRESHOLD * models[i].A) & mask
        alone = omega.copy()
        for j in range(k):
            if j != i:
                alone &= state.u[j] <= SUPPORT_THRESHOLD * models[j].A
        core_of_omega = _inner_cells(alone, mask)
        interior_cells.append(int(np.count_nonzero(core_of_omega)))
        if core_of_omega.any():
            eq = np.abs(-lap_u / h2 + u - fs[i])
            interior_eq.append(float(eq[core_of_omega].max()))
        else:
            interior_eq.append(0.0)

    return ExtremalityReport(
        applicable=applicable,
        product_max=metrics.product_max,
        tol=tol,
        worst_single=worst_single,
        worst_hat=worst_hat,
        interior_inequality=float(interior_ineq),
        interior_equality=interior_eq,
        interior_cells=interior_cells,
    )


def _inner_cells(region: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Cells of region all of whose in-mask neighbors are also in region."""
    ny, nx = region.shape
    ok = region.copy()
    for sy, sx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        nbr_region = np.zeros_like(region)
        nbr_mask = np.zeros_like(mask)
        src = (slice(max(0, -sy), ny - max(0, sy)), slice(max(0, -sx), nx - max(0, sx)))
        dst = (slice(max(0, sy), ny - max(0, -sy)), slice(max(0, sx), nx - max(0, -sx)))
        nbr_region[dst] = region[src]
        nbr_mask[dst] = mask[src]
        ok &= np.where(nbr_mask, nbr_region, True)
    return ok & region & mask


def _neighbor_count(mask: np.ndarray) -> np.ndarray:
    cnt = np.zeros(mask.shape)
    cnt[:, :-1] += mask[:, 1:]
    cnt[:, 1:] += mask[:, :-1]
    cnt[:-1, :] += mask[1:, :]
    cnt[1:, :] += mask[:-1, :]
    return cnt


def taylor_remainder_check(state: State, grid: DomainGrid, models: list[ReactionModel],
                           eta: float, radius: float = 0.05) -> TaylorReport:
    """Third-order remainder of the potential around W on the cores versus eta*d^2."""
    core = grid.core_mask()
    for i, m in enumerate(models):
        bad = (np.abs(state.u[i]) > m.A + 1e-9) & core
        if bad.any():
            iy, ix = np.nonzero(bad)
            raise ValueError(
                f"taylor_remainder_check needs |u_i| <= A_i on the cores; species "
                f"{i + 1} exceeds at cell ({ix[0]}, {iy[0]})"
            )
    W = build_state_W(grid, models)
    h2 = grid.cell_area
    L = 0.0
    for i, m in enumerate(models):
        u = state.u[i]
        w = W.u[i]
        dlt = u - w
        rem = m.F(u) - m.F(w) - m.f(w) * dlt - 0.5 * m.df(w) * dlt * dlt
        L += float(np.sum(rem[core])) * h2
    d = h1_core_distance(state, W)
    bound = eta * d * d
    return TaylorReport(
        remainder=L, bound=bound, margin=bound - L,
        distance=d, asserted=d <= radius,
    )
