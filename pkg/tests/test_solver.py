import numpy as np
import pytest

import coexmin as cx
from coexmin.solver import _channel_steps

from conftest import SCHEDULE, dumbbell_spec, unit_square_spec


@pytest.fixture(scope="module")
def square_grid():
    return cx.build_domain(unit_square_spec(h=0.1))


class TestInitialState:
    def test_single_square_equals_W(self, square_grid, logistic22):
        phi = cx.initial_state(square_grid, [logistic22])
        W = cx.build_state_W(square_grid, [logistic22])
        assert np.array_equal(phi.u, W.u)

    def test_disjoint_supports_and_bounds(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        prod = phi.u[0] * phi.u[1]
        assert np.abs(prod).max() == 0.0
        for i, m in enumerate(two_species):
            assert phi.u[i].min() >= 0.0
            assert phi.u[i].max() <= m.A + 1e-15

    def test_ramps_fill_their_half(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        channel = dumbbell_grid.channel_mask
        gx, _ = dumbbell_grid.cell_centers()
        left = channel & (gx < 1.5)
        right = channel & (gx > 1.5)
        assert phi.u[0][left].max() > 0.0
        assert phi.u[0][right].max() == 0.0
        assert phi.u[1][right].max() > 0.0
        assert phi.u[1][left].max() == 0.0

    def test_ramp_reaches_zero_within_ten_cells(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        d1 = _channel_steps(dumbbell_grid, 1)
        deep = dumbbell_grid.channel_mask & (d1 > 10)
        assert (phi.u[0][deep] == 0.0).all()

    def test_energy_equals_mu_plus_tau(self, dumbbell_grid, two_species):
        from coexmin.analysis import reference_energies
        mu, tau = reference_energies(dumbbell_grid, two_species)
        phi = cx.initial_state(dumbbell_grid, two_species)
        for kappa in (0.0, 42.0, 1e4):
            assert cx.energy_I(phi, two_species, kappa).total == pytest.approx(
                mu + tau, abs=1e-12)


class TestMinimize:
    def test_constant_solution_oracle(self, square_grid, logistic22):
        # 0-D fixed point: u = f(u) has the unique positive solution u = A = 1
        u0 = np.full((1, square_grid.ny, square_grid.nx), 0.9)
        res = cx.minimize(cx.State(square_grid, u0), [logistic22], 0.0)
        assert res.converged
        assert np.abs(res.state.u[0][square_grid.mask] - 1.0).max() < 1e-6
        assert res.energy == pytest.approx(-1.0 / 6.0, abs=1e-6)

    def test_critical_init_stops_immediately(self, square_grid, logistic22):
        W = cx.build_state_W(square_grid, [logistic22])
        res = cx.minimize(W, [logistic22], 0.0)
        assert res.converged
        assert res.iterations <= 1
        assert res.energies[0] == pytest.approx(res.energy, abs=1e-15)

    def test_monotone_energy_trace(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        res = cx.minimize(phi, two_species, 100.0)
        diffs = np.diff(res.energies)
        assert (diffs <= 1e-12).all()

    def test_clamp_admissibility(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        res = cx.minimize(phi, two_species, 1000.0)
        for i, m in enumerate(two_species):
            assert res.state.u[i].min() >= 0.0
            assert res.state.u[i].max() <= m.A

    def test_converged_residual_contract(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        opts = cx.SolveOptions(tol_r=1e-7)
        res = cx.minimize(phi, two_species, 10.0, opts)
        assert res.converged
        norm = float(np.sqrt(np.sum(res.state.u**2) * dumbbell_grid.cell_area))
        assert res.residual <= opts.tol_r * max(1.0, norm)

    def test_nontrivial_coexistence_at_strong_competition(self, dumbbell_grid, two_species):
        # cold starts at large kappa sit on a flat wall-translation mode whose
        # double-precision floor is ~4e-8; the tolerance reflects that
        phi = cx.initial_state(dumbbell_grid, two_species)
        res = cx.minimize(phi, two_species, 1000.0, cx.SolveOptions(tol_r=1e-6))
        assert res.converged
        for i, m in enumerate(two_species):
            mass = float(res.state.u[i][dumbbell_grid.mask].sum()) * dumbbell_grid.cell_area
            assert mass > 0.5 * m.A * cx.measure(dumbbell_grid, f"core_{i + 1}")

    def test_iteration_cap_returns_unconverged(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        res = cx.minimize(phi, two_species, 100.0, cx.SolveOptions(max_iters=2))
        assert not res.converged
        assert res.iterations == 2

    def test_plain_bb_fallback_agrees(self, square_grid, logistic22):
        u0 = np.full((1, square_grid.ny, square_grid.nx), 0.6)
        opts = cx.SolveOptions(precondition=False, tol_r=1e-7, max_iters=50_000)
        res = cx.minimize(cx.State(square_grid, u0), [logistic22], 0.0, opts)
        assert res.converged
        assert np.abs(res.state.u[0][square_grid.mask] - 1.0).max() < 1e-5

    def test_options_validation(self):
        with pytest.raises(ValueError):
            cx.SolveOptions(tol_r=0.0)
        with pytest.raises(ValueError):
            cx.SolveOptions(max_iters=0)


class TestDeterminism:
    def test_bitwise_identical_traces(self, dumbbell_grid, two_species):
        phi = cx.initial_state(dumbbell_grid, two_species)
        a = cx.minimize(phi, two_species, 100.0)
        b = cx.minimize(phi, two_species, 100.0)
        assert np.array_equal(a.energies, b.energies)
        assert np.array_equal(a.residuals, b.residuals)
        assert np.array_equal(a.state.u, b.state.u)


class TestContinuation:
    def test_schedule_must_increase(self, dumbbell_grid, two_species):
        with pytest.raises(ValueError, match="increasing"):
            cx.kappa_continuation(dumbbell_grid, two_species, [100.0, 10.0])

    def test_singleton_schedule_equals_minimize(self, dumbbell_grid, two_species):
        cont = cx.kappa_continuation(dumbbell_grid, two_species, [50.0])
        phi = cx.initial_state(dumbbell_grid, two_species)
        solo = cx.minimize(phi, two_species, 50.0)
        assert np.array_equal(cont.final_state.u, solo.state.u)
        assert cont.stages[0].energy == solo.energy

    def test_overlap_decays_by_a_decade_factor(self, continuation):
        by_kappa = dict(zip(continuation.kappas, continuation.overlaps))
        assert by_kappa[10.0] >= 10.0 * by_kappa[10000.0]

    def test_kappa_times_overlap_bounded(self, continuation):
        k1o1 = continuation.kappas[0] * continuation.overlaps[0]
        worst = max(k * o for k, o in zip(continuation.kappas, continuation.overlaps))
        assert worst <= 10.0 * (k1o1 + 1.0)

    def test_energies_monotone_in_kappa(self, continuation):
        assert continuation.monotone
        es = [s.energy for s in continuation.stages]
        for a, b in zip(es, es[1:]):
            assert b >= a - 10.0 * 1e-8 * abs(a)

    def test_warm_start_dominance(self, continuation, two_species):
        # raising kappa cannot lower the energy of the previous stage's state
        for j in range(len(continuation.kappas) - 1):
            st = continuation.stages[j].state
            lo = cx.energy_I(st, two_species, continuation.kappas[j]).total
            hi = cx.energy_I(st, two_species, continuation.kappas[j + 1]).total
            assert hi >= lo - 1e-12

    def test_all_stages_converged(self, continuation):
        assert continuation.all_converged
