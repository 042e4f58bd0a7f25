import numpy as np
import pytest

import coexmin as cx
from coexmin.discretization import clamp, dump_fields_csv, zero_state

from conftest import random_interior_state, unit_square_spec


@pytest.fixture(scope="module")
def square_grid():
    return cx.build_domain(unit_square_spec(h=0.1))


class TestBuildStateW:
    def test_single_square(self, square_grid, logistic22):
        st = cx.build_state_W(square_grid, [logistic22])
        assert np.allclose(st.u[0][square_grid.mask], 1.0)

    def test_dumbbell_two_species(self, dumbbell_grid):
        ms = [cx.make_logistic(2, 2), cx.make_logistic(3, 3)]
        st = cx.build_state_W(dumbbell_grid, ms)
        assert np.allclose(st.u[0][dumbbell_grid.core_mask(1)], 1.0)
        assert np.allclose(st.u[1][dumbbell_grid.core_mask(2)], np.sqrt(2.0))
        assert (st.u[0][dumbbell_grid.channel_mask] == 0).all()
        assert (st.u[1][dumbbell_grid.channel_mask] == 0).all()

    def test_support_equals_core_measure(self, dumbbell_grid, two_species):
        st = cx.build_state_W(dumbbell_grid, two_species)
        for i in (0, 1):
            support = (st.u[i] > 0).sum() * dumbbell_grid.cell_area
            assert support == pytest.approx(
                cx.measure(dumbbell_grid, f"core_{i + 1}"), abs=1e-12)

    def test_count_mismatch(self, dumbbell_grid, logistic22):
        with pytest.raises(ValueError, match="core"):
            cx.build_state_W(dumbbell_grid, [logistic22])


class TestNeumannLaplacian:
    def test_constant_field(self, dumbbell_grid):
        u = np.where(dumbbell_grid.mask, 3.7, 0.0)
        lap = cx.neumann_laplacian(dumbbell_grid, u)
        assert np.allclose(lap, 0.0)

    def test_linear_field_interior_and_flux_balance(self, square_grid):
        gx, _ = square_grid.cell_centers()
        u = gx.copy()
        lap = cx.neumann_laplacian(square_grid, u)
        interior = lap[1:-1, 1:-1]
        assert np.allclose(interior, 0.0, atol=1e-10)
        # one-sided boundary corrections keep the total flux at zero
        assert abs(float(lap.sum()) * square_grid.cell_area) < 1e-12

    def test_random_field_summation_by_parts(self, dumbbell_grid):
        rng = np.random.default_rng(3)
        u = rng.standard_normal((dumbbell_grid.ny, dumbbell_grid.nx))
        u[~dumbbell_grid.mask] = 0.0
        lap = cx.neumann_laplacian(dumbbell_grid, u)
        total = float(lap[dumbbell_grid.mask].sum()) * dumbbell_grid.cell_area
        scale = float(np.abs(lap).max()) * dumbbell_grid.cell_area
        assert abs(total) <= 1e-12 * max(1.0, scale * dumbbell_grid.mask.sum())


class TestEnergyI:
    def test_zero_state(self, dumbbell_grid, two_species):
        st = zero_state(dumbbell_grid, 2)
        assert cx.energy_I(st, two_species, 5.0).total == 0.0

    def test_constant_capacity_single_square(self, square_grid, logistic22):
        st = cx.build_state_W(square_grid, [logistic22])
        bd = cx.energy_I(st, [logistic22], 0.0)
        assert bd.total == pytest.approx(-1.0 / 6.0, abs=1e-12)
        assert bd.total == pytest.approx(-logistic22.mu * 1.0, abs=1e-12)

    def test_segregated_state_has_zero_coupling(self, dumbbell_grid, two_species):
        st = cx.build_state_W(dumbbell_grid, two_species)
        bd = cx.energy_I(st, two_species, 777.0)
        assert bd.coupling == 0.0
        assert bd.total == pytest.approx(sum(bd.internal), abs=1e-12)

    def test_breakdown_consistency_and_positivity(self, dumbbell_grid, two_species):
        rng = np.random.default_rng(11)
        st = random_interior_state(dumbbell_grid, two_species, rng)
        bd = cx.energy_I(st, two_species, 3.0)
        assert bd.coupling >= 0.0
        assert bd.total == pytest.approx(sum(bd.internal) + bd.coupling, rel=1e-12)

    def test_coercivity_floor_on_random_states(self, dumbbell_grid, two_species):
        rng = np.random.default_rng(5)
        domain = dumbbell_grid.cell_area * dumbbell_grid.mask.sum()
        floor = sum(0.5 * m.A**2 - m.FA for m in two_species) * domain
        for _ in range(100):
            u = rng.uniform(-1.5, 2.5, (2, dumbbell_grid.ny, dumbbell_grid.nx))
            u[:, ~dumbbell_grid.mask] = 0.0
            st = cx.State(dumbbell_grid, u)
            assert cx.energy_I(st, two_species, rng.uniform(0, 50)).total >= floor - 1e-9

    def test_negative_kappa_rejected(self, dumbbell_grid, two_species):
        st = zero_state(dumbbell_grid, 2)
        with pytest.raises(ValueError):
            cx.energy_I(st, two_species, -1.0)


class TestEnergyJ:
    def test_matches_I_at_zero_kappa_in_range(self, dumbbell_grid, two_species):
        rng = np.random.default_rng(2)
        st = random_interior_state(dumbbell_grid, two_species, rng)
        assert cx.energy_J(st, two_species) == pytest.approx(
            cx.energy_I(st, two_species, 0.0).total, rel=1e-12)

    def test_trivial_tuple_value(self, dumbbell_grid, two_species):
        from coexmin.analysis import trivial_tuple
        st = trivial_tuple(dumbbell_grid, two_species)
        domain = dumbbell_grid.cell_area * dumbbell_grid.mask.sum()
        assert cx.energy_J(st, two_species) == pytest.approx(
            -two_species[0].mu * domain, abs=1e-12)

    def test_zero_state(self, dumbbell_grid, two_species):
        assert cx.energy_J(zero_state(dumbbell_grid, 2), two_species) == 0.0

    def test_out_of_range_reports_worst_cell(self, dumbbell_grid, two_species):
        st = zero_state(dumbbell_grid, 2)
        st.u[1][dumbbell_grid.ny // 2, 3] = 5.0
        with pytest.raises(ValueError, match="species 2"):
            cx.energy_J(st, two_species)


class TestGradI:
    def test_constant_capacity_is_critical(self, square_grid, logistic22):
        st = cx.build_state_W(square_grid, [logistic22])
        r = cx.grad_I(st, [logistic22], 0.0)
        assert np.abs(r.u).max() < 1e-12

    def test_zero_state_is_critical(self, dumbbell_grid, two_species):
        r = cx.grad_I(zero_state(dumbbell_grid, 2), two_species, 10.0)
        assert np.abs(r.u).max() == 0.0

    def test_directional_derivative_random_states(self, dumbbell_grid, two_species):
        rng = np.random.default_rng(15)
        h2 = dumbbell_grid.cell_area
        for _ in range(5):
            st = random_interior_state(dumbbell_grid, two_species, rng)
            d = rng.uniform(-1, 1, st.u.shape)
            d[:, ~dumbbell_grid.mask] = 0.0
            kappa = rng.uniform(0, 20)
            r = cx.grad_I(st, two_species, kappa)
            inner = h2 * float(np.sum(r.u * d))
            eps = 1e-5
            Ip = cx.energy_I(cx.State(dumbbell_grid, st.u + eps * d), two_species, kappa).total
            Im = cx.energy_I(cx.State(dumbbell_grid, st.u - eps * d), two_species, kappa).total
            fd = (Ip - Im) / (2 * eps)
            assert fd == pytest.approx(inner, rel=1e-6)

    def test_structure_matches_truncated_system(self, dumbbell_grid, two_species):
        # r_i = -lap u_i + u_i - ftil(u_i) + 2*kappa*g(u_i)*G(u_other)
        rng = np.random.default_rng(8)
        st = random_interior_state(dumbbell_grid, two_species, rng)
        kappa = 7.0
        r = cx.grad_I(st, two_species, kappa)
        for i in (0, 1):
            _, ftil, G_other, _ = cx.eval_truncated(two_species[1 - i], st.u[1 - i])
            ftil_i = cx.eval_truncated(two_species[i], st.u[i])[1]
            g_i = cx.eval_truncated(two_species[i], st.u[i])[3]
            expect = (-cx.neumann_laplacian(dumbbell_grid, st.u[i]) + st.u[i]
                      - ftil_i + 2.0 * kappa * g_i * G_other)
            expect[~dumbbell_grid.mask] = 0.0
            np.testing.assert_allclose(r.u[i], expect, rtol=1e-12, atol=1e-12)


class TestH1CoreDistance:
    def test_identical_states(self, dumbbell_grid, two_species):
        W = cx.build_state_W(dumbbell_grid, two_species)
        assert cx.h1_core_distance(W, W) == 0.0

    def test_constant_shift_on_one_core(self, dumbbell_grid, two_species):
        W = cx.build_state_W(dumbbell_grid, two_species)
        st = W.copy()
        c = 0.3
        st.u[0][dumbbell_grid.core_mask(1)] -= c
        area = cx.measure(dumbbell_grid, "core_1")
        # interface faces are excluded, so the constant has no gradient energy
        assert cx.h1_core_distance(st, W) == pytest.approx(c * np.sqrt(area), rel=1e-12)

    def test_channel_values_are_invisible(self, dumbbell_grid, two_species):
        W = cx.build_state_W(dumbbell_grid, two_species)
        st = W.copy()
        st.u[0][dumbbell_grid.channel_mask] = 0.9
        st.u[1][dumbbell_grid.channel_mask] = 0.4
        assert cx.h1_core_distance(st, W) == 0.0


class TestClampMonotone:
    def test_clamping_never_increases_energy(self, dumbbell_grid, two_species):
        rng = np.random.default_rng(23)
        for _ in range(100):
            u = rng.uniform(-1.0, 2.5, (2, dumbbell_grid.ny, dumbbell_grid.nx))
            u[:, ~dumbbell_grid.mask] = 0.0
            st = cx.State(dumbbell_grid, u)
            kappa = rng.uniform(0, 100)
            before = cx.energy_I(st, two_species, kappa).total
            after = cx.energy_I(clamp(st, two_species), two_species, kappa).total
            assert after <= before + 1e-10


def test_label_permutation_equivariance(dumbbell_grid):
    ms = [cx.make_logistic(2, 2), cx.make_logistic(3, 3)]
    rng = np.random.default_rng(4)
    st = random_interior_state(dumbbell_grid, ms, rng)
    swapped = cx.State(dumbbell_grid, st.u[::-1].copy())
    for kappa in (0.0, 12.0):
        a = cx.energy_I(st, ms, kappa).total
        b = cx.energy_I(swapped, ms[::-1], kappa).total
        assert a == pytest.approx(b, rel=1e-14)


def test_fields_csv_format(tmp_path, dumbbell_grid, two_species):
    st = cx.build_state_W(dumbbell_grid, two_species)
    path = tmp_path / "fields.csv"
    dump_fields_csv(st, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,label,u_1,u_2"
    assert len(lines) == 1 + int(dumbbell_grid.mask.sum())
    first = lines[1].split(",")
    assert len(first) == 5
    assert first[2].startswith("core_") or first[2] == "channel"
