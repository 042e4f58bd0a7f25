"""Backend agreement: the compiled stencil kernels must reproduce the numpy
fallback bit-for-bit (same expression trees, no FP contraction); the fused
nonlinear kernels must agree with the generic evaluators to machine accuracy.
"""

import numpy as np
import pytest

import coexmin as cx
from coexmin._kernels import _pystencil
from coexmin.reaction import eval_truncated

cy = pytest.importorskip("coexmin._kernels._stencil",
                         reason="compiled backend not built")


@pytest.fixture
def random_field(dumbbell_grid):
    rng = np.random.default_rng(7)
    u = rng.standard_normal((dumbbell_grid.ny, dumbbell_grid.nx))
    u[~dumbbell_grid.mask] = 0.0
    return u


def test_backend_is_reported():
    assert cx.BACKEND in ("cython", "python")


def test_laplacian_bitwise_equal(dumbbell_grid, random_field):
    a = _pystencil.laplacian(random_field, dumbbell_grid.mask)
    b = cy.laplacian(random_field, dumbbell_grid.mask)
    assert np.array_equal(a, b)


def test_face_energy_bitwise_equal(dumbbell_grid, random_field):
    a = _pystencil.face_energy_density(random_field, dumbbell_grid.mask)
    b = cy.face_energy_density(random_field, dumbbell_grid.mask)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("lam,p", [(2.0, 2.0), (3.0, 3.0), (1.7, 2.4)])
def test_fused_logistic_kernels_agree(lam, p, random_field):
    m = cx.make_logistic(lam, p)
    u = 1.5 * random_field
    Fa, Ga = _pystencil.logistic_energy_arrays(u, lam, p, m.A, m.FA)
    Fb, Gb = cy.logistic_energy_arrays(u, lam, p, m.A, m.FA)
    np.testing.assert_allclose(Fa, Fb, rtol=1e-15, atol=0)
    np.testing.assert_allclose(Ga, Gb, rtol=1e-15, atol=0)
    fa, ga, Ga2 = _pystencil.logistic_grad_arrays(u, lam, p, m.A, m.FA)
    fb, gb, Gb2 = cy.logistic_grad_arrays(u, lam, p, m.A, m.FA)
    np.testing.assert_allclose(fa, fb, rtol=1e-15, atol=0)
    np.testing.assert_allclose(ga, gb, rtol=1e-15, atol=0)
    np.testing.assert_allclose(Ga2, Gb2, rtol=1e-15, atol=0)


@pytest.mark.parametrize("lam,p", [(2.0, 2.0), (2.5, 1.5)])
def test_fused_kernels_match_generic_evaluators(lam, p, random_field):
    m = cx.make_logistic(lam, p)
    u = 1.5 * random_field
    Ftil, ftil, G, g = eval_truncated(m, u)
    Fk, Gk = cy.logistic_energy_arrays(u, lam, p, m.A, m.FA)
    fk, gk, _ = cy.logistic_grad_arrays(u, lam, p, m.A, m.FA)
    np.testing.assert_allclose(Fk, Ftil, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(Gk, G, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(fk, ftil, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(gk, g, rtol=1e-14, atol=1e-15)


def test_laplacian_zero_outside_mask(dumbbell_grid, random_field):
    out = cy.laplacian(random_field, dumbbell_grid.mask)
    assert (out[~dumbbell_grid.mask] == 0).all()


def test_face_energy_total_matches_direct_sum(dumbbell_grid, random_field):
    mask = dumbbell_grid.mask
    u = random_field
    total = float(cy.face_energy_density(u, mask)[mask].sum())
    expect = 0.0
    de = u[:, 1:] - u[:, :-1]
    fe = mask[:, 1:] & mask[:, :-1]
    expect += float((0.5 * de * de)[fe].sum())
    dn = u[1:, :] - u[:-1, :]
    fn = mask[1:, :] & mask[:-1, :]
    expect += float((0.5 * dn * dn)[fn].sum())
    assert total == pytest.approx(expect, rel=1e-13)
