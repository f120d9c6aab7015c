import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bifluid import grids
from bifluid.errors import ConfigError, DomainError


def test_make_grid_examples():
    g = grids.make_grid(1, [1.0], [100])
    assert g.dx == (0.01,)
    g2 = grids.make_grid(2, [1.0, 2.0], [50, 100])
    assert g2.dx == (0.02, 0.02)


def test_make_grid_rejects_bad_input():
    with pytest.raises(ConfigError):
        grids.make_grid(1, [1.0], [2])
    with pytest.raises(ConfigError):
        grids.make_grid(1, [-1.0], [10])
    with pytest.raises(ConfigError):
        grids.make_grid(3, [1.0, 1.0, 1.0], [8, 8, 8])
    with pytest.raises(ConfigError):
        grids.make_grid(2, [1.0], [8, 8])


def test_field_shape_validation():
    g = grids.make_grid(1, [1.0], [10])
    with pytest.raises(DomainError):
        grids.ScalarField(g, np.zeros(11))
    with pytest.raises(DomainError):
        grids.VectorField(g, (np.zeros(10),))


def test_fields_are_read_only():
    g = grids.make_grid(1, [1.0], [10])
    f = grids.ScalarField.full(g, 1.0)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_gradient_of_constant_is_zero():
    g = grids.make_grid(2, [1.0, 1.0], [16, 16])
    f = grids.ScalarField.full(g, 3.7)
    grad = grids.gradient(f)
    for comp in grad.components:
        assert np.all(comp == 0.0)


def test_gradient_exact_for_linear_interior():
    g = grids.make_grid(1, [1.0], [100])
    f = grids.ScalarField.from_function(g, lambda x: x)
    grad = grids.gradient(f)
    assert np.allclose(grad.components[0][1:-1], 1.0, atol=1e-12)
    assert grad.components[0][0] == 0.0 and grad.components[0][-1] == 0.0
    one_sided = grids.gradient(f, neumann_zero=False)
    assert one_sided.components[0][0] == pytest.approx(1.0, abs=1e-12)
    assert one_sided.components[0][-1] == pytest.approx(1.0, abs=1e-12)


def _interior_gradient_error(n):
    g = grids.make_grid(1, [1.0], [n])
    f = grids.ScalarField.from_function(g, lambda x: np.cos(np.pi * x))
    grad = grids.gradient(f)
    faces = np.arange(1, n) * g.dx[0]
    exact = -np.pi * np.sin(np.pi * faces)
    return np.abs(grad.components[0][1:-1] - exact).max()


def test_gradient_second_order_rate():
    errs = [_interior_gradient_error(n) for n in (50, 100, 200, 400)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 2.0) < 0.1)


def _laplacian_error(n):
    g = grids.make_grid(1, [1.0], [n])
    f = grids.ScalarField.from_function(g, lambda x: np.cos(np.pi * x))
    lap = grids.divergence(grids.gradient(f))
    x = g.axis_centers(0)
    exact = -np.pi**2 * np.cos(np.pi * x)
    return np.abs(lap.values - exact).max()


def test_divergence_of_gradient_second_order_rate():
    errs = [_laplacian_error(n) for n in (50, 100, 200, 400)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 2.0) < 0.1)


def test_divergence_of_zero_field():
    g = grids.make_grid(2, [1.0, 2.0], [8, 12])
    assert np.all(grids.divergence(grids.VectorField.zeros(g)).values == 0.0)


@pytest.mark.parametrize(
    "gh", [grids.make_grid(1, [1.0], [64]), grids.make_grid(2, [1.0, 1.5], [12, 18])]
)
def test_adjointness_on_random_fields(gh):
    rng = np.random.default_rng(42)
    dv = gh.cell_volume
    for _ in range(100):
        scalars = grids.ScalarField(gh, rng.standard_normal(gh.n_cells))
        comps = []
        for axis in range(gh.dim):
            c = rng.standard_normal(gh.face_shape(axis))
            sl_first = [slice(None)] * gh.dim
            sl_last = [slice(None)] * gh.dim
            sl_first[axis] = 0
            sl_last[axis] = -1
            c[tuple(sl_first)] = 0.0
            c[tuple(sl_last)] = 0.0
            comps.append(c)
        flux = grids.VectorField(gh, tuple(comps))
        lhs = float((scalars.values * grids.divergence(flux).values).sum()) * dv
        rhs = -grids.face_integral(grids.gradient(scalars), flux)
        assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(lhs)))


def test_integrate_examples():
    g = grids.make_grid(1, [1.0], [37])
    assert grids.integrate(grids.ScalarField.full(g, 1.0)) == pytest.approx(1.0, abs=1e-15)
    f = grids.ScalarField.from_function(g, lambda x: np.cos(np.pi * x))
    assert abs(grids.integrate(f)) < 1e-14
    g100 = grids.make_grid(1, [1.0], [100])
    q = grids.ScalarField.from_function(g100, lambda x: x**2)
    # midpoint rule error bound dx^2/12 * max|f''| on the unit interval
    assert abs(grids.integrate(q) - 1.0 / 3.0) <= g100.dx[0] ** 2 / 12.0 * 2.0


@settings(max_examples=25, deadline=None)
@given(value=st.floats(min_value=-100, max_value=100), n=st.integers(min_value=4, max_value=64))
def test_integrate_constant_is_exact(value, n):
    g = grids.make_grid(1, [2.0], [n])
    assert grids.integrate(grids.ScalarField.full(g, value)) == pytest.approx(
        2.0 * value, rel=1e-13, abs=1e-13
    )


def test_cell_average_and_face_average_roundtrip_constant():
    g = grids.make_grid(2, [1.0, 1.0], [8, 8])
    cells = np.full(g.n_cells, 2.5)
    for axis in range(2):
        faces = grids.faces_from_cells(g, cells, axis)
        assert np.all(faces == 2.5)
    field = grids.VectorField(
        g, tuple(np.full(g.face_shape(a), 1.5) for a in range(2))
    )
    for avg in grids.cell_average_normal(field):
        assert np.all(avg == 1.5)


def test_scalar_field_csv_roundtrip(tmp_path):
    g = grids.make_grid(2, [1.0, 1.0], [5, 4])
    rng = np.random.default_rng(3)
    f = grids.ScalarField(g, rng.standard_normal(g.n_cells))
    path = tmp_path / "field.csv"
    grids.write_scalar_field_csv(f, path)
    back = grids.read_scalar_field_csv(g, path)
    assert np.array_equal(back.values, f.values)
