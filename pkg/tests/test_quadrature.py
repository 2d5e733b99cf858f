"""Sphere quadrature: measure calibration, Stokes checks, integral identities."""

import math

import numpy as np
import pytest

from gqem import jets
from gqem import quadrature as quad
from gqem.geometry import ScalarField, VectorField, grad_field
from gqem.models import ModelSpec, example_structure, height_field, make_chart
from gqem.qem import make_structure


@pytest.fixture(scope="module")
def s2_structure():
    return example_structure(ModelSpec("sphere", 2, tau=1.0, m=2.0, chart_kind="polar"))


@pytest.fixture(scope="module")
def s2_grid(s2_structure):
    return quad.make_sphere_grid(s2_structure.chart, (64, 128))


def test_grid_rejects_non_polar_charts():
    stereo = make_chart(ModelSpec("sphere", 2, tau=1.0, m=1.0))
    with pytest.raises(ValueError, match="polar"):
        quad.make_sphere_grid(stereo, (16, 32))
    eucl = make_chart(ModelSpec("euclidean", 2, tau=1.0, m=1.0))
    with pytest.raises(ValueError, match="polar"):
        quad.make_sphere_grid(eucl, (16, 32))


def test_grid_resolution_validation(s2_structure):
    with pytest.raises(ValueError, match="entries"):
        quad.make_sphere_grid(s2_structure.chart, (16,))


def test_nodes_avoid_singular_set(s2_grid):
    theta = s2_grid.nodes[:, 0]
    assert np.all((theta > 0.0) & (theta < np.pi))


def test_total_measure(s2_grid):
    area = quad.integrate(s2_grid, ScalarField.constant(2, 1.0))
    assert abs(area - 4 * math.pi) / (4 * math.pi) < 1e-12


def test_total_measure_radius_and_dim():
    chart = make_chart(ModelSpec("sphere", 3, tau=1.5, m=1.0, radius=2.0, chart_kind="polar"))
    grid = quad.make_sphere_grid(chart, (24, 24, 48))
    vol = quad.integrate(grid, ScalarField.constant(3, 1.0))
    want = quad.sphere_area(3, 2.0)  # 2 pi^2 r^3
    assert abs(vol - want) / want < 1e-10
    assert want == pytest.approx(2 * math.pi**2 * 8.0)


def test_height_moments(s2_structure, s2_grid):
    spec = ModelSpec("sphere", 2, tau=1.0, m=2.0, chart_kind="polar")
    h = height_field(spec, s2_structure.chart)
    assert abs(quad.integrate(s2_grid, h)) < 1e-12
    h2 = h * h
    assert abs(quad.integrate(s2_grid, h2) - 4 * math.pi / 3) / (4 * math.pi / 3) < 1e-10


def test_stokes_sanity(s2_structure, s2_grid):
    spec = ModelSpec("sphere", 2, tau=1.0, m=2.0, chart_kind="polar")
    h = height_field(spec, s2_structure.chart)
    assert abs(quad.stokes_sanity(s2_grid, h)) < 1e-10
    h3 = h * h * h
    assert abs(quad.stokes_sanity(s2_grid, h3)) < 1e-9
    exp_h = ScalarField(2, lambda p, order: jets.exp(h.jet(p, order)), "exp(h)")
    assert abs(quad.stokes_sanity(s2_grid, exp_h)) < 1e-8


def test_integration_by_parts(s2_structure, s2_grid):
    # int <grad a, grad b> + int a lap b = 0 for polynomials in the height function
    spec = ModelSpec("sphere", 2, tau=1.0, m=2.0, chart_kind="polar")
    h = height_field(spec, s2_structure.chart)
    rng = np.random.default_rng(31)
    chart = s2_structure.chart
    for _ in range(3):
        c = rng.uniform(-1, 1, size=4)
        a = c[0] * h + c[1] * h * h
        b = c[2] * h + c[3] * h * h * h

        def cross(p, order=0):
            from gqem.geometry import ChartFrame

            fr = ChartFrame(chart, p)
            ga = fr.grad(a, 0)
            db = [fr.field_jet(b, 1).derive(i).value for i in range(2)]
            return sum(ga[i].value * db[i] for i in range(2))

        lhs = float(np.sum(s2_grid.weights * cross(s2_grid.nodes)))

        def a_lap_b(p):
            from gqem.geometry import ChartFrame

            fr = ChartFrame(chart, p)
            return fr.field_jet(a, 0).value * fr.laplacian(b, 0).value

        rhs = float(np.sum(s2_grid.weights * a_lap_b(s2_grid.nodes)))
        assert abs(lhs + rhs) < 1e-9


def test_integral_identities_on_s2(s2_structure, s2_grid):
    rows = quad.run_integral_suite(s2_grid, s2_structure, 1e-6)
    assert {r["id"] for r in rows} == {
        "traceless_hessian_balance",
        "ricci_energy_balance",
        "traceless_hessian_flux",
        "hessian_energy_identity",
        "bochner_integral_balance",
        "stokes_sanity",
    }
    for r in rows:
        assert r["pass"], (r["id"], r["relative_gap"])
        assert r["relative_gap"] < 1e-8


def test_integral_identities_reject_noncompact():
    s = example_structure(ModelSpec("euclidean", 2, tau=1.0, m=2.0))
    chart = make_chart(ModelSpec("sphere", 2, tau=1.0, m=1.0, chart_kind="polar"))
    grid = quad.make_sphere_grid(chart, (8, 16))
    with pytest.raises(ValueError, match="compact"):
        quad.traceless_hessian_balance(grid, s)


def test_n2_flux_drops_curvature_term(s2_structure, s2_grid):
    # with n = 2 the (n-2) coefficient vanishes; the traceless energy reduces
    # to the pure potential-flux term, which is then strictly positive
    chk = quad.traceless_hessian_flux(s2_grid, s2_structure)
    n, m = 2, s2_structure.m
    I_gn2lap = quad._integrals(s2_grid, s2_structure)["gn2f_lapf"]
    assert chk.rhs == pytest.approx(-(n + 2) / (2 * n * m) * I_gn2lap, rel=1e-12)
    assert chk.lhs > 0.0
    assert I_gn2lap < 0.0


def test_bochner_integrals_hand_values(s2_structure, s2_grid):
    # u = 1 - cos(theta)/2: int Ric(grad u, grad u) = 2 pi / 3 = (1/2) int (lap u)^2
    b = quad.bochner_integrals(s2_grid, s2_structure)
    assert b.ric_term == pytest.approx(2 * math.pi / 3, rel=1e-12)
    assert b.lap_term == pytest.approx(2 * math.pi / 3, rel=1e-12)
    assert b.d2u_traceless < 1e-13
    assert abs(b.lemflat_term) < 1e-9  # conformal grad u: int |grad u|^2 lap u = 0
    assert b.balance_gap < 1e-12
    assert b.equality_gap < 1e-8


def test_conformal_cubic_divergence(s2_structure):
    # div(|X|^2 X) = ((n+2)/n) |X|^2 div X for the conformal field X = grad u
    from gqem.identities import conformal_cubic_divergence_residual
    from gqem.models import sample_points

    X = grad_field(s2_structure.chart, s2_structure.u)
    pts = sample_points(s2_structure.chart, 30, seed=1)
    res = conformal_cubic_divergence_residual(s2_structure.chart, X, pts)
    assert np.max(res) < 1e-8


def test_triviality_margin_positive(s2_structure, s2_grid):
    assert quad.triviality_margin(s2_grid, s2_structure) > 1.0


def test_resolution_doubling_convergence():
    # sharpen the potential so the coarse-grid error is visible, then double
    s = example_structure(ModelSpec("sphere", 2, tau=0.6, m=1.0, chart_kind="polar"))
    gaps = []
    for res in ((4, 8), (8, 16)):
        grid = quad.make_sphere_grid(s.chart, res)
        chk = quad.traceless_hessian_balance(grid, s)
        gaps.append(chk.relative_gap)
    assert gaps[1] < 1e-12 or gaps[0] / gaps[1] >= 4.0


def test_integrand_failure_names_the_node(s2_grid, s2_structure):
    def bad_field(p):
        values = np.asarray(p)[..., 0] * 0.0
        raise jets.JetDomainError("log of non-positive value")

    with pytest.raises((ValueError, jets.JetDomainError)):
        quad.integrate(s2_grid, bad_field)


def test_integrate_is_deterministic(s2_structure, s2_grid):
    spec = ModelSpec("sphere", 2, tau=1.0, m=2.0, chart_kind="polar")
    h = height_field(spec, s2_structure.chart)
    v1 = quad.integrate(s2_grid, h * h)
    v2 = quad.integrate(s2_grid, h * h)
    assert v1 == v2
