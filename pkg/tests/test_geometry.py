"""Curvature operators and differential-operator identities on model charts."""

import numpy as np
import pytest

from gqem import geometry as geo
from gqem import identities as idt
from gqem import jets
from gqem.geometry import ScalarField, VectorField, outer, inner, tensor_norm2
from gqem.models import ModelSpec, height_field, make_chart, sample_points


@pytest.fixture(scope="module")
def sphere_polar():
    return make_chart(ModelSpec("sphere", 2, tau=1.0, m=1.0, chart_kind="polar"))


@pytest.fixture(scope="module")
def sphere_stereo():
    return make_chart(ModelSpec("sphere", 2, tau=1.0, m=1.0, chart_kind="stereographic"))


@pytest.fixture(scope="module")
def euclid2():
    return make_chart(ModelSpec("euclidean", 2, tau=1.0, m=1.0))


@pytest.fixture(scope="module")
def ball2():
    return make_chart(ModelSpec("hyperbolic", 2, tau=1.0, m=1.0))


def test_christoffel_euclidean_vanishes(euclid2):
    gam = geo.christoffel(euclid2, np.array([0.7, -1.3]))
    assert np.max(np.abs(gam.components)) == 0.0
    assert gam.con == 1 and gam.cov == 2


def test_christoffel_sphere_polar(sphere_polar):
    # Gamma^theta_{phi phi} = -sin(theta) cos(theta) = -sqrt(3)/4 at pi/3
    p = np.array([np.pi / 3, 1.1])
    gam = geo.christoffel(sphere_polar, p)
    assert gam.components[0, 1, 1] == pytest.approx(-np.sqrt(3) / 4, abs=1e-12)
    # symmetry in the lower pair
    assert np.allclose(gam.components, np.swapaxes(gam.components, 1, 2), atol=1e-14)


def test_christoffel_stereographic_origin(sphere_stereo):
    # the conformal factor is critical at the origin, so all symbols vanish
    gam = geo.christoffel(sphere_stereo, np.zeros(2))
    assert np.max(np.abs(gam.components)) < 1e-14


def test_unit_sphere_scalar_curvature(sphere_polar, sphere_stereo):
    for chart in (sphere_polar, sphere_stereo):
        for p in sample_points(chart, 5, seed=0):
            assert geo.scalar_curvature(chart, p) == pytest.approx(2.0, abs=1e-11)


def test_euclidean_ricci_flat(euclid2):
    ric = geo.ricci(euclid2, np.array([2.0, 3.0]))
    assert np.max(np.abs(ric.components)) == 0.0


def test_poincare_ball_einstein(ball2):
    # curvature -1: Ric = -(n-1) g
    p = np.zeros(2)
    ric = geo.ricci(ball2, p)
    g = geo.metric_values(ball2, p)
    assert np.allclose(ric.components, -g, atol=1e-12)
    assert geo.scalar_curvature(ball2, np.array([0.4, 0.1])) == pytest.approx(-2.0, abs=1e-11)


def test_height_hessian_sphere(sphere_polar):
    # hess h_v = -h_v g on the unit sphere
    spec = ModelSpec("sphere", 2, tau=1.0, m=1.0, chart_kind="polar")
    h = height_field(spec, sphere_polar)
    for p in sample_points(sphere_polar, 5, seed=1):
        H = geo.hessian(sphere_polar, h, p)
        g = geo.metric_values(sphere_polar, p)
        assert np.max(np.abs(H.components + h(p) * g)) < 1e-11


def test_height_hessian_sphere_radius_scaling():
    spec = ModelSpec("sphere", 3, tau=1.2, m=1.0, radius=2.0, chart_kind="stereographic")
    chart = make_chart(spec)
    h = height_field(spec, chart)
    for p in sample_points(chart, 8, seed=2):
        H = geo.hessian(chart, h, p)
        g = geo.metric_values(chart, p)
        assert np.max(np.abs(H.components + h(p) / 4.0 * g)) < 1e-9


def test_height_hessian_hyperbolic(ball2):
    spec = ModelSpec("hyperbolic", 2, tau=1.0, m=1.0)
    h = height_field(spec, ball2)
    for p in sample_points(ball2, 5, seed=3):
        H = geo.hessian(ball2, h, p)
        g = geo.metric_values(ball2, p)
        assert np.max(np.abs(H.components - h(p) * g)) < 1e-10


def test_euclidean_norm_square_hessian(euclid2):
    phi = ScalarField.from_coords(2, lambda x, y: x * x + y * y, "|x|^2")
    H = geo.hessian(euclid2, phi, np.array([1.3, -0.4]))
    assert np.allclose(H.components, 2.0 * np.eye(2), atol=1e-13)


def test_gradient_and_laplacian_polar(sphere_polar):
    spec = ModelSpec("sphere", 2, tau=1.0, m=1.0, chart_kind="polar")
    h = height_field(spec, sphere_polar)
    p = np.array([0.9, 2.0])
    # eigenfunction: lap h = -n h
    assert geo.laplacian(sphere_polar, h, p) == pytest.approx(-2.0 * h(p), abs=1e-11)
    grad = geo.gradient(sphere_polar, h, p)
    # h = cos(theta): grad = g^{theta theta} (-sin theta) = -sin(theta) d_theta
    assert grad.components[0] == pytest.approx(-np.sin(p[0]), abs=1e-12)
    assert grad.components[1] == pytest.approx(0.0, abs=1e-12)


def test_constant_vector_field_euclidean(euclid2):
    X = VectorField.from_coords(
        2, lambda x, y: (jets.Jet.constant(np.ones(x.batch_shape), 2, x.order),
                         jets.Jet.constant(2 * np.ones(x.batch_shape), 2, x.order)),
        "const",
    )
    p = np.array([0.2, 0.5])
    assert np.max(np.abs(geo.covariant_derivative_vector(euclid2, X, p).components)) == 0.0
    assert np.max(np.abs(geo.lie_metric(euclid2, X, p).components)) == 0.0
    assert geo.div_vector(euclid2, X, p) == 0.0


def test_lie_metric_of_gradient_is_twice_hessian(sphere_stereo):
    phi = ScalarField.from_coords(2, lambda x, y: jets.sin(x) * y, "test")
    X = geo.grad_field(sphere_stereo, phi)
    for p in sample_points(sphere_stereo, 4, seed=4):
        lie = geo.lie_metric(sphere_stereo, X, p)
        H = geo.hessian(sphere_stereo, phi, p)
        assert np.max(np.abs(lie.components - 2.0 * H.components)) < 1e-10


def test_divergence_of_height_gradient(sphere_polar):
    spec = ModelSpec("sphere", 2, tau=1.0, m=1.0, chart_kind="polar")
    h = height_field(spec, sphere_polar)
    X = geo.grad_field(sphere_polar, h)
    for p in sample_points(sphere_polar, 4, seed=5):
        assert geo.div_vector(sphere_polar, X, p) == pytest.approx(-2.0 * h(p), abs=1e-11)


def test_directional_derivative_euclidean(euclid2):
    # nabla_X Y with X = (1, 0), Y = (x y, y^2): plain directional derivative
    X = VectorField.from_coords(
        2, lambda x, y: (jets.Jet.constant(np.ones(x.batch_shape), 2, x.order),
                         jets.Jet.constant(np.zeros(x.batch_shape), 2, x.order)),
        "e1",
    )
    Y = VectorField.from_coords(2, lambda x, y: (x * y, y * y), "Y")
    p = np.array([2.0, 3.0])
    out = geo.directional(euclid2, X, Y, p)
    assert np.allclose(out.components, [3.0, 0.0], atol=1e-13)


def test_tensor_norms(sphere_stereo):
    p = np.array([0.3, -0.8])
    g = geo.metric_values(sphere_stereo, p)
    gt = geo.TensorValue(g, 0, 2, p)
    assert tensor_norm2(sphere_stereo, gt, p) == pytest.approx(2.0, abs=1e-12)

    phi = ScalarField.from_coords(2, lambda x, y: jets.sin(x + y) + x * x, "phi")
    frame = geo.ChartFrame(sphere_stereo, p)
    gf = frame.grad_values(phi)
    df = np.einsum("ij,j->i", g, gf)  # covariant gradient
    rank_one = geo.TensorValue(np.outer(df, df), 0, 2, p)
    gn2 = float(frame.grad_norm2(phi, 0).value)
    assert tensor_norm2(sphere_stereo, rank_one, p) == pytest.approx(gn2**2, rel=1e-12)

    # orthogonal decomposition: |hess - (lap/n) g|^2 = |hess|^2 - (lap)^2 / n
    H = frame.hessian_values(phi)
    lap = float(frame.laplacian(phi, 0).value)
    traceless = geo.TensorValue(H - lap / 2.0 * g, 0, 2, p)
    full = geo.TensorValue(H, 0, 2, p)
    lhs = tensor_norm2(sphere_stereo, traceless, p)
    rhs = tensor_norm2(sphere_stereo, full, p) - lap**2 / 2.0
    assert lhs == pytest.approx(rhs, abs=1e-11)


def test_outer_and_inner_valences(euclid2):
    p = np.zeros(2)
    v = geo.TensorValue(np.array([1.0, 2.0]), 1, 0, p)
    w = geo.TensorValue(np.array([3.0, -1.0]), 1, 0, p)
    vw = outer(v, w)
    assert (vw.con, vw.cov) == (2, 0)
    assert vw.components[1, 0] == pytest.approx(6.0)
    assert inner(euclid2, v, w, p) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        inner(euclid2, v, vw, p)


def test_riemann_symmetries(sphere_stereo, ball2):
    for chart in (sphere_stereo, ball2):
        for p in sample_points(chart, 3, seed=6):
            rm = geo.riemann(chart, p).components
            # antisymmetry in the last index pair
            assert np.max(np.abs(rm + np.swapaxes(rm, 2, 3))) < 1e-10
            # first Bianchi identity
            cyc = rm + np.transpose(rm, (0, 2, 3, 1)) + np.transpose(rm, (0, 3, 1, 2))
            assert np.max(np.abs(cyc)) < 1e-10


def test_contracted_bianchi_on_models():
    for family, kind in (("sphere", "stereographic"), ("sphere", "polar"),
                         ("hyperbolic", "poincare_ball")):
        chart = make_chart(ModelSpec(family, 2, tau=1.0, m=1.0, chart_kind=kind))
        pts = sample_points(chart, 50, seed=7)
        res = idt.contracted_bianchi_residual(chart, pts)
        assert np.max(res) < 1e-7


def test_div_hessian_identity(sphere_stereo):
    phi = ScalarField.from_coords(2, lambda x, y: jets.exp(x * 0.4) * jets.sin(y), "phi")
    pts = sample_points(sphere_stereo, 25, seed=8)
    assert np.max(idt.div_hessian_residual(sphere_stereo, phi, pts)) < 1e-7


def test_div_outer_grad_identity(ball2):
    phi = ScalarField.from_coords(2, lambda x, y: x * x * y + jets.cos(y), "phi")
    pts = sample_points(ball2, 25, seed=9)
    assert np.max(idt.div_outer_grad_residual(ball2, phi, pts)) < 1e-8


def test_bochner_identity(sphere_polar):
    spec = ModelSpec("sphere", 2, tau=1.0, m=1.0, chart_kind="polar")
    h = height_field(spec, sphere_polar)
    phi = h * h + 0.3 * h
    pts = sample_points(sphere_polar, 25, seed=10)
    assert np.max(idt.bochner_residual(sphere_polar, phi, pts)) < 1e-7


def test_lie_divergence_rotational_field(sphere_polar):
    # the azimuthal Killing field on the sphere is not a gradient
    X = VectorField.from_coords(
        2,
        lambda th, ph: (jets.Jet.constant(np.zeros(th.batch_shape), 2, th.order),
                        jets.Jet.constant(np.ones(th.batch_shape), 2, th.order)),
        "rot",
    )
    pts = sample_points(sphere_polar, 25, seed=11)
    assert np.max(idt.lie_divergence_residual(sphere_polar, X, pts)) < 1e-7
    # sanity: it really is non-gradient (lowered nabla X has an antisymmetric part)
    p = pts[0]
    cov = geo.covariant_derivative_vector(sphere_polar, X, p).components
    g = geo.metric_values(sphere_polar, p)
    lowered = np.einsum("ik,kj->ij", g, cov)
    assert np.max(np.abs(lowered - lowered.T)) > 1e-3


def test_lie_divergence_sheared_field(sphere_stereo):
    X = VectorField.from_coords(2, lambda x, y: (-y + 0.2 * x * x, x), "shear")
    pts = sample_points(sphere_stereo, 20, seed=12)
    assert np.max(idt.lie_divergence_residual(sphere_stereo, X, pts)) < 1e-7


def test_div_tensor2_public_wrapper(sphere_stereo):
    # div Ric = (1/2) grad R as 1-forms (contracted Bianchi through the public API)
    p = np.array([0.5, -0.7])
    div_ric = geo.div_tensor2(sphere_stereo, geo.ricci_field(sphere_stereo), p)
    assert (div_ric.con, div_ric.cov) == (0, 1)
    frame = geo.ChartFrame(sphere_stereo, p)
    dR = frame.partials_of_jet(frame.scalar_curvature_jet(1))
    assert np.allclose(2.0 * div_ric.components, dR, atol=1e-10)


def test_order_capability_error(sphere_stereo):
    phi = ScalarField.from_coords(2, lambda x, y: x * y, "phi")
    with pytest.raises(jets.OrderCapabilityError, match="order"):
        phi.jet(np.zeros(2), 5)
    frame = geo.ChartFrame(sphere_stereo, np.zeros(2))
    with pytest.raises(jets.OrderCapabilityError):
        frame.riemann(3)  # needs metric jets of order 5


def test_degenerate_metric_error():
    def metric_fn(coords):
        x, y = coords
        out = np.empty((2, 2), dtype=object)
        zero = jets.Jet.constant(np.zeros(x.batch_shape), 2, x.order)
        out[0, 0] = x  # vanishes at x = 0
        out[0, 1] = zero
        out[1, 0] = zero
        out[1, 1] = jets.Jet.constant(np.ones(x.batch_shape), 2, x.order)
        return out

    chart = geo.Chart(2, metric_fn, lambda p: np.full(p.shape[:-1], True), "bad")
    with pytest.raises(geo.DegenerateMetricError):
        geo.christoffel(chart, np.zeros(2))


def test_metric_spd_check(sphere_polar):
    pts = sample_points(sphere_polar, 30, seed=13)
    smallest = geo.check_metric_spd(sphere_polar, pts)
    assert smallest > 0.0
