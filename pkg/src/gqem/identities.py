"""Pointwise verifiers for the structural identities of quasi-Einstein metrics.

Every verifier returns the residual of an identity that vanishes identically
on an exact structure; running them on deliberately broken structures
(negative controls) confirms they can fail. The catalog at the bottom lists
each verifier with the formula it checks and the jet orders it consumes.

Verifiers accept a single point of shape (n,) or a batch of shape (..., n)
and return a matching float or array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import (
    Chart,
    ChartFrame,
    ScalarField,
    VectorField,
    dot_g,
    grad_field,
    hessian_field,
    lie_metric_field,
    norm_g,
    outer_grad_field,
    ricci_field,
    tensor2_norm2_g,
)
from .qem import (
    QemStructure,
    StructureFrame,
    radial_identity_values,
    trace_divergence_values,
    u_laplacian_values,
    u_transform_values,
)


@dataclass
class IdentityResult:
    """One identity evaluated at one point."""

    identity_id: str
    point: np.ndarray
    residual: float
    raw: Optional[np.ndarray]
    required_jet_order: int
    tolerance_used: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance_used


def _frame(s: QemStructure, p) -> StructureFrame:
    return StructureFrame(s, np.asarray(p, dtype=np.float64))


# ---------------------------------------------------------------------------
# defining-equation family (thin wrappers; the work lives in qem)
# ---------------------------------------------------------------------------


def defining_residual_sup(s: QemStructure, p):
    return np.max(np.abs(_frame(s, p).defining_values()), axis=(-2, -1))


def traceless_residual_sup(s: QemStructure, p):
    return np.max(np.abs(_frame(s, p).traceless_values()), axis=(-2, -1))


def radial_residual(s: QemStructure, p):
    return np.abs(radial_identity_values(s, p))


def u_transform_residual_sup(s: QemStructure, p):
    return np.max(np.abs(u_transform_values(s, p)), axis=(-2, -1))


def u_laplacian_residual(s: QemStructure, p):
    return np.abs(u_laplacian_values(s, p))


def trace_divergence_residual(s: QemStructure, p):
    return np.abs(trace_divergence_values(s, p))


# ---------------------------------------------------------------------------
# derivative-of-trace identity
# ---------------------------------------------------------------------------


def trace_gradient_residual(s: QemStructure, p):
    """<grad f, grad R> + <grad f, grad lap f> - (1/m)<grad f, grad|grad f|^2> - n<grad lam, grad f>."""
    fr = _frame(s, p)
    gf = np.stack([j.value for j in fr.grad_f(0)], axis=-1)
    dR = fr.partials_of_jet(fr.scalar_curvature_jet(1))
    dlap = fr.partials_of_jet(fr.laplacian(s.f, 1))
    dgn2 = fr.partials_of_jet(fr.grad_norm2(s.f, 1))
    dlam = fr.partials_of_jet(fr.lam_jet(1))
    pair = lambda w: np.einsum("...i,...i->...", gf, w)
    return np.abs(pair(dR) + pair(dlap) - s.inv_m * pair(dgn2) - fr.n * pair(dlam))


# ---------------------------------------------------------------------------
# the three structural gradient/Laplacian identities
# ---------------------------------------------------------------------------


def gradient_norm_laplacian_residual(s: QemStructure, p):
    """(1/2) lap|grad f|^2 = |hess f|^2 - Ric(grad f, grad f) + (2/m)|grad f|^2 lap f - (n-2)<grad lam, grad f>."""
    fr = _frame(s, p)
    n = fr.n
    g = fr.metric_values()
    ginv = np.linalg.inv(g)
    lhs = 0.5 * fr.laplacian_of_jet(fr.grad_norm2(s.f, 2))
    hess = fr.hess_f_values()
    hess2 = tensor2_norm2_g(g, ginv, hess)
    gf = np.stack([j.value for j in fr.grad_f(0)], axis=-1)
    ric_ff = np.einsum("...ij,...i,...j->...", fr.ricci_values(), gf, gf)
    gn2 = fr.grad_norm2(s.f, 0).value
    lapf = fr.laplacian(s.f, 0).value
    dlam = fr.partials_of_jet(fr.lam_jet(1))
    lam_f = np.einsum("...i,...i->...", gf, dlam)
    rhs = hess2 - ric_ff + 2.0 * s.inv_m * gn2 * lapf - (n - 2) * lam_f
    return np.abs(lhs - rhs)


def curvature_gradient_residual(s: QemStructure, p, z_checks: int = 5, seed: int = 0):
    """(1/2) grad R = ((m-1)/m) Ric(grad f) + (1/m)(R - (n-1)lam) grad f + (n-1) grad lam.

    Returns the g-norm of the vector residual, folded with the worst of
    `z_checks` seeded contractions of the same identity against fixed vectors.
    """
    fr = _frame(s, p)
    n = fr.n
    g = fr.metric_values()
    ginv = np.linalg.inv(g)
    dR = fr.partials_of_jet(fr.scalar_curvature_jet(1))
    gf = np.stack([j.value for j in fr.grad_f(0)], axis=-1)
    ric = fr.ricci_values()
    ric_gf = np.einsum("...ik,...kl,...l->...i", ginv, ric, gf)
    dlam = fr.partials_of_jet(fr.lam_jet(1))
    rr = fr.scalar_curvature_value()
    lam = fr.lam_jet(0).value
    coef = (rr - (n - 1) * lam) * s.inv_m
    rhs = (
        (1.0 - s.inv_m) * ric_gf
        + coef[..., None] * gf
        + (n - 1) * np.einsum("...ij,...j->...i", ginv, dlam)
    )
    lhs = 0.5 * np.einsum("...ij,...j->...i", ginv, dR)
    res = norm_g(g, lhs - rhs)
    if z_checks:
        rng = np.random.default_rng(seed)
        zs = rng.normal(size=(z_checks, n))
        lhs_flat = 0.5 * dR  # covariant form pairs directly with vectors
        rhs_flat = np.einsum("...ij,...j->...i", g, rhs)
        for z in zs:
            rz = np.abs(np.einsum("...i,i->...", lhs_flat - rhs_flat, z))
            res = np.maximum(res, rz)
    return res


def hamilton_gradient_residual(s: QemStructure, p):
    """grad(R + |grad f|^2 - 2(n-1)lam) = 2 lam grad f + (2/m){conv + (|grad f|^2 - lap f) grad f}."""
    fr = _frame(s, p)
    n = fr.n
    g = fr.metric_values()
    ginv = np.linalg.inv(g)
    combined = (
        fr.scalar_curvature_jet(1)
        + fr.grad_norm2(s.f, 1)
        - 2.0 * (n - 1) * fr.lam_jet(1)
    )
    lhs = fr.grad_values_of_jet(combined)
    gf = np.stack([j.value for j in fr.grad_f(0)], axis=-1)
    hess = fr.hess_f_values()
    conv = np.einsum("...ik,...kj,...j->...i", ginv, hess, gf)
    lam = fr.lam_jet(0).value
    gn2 = fr.grad_norm2(s.f, 0).value
    lapf = fr.laplacian(s.f, 0).value
    rhs = 2.0 * lam[..., None] * gf + 2.0 * s.inv_m * (
        conv + (gn2 - lapf)[..., None] * gf
    )
    return norm_g(g, lhs - rhs)


# ---------------------------------------------------------------------------
# fourth-order identity for the Laplacian of the scalar curvature
# ---------------------------------------------------------------------------


def _convective_divergence(fr: StructureFrame, phi: ScalarField):
    """div(nabla_{grad phi} grad phi) values, via order-1 jets of the field."""
    n = fr.n
    xj = fr.grad(phi, 2)
    x1 = [x.truncated(1) for x in xj]
    gam1 = fr.gamma(1)
    w = []
    for i in range(n):
        acc = x1[0] * xj[i].derive(0)
        for j in range(1, n):
            acc = acc + x1[j] * xj[i].derive(j)
        for j in range(n):
            for k in range(n):
                acc = acc + gam1[i, j, k] * x1[j] * x1[k]
        w.append(acc)
    gam0 = fr.gamma(0)
    out = 0.0
    for i in range(n):
        out = out + w[i].derive(i).value
        for k in range(n):
            out = out + gam0[i, i, k].value * w[k].value
    return out


def curvature_laplacian_residual(s: QemStructure, p, fd_step: Optional[float] = None):
    """(1/2) lap R against its expansion in potential derivatives (needs metric jets of order 4).

    With `fd_step` set, the left side uses second central differences of the
    scalar curvature field instead of jets (cross-validation of the
    fourth-order path).
    """
    if not s.m_finite:
        raise ValueError("the curvature-Laplacian identity is stated for finite m")
    fr = _frame(s, p)
    n = fr.n
    g = fr.metric_values()
    ginv = np.linalg.inv(g)
    if fd_step is None:
        lhs = 0.5 * fr.laplacian_of_jet(fr.scalar_curvature_jet(2))
    else:
        lhs = 0.5 * _fd_laplacian_scalar_curvature(fr, fd_step)
    hess = fr.hess_f_values()
    lapf = fr.laplacian(s.f, 0).value
    traceless = hess - (lapf / n)[..., None, None] * g
    traceless2 = tensor2_norm2_g(g, ginv, traceless)
    gf = np.stack([j.value for j in fr.grad_f(0)], axis=-1)
    pair = lambda w: np.einsum("...i,...i->...", gf, w)
    dlam = fr.partials_of_jet(fr.lam_jet(1))
    dR = fr.partials_of_jet(fr.scalar_curvature_jet(1))
    dlap = fr.partials_of_jet(fr.laplacian(s.f, 1))
    lam = fr.lam_jet(0).value
    rhs = (
        -traceless2
        - (1.0 / n + s.inv_m) * lapf**2
        - 0.5 * n * pair(dlam)
        + pair(dR)
        + (0.5 - s.inv_m) * pair(dlap)
        + s.inv_m * _convective_divergence(fr, s.f)
        + (n - 1) * fr.laplacian_of_jet(fr.lam_jet(2))
        + lam * lapf
    )
    return np.abs(lhs - rhs)


def _fd_laplacian_scalar_curvature(fr: StructureFrame, step: float):
    """lap R with coordinate second differences of R (step h), curvature terms from jets."""
    n = fr.n
    p = fr.p

    def r_at(q):
        return ChartFrame(fr.chart, q).scalar_curvature_value()

    ginv = fr.metric_inv_values()
    gam = fr.gamma(0)
    r0 = r_at(p)
    out = 0.0
    d1 = []
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        d1.append((r_at(p + ei) - r_at(p - ei)) / (2 * step))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        for j in range(n):
            ej = np.zeros(n)
            ej[j] = step
            if i == j:
                dd = (r_at(p + ei) - 2 * r0 + r_at(p - ei)) / step**2
            else:
                dd = (
                    r_at(p + ei + ej)
                    - r_at(p + ei - ej)
                    - r_at(p - ei + ej)
                    + r_at(p - ei - ej)
                ) / (4 * step**2)
            term = dd
            for k in range(n):
                term = term - gam[k, i, j].value * d1[k]
            out = out + ginv[..., i, j] * term
    return out


# ---------------------------------------------------------------------------
# conformality and vector-field identities
# ---------------------------------------------------------------------------


def conformality_residual(chart: Chart, X: VectorField, p):
    """g-norm of (1/2) L_X g - (div X / n) g."""
    fr = ChartFrame(chart, np.asarray(p, dtype=np.float64))
    n = chart.dim
    g = fr.metric_values()
    ginv = np.linalg.inv(g)
    lie = np.stack(
        [
            np.stack([fr.lie_metric(X, 0)[i, j].value for j in range(n)], axis=-1)
            for i in range(n)
        ],
        axis=-2,
    )
    div = fr.div_vector(X, 0).value
    res = 0.5 * lie - (div / n)[..., None, None] * g
    return np.sqrt(np.maximum(tensor2_norm2_g(g, ginv, res), 0.0))


def u_conformality_residual(s: QemStructure, p):
    """Conformality defect of grad u; vanishes exactly when the base is Einstein."""
    return conformality_residual(s.chart, grad_field(s.chart, s.require_u()), p)


def lie_divergence_residual(chart: Chart, X: VectorField, p):
    """div(L_X g)(X) = (1/2) lap|X|^2 - |nabla X|^2 + Ric(X, X) + <X, grad div X>."""
    p = np.asarray(p, dtype=np.float64)
    fr = ChartFrame(chart, p)
    n = chart.dim
    g = fr.metric_values()
    ginv = np.linalg.inv(g)
    xv = np.stack([j.value for j in fr.vector_jets(X, 0)], axis=-1)

    lie_f = lie_metric_field(chart, X)
    div_lie = np.stack([j.value for j in fr.div_tensor2(lie_f, 0)], axis=-1)
    lhs = np.einsum("...i,...i->...", div_lie, xv)

    gj = fr.metric(2)
    xj = fr.vector_jets(X, 2)
    norm2_jet = None
    for i in range(n):
        for j in range(n):
            term = gj[i, j] * xj[i] * xj[j]
            norm2_jet = term if norm2_jet is None else norm2_jet + term
    lap_norm2 = fr.laplacian_of_jet(norm2_jet)

    cov = fr.covariant_vector(X, 0)
    covv = np.stack(
        [np.stack([cov[i, j].value for j in range(n)], axis=-1) for i in range(n)],
        axis=-2,
    )
    # |nabla X|^2 with the (1,1) valence: g_{ik} g^{jl} covv[i,j] covv[k,l]
    nabla_x2 = np.einsum("...ik,...jl,...ij,...kl->...", g, ginv, covv, covv)
    ric_xx = np.einsum("...ij,...i,...j->...", fr.ricci_values(), xv, xv)
    ddiv = fr.partials_of_jet(fr.div_vector(X, 1))
    d_x_div = np.einsum("...i,...i->...", xv, ddiv)
    rhs = 0.5 * lap_norm2 - nabla_x2 + ric_xx + d_x_div
    return np.abs(lhs - rhs)


# ---------------------------------------------------------------------------
# chart-level curvature identities (potential-independent or Bochner-type)
# ---------------------------------------------------------------------------


def contracted_bianchi_residual(chart: Chart, p):
    """g-norm of grad R - 2 div Ric (covariant form)."""
    fr = ChartFrame(chart, np.asarray(p, dtype=np.float64))
    dR = fr.partials_of_jet(fr.scalar_curvature_jet(1))
    div_ric = np.stack(
        [j.value for j in fr.div_tensor2(ricci_field(chart), 0)], axis=-1
    )
    w = dR - 2.0 * div_ric
    ginv = fr.metric_inv_values()
    return np.sqrt(np.maximum(np.einsum("...ij,...i,...j->...", ginv, w, w), 0.0))


def div_hessian_residual(chart: Chart, phi: ScalarField, p):
    """g-norm of div hess phi - Ric(grad phi) - grad lap phi (covariant form)."""
    fr = ChartFrame(chart, np.asarray(p, dtype=np.float64))
    n = chart.dim
    div_h = np.stack(
        [j.value for j in fr.div_tensor2(hessian_field(chart, phi), 0)], axis=-1
    )
    gphi = np.stack([j.value for j in fr.grad(phi, 0)], axis=-1)
    ric_flat = np.einsum("...ij,...j->...i", fr.ricci_values(), gphi)
    dlap = fr.partials_of_jet(fr.laplacian(phi, 1))
    w = div_h - ric_flat - dlap
    ginv = fr.metric_inv_values()
    return np.sqrt(np.maximum(np.einsum("...ij,...i,...j->...", ginv, w, w), 0.0))


def div_outer_grad_residual(chart: Chart, phi: ScalarField, p):
    """g-norm of div(dphi (x) dphi) - lap phi dphi - hess phi(grad phi, .)."""
    fr = ChartFrame(chart, np.asarray(p, dtype=np.float64))
    div_t = np.stack(
        [j.value for j in fr.div_tensor2(outer_grad_field(chart, phi), 0)], axis=-1
    )
    lap = fr.laplacian(phi, 0).value
    dphi = fr.partials_of_jet(fr.field_jet(phi, 1))
    gphi = np.stack([j.value for j in fr.grad(phi, 0)], axis=-1)
    hess = fr.hessian_values(phi)
    conv_flat = np.einsum("...jk,...k->...j", hess, gphi)
    w = div_t - lap[..., None] * dphi - conv_flat
    ginv = fr.metric_inv_values()
    return np.sqrt(np.maximum(np.einsum("...ij,...i,...j->...", ginv, w, w), 0.0))


def bochner_residual(chart: Chart, phi: ScalarField, p):
    """(1/2) lap|grad phi|^2 = |hess phi|^2 + <grad phi, grad lap phi> + Ric(grad phi, grad phi)."""
    fr = ChartFrame(chart, np.asarray(p, dtype=np.float64))
    g = fr.metric_values()
    ginv = np.linalg.inv(g)
    lhs = 0.5 * fr.laplacian_of_jet(fr.grad_norm2(phi, 2))
    hess = fr.hessian_values(phi)
    hess2 = tensor2_norm2_g(g, ginv, hess)
    gphi = np.stack([j.value for j in fr.grad(phi, 0)], axis=-1)
    dlap = fr.partials_of_jet(fr.laplacian(phi, 1))
    ric_ff = np.einsum("...ij,...i,...j->...", fr.ricci_values(), gphi, gphi)
    rhs = hess2 + np.einsum("...i,...i->...", gphi, dlap) + ric_ff
    return np.abs(lhs - rhs)


def conformal_cubic_divergence_residual(chart: Chart, X: VectorField, p):
    """div(|X|^2 X) = ((n+2)/n)|X|^2 div X, valid for conformal X."""
    fr = ChartFrame(chart, np.asarray(p, dtype=np.float64))
    n = chart.dim

    def w_jets(q, order):
        f2 = ChartFrame(chart, q)
        gj = f2.metric(order)
        xj = f2.vector_jets(X, order)
        norm2 = None
        for i in range(n):
            for j in range(n):
                term = gj[i, j] * xj[i] * xj[j]
                norm2 = term if norm2 is None else norm2 + term
        return [norm2 * x for x in xj]

    W = VectorField(n, w_jets, "|X|^2 X")
    lhs = fr.div_vector(W, 0).value
    g = fr.metric_values()
    xv = np.stack([j.value for j in fr.vector_jets(X, 0)], axis=-1)
    rhs = (n + 2) / n * dot_g(g, xv, xv) * fr.div_vector(X, 0).value
    return np.abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Einstein-base profile and scan-style checks
# ---------------------------------------------------------------------------


@dataclass
class EinsteinHessianProfile:
    """Sample-level check of the conformal-Hessian structure on an Einstein base."""

    c_estimate: float
    c_spread: float
    hessian_residual: float
    lap_residual: float
    gradlam_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.hessian_residual, self.lap_residual, self.gradlam_residual)


def einstein_hessian_profile(s: QemStructure, points) -> EinsteinHessianProfile:
    """On an Einstein base with n >= 3 and finite m, u satisfies
    hess u = (-R/(n(n-1)) u + c/m) g with one constant c, and with it
    lap u = (R/m)u - (n/m) lam u and grad(lam u) = R(m+n-1)/(n(n-1)) grad u.
    """
    n = s.chart.dim
    if n < 3:
        raise ValueError("the Einstein Hessian profile needs dim >= 3")
    if not s.m_finite:
        raise ValueError("the Einstein Hessian profile needs finite m")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    fr = StructureFrame(s, points)
    u = s.require_u()
    g = fr.metric_values()
    rr = fr.scalar_curvature_value()
    u_val = fr.u_jet(0).value
    lap_u = fr.laplacian(u, 0).value

    c_per_point = s.m * (lap_u / n + rr * u_val / (n * (n - 1)))
    c = float(c_per_point.flat[0])
    c_spread = float(np.max(c_per_point) - np.min(c_per_point))

    hess_u = fr.hessian_values(u)
    target = (-rr / (n * (n - 1)) * u_val + c / s.m)[..., None, None] * g
    hessian_residual = float(np.max(np.abs(hess_u - target)))

    lam = fr.lam_jet(0).value
    lap_residual = float(np.max(np.abs(lap_u - (rr / s.m) * u_val + (n / s.m) * lam * u_val)))

    lam_u = s.lam * u
    dlamu = fr.partials_of_jet(fr.field_jet(lam_u, 1))
    du = fr.partials_of_jet(fr.u_jet(1))
    w = dlamu - (rr * (s.m + n - 1) / (n * (n - 1)))[..., None] * du
    ginv = np.linalg.inv(g)
    gradlam_residual = float(
        np.max(np.sqrt(np.maximum(np.einsum("...ij,...i,...j->...", ginv, w, w), 0.0)))
    )
    return EinsteinHessianProfile(c, c_spread, hessian_residual, lap_residual, gradlam_residual)


@dataclass
class SignScan:
    minimum: float
    maximum: float
    sign_changes: bool


def sign_scan_r_minus_n_lambda(s: QemStructure, points) -> SignScan:
    """Range of R - n lambda over the sample; a nontrivial compact structure
    must see both signs."""
    fr = StructureFrame(s, np.asarray(points, dtype=np.float64))
    vals = fr.scalar_curvature_value() - s.chart.dim * fr.lam_jet(0).value
    lo, hi = float(np.min(vals)), float(np.max(vals))
    return SignScan(lo, hi, lo < 0.0 < hi)


def count_sample_critical_points(s: QemStructure, points, tol: float = 1e-8) -> int:
    """Sample points where |grad u| < tol (reported, never asserted globally)."""
    fr = StructureFrame(s, np.asarray(points, dtype=np.float64))
    g = fr.metric_values()
    du = np.stack([j.value for j in fr.grad(s.require_u(), 0)], axis=-1)
    return int(np.sum(norm_g(g, du) < tol))


# ---------------------------------------------------------------------------
# catalog and suite runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityInfo:
    identity_id: str
    formula: str
    orders: dict  # required jet orders, keys "g", "f", "lambda"
    order_class: int  # 2, 3 or 4; selects the tolerance class
    kind: str  # "pointwise" | "profile"
    needs_finite_m: bool = False
    needs_einstein_base: bool = False
    min_dim: int = 2
    runner: Optional[Callable] = None


def _with_potential(fn):
    return lambda s, p: fn(s.chart, s.f, p)


CATALOG: tuple[IdentityInfo, ...] = (
    IdentityInfo(
        "defining_equation",
        "Ric + ∇²f − (1/m)df⊗df = λg",
        {"g": 2, "f": 2, "lambda": 0},
        2,
        "pointwise",
        runner=defining_residual_sup,
    ),
    IdentityInfo(
        "traceless_defining",
        "∇²f − (Δf/n)g = (1/m)(df⊗df − (|∇f|²/n)g) − (Ric − (R/n)g)",
        {"g": 2, "f": 2, "lambda": 0},
        2,
        "pointwise",
        runner=traceless_residual_sup,
    ),
    IdentityInfo(
        "radial_identity",
        "Ric(∇f,∇f) + ⟨∇_∇f∇f,∇f⟩ = (1/m)|∇f|⁴ + λ|∇f|²",
        {"g": 2, "f": 2, "lambda": 0},
        3,
        "pointwise",
        runner=radial_residual,
    ),
    IdentityInfo(
        "trace_gradient",
        "⟨∇f,∇R⟩ + ⟨∇f,∇Δf⟩ = (1/m)⟨∇f,∇|∇f|²⟩ + n⟨∇λ,∇f⟩",
        {"g": 3, "f": 3, "lambda": 1},
        3,
        "pointwise",
        runner=trace_gradient_residual,
    ),
    IdentityInfo(
        "u_transform",
        "∇²f − (1/m)df⊗df = −(m/u)∇²u",
        {"g": 1, "f": 2, "lambda": 0},
        3,
        "pointwise",
        needs_finite_m=True,
        runner=u_transform_residual_sup,
    ),
    IdentityInfo(
        "u_laplacian",
        "Δu = (u/m)(R − nλ)",
        {"g": 2, "f": 2, "lambda": 0},
        2,
        "pointwise",
        needs_finite_m=True,
        runner=u_laplacian_residual,
    ),
    IdentityInfo(
        "trace_divergence",
        "m·div∇f = |∇f|² + m(nλ − R)",
        {"g": 2, "f": 2, "lambda": 0},
        3,
        "pointwise",
        needs_finite_m=True,
        runner=trace_divergence_residual,
    ),
    IdentityInfo(
        "gradient_norm_laplacian",
        "½Δ|∇f|² = |∇²f|² − Ric(∇f,∇f) + (2/m)|∇f|²Δf − (n−2)⟨∇λ,∇f⟩",
        {"g": 3, "f": 3, "lambda": 1},
        3,
        "pointwise",
        runner=gradient_norm_laplacian_residual,
    ),
    IdentityInfo(
        "curvature_gradient",
        "½∇R = ((m−1)/m)Ric(∇f) + (1/m)(R−(n−1)λ)∇f + (n−1)∇λ",
        {"g": 3, "f": 2, "lambda": 1},
        3,
        "pointwise",
        runner=curvature_gradient_residual,
    ),
    IdentityInfo(
        "hamilton_gradient",
        "∇(R + |∇f|² − 2(n−1)λ) = 2λ∇f + (2/m){∇_∇f∇f + (|∇f|²−Δf)∇f}",
        {"g": 3, "f": 3, "lambda": 1},
        3,
        "pointwise",
        runner=hamilton_gradient_residual,
    ),
    IdentityInfo(
        "curvature_laplacian",
        "½ΔR = −|∇²f−(Δf/n)g|² − ((m+n)/nm)(Δf)² − (n/2)⟨∇f,∇λ⟩ + ⟨∇f,∇R⟩"
        " + ((m−2)/2m)⟨∇f,∇Δf⟩ + (1/m)div(∇_∇f∇f) + (n−1)Δλ + λΔf",
        {"g": 4, "f": 3, "lambda": 2},
        4,
        "pointwise",
        needs_finite_m=True,
        runner=curvature_laplacian_residual,
    ),
    IdentityInfo(
        "u_conformality",
        "½L_∇u g = (Δu/n)g on an Einstein base",
        {"g": 2, "f": 2, "lambda": 0},
        3,
        "pointwise",
        needs_finite_m=True,
        needs_einstein_base=True,
        runner=u_conformality_residual,
    ),
    IdentityInfo(
        "contracted_bianchi",
        "∇R = 2 div Ric",
        {"g": 3, "f": 0, "lambda": 0},
        3,
        "pointwise",
        runner=lambda s, p: contracted_bianchi_residual(s.chart, p),
    ),
    IdentityInfo(
        "div_hessian",
        "div ∇²f = Ric(∇f) + ∇Δf",
        {"g": 3, "f": 3, "lambda": 0},
        3,
        "pointwise",
        runner=_with_potential(div_hessian_residual),
    ),
    IdentityInfo(
        "div_outer_grad",
        "div(df⊗df) = Δf·df + ∇²f(∇f,·)",
        {"g": 2, "f": 2, "lambda": 0},
        3,
        "pointwise",
        runner=_with_potential(div_outer_grad_residual),
    ),
    IdentityInfo(
        "bochner",
        "½Δ|∇f|² = |∇²f|² + ⟨∇f,∇Δf⟩ + Ric(∇f,∇f)",
        {"g": 3, "f": 3, "lambda": 0},
        3,
        "pointwise",
        runner=_with_potential(bochner_residual),
    ),
    IdentityInfo(
        "lie_divergence",
        "div(L_X g)(X) = ½Δ|X|² − |∇X|² + Ric(X,X) + ⟨X,∇div X⟩  (X = ∇f)",
        {"g": 3, "f": 3, "lambda": 0},
        3,
        "pointwise",
        runner=lambda s, p: lie_divergence_residual(
            s.chart, grad_field(s.chart, s.f), p
        ),
    ),
    IdentityInfo(
        "einstein_hessian",
        "∇²u = (−R/(n(n−1))·u + c/m)g;  Δu = (R/m)u − (n/m)λu;"
        "  ∇(λu) = R(m+n−1)/(n(n−1))·∇u",
        {"g": 2, "f": 2, "lambda": 1},
        2,
        "profile",
        needs_finite_m=True,
        needs_einstein_base=True,
        min_dim=3,
        runner=einstein_hessian_profile,
    ),
)

CATALOG_BY_ID = {info.identity_id: info for info in CATALOG}


def evaluate_identity(
    s: QemStructure, identity_id: str, p, tolerance: float
) -> IdentityResult:
    """One catalog identity at one point, packaged with its metadata."""
    info = CATALOG_BY_ID[identity_id]
    if info.kind != "pointwise":
        raise ValueError(f"identity {identity_id!r} is sample-based, not pointwise")
    if not applicable(info, s):
        raise ValueError(f"identity {identity_id!r} does not apply to {s.label!r}")
    p = np.asarray(p, dtype=np.float64)
    residual = float(info.runner(s, p))
    raw = None
    if identity_id == "defining_equation":
        raw = StructureFrame(s, p).defining_values()
    elif identity_id == "traceless_defining":
        raw = StructureFrame(s, p).traceless_values()
    elif identity_id == "u_transform":
        raw = u_transform_values(s, p)
    return IdentityResult(
        identity_id=identity_id,
        point=p,
        residual=residual,
        raw=raw,
        required_jet_order=max(info.orders.values()),
        tolerance_used=tolerance,
    )


def applicable(info: IdentityInfo, s: QemStructure) -> bool:
    if info.needs_finite_m and not s.m_finite:
        return False
    if info.needs_einstein_base and s.chart.family is None:
        return False
    if s.chart.dim < info.min_dim:
        return False
    return True


@dataclass
class SuiteEntry:
    identity_id: str
    formula: str
    n_points: int
    max_residual: float
    mean_residual: float
    tolerance: float
    passed: bool


def run_pointwise_suite(
    s: QemStructure,
    points,
    tolerances: dict[int, float],
    ids: Optional[list[str]] = None,
) -> list[SuiteEntry]:
    """Evaluate every applicable catalog identity over the sample points."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    selected = list(CATALOG) if ids is None else [CATALOG_BY_ID[i] for i in ids]
    out = []
    for info in selected:
        if not applicable(info, s):
            continue
        tol = tolerances[info.order_class]
        if info.kind == "profile":
            prof = info.runner(s, points)
            res_max = max(prof.max_residual, prof.c_spread)
            res_mean = res_max
        else:
            res = np.asarray(info.runner(s, points), dtype=np.float64)
            res_max = float(np.max(res))
            res_mean = float(np.mean(res))
        out.append(
            SuiteEntry(
                identity_id=info.identity_id,
                formula=info.formula,
                n_points=int(points.shape[0]),
                max_residual=res_max,
                mean_residual=res_mean,
                tolerance=tol,
                passed=res_max < tol,
            )
        )
    return out
