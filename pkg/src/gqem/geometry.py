"""Coordinate charts, jet-evaluable fields, and Levi-Civita differential operators.

Everything is evaluated pointwise from jets of the metric and of the fields.
Derived quantities consume jet orders explicitly: Christoffel symbols need one
metric order, the curvature tensor two, the gradient of the scalar curvature
three, and its Laplacian four. Requests past the supported truncation order
raise an `OrderCapabilityError` instead of silently losing accuracy.

Index conventions (components of a `TensorValue` and of jet-valued tensors):
contravariant axes come first, covariant axes after. The curvature tensor is
stored as R^i_{jkl} with Ric_{jl} = R^i_{jil}, which makes the round unit
sphere satisfy Ric = (n-1) g and R = n(n-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets
from .jets import Jet, OrderCapabilityError, JetDomainError, MAX_ORDER, seed_point


class DegenerateMetricError(ArithmeticError):
    """The metric is numerically singular at an evaluation point."""


# ---------------------------------------------------------------------------
# charts and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Chart:
    """A coordinate domain with a jet-evaluable metric field.

    metric_fn maps a tuple of coordinate jets to an (n, n) object array of
    jets g_ij. domain_fn is a vectorized predicate on coordinate points.
    embedding_fn (optional) maps coordinate jets to ambient-component jets
    and is what height functions and chart-to-chart comparisons go through.
    """

    dim: int
    metric_fn: Callable
    domain_fn: Callable
    label: str
    chart_kind: str = "generic"
    family: Optional[str] = None
    compact: bool = False
    sample_lo: Optional[np.ndarray] = None
    sample_hi: Optional[np.ndarray] = None
    embedding_fn: Optional[Callable] = None
    ambient_signature: Optional[tuple] = None

    def metric_jets(self, p, order: int) -> np.ndarray:
        return np.asarray(self.metric_fn(seed_point(p, order)), dtype=object)

    def in_domain(self, p) -> np.ndarray:
        return np.asarray(self.domain_fn(np.asarray(p, dtype=np.float64)))

    def embedding_jets(self, p, order: int):
        if self.embedding_fn is None:
            raise ValueError(f"chart {self.label!r} has no embedding")
        return self.embedding_fn(seed_point(p, order))


class ScalarField:
    """A scalar function of chart coordinates, evaluable to jets of any order <= 4."""

    def __init__(self, dim: int, jet_fn: Callable, label: str = ""):
        self.dim = dim
        self._jet_fn = jet_fn
        self.label = label

    @staticmethod
    def from_coords(dim: int, fn: Callable, label: str = "") -> "ScalarField":
        """Build a field from a formula in coordinate jets."""
        return ScalarField(dim, lambda p, order: fn(*seed_point(p, order)), label)

    @staticmethod
    def constant(dim: int, c: float, label: str = "") -> "ScalarField":
        return ScalarField(
            dim,
            lambda p, order: Jet.constant(
                np.full(np.shape(p)[:-1], float(c)), dim, order
            ),
            label or f"{c}",
        )

    def jet(self, p, order: int) -> Jet:
        if order > MAX_ORDER:
            raise OrderCapabilityError(
                f"field {self.label!r} requested at jet order {order} > max {MAX_ORDER}"
            )
        return self._jet_fn(p, order)

    def __call__(self, p):
        return self.jet(p, 0).value

    def _combine(self, other, op, sym):
        if isinstance(other, ScalarField):
            fn = lambda p, order: op(self.jet(p, order), other.jet(p, order))
            label = f"({self.label}{sym}{other.label})"
        else:
            fn = lambda p, order: op(self.jet(p, order), other)
            label = f"({self.label}{sym}{other})"
        return ScalarField(self.dim, fn, label)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a, "-")

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, lambda a, b: a / b, "/")

    def __rtruediv__(self, other):
        return self._combine(other, lambda a, b: b / a, "\\")

    def __neg__(self):
        return ScalarField(self.dim, lambda p, order: -self.jet(p, order),
                           f"(-{self.label})")


class VectorField:
    """A contravariant vector field; jet(p, order) returns a list of component jets."""

    def __init__(self, dim: int, jet_fn: Callable, label: str = ""):
        self.dim = dim
        self._jet_fn = jet_fn
        self.label = label

    @staticmethod
    def from_coords(dim: int, fn: Callable, label: str = "") -> "VectorField":
        return VectorField(dim, lambda p, order: list(fn(*seed_point(p, order))), label)

    def jet(self, p, order: int) -> list:
        if order > MAX_ORDER:
            raise OrderCapabilityError(
                f"vector field {self.label!r} requested at jet order {order} > max {MAX_ORDER}"
            )
        return self._jet_fn(p, order)

    def values(self, p) -> np.ndarray:
        return np.stack([j.value for j in self.jet(p, 0)], axis=-1)


class Tensor2Field:
    """A (0,2)-tensor field; jet(p, order) returns an (n, n) object array of jets."""

    def __init__(self, dim: int, jet_fn: Callable, label: str = ""):
        self.dim = dim
        self._jet_fn = jet_fn
        self.label = label

    def jet(self, p, order: int) -> np.ndarray:
        if order > MAX_ORDER:
            raise OrderCapabilityError(
                f"tensor field {self.label!r} requested at jet order {order} > max {MAX_ORDER}"
            )
        return self._jet_fn(p, order)

    def values(self, p) -> np.ndarray:
        comp = self.jet(p, 0)
        n = self.dim
        return np.stack(
            [np.stack([comp[i, j].value for j in range(n)], axis=-1) for i in range(n)],
            axis=-2,
        )


# ---------------------------------------------------------------------------
# tensor values at a point
# ---------------------------------------------------------------------------


@dataclass
class TensorValue:
    """Dense tensor components at a point with valence bookkeeping.

    Component axes: `con` contravariant axes first, then `cov` covariant ones.
    """

    components: np.ndarray
    con: int
    cov: int
    point: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=np.float64)
        expected = self.con + self.cov
        if self.components.ndim != expected:
            raise ValueError(
                f"components have rank {self.components.ndim}, valence says {expected}"
            )

    @property
    def rank(self) -> int:
        return self.con + self.cov

    def same_valence(self, other: "TensorValue") -> bool:
        return self.con == other.con and self.cov == other.cov


def outer(a: TensorValue, b: TensorValue) -> TensorValue:
    """Tensor product, reordered so contravariant axes stay in front."""
    comp = np.multiply.outer(a.components, b.components)
    # axes: a.con, a.cov, b.con, b.cov -> a.con, b.con, a.cov, b.cov
    perm = (
        list(range(a.con))
        + [a.rank + k for k in range(b.con)]
        + [a.con + k for k in range(a.cov)]
        + [a.rank + b.con + k for k in range(b.cov)]
    )
    return TensorValue(np.transpose(comp, perm), a.con + b.con, a.cov + b.cov, a.point)


def _lower_all(T: TensorValue, g: np.ndarray) -> np.ndarray:
    comp = T.components
    for ax in range(T.con):
        comp = np.moveaxis(np.tensordot(g, comp, axes=(1, ax)), 0, ax)
    return comp


def _raise_all(T: TensorValue, ginv: np.ndarray) -> np.ndarray:
    comp = T.components
    for ax in range(T.con, T.rank):
        comp = np.moveaxis(np.tensordot(ginv, comp, axes=(1, ax)), 0, ax)
    return comp


def inner(chart: Chart, a: TensorValue, b: TensorValue, p) -> float:
    """Full metric contraction of two tensors of identical valence."""
    if not a.same_valence(b):
        raise ValueError(
            f"valence mismatch: ({a.con},{a.cov}) vs ({b.con},{b.cov})"
        )
    g = metric_values(chart, p)
    ginv = np.linalg.inv(g)
    low = _lower_all(a, g)
    high = _raise_all(b, ginv)
    return float(np.sum(low * high))


def tensor_norm2(chart: Chart, t: TensorValue, p=None) -> float:
    """Squared g-norm with every index contracted against g or its inverse."""
    return inner(chart, t, t, t.point if p is None else p)


# ---------------------------------------------------------------------------
# pointwise evaluation frames
# ---------------------------------------------------------------------------


def _trunc_tree(obj, order: int):
    if isinstance(obj, Jet):
        return obj.truncated(order) if obj.order > order else obj
    if isinstance(obj, np.ndarray) and obj.dtype == object:
        out = np.empty(obj.shape, dtype=object)
        for idx in np.ndindex(obj.shape):
            out[idx] = _trunc_tree(obj[idx], order)
        return out
    if isinstance(obj, (list, tuple)):
        return type(obj)(_trunc_tree(x, order) for x in obj)
    return obj


def invert_jet_matrix(g: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite jet matrix (Gauss-Jordan, no pivoting)."""
    n = g.shape[0]
    a = [[g[i, j] for j in range(n)] for i in range(n)]
    proto = g[0, 0]
    eye = [[Jet.constant(np.full(proto.batch_shape, 1.0 if i == j else 0.0),
                         proto.dim, proto.order) for j in range(n)] for i in range(n)]
    for col in range(n):
        try:
            inv_piv = jets.reciprocal(a[col][col])
        except JetDomainError as exc:
            raise DegenerateMetricError(f"singular metric: {exc}") from exc
        for j in range(n):
            a[col][j] = a[col][j] * inv_piv
            eye[col][j] = eye[col][j] * inv_piv
        for row in range(n):
            if row == col:
                continue
            factor = a[row][col]
            for j in range(n):
                a[row][j] = a[row][j] - factor * a[col][j]
                eye[row][j] = eye[row][j] - factor * eye[col][j]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = eye[i][j]
    return out


class ChartFrame:
    """All jet-level geometric quantities of one chart at one (batch of) point(s).

    Results are memoized per requested order; a cached higher-order result is
    reused by exact truncation.
    """

    def __init__(self, chart: Chart, p):
        self.chart = chart
        self.p = np.asarray(p, dtype=np.float64)
        if self.p.shape[-1] != chart.dim:
            raise ValueError(
                f"point of dimension {self.p.shape[-1]} on chart of dim {chart.dim}"
            )
        self.n = chart.dim
        self._cache: dict = {}

    def _memo(self, key, order: int, build):
        hit = self._cache.get(key)
        if hit is not None and hit[0] >= order:
            return _trunc_tree(hit[1], order)
        val = build(order)
        self._cache[key] = (order, val)
        return val

    # -- metric and curvature ------------------------------------------

    def metric(self, order: int) -> np.ndarray:
        return self._memo("g", order, lambda k: self.chart.metric_jets(self.p, k))

    def metric_inv(self, order: int) -> np.ndarray:
        return self._memo("ginv", order, lambda k: invert_jet_matrix(self.metric(k)))

    def gamma(self, order: int) -> np.ndarray:
        """Christoffel symbols Gamma^k_{ij} as jets of the given order."""

        def build(k):
            n = self.n
            g = self.metric(k + 1)
            gi = self.metric_inv(k)
            dg = [[[g[a, b].derive(c) for b in range(n)] for a in range(n)]
                  for c in range(n)]  # dg[c][a][b] = d_c g_ab
            out = np.empty((n, n, n), dtype=object)
            for i in range(n):
                for j in range(i, n):
                    brackets = [
                        dg[i][j][l] + dg[j][i][l] - dg[l][i][j] for l in range(n)
                    ]
                    for kk in range(n):
                        acc = gi[kk, 0] * brackets[0]
                        for l in range(1, n):
                            acc = acc + gi[kk, l] * brackets[l]
                        out[kk, i, j] = acc * 0.5
                        out[kk, j, i] = out[kk, i, j]
            return out

        return self._memo("gamma", order, build)

    def riemann(self, order: int) -> np.ndarray:
        """Curvature tensor R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma.Gamma."""

        def build(kord):
            n = self.n
            gam = self.gamma(kord + 1)
            gam0 = _trunc_tree(gam, kord)
            out = np.empty((n, n, n, n), dtype=object)
            zero = Jet.constant(np.zeros(gam[0, 0, 0].batch_shape), n, kord)
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        out[i, j, k, k] = zero
                        for l in range(k + 1, n):
                            term = gam[i, l, j].derive(k) - gam[i, k, j].derive(l)
                            for mm in range(n):
                                term = term + gam0[i, k, mm] * gam0[mm, l, j]
                                term = term - gam0[i, l, mm] * gam0[mm, k, j]
                            out[i, j, k, l] = term
                            out[i, j, l, k] = -term
            return out

        return self._memo("riemann", order, build)

    def ricci(self, order: int) -> np.ndarray:
        def build(k):
            n = self.n
            rm = self.riemann(k)
            out = np.empty((n, n), dtype=object)
            for j in range(n):
                for l in range(j, n):
                    acc = rm[0, j, 0, l]
                    for i in range(1, n):
                        acc = acc + rm[i, j, i, l]
                    out[j, l] = acc
                    out[l, j] = acc
            return out

        return self._memo("ricci", order, build)

    def scalar_curvature_jet(self, order: int) -> Jet:
        def build(k):
            gi = self.metric_inv(k)
            ric = self.ricci(k)
            n = self.n
            acc = gi[0, 0] * ric[0, 0]
            for i in range(n):
                for j in range(n):
                    if i == 0 and j == 0:
                        continue
                    acc = acc + gi[i, j] * ric[i, j]
            return acc

        return self._memo("scal", order, build)

    # -- fields ----------------------------------------------------------

    def field_jet(self, phi: ScalarField, order: int) -> Jet:
        key = ("sf", id(phi), phi)
        return self._memo(key, order, lambda k: phi.jet(self.p, k))

    def vector_jets(self, X: VectorField, order: int) -> list:
        key = ("vf", id(X), X)
        return self._memo(key, order, lambda k: X.jet(self.p, k))

    def grad(self, phi: ScalarField, order: int) -> list:
        """Contravariant gradient components as jets."""
        key = ("grad", id(phi), phi)

        def build(k):
            n = self.n
            gi = self.metric_inv(k)
            df = [self.field_jet(phi, k + 1).derive(j) for j in range(n)]
            return [
                _sum_jets([gi[i, j] * df[j] for j in range(n)]) for i in range(n)
            ]

        return self._memo(key, order, build)

    def hessian(self, phi: ScalarField, order: int) -> np.ndarray:
        key = ("hess", id(phi), phi)

        def build(k):
            n = self.n
            fj = self.field_jet(phi, k + 2)
            d1 = [fj.derive(i).truncated(k) for i in range(n)]
            gam = self.gamma(k)
            out = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(i, n):
                    acc = fj.derive(i).derive(j)
                    for kk in range(n):
                        acc = acc - gam[kk, i, j] * d1[kk]
                    out[i, j] = acc
                    out[j, i] = acc
            return out

        return self._memo(key, order, build)

    def laplacian(self, phi: ScalarField, order: int) -> Jet:
        key = ("lap", id(phi), phi)

        def build(k):
            gi = self.metric_inv(k)
            h = self.hessian(phi, k)
            n = self.n
            return _sum_jets([gi[i, j] * h[i, j] for i in range(n) for j in range(n)])

        return self._memo(key, order, build)

    def grad_norm2(self, phi: ScalarField, order: int) -> Jet:
        key = ("gn2", id(phi), phi)

        def build(k):
            n = self.n
            gi = self.metric_inv(k)
            df = [self.field_jet(phi, k + 1).derive(j) for j in range(n)]
            return _sum_jets(
                [gi[i, j] * df[i] * df[j] for i in range(n) for j in range(n)]
            )

        return self._memo(key, order, build)

    def covariant_vector(self, X: VectorField, order: int) -> np.ndarray:
        """nabla X as jets, component [i, j] = nabla_j X^i."""
        key = ("covv", id(X), X)

        def build(k):
            n = self.n
            xj = self.vector_jets(X, k + 1)
            x0 = [x.truncated(k) for x in xj]
            gam = self.gamma(k)
            out = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    acc = xj[i].derive(j)
                    for kk in range(n):
                        acc = acc + gam[i, j, kk] * x0[kk]
                    out[i, j] = acc
            return out

        return self._memo(key, order, build)

    def div_vector(self, X: VectorField, order: int) -> Jet:
        cov = self.covariant_vector(X, order)
        return _sum_jets([cov[i, i] for i in range(self.n)])

    def lie_metric(self, X: VectorField, order: int) -> np.ndarray:
        """(L_X g)_{ij} as jets."""
        key = ("lie", id(X), X)

        def build(k):
            n = self.n
            g = self.metric(k + 1)
            g0 = _trunc_tree(g, k)
            xj = self.vector_jets(X, k + 1)
            x0 = [x.truncated(k) for x in xj]
            out = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(i, n):
                    acc = _sum_jets([x0[kk] * g[i, j].derive(kk) for kk in range(n)])
                    for kk in range(n):
                        acc = acc + g0[kk, j] * xj[kk].derive(i)
                        acc = acc + g0[i, kk] * xj[kk].derive(j)
                    out[i, j] = acc
                    out[j, i] = acc
            return out

        return self._memo(key, order, build)

    def div_tensor2(self, T: Tensor2Field, order: int) -> list:
        """Divergence (div T)_j = g^{ik} nabla_i T_{kj} of a (0,2)-tensor field, as jets."""
        key = ("divT", id(T), T)

        def build(k):
            n = self.n
            tj = T.jet(self.p, k + 1)
            t0 = _trunc_tree(tj, k)
            gam = self.gamma(k)
            gi = self.metric_inv(k)
            out = []
            for j in range(n):
                terms = []
                for i in range(n):
                    for kk in range(n):
                        cov = tj[kk, j].derive(i)
                        for l in range(n):
                            cov = cov - gam[l, i, kk] * t0[l, j]
                            cov = cov - gam[l, i, j] * t0[kk, l]
                        terms.append(gi[i, kk] * cov)
                out.append(_sum_jets(terms))
            return out

        return self._memo(key, order, build)

    # -- operators applied to already-computed jets ------------------------

    def laplacian_of_jet(self, sjet: Jet):
        """Laplace-Beltrami of a scalar given as a jet of order >= 2 at this point."""
        n = self.n
        gi = self.metric_inv_values()
        gam = self.gamma(0)
        d1 = [sjet.derive(k).value for k in range(n)]
        out = 0.0
        for i in range(n):
            for j in range(n):
                term = sjet.derive(i).derive(j).value
                for k in range(n):
                    term = term - gam[k, i, j].value * d1[k]
                out = out + gi[..., i, j] * term
        return out

    def grad_values_of_jet(self, sjet: Jet) -> np.ndarray:
        """Contravariant gradient values of a scalar given as a jet of order >= 1."""
        gi = self.metric_inv_values()
        d1 = np.stack([sjet.derive(k).value for k in range(self.n)], axis=-1)
        return np.einsum("...ij,...j->...i", gi, d1)

    def partials_of_jet(self, sjet: Jet) -> np.ndarray:
        """Covariant (coordinate) first partials of a scalar jet of order >= 1."""
        return np.stack([sjet.derive(k).value for k in range(self.n)], axis=-1)

    # -- value-level conveniences (order-0 extraction, batch aware) -------

    def metric_values(self) -> np.ndarray:
        return _stack2(self.metric(0))

    def metric_inv_values(self) -> np.ndarray:
        return _stack2(self.metric_inv(0))

    def ricci_values(self) -> np.ndarray:
        return _stack2(self.ricci(0))

    def scalar_curvature_value(self):
        return self.scalar_curvature_jet(0).value

    def grad_values(self, phi: ScalarField) -> np.ndarray:
        return np.stack([j.value for j in self.grad(phi, 0)], axis=-1)

    def hessian_values(self, phi: ScalarField) -> np.ndarray:
        return _stack2(self.hessian(phi, 0))


def _sum_jets(js):
    acc = js[0]
    for j in js[1:]:
        acc = acc + j
    return acc


def _stack2(obj_mat: np.ndarray) -> np.ndarray:
    n = obj_mat.shape[0]
    return np.stack(
        [np.stack([obj_mat[i, j].value for j in range(n)], axis=-1) for i in range(n)],
        axis=-2,
    )


# ---------------------------------------------------------------------------
# batched metric algebra on plain value arrays
# ---------------------------------------------------------------------------


def dot_g(g: np.ndarray, a: np.ndarray, b: np.ndarray):
    """<a, b>_g for contravariant vectors; batch axes lead."""
    return np.einsum("...ij,...i,...j->...", g, a, b)


def norm_g(g: np.ndarray, a: np.ndarray):
    return np.sqrt(np.maximum(dot_g(g, a, a), 0.0))


def tensor2_norm2_g(g: np.ndarray, ginv: np.ndarray, t: np.ndarray):
    """|T|^2_g for a (0,2) tensor of values; batch axes lead."""
    return np.einsum("...ik,...jl,...ij,...kl->...", ginv, ginv, t, t)


# ---------------------------------------------------------------------------
# public pointwise operators
# ---------------------------------------------------------------------------


def _scalar_point(chart: Chart, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (chart.dim,):
        raise ValueError(f"expected a single point of shape ({chart.dim},)")
    return p


def metric_values(chart: Chart, p) -> np.ndarray:
    return _stack2(chart.metric_jets(p, 0))


def sqrt_det_metric(chart: Chart, p):
    g = ChartFrame(chart, p).metric_values()
    det = np.linalg.det(g)
    if np.any(det <= 0.0):
        raise DegenerateMetricError("metric determinant is not positive")
    return np.sqrt(det)


def check_metric_spd(chart: Chart, points) -> float:
    """Smallest metric eigenvalue over the sample; raises if not positive."""
    g = ChartFrame(chart, points).metric_values()
    sym_gap = float(np.max(np.abs(g - np.swapaxes(g, -1, -2))))
    if sym_gap > 1e-12:
        raise DegenerateMetricError(f"metric not symmetric (gap {sym_gap:.2e})")
    smallest = float(np.min(np.linalg.eigvalsh(g)))
    if smallest <= 0.0:
        raise DegenerateMetricError(
            f"metric not positive definite (smallest eigenvalue {smallest:.3e})"
        )
    return smallest


def christoffel(chart: Chart, p) -> TensorValue:
    p = _scalar_point(chart, p)
    frame = ChartFrame(chart, p)
    gam = frame.gamma(0)
    n = chart.dim
    comp = np.array(
        [[[gam[k, i, j].value for j in range(n)] for i in range(n)] for k in range(n)]
    )
    return TensorValue(comp, con=1, cov=2, point=p)


def riemann(chart: Chart, p) -> TensorValue:
    p = _scalar_point(chart, p)
    rm = ChartFrame(chart, p).riemann(0)
    n = chart.dim
    comp = np.empty((n, n, n, n))
    for idx in np.ndindex(n, n, n, n):
        comp[idx] = rm[idx].value
    return TensorValue(comp, con=1, cov=3, point=p)


def ricci(chart: Chart, p) -> TensorValue:
    p = _scalar_point(chart, p)
    return TensorValue(ChartFrame(chart, p).ricci_values(), con=0, cov=2, point=p)


def scalar_curvature(chart: Chart, p) -> float:
    p = _scalar_point(chart, p)
    return float(ChartFrame(chart, p).scalar_curvature_value())


def gradient(chart: Chart, phi: ScalarField, p) -> TensorValue:
    p = _scalar_point(chart, p)
    return TensorValue(ChartFrame(chart, p).grad_values(phi), con=1, cov=0, point=p)


def hessian(chart: Chart, phi: ScalarField, p) -> TensorValue:
    p = _scalar_point(chart, p)
    return TensorValue(ChartFrame(chart, p).hessian_values(phi), con=0, cov=2, point=p)


def laplacian(chart: Chart, phi: ScalarField, p) -> float:
    p = _scalar_point(chart, p)
    return float(ChartFrame(chart, p).laplacian(phi, 0).value)


def covariant_derivative_vector(chart: Chart, X: VectorField, p) -> TensorValue:
    p = _scalar_point(chart, p)
    cov = ChartFrame(chart, p).covariant_vector(X, 0)
    n = chart.dim
    comp = np.array([[cov[i, j].value for j in range(n)] for i in range(n)])
    return TensorValue(comp, con=1, cov=1, point=p)


def directional(chart: Chart, X: VectorField, Y: VectorField, p) -> TensorValue:
    """nabla_X Y at p."""
    p = _scalar_point(chart, p)
    frame = ChartFrame(chart, p)
    covY = frame.covariant_vector(Y, 0)
    xv = np.stack([j.value for j in frame.vector_jets(X, 0)], axis=-1)
    n = chart.dim
    comp = np.array(
        [sum(covY[i, j].value * xv[..., j] for j in range(n)) for i in range(n)]
    )
    return TensorValue(comp, con=1, cov=0, point=p)


def div_vector(chart: Chart, X: VectorField, p) -> float:
    p = _scalar_point(chart, p)
    return float(ChartFrame(chart, p).div_vector(X, 0).value)


def div_tensor2(chart: Chart, T: Tensor2Field, p) -> TensorValue:
    p = _scalar_point(chart, p)
    out = ChartFrame(chart, p).div_tensor2(T, 0)
    return TensorValue(np.array([j.value for j in out]), con=0, cov=1, point=p)


def lie_metric(chart: Chart, X: VectorField, p) -> TensorValue:
    p = _scalar_point(chart, p)
    return TensorValue(
        _stack2(ChartFrame(chart, p).lie_metric(X, 0)), con=0, cov=2, point=p
    )


# ---------------------------------------------------------------------------
# derived fields
# ---------------------------------------------------------------------------


def grad_field(chart: Chart, phi: ScalarField) -> VectorField:
    return VectorField(
        chart.dim,
        lambda p, order: ChartFrame(chart, p).grad(phi, order),
        f"grad({phi.label})",
    )


def hessian_field(chart: Chart, phi: ScalarField) -> Tensor2Field:
    return Tensor2Field(
        chart.dim,
        lambda p, order: ChartFrame(chart, p).hessian(phi, order),
        f"hess({phi.label})",
    )


def ricci_field(chart: Chart) -> Tensor2Field:
    return Tensor2Field(
        chart.dim, lambda p, order: ChartFrame(chart, p).ricci(order), "Ric"
    )


def scalar_curvature_field(chart: Chart) -> ScalarField:
    return ScalarField(
        chart.dim,
        lambda p, order: ChartFrame(chart, p).scalar_curvature_jet(order),
        "R",
    )


def laplacian_field(chart: Chart, phi: ScalarField) -> ScalarField:
    return ScalarField(
        chart.dim,
        lambda p, order: ChartFrame(chart, p).laplacian(phi, order),
        f"lap({phi.label})",
    )


def grad_norm2_field(chart: Chart, phi: ScalarField) -> ScalarField:
    return ScalarField(
        chart.dim,
        lambda p, order: ChartFrame(chart, p).grad_norm2(phi, order),
        f"|grad({phi.label})|^2",
    )


def outer_grad_field(chart: Chart, phi: ScalarField) -> Tensor2Field:
    """The covariant tensor dphi (x) dphi."""

    def jet_fn(p, order):
        n = chart.dim
        fj = ScalarField.jet(phi, p, order + 1)
        df = [fj.derive(i) for i in range(n)]
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(i, n):
                out[i, j] = df[i] * df[j]
                out[j, i] = out[i, j]
        return out

    return Tensor2Field(chart.dim, jet_fn, f"d{phi.label}(x)d{phi.label}")


def lie_metric_field(chart: Chart, X: VectorField) -> Tensor2Field:
    return Tensor2Field(
        chart.dim,
        lambda p, order: ChartFrame(chart, p).lie_metric(X, order),
        f"L_{X.label} g",
    )


def convective_field(chart: Chart, X: VectorField) -> VectorField:
    """The vector field nabla_X X."""

    def jet_fn(p, order):
        frame = ChartFrame(chart, p)
        cov = frame.covariant_vector(X, order)
        x0 = [x.truncated(order) for x in frame.vector_jets(X, order + 1)]
        n = chart.dim
        return [
            _sum_jets([cov[i, j] * x0[j] for j in range(n)]) for i in range(n)
        ]

    return VectorField(chart.dim, jet_fn, f"nabla_{X.label} {X.label}")


def divergence_field(chart: Chart, X: VectorField) -> ScalarField:
    return ScalarField(
        chart.dim,
        lambda p, order: ChartFrame(chart, p).div_vector(X, order),
        f"div({X.label})",
    )


def vector_norm2_field(chart: Chart, X: VectorField) -> ScalarField:
    def jet_fn(p, order):
        frame = ChartFrame(chart, p)
        g = frame.metric(order)
        xj = frame.vector_jets(X, order)
        n = chart.dim
        return _sum_jets(
            [g[i, j] * xj[i] * xj[j] for i in range(n) for j in range(n)]
        )

    return ScalarField(chart.dim, jet_fn, f"|{X.label}|^2")


def scale_vector_field(X: VectorField, phi: ScalarField) -> VectorField:
    """The vector field phi * X."""

    def jet_fn(p, order):
        s = phi.jet(p, order)
        return [s * x for x in X.jet(p, order)]

    return VectorField(X.dim, jet_fn, f"{phi.label}*{X.label}")
