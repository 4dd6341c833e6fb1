"""Chart model and the exact-at-a-point curvature pipeline.

A chart is either a Direct presentation (metric and almost-complex structure
as expression matrices in chart coordinates) or an Embedded one (an immersion
into Euclidean space whose metric is pulled back and whose J comes from a
constant bilinear product on the ambient space, projected to the tangent
space).

curvature_bundle evaluates everything the identity checkers need at one
point: Christoffel symbols, the full curvature tensor with its traces, the
conformal (Weyl) part, the J-twisted Ricci trace, and first and second
covariant derivatives of the Ricci tensor and of J. All derivatives come
from order-4 jet arithmetic of the metric components, so there is no
truncation error beyond float64 roundoff; embedded charts run their pullback
at order 5 because forming dphi^T dphi consumes one derivative order.

Covariant derivatives are always computed in coordinates, where the
Christoffel correction terms are explicit, and only converted to frame
components afterwards; no frame field is ever differentiated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from . import jets
from .jets import JetArray
from .tensor import (
    AdaptedFrame,
    TensorComponents,
    adapted_frame,
    check_symmetry,
    frame_components,
    residual,
)

_STRUCT_TOL = 1e-8
_CURV_SYM_TOL = 1e-8


class GeometryError(ValueError):
    """Chart validation or curvature pipeline failure."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned sampling box for a chart's coordinate domain."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise GeometryError("domain bounds have mismatched lengths")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise GeometryError("domain box is empty")

    def contains(self, p) -> bool:
        return all(a - 1e-12 <= x <= b + 1e-12
                   for a, x, b in zip(self.lo, p, self.hi))

    def midpoint(self) -> tuple:
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))


@dataclass(frozen=True, eq=False)
class Direct:
    """Metric and J given componentwise as expressions in the coordinates."""

    g: tuple
    j: tuple


@dataclass(frozen=True, eq=False)
class Embedded:
    """Immersion phi into R^N with a constant bilinear product table.

    product[i, j, k] holds the k-th component of P(a_i, b_j) for ambient
    basis vectors, so the ambient structure at p acts as
    (J_p v)_k = sum_ij product[i, j, k] p_i v_j, e.g. the cross-product
    constants for the round 2-sphere in R^3.
    """

    phi: tuple
    ambient_dim: int
    product: np.ndarray

    def __post_init__(self):
        arr = np.array(self.product, dtype=float)
        n = self.ambient_dim
        if arr.shape != (n, n, n):
            raise GeometryError(
                f"product table must be shaped ({n},{n},{n}), got {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "product", arr)
        if len(self.phi) != n:
            raise GeometryError("immersion must have one component per ambient axis")


@dataclass(frozen=True, eq=False)
class Chart:
    """Immutable chart: presentation plus parameter bindings and a domain."""

    dim: int
    presentation: Direct | Embedded
    params: dict = field(default_factory=dict)
    domain: Box | None = None
    name: str = ""

    def __post_init__(self):
        if self.dim < 2 or self.dim % 2:
            raise GeometryError(f"chart dimension must be even >= 2, got {self.dim}")
        pres = self.presentation
        if isinstance(pres, Direct):
            for mat, label in ((pres.g, "metric"), (pres.j, "J")):
                if len(mat) != self.dim or any(len(r) != self.dim for r in mat):
                    raise GeometryError(f"{label} must be a {self.dim}x{self.dim} matrix")
        if self.domain is None:
            object.__setattr__(self, "domain",
                               Box((-1.0,) * self.dim, (1.0,) * self.dim))
        elif len(self.domain.lo) != self.dim:
            raise GeometryError("domain box dimension does not match chart")


@dataclass(frozen=True, eq=False)
class CurvatureBundle:
    """Everything the identity checkers consume, at one point.

    Coordinate components throughout; index layout is stated per field.
    nabla2_s[l, k, i, j] is the true second covariant derivative
    (outer derivative first), not the iterated directional derivative.
    """

    point: tuple
    dim: int
    g: np.ndarray            # g_ij
    g_inv: np.ndarray        # g^ij
    J: np.ndarray            # J^i_j
    gamma: np.ndarray        # gamma[k,i,j] = Gamma^k_ij
    riemann: np.ndarray      # riemann[i,j,k,l] = R(X_i,X_j,X_k,X_l)
    riemann_mixed: np.ndarray  # [d,a,b,c] = (R(X_a,X_b)X_c)^d
    ricci: np.ndarray        # S_ij = sum_i R(E_i, ., ., E_i)
    scalar: float            # tau
    dscalar: np.ndarray      # coordinate gradient of tau
    weyl: np.ndarray         # conformal curvature, same layout as riemann
    sprime: np.ndarray       # S'(X,Y) = sum_i R(X, E_i, J E_i, J Y)
    nabla_j: np.ndarray      # [k,i,j] = (nabla_k J)^i_j
    k_tensor: np.ndarray     # [c,a,b] = component c of K(X_a, X_b)
    nabla2_j: np.ndarray     # [l,k,i,j] = (nabla^2 J)(l,k)^i_j
    nabla_s: np.ndarray      # [k,i,j] = (nabla_k S)_ij
    nabla2_s: np.ndarray     # [l,k,i,j]
    nabla_r: np.ndarray      # [v,i,j,k,l] = (nabla_v R)_ijkl
    nabla_sprime: np.ndarray  # [k,i,j]
    frame: AdaptedFrame

    @property
    def m(self) -> int:
        return self.dim // 2

    def in_frame(self, data: np.ndarray, variance: str) -> np.ndarray:
        """Convert coordinate components to adapted-frame components."""
        return frame_components(TensorComponents(data, variance), self.frame,
                                TensorComponents(self.g, "ll"))


def _perm(src: str, dst: str) -> tuple:
    return tuple(src.index(c) for c in dst)


def _jet_einsum(spec: str, a: JetArray, b: JetArray) -> JetArray:
    """Two-operand einsum over jet arrays (no repeated index within one operand)."""
    ins, out = spec.split("->")
    sa, sb = ins.split(",")
    common = [c for c in sa if c in sb]
    res = a.tensordot(b, ([sa.index(c) for c in common],
                          [sb.index(c) for c in common]))
    free = "".join(c for c in sa if c not in common) + \
           "".join(c for c in sb if c not in common)
    if free == out:
        return res
    return res.transpose(*_perm(free, out))


def _const_array(space: jets.JetSpace, values: np.ndarray) -> JetArray:
    out = space.zeros(np.shape(values))
    out.data[..., space._idx_zero] = values
    return out


def _const_dot(const: np.ndarray, a: JetArray, axes) -> JetArray:
    """Contract a constant array against a jet array (linear, no jet product)."""
    data = np.tensordot(const, a.data, axes=axes)
    return JetArray(a.space, data)


def _jet_matrix_inverse(g: JetArray) -> JetArray:
    """Inverse of a jet-valued matrix via the truncated Neumann series.

    Writing g = g0 + D with D nilpotent in the jet ring, the inverse is
    sum_k (-g0^{-1} D)^k g0^{-1}; degree-d output coefficients only need
    k <= d, so the loop runs to the space order.
    """
    g0 = g.values()
    try:
        x0 = np.linalg.inv(g0)
    except np.linalg.LinAlgError:
        raise GeometryError("metric is singular at the evaluation point") from None
    space = g.space
    delta = g - _const_array(space, g0)
    m = _const_dot(-x0, delta, axes=([1], [0]))
    acc = _const_array(space, x0)
    term = acc
    for _ in range(space.order):
        term = _jet_einsum("im,mj->ij", m, term)
        acc = acc + term
    return acc


def _direct_matrices(chart: Chart, space: jets.JetSpace, point) -> tuple:
    coords = space.variables(point)
    pres = chart.presentation

    def build(mat):
        entries = [[ex.eval_jet(e, coords, chart.params) for e in row]
                   for row in mat]
        return JetArray.from_jets(entries)

    try:
        return build(pres.g), build(pres.j)
    except ex.ExprError as err:
        raise GeometryError(f"chart evaluation failed: {err}") from err


def _embedded_matrices(chart: Chart, point) -> tuple:
    """Pull back metric and J through the immersion, then drop to order 4."""
    pres = chart.presentation
    space5 = jets.jet_space(chart.dim, order=5)
    coords = space5.variables(point)
    try:
        phi = JetArray.from_jets(
            [ex.eval_jet(e, coords, chart.params) for e in pres.phi])
    except ex.ExprError as err:
        raise GeometryError(f"immersion evaluation failed: {err}") from err
    dphi = phi.gradient_stack()                       # [a, A] = d_a phi^A
    g5 = _jet_einsum("aA,bA->ab", dphi, dphi)
    g0 = g5.values()
    try:
        np.linalg.cholesky(g0)
    except np.linalg.LinAlgError:
        raise GeometryError(
            "pulled-back metric is singular: immersion not injective here"
        ) from None

    # ambient structure at phi(u): linear in phi, so no jet product needed
    jamb = _const_dot(pres.product, phi, axes=([0], [0])).transpose(1, 0)  # [A,B]

    # tangency: J_amb must map tangent vectors back into the tangent space
    dphi0 = dphi.values()                             # [a, A]
    jamb0 = jamb.values()
    pushed = dphi0 @ jamb0.T                          # [a, A] = J_amb(d_a phi)
    coeffs = np.linalg.solve(g0, dphi0 @ pushed.T).T  # tangential components
    off = pushed - coeffs @ dphi0
    res = residual(off, pushed)
    if res > _STRUCT_TOL:
        raise GeometryError(
            f"ambient structure leaves the tangent space (residual {res:.3e})"
        )

    ginv5 = _jet_matrix_inverse(g5)
    t1 = _jet_einsum("AB,bB->Ab", jamb, dphi)
    t2 = _jet_einsum("aA,Ab->ab", dphi, t1)
    j5 = _jet_einsum("ac,cb->ab", ginv5, t2)
    space4 = jets.jet_space(chart.dim, order=4)
    return g5.truncate(space4), j5.truncate(space4)


def _structure_checks(g0: np.ndarray, j0: np.ndarray):
    try:
        np.linalg.cholesky(g0)
    except np.linalg.LinAlgError:
        raise GeometryError("metric is not positive definite here") from None
    jj = j0 @ j0
    res = residual(jj + np.eye(len(g0)), jj)
    if res > _STRUCT_TOL:
        raise GeometryError(f"J^2 = -I fails (residual {res:.3e})")
    pulled = j0.T @ g0 @ j0
    res = residual(pulled - g0, pulled, g0)
    if res > _STRUCT_TOL:
        raise GeometryError(f"g(JX,JY) = g(X,Y) fails (residual {res:.3e})")


def _metric_jets(chart: Chart, point) -> tuple:
    point = tuple(float(x) for x in point)
    if len(point) != chart.dim:
        raise GeometryError(f"point has {len(point)} coordinates, chart needs {chart.dim}")
    if chart.domain is not None and not chart.domain.contains(point):
        raise GeometryError(f"point {point} outside the chart domain")
    if isinstance(chart.presentation, Direct):
        space = jets.jet_space(chart.dim, order=4)
        g, j = _direct_matrices(chart, space, point)
    else:
        g, j = _embedded_matrices(chart, point)
    _structure_checks(g.values(), j.values())
    return point, g, j


def christoffel(chart: Chart, point) -> np.ndarray:
    """Levi-Civita connection coefficients Gamma^k_ij at the point."""
    _, g, _ = _metric_jets(chart, point)
    lower = jets.jet_space(g.space.nvars, g.space.order - 1)
    return _christoffel_jets(g, _jet_matrix_inverse(g.truncate(lower))).values()


def _christoffel_jets(g: JetArray, ginv: JetArray) -> JetArray:
    # differentiation costs one order of validity, so the result lives in
    # ginv's (one lower) space
    dg = g.gradient_stack().truncate(ginv.space)       # [k, i, j] = d_k g_ij
    bracket = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    # bracket[i,j,l] = d_i g_jl + d_j g_il - d_l g_ij
    return 0.5 * _jet_einsum("kl,ijl->kij", ginv, bracket)


def weyl_values(g0: np.ndarray, r0: np.ndarray, s0: np.ndarray,
                tau0: float) -> np.ndarray:
    """Conformal curvature tensor from pointwise component values.

    Shared by the chart pipeline and synthetic curvature tables so both
    measure conformal flatness with the identical formula.  Dimension 2 has
    no conformal tensor; it comes back as zeros.
    """
    n = g0.shape[0]
    if n <= 2:
        return np.zeros_like(r0)
    gs = (np.einsum("il,jk->ijkl", g0, s0) - np.einsum("ik,jl->ijkl", g0, s0)
          + np.einsum("jk,il->ijkl", g0, s0) - np.einsum("jl,ik->ijkl", g0, s0))
    gg = (np.einsum("il,jk->ijkl", g0, g0) - np.einsum("ik,jl->ijkl", g0, g0))
    return r0 - gs / (n - 2) + tau0 * gg / ((n - 1) * (n - 2))


def curvature_bundle(chart: Chart, point) -> CurvatureBundle:
    """Evaluate the full curvature package at one point of the chart.

    Sign conventions: R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
    - nabla_[X,Y] Z with R(X,Y,Z,U) = g(R(X,Y)Z, U); the Ricci tensor traces
    the first and last slots, which makes the round sphere's scalar curvature
    positive and annihilates the conformal tensor on every space form.
    """
    point, g, j = _metric_jets(chart, point)
    dim = chart.dim

    # each differentiation step drops one valid order; carrying every stage
    # in the smallest space that still holds its valid coefficients keeps the
    # basis-pair convolutions cheap
    ord3 = jets.jet_space(dim, g.space.order - 1)
    ord2 = jets.jet_space(dim, g.space.order - 2)
    ord1 = jets.jet_space(dim, g.space.order - 3)

    ginv = _jet_matrix_inverse(g.truncate(ord3))
    gamma = _christoffel_jets(g, ginv)

    gamma2 = gamma.truncate(ord2)
    ginv2 = ginv.truncate(ord2)
    g2 = g.truncate(ord2)
    j2 = j.truncate(ord2)

    dgam = gamma.gradient_stack().truncate(ord2)       # [v, l, j, k] = d_v Gamma^l_jk
    t1 = dgam.transpose(*_perm("iljk", "lijk"))
    t2 = dgam.transpose(*_perm("jlik", "lijk"))
    p1 = _jet_einsum("lim,mjk->lijk", gamma2, gamma2)
    p2 = _jet_einsum("ljm,mik->lijk", gamma2, gamma2)
    r_mixed = t1 - t2 + p1 - p2                        # (R(X_i,X_j)X_k)^l
    r4 = _jet_einsum("lm,mijk->ijkl", g2, r_mixed)
    ricci = _jet_einsum("il,ijkl->jk", ginv2, r4)
    tau = _jet_einsum("jk,jk->", ginv2, ricci)

    # S'(X,Y) = sum_i R(X, E_i, J E_i, J Y), a tensorial double trace
    ra = _jet_einsum("iacd,cb->iadb", r4, j2)
    rb = _jet_einsum("iadb,dj->iabj", ra, j2)
    sprime = _jet_einsum("iabj,ab->ij", rb, ginv2)

    # (nabla_k J)^i_j with both Christoffel corrections
    dj = j.gradient_stack().truncate(ord2)
    nj = dj + _jet_einsum("ikm,mj->kij", gamma2, j2) \
            - _jet_einsum("mkj,im->kij", gamma2, j2)

    # (nabla_k S)_ij
    gamma1 = gamma.truncate(ord1)
    s1 = ricci.truncate(ord1)
    ds = ricci.gradient_stack().truncate(ord1)
    ns = ds - _jet_einsum("mki,mj->kij", gamma1, s1) \
            - _jet_einsum("mkj,im->kij", gamma1, s1)

    g0 = g.values()
    ginv0 = ginv.values()
    j0 = j.values()
    gamma0 = gamma.values()
    r0 = r4.values()
    rm0 = r_mixed.values()
    s0 = ricci.values()
    tau_jet = tau.jet()
    tau0 = tau_jet.value
    dtau = tau_jet.gradient()
    nj0 = nj.values()
    ns0 = ns.values()
    sp0 = sprime.values()

    # second covariant derivatives: value-level corrections on top of the
    # first-derivative coefficients of the jet-valued first derivatives
    dns = ns.jacobian()                                # [l, k, i, j]
    n2s = (dns
           - np.einsum("mlk,mij->lkij", gamma0, ns0)
           - np.einsum("mli,kmj->lkij", gamma0, ns0)
           - np.einsum("mlj,kim->lkij", gamma0, ns0))

    dnj = nj.jacobian()                                # [l, k, i, j] = d_l (nabla_k J)^i_j
    n2j = (dnj
           + np.einsum("ilm,kmj->lkij", gamma0, nj0)
           - np.einsum("mlk,mij->lkij", gamma0, nj0)
           - np.einsum("mlj,kim->lkij", gamma0, nj0))

    dr = r4.jacobian()                                 # [v, i, j, k, l]
    nr = (dr
          - np.einsum("mvi,mjkl->vijkl", gamma0, r0)
          - np.einsum("mvj,imkl->vijkl", gamma0, r0)
          - np.einsum("mvk,ijml->vijkl", gamma0, r0)
          - np.einsum("mvl,ijkm->vijkl", gamma0, r0))

    dsp = sprime.jacobian()
    nsp = (dsp
           - np.einsum("mki,mj->kij", gamma0, sp0)
           - np.einsum("mkj,im->kij", gamma0, sp0))

    ktens = np.einsum("acb->cab", nj0) - np.einsum("bca->cab", nj0)

    weyl = weyl_values(g0, r0, s0, tau0)

    _validate_curvature(g0, ginv0, r0, s0, tau0)

    frame = adapted_frame(TensorComponents(g0, "ll"), TensorComponents(j0, "ul"))

    return CurvatureBundle(
        point=point, dim=dim, g=g0, g_inv=ginv0, J=j0, gamma=gamma0,
        riemann=r0, riemann_mixed=rm0, ricci=s0, scalar=tau0, dscalar=dtau,
        weyl=weyl, sprime=sp0, nabla_j=nj0, k_tensor=ktens, nabla2_j=n2j,
        nabla_s=ns0, nabla2_s=n2s, nabla_r=nr, nabla_sprime=nsp, frame=frame,
    )


def _validate_curvature(g0, ginv0, r0, s0, tau0):
    t = TensorComponents(r0, "llll")
    for spec in (("antisym", 0, 1), ("antisym", 2, 3), ("swap", (0, 1), (2, 3))):
        try:
            check_symmetry(t, *spec, tol=_CURV_SYM_TOL)
        except Exception as err:
            raise GeometryError(f"curvature symmetry failed: {err}") from err
    bianchi = r0 + np.einsum("jkil->ijkl", r0) + np.einsum("kijl->ijkl", r0)
    res = residual(bianchi, r0)
    if res > _CURV_SYM_TOL:
        raise GeometryError(f"first Bianchi identity fails (residual {res:.3e})")
    res = residual(s0 - s0.T, s0)
    if res > _CURV_SYM_TOL:
        raise GeometryError(f"Ricci tensor not symmetric (residual {res:.3e})")
    res = abs(np.einsum("ij,ij->", ginv0, s0) - tau0) / (1 + abs(tau0))
    if res > _CURV_SYM_TOL:
        raise GeometryError(f"scalar curvature is not the Ricci trace ({res:.3e})")


def nabla_j(chart: Chart, point) -> tuple:
    """(nabla J, K, nabla^2 J) coordinate components at the point."""
    b = curvature_bundle(chart, point)
    return b.nabla_j, b.k_tensor, b.nabla2_j


def covariant_derivatives_s(chart: Chart, point) -> tuple:
    """(nabla S, nabla nabla S) coordinate components at the point."""
    b = curvature_bundle(chart, point)
    return b.nabla_s, b.nabla2_s


def sectional_curvature(bundle: CurvatureBundle, x: np.ndarray, y: np.ndarray
                        ) -> float:
    """Sectional curvature of the plane spanned by coordinate vectors x, y."""
    g0 = bundle.g
    num = np.einsum("ijkl,i,j,k,l->", bundle.riemann, x, y, y, x)
    den = (x @ g0 @ x) * (y @ g0 @ y) - (x @ g0 @ y) ** 2
    if abs(den) < 1e-14:
        raise GeometryError("vectors do not span a plane")
    return float(num / den)
