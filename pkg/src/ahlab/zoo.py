"""Curated gallery of charts with known structure, plus synthetic curvature.

Every entry records what the chart is expected to satisfy (structure class,
conformal flatness, curvature constants) together with a provenance note
saying where those expectations come from.  The tables are enforced by the
test suite, so the gallery doubles as a regression oracle: if the pipeline
drifts, the zoo notices.

Synthetic curvature profiles sit at the other extreme: instead of a chart
they fabricate the curvature arrays of a model space directly at a point,
with the identity metric.  They exercise the classification logic on exact
input, decoupled from differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import expr
from .geometry import Box, Chart, Direct, Embedded, GeometryError, weyl_values


class ZooError(ValueError):
    """Unknown entry or bad parameter value."""


# ---------------------------------------------------------------------------
# small builders shared by several entries

_ZERO = expr.parse("0")


def _matrix(rows, dim, params=()):
    names = set(params)
    return tuple(tuple(expr.parse(e, dim, names) if isinstance(e, str) else e
                       for e in row) for row in rows)


def _zero_rows(dim):
    return [["0"] * dim for _ in range(dim)]


def _pairwise_j_rows(dim):
    """J rotating each coordinate pair (x_{2a-1}, x_{2a})."""
    rows = _zero_rows(dim)
    for a in range(dim // 2):
        rows[2 * a + 1][2 * a] = "1"
        rows[2 * a][2 * a + 1] = "-1"
    return rows


def _r2(dim, start=1):
    return " + ".join(f"x{i}^2" for i in range(start, start + dim))


# ---------------------------------------------------------------------------
# chart builders


def flat_kahler(m: int = 3) -> Chart:
    """Flat complex m-space: identity metric, constant rotation J."""
    m = int(m)
    if m < 1:
        raise ZooError("flat_kahler needs complex dimension m >= 1")
    dim = 2 * m
    g = [["1" if i == j else "0" for j in range(dim)] for i in range(dim)]
    return Chart(dim=dim,
                 presentation=Direct(_matrix(g, dim),
                                     _matrix(_pairwise_j_rows(dim), dim)),
                 domain=Box((-2.0,) * dim, (2.0,) * dim),
                 name=f"flat_kahler(m={m})")


def sphere2(c: float = 1.0) -> Chart:
    """Round 2-sphere of curvature c > 0, stereographic coordinates."""
    c = float(c)
    if c <= 0:
        raise ZooError("sphere2 needs curvature c > 0")
    g = _zero_rows(2)
    g[0][0] = g[1][1] = "4 / (1 + c*(x1^2 + x2^2))^2"
    hw = 2.0 / np.sqrt(c)
    return Chart(dim=2,
                 presentation=Direct(_matrix(g, 2, ("c",)),
                                     _matrix(_pairwise_j_rows(2), 2)),
                 params={"c": c},
                 domain=Box((-hw,) * 2, (hw,) * 2),
                 name=f"sphere2(c={c:g})")


def hyperbolic(n: int = 4, c: float = 1.0) -> Chart:
    """Hyperbolic n-space of curvature -c (c > 0) on the conformal ball."""
    n = int(n)
    c = float(c)
    if n < 2 or n % 2:
        raise ZooError("hyperbolic needs even dimension n >= 2")
    if c <= 0:
        raise ZooError("hyperbolic needs c > 0 (the curvature is -c)")
    g = _zero_rows(n)
    entry = f"4 / (1 - c*({_r2(n)}))^2"
    for i in range(n):
        g[i][i] = entry
    # the conformal factor blows up at |x|^2 = 1/c; stay well inside
    hw = 0.5 / np.sqrt(n * c)
    return Chart(dim=n,
                 presentation=Direct(_matrix(g, n, ("c",)),
                                     _matrix(_pairwise_j_rows(n), n)),
                 params={"c": c},
                 domain=Box((-hw,) * n, (hw,) * n),
                 name=f"hyperbolic(n={n}, c={c:g})")


def fubini_study_cp2() -> Chart:
    """Projective plane, one affine chart of the standard Einstein metric.

    Real coordinates pair into (x1 + i x2, x3 + i x4).  The metric comes
    from the potential log(1 + |z|^2); in this normalization the scalar
    curvature is 12 and the holomorphic sectional curvature is 2.
    """
    w = "(1 + x1^2 + x2^2 + x3^2 + x4^2)"
    a11 = f"2*(1 + x3^2 + x4^2)/{w}^2"
    a22 = f"2*(1 + x1^2 + x2^2)/{w}^2"
    a12 = f"-2*(x1*x3 + x2*x4)/{w}^2"
    b12 = f"-2*(x1*x4 - x2*x3)/{w}^2"
    g = _zero_rows(4)
    g[0][0] = g[1][1] = a11
    g[2][2] = g[3][3] = a22
    g[0][2] = g[2][0] = a12
    g[1][3] = g[3][1] = a12
    g[0][3] = g[3][0] = b12
    g[1][2] = g[2][1] = f"-({b12})"
    return Chart(dim=4,
                 presentation=Direct(_matrix(g, 4),
                                     _matrix(_pairwise_j_rows(4), 4)),
                 domain=Box((-1.5,) * 4, (1.5,) * 4),
                 name="fubini_study_cp2")


def kodaira_thurston() -> Chart:
    """Nilmanifold chart whose fundamental form is closed but not parallel.

    The metric makes the left-invariant coframe (dx1, dx2, dx3, dx4 - x1 dx3)
    orthonormal and J rotates that coframe pairwise; the result is almost
    Kahler but neither Kahler nor nearly Kahler.
    """
    g = _zero_rows(4)
    g[0][0] = g[1][1] = "1"
    g[2][2] = "1 + x1^2"
    g[2][3] = g[3][2] = "-x1"
    g[3][3] = "1"
    j = _zero_rows(4)
    j[1][0] = "1"
    j[0][1] = "-1"
    j[2][2] = "x1"
    j[3][2] = "1 + x1^2"
    j[2][3] = "-1"
    j[3][3] = "-x1"
    return Chart(dim=4,
                 presentation=Direct(_matrix(g, 4), _matrix(j, 4)),
                 domain=Box((-1.0,) * 4, (1.0,) * 4),
                 name="kodaira_thurston")


CROSS_TRIPLES_R7 = ((1, 2, 3), (1, 4, 5), (1, 7, 6),
                    (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5))


def cross_product_table(triples, n: int) -> np.ndarray:
    """Antisymmetric product constants from 1-based cyclic triples."""
    table = np.zeros((n, n, n))
    for (a, b, c) in triples:
        for (i, j, k) in ((a, b, c), (b, c, a), (c, a, b)):
            table[i - 1, j - 1, k - 1] = 1.0
            table[j - 1, i - 1, k - 1] = -1.0
    return table


def s6_nearly_kahler() -> Chart:
    """Round 6-sphere with J induced by the 7-dimensional cross product.

    Orthographic chart of the upper hemisphere; the ambient product table
    rotates each tangent space by p x (.), which is the classical strictly
    nearly Kahler structure of constant sectional curvature 1.
    """
    r2 = _r2(6)
    phi = tuple(expr.parse(f"x{i}") for i in range(1, 7))
    phi += (expr.parse(f"sqrt(1 - ({r2}))"),)
    return Chart(dim=6,
                 presentation=Embedded(phi=phi, ambient_dim=7,
                                       product=cross_product_table(CROSS_TRIPLES_R7, 7)),
                 domain=Box((-0.35,) * 6, (0.35,) * 6),
                 name="s6_nearly_kahler")


def s2_x_h2(c: float = 1.0) -> Chart:
    """Product of a sphere of curvature +c and a hyperbolic plane of -c.

    The opposite factor curvatures kill the conformal tensor, and each
    factor is Kahler, so this is the canonical nonflat chart on which the
    whole conditional identity chain applies.
    """
    c = float(c)
    if c <= 0:
        raise ZooError("s2_x_h2 needs c > 0")
    g = _zero_rows(4)
    g[0][0] = g[1][1] = "4 / (1 + c*(x1^2 + x2^2))^2"
    g[2][2] = g[3][3] = "4 / (1 - c*(x3^2 + x4^2))^2"
    hw = 0.5 / np.sqrt(c)
    return Chart(dim=4,
                 presentation=Direct(_matrix(g, 4, ("c",)),
                                     _matrix(_pairwise_j_rows(4), 4)),
                 params={"c": c},
                 domain=Box((-hw,) * 4, (hw,) * 4),
                 name=f"product_s2_h2(c={c:g})")


def product(a: Chart, b: Chart) -> Chart:
    """Block-diagonal product of two direct charts.

    Metric and J act factorwise; the second factor's coordinates are
    renumbered to follow the first's.  Embedded charts have no canonical
    product presentation here and are rejected.
    """
    for ch in (a, b):
        if not isinstance(ch.presentation, Direct):
            raise GeometryError("product combines direct charts only")

    # parameters the factors agree on stay symbolic; a name bound to two
    # different values is inlined into each factor's expressions instead
    conflicts = {key for key in a.params
                 if key in b.params and a.params[key] != b.params[key]}
    sub_a = {k: a.params[k] for k in conflicts}
    sub_b = {k: b.params[k] for k in conflicts}
    params = {k: v for k, v in {**a.params, **b.params}.items()
              if k not in conflicts}

    dim = a.dim + b.dim

    def block(mat_a, mat_b):
        rows = []
        for i in range(a.dim):
            row = tuple(expr.substitute(e, sub_a) for e in mat_a[i])
            rows.append(row + (_ZERO,) * b.dim)
        for i in range(b.dim):
            shifted = tuple(
                expr.shift_coordinates(expr.substitute(e, sub_b), a.dim)
                for e in mat_b[i])
            rows.append((_ZERO,) * a.dim + shifted)
        return tuple(rows)

    name = f"{a.name}x{b.name}" if a.name and b.name else ""
    return Chart(dim=dim,
                 presentation=Direct(block(a.presentation.g, b.presentation.g),
                                     block(a.presentation.j, b.presentation.j)),
                 params=params,
                 domain=Box(a.domain.lo + b.domain.lo, a.domain.hi + b.domain.hi),
                 name=name)


# ---------------------------------------------------------------------------
# synthetic curvature profiles


@dataclass(frozen=True, eq=False)
class SyntheticCurvature:
    """Curvature arrays of a model space at one point, identity metric.

    ricci, scalar, and weyl are assembled from riemann by the same
    contraction formulas the chart pipeline uses, so both roads measure
    conformal flatness identically.
    """

    dim: int
    g: np.ndarray
    j: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    weyl: np.ndarray
    label: str

    def describe(self) -> str:
        return self.label


def _pairwise_j_matrix(dims) -> np.ndarray:
    n = sum(dims)
    j = np.zeros((n, n))
    off = 0
    for d in dims:
        for a in range(d // 2):
            j[off + 2 * a + 1, off + 2 * a] = 1.0
            j[off + 2 * a, off + 2 * a + 1] = -1.0
        off += d
    return j


def _constant_curvature_block(n, members, kappa) -> np.ndarray:
    """kappa * (g wedge g) supported on one factor's index range."""
    block = np.zeros((n, n))
    block[members, members] = 1.0
    return kappa * (np.einsum("il,jk->ijkl", block, block)
                    - np.einsum("ik,jl->ijkl", block, block))


def _assemble(dims, kappas, label) -> SyntheticCurvature:
    for d in dims:
        if d < 2 or d % 2:
            raise ZooError("synthetic factors need even dimension >= 2")
    n = sum(dims)
    riemann = np.zeros((n, n, n, n))
    off = 0
    for d, k in zip(dims, kappas):
        members = np.arange(off, off + d)
        riemann += _constant_curvature_block(n, members, k)
        off += d
    g = np.eye(n)
    ricci = np.einsum("il,ijkl->jk", g, riemann)
    scalar = float(np.einsum("jk,jk->", g, ricci))
    return SyntheticCurvature(
        dim=n, g=g, j=_pairwise_j_matrix(dims), riemann=riemann,
        ricci=ricci, scalar=scalar,
        weyl=weyl_values(g, riemann, ricci, scalar), label=label,
    )


def space_form(dim: int, kappa: float) -> SyntheticCurvature:
    """Constant sectional curvature kappa in the given even dimension."""
    return _assemble((int(dim),), (float(kappa),),
                     f"space_form(dim={dim}, kappa={kappa:g})")


def product_space_forms(d1: int, k1: float, d2: int, k2: float) -> SyntheticCurvature:
    """Block sum of two constant-curvature factors."""
    return _assemble((int(d1), int(d2)), (float(k1), float(k2)),
                     f"product_space_forms({d1}, {k1:g}, {d2}, {k2:g})")


SYNTHETIC_NAMES = ("space_form", "synthetic_product")


def _pair(text, label, cast):
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ZooError(f"{label} needs two comma-separated values, "
                       f"got {text!r}")
    try:
        return cast(parts[0]), cast(parts[1])
    except ValueError:
        raise ZooError(f"{label} needs two numbers, got {text!r}") from None


def build_synthetic(name: str, **params) -> SyntheticCurvature:
    """Resolve a synthetic curvature profile from string-valued parameters.

    These are model-point curvature tables, not charts, so only summary
    and case-matching consumers can use them.
    """
    if name == "space_form":
        merged = {"dim": 6, "kappa": -1.0}
        for key, value in params.items():
            if key not in merged:
                raise ZooError(f"space_form has no parameter {key!r}")
            merged[key] = value
        return space_form(int(merged["dim"]), float(merged["kappa"]))
    if name == "synthetic_product":
        merged = {"dims": "4,2", "curvs": "-1,1"}
        for key, value in params.items():
            if key not in merged:
                raise ZooError(f"synthetic_product has no parameter {key!r}")
            merged[key] = value
        d1, d2 = _pair(merged["dims"], "dims", int)
        k1, k2 = _pair(merged["curvs"], "curvs", float)
        return product_space_forms(d1, k1, d2, k2)
    raise ZooError(f"no synthetic profile named {name!r}; known profiles: "
                   + ", ".join(SYNTHETIC_NAMES))


# ---------------------------------------------------------------------------
# the registry


@dataclass(frozen=True)
class ZooEntry:
    """A named chart family with its expected properties.

    expected maps property names (classification verdicts at the default
    tolerance, curvature constants) to the values the default-parameter
    chart must satisfy; the test suite enforces the table.  provenance says
    in one line why those values are trusted.
    """

    name: str
    summary: str
    params: tuple  # ((name, default), ...)
    expected: dict
    provenance: str
    builder: object = field(repr=False)

    def build(self, **overrides) -> Chart:
        values = dict(self.params)
        for key, value in overrides.items():
            if key not in values:
                raise ZooError(
                    f"entry {self.name!r} has no parameter {key!r}; "
                    f"available: {', '.join(values) or 'none'}")
            values[key] = type(values[key])(value)
        return self.builder(**values)

    def default_chart(self) -> Chart:
        return self.build()


ENTRIES = (
    ZooEntry(
        name="flat_kahler",
        summary="flat complex m-space, the everything-vanishes baseline",
        params=(("m", 3),),
        expected={
            "kahler": True, "nearly_kahler": True, "almost_kahler": True,
            "class_1": True, "class_2": True, "class_3": True,
            "conformally_flat": True,
            "scalar": 0.0, "sectional": 0.0,
            "ricci_spectrum": ((0.0, 6),),
        },
        provenance="identically zero curvature; every expectation is exact",
        builder=flat_kahler,
    ),
    ZooEntry(
        name="sphere2",
        summary="round 2-sphere of curvature c in stereographic coordinates",
        params=(("c", 1.0),),
        expected={
            "kahler": True, "nearly_kahler": True, "almost_kahler": True,
            "class_1": True, "class_2": True, "class_3": True,
            "conformally_flat": True,
            "scalar": 2.0, "sectional": 1.0,
        },
        provenance="closed-form constant-curvature metric, cross-checked "
                   "against finite differences in the test suite",
        builder=sphere2,
    ),
    ZooEntry(
        name="hyperbolic",
        summary="hyperbolic n-space of curvature -c on the conformal ball",
        params=(("n", 4), ("c", 1.0)),
        expected={
            "kahler": False, "nearly_kahler": False, "almost_kahler": False,
            "class_1": False, "class_2": True, "class_3": True,
            "conformally_flat": True,
            "scalar": -12.0, "sectional": -1.0,
            "ricci_spectrum": ((-3.0, 4),),
        },
        provenance="closed-form constant-curvature metric; the constant "
                   "rotation J is compatible but not parallel here",
        builder=hyperbolic,
    ),
    ZooEntry(
        name="fubini_study_cp2",
        summary="projective plane, affine chart of the standard Einstein metric",
        params=(),
        expected={
            "kahler": True, "nearly_kahler": True, "almost_kahler": True,
            "class_1": True, "class_2": True, "class_3": True,
            "conformally_flat": False,
            "scalar": 12.0, "holomorphic_sectional": 2.0,
            "ricci_spectrum": ((3.0, 4),),
        },
        provenance="standard potential log(1+|z|^2); scalar 12 and "
                   "holomorphic sectional 2 follow from that normalization",
        builder=fubini_study_cp2,
    ),
    ZooEntry(
        name="kodaira_thurston",
        summary="nilmanifold chart: closed fundamental form, J not parallel",
        params=(),
        expected={
            "kahler": False, "nearly_kahler": False, "almost_kahler": True,
            "conformally_flat": False,
            "scalar": -0.5,
        },
        provenance="left-invariant coframe makes the fundamental form "
                   "closed exactly; whether any curvature-symmetry class "
                   "holds here is an open question, so those residuals are "
                   "reported but deliberately left out of this table",
        builder=kodaira_thurston,
    ),
    ZooEntry(
        name="s6_nearly_kahler",
        summary="round 6-sphere with J from the 7-dimensional cross product",
        params=(),
        expected={
            "kahler": False, "nearly_kahler": True, "almost_kahler": False,
            "class_1": False, "class_2": True, "class_3": True,
            "conformally_flat": True,
            "scalar": 30.0, "sectional": 1.0,
            "ricci_spectrum": ((5.0, 6),),
        },
        provenance="orthographic hemisphere chart; the product table "
                   "satisfies the cross-product laws checked in the tests",
        builder=s6_nearly_kahler,
    ),
    ZooEntry(
        name="product_s2_h2",
        summary="sphere(+c) x hyperbolic plane(-c), the nonflat chain chart",
        params=(("c", 1.0),),
        expected={
            "kahler": True, "nearly_kahler": True, "almost_kahler": True,
            "class_1": True, "class_2": True, "class_3": True,
            "conformally_flat": True,
            "scalar": 0.0,
            "ricci_spectrum": ((-1.0, 2), (1.0, 2)),
        },
        provenance="opposite factor curvatures cancel the conformal tensor; "
                   "factorwise curvature is closed form",
        builder=s2_x_h2,
    ),
)


def entries() -> tuple:
    return ENTRIES


def shipped_chart_path(name: str) -> str:
    """Path of the chart file shipped alongside the package for an entry."""
    get(name)
    path = resources.files("ahlab").joinpath(f"charts/{name}.chart")
    return str(path)


def get(name: str) -> ZooEntry:
    for entry in ENTRIES:
        if entry.name == name:
            return entry
    if name in SYNTHETIC_NAMES:
        raise ZooError(f"{name!r} is a synthetic curvature profile, not a "
                       "chart; only case matching accepts it")
    known = ", ".join(e.name for e in ENTRIES)
    raise ZooError(f"no zoo entry named {name!r}; known entries: {known}")
