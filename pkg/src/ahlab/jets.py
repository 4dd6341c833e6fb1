"""Truncated multivariate Taylor arithmetic (jets).

A jet of order k at a point p stores the Taylor coefficients
c_alpha = (d^alpha f)(p) / alpha!  for all multi-indices |alpha| <= k.
Storing *coefficients* rather than raw derivatives makes multiplication a
plain truncated convolution.  The default order is 4, which is exactly deep
enough to reach second covariant derivatives of the Ricci tensor of a metric
given in closed form; the order is a parameter of the space because pulled
back metrics need one extra order for the embedding map.

Two containers are provided: `Jet` (a single scalar jet, used by the
expression evaluator) and `JetArray` (an ndarray of jets sharing one space,
used by the curvature pipeline).  Both keep a dense coefficient vector over
the graded basis of the space; for n <= 8 variables at order 4 the basis has
at most 495 entries, so dense storage wins over any sparse bookkeeping.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
import scipy.sparse as _sparse


class JetDomainError(ArithmeticError):
    """Raised when a jet operation leaves its domain of smoothness.

    Examples: division by a jet whose constant term is zero, sqrt of a jet
    with non-positive constant term.  Raising beats silently propagating
    NaN coefficients into a curvature tensor.
    """


# target element count per chunk of the multiplication table; keeps the
# gathered operands of large tensor contractions around a few tens of MB
_CHUNK_BUDGET = 4_000_000


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int = 4) -> "JetSpace":
    """Return the cached jet space for `nvars` variables at `order`."""
    return JetSpace(nvars, order)


class JetSpace:
    """Basis bookkeeping for jets in `nvars` variables truncated at `order`.

    The basis is graded: all multi-indices of degree 0, then 1, and so on,
    lexicographic within a degree.  The basis of a lower order is therefore a
    prefix of the basis of a higher order with the same nvars, which makes
    truncation between orders a slice.
    """

    def __init__(self, nvars: int, order: int = 4):
        if nvars < 1:
            raise ValueError("jet space needs at least one variable")
        if order < 1:
            raise ValueError("jet order must be >= 1")
        self.nvars = nvars
        self.order = order

        basis: list[tuple[int, ...]] = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), deg):
                alpha = [0] * nvars
                for v in combo:
                    alpha[v] += 1
                basis.append(tuple(alpha))
        self.basis = basis
        self.size = len(basis)
        self.index = {alpha: i for i, alpha in enumerate(basis)}
        self.degree = np.array([sum(a) for a in basis], dtype=np.int32)

        # alpha! for every basis entry: converts coefficients <-> derivatives
        self.factorial = np.array(
            [math.prod(math.factorial(e) for e in a) for a in basis], dtype=float
        )

        self._build_mult_table()
        self._build_partial_maps()
        self._build_extract_maps()

    def _build_mult_table(self):
        ti, tj, tk = [], [], []
        order = self.order
        for i, alpha in enumerate(self.basis):
            da = self.degree[i]
            for j, beta in enumerate(self.basis):
                if da + self.degree[j] > order:
                    continue
                gamma = tuple(a + b for a, b in zip(alpha, beta))
                ti.append(i)
                tj.append(j)
                tk.append(self.index[gamma])
        self._ti = np.array(ti, dtype=np.intp)
        self._tj = np.array(tj, dtype=np.intp)
        self._tk = np.array(tk, dtype=np.intp)
        n_t = len(ti)
        # scatter matrix: (T x B), row t adds into basis slot tk[t]
        self._scatter = _sparse.csr_matrix(
            (np.ones(n_t), (np.arange(n_t), self._tk)), shape=(n_t, self.size)
        )

        # The basis is graded, so each degree occupies a contiguous slice.
        # Contractions run one GEMM per degree pair over those slices; the
        # per-pair scatter merges products that land on the same monomial.
        self._deg_off = np.searchsorted(self.degree, np.arange(order + 2))
        self._pair_scatter = {}
        for d1 in range(order + 1):
            o1, n1 = self._deg_off[d1], self._deg_off[d1 + 1] - self._deg_off[d1]
            for d2 in range(order + 1 - d1):
                o2 = self._deg_off[d2]
                n2 = self._deg_off[d2 + 1] - o2
                o3 = self._deg_off[d1 + d2]
                n3 = self._deg_off[d1 + d2 + 1] - o3
                cols = np.empty(n1 * n2, dtype=np.intp)
                for p in range(n1):
                    alpha = self.basis[o1 + p]
                    for q in range(n2):
                        beta = self.basis[o2 + q]
                        gamma = tuple(a + b for a, b in zip(alpha, beta))
                        cols[p * n2 + q] = self.index[gamma] - o3
                self._pair_scatter[(d1, d2)] = _sparse.csr_matrix(
                    (np.ones(n1 * n2), (cols, np.arange(n1 * n2))),
                    shape=(n3, n1 * n2),
                )

    def _build_partial_maps(self):
        # partial derivative d/dx_v maps coefficient c[alpha + e_v] to
        # (alpha_v + 1) * c[alpha + e_v] at slot alpha; top-degree output
        # slots are unknowable after differentiation and stay zero.
        self._partial = []
        for v in range(self.nvars):
            src, dst, fac = [], [], []
            for k, alpha in enumerate(self.basis):
                if self.degree[k] >= self.order:
                    continue
                shifted = list(alpha)
                shifted[v] += 1
                src.append(self.index[tuple(shifted)])
                dst.append(k)
                fac.append(alpha[v] + 1)
            self._partial.append(
                (np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp),
                 np.array(fac, dtype=float))
            )

    def _build_extract_maps(self):
        n = self.nvars
        e = [0] * n
        self._idx_zero = self.index[tuple(e)]
        self._idx_grad = np.array(
            [self.index[tuple(1 if j == v else 0 for j in range(n))] for v in range(n)],
            dtype=np.intp,
        )
        hess = np.empty((n, n), dtype=np.intp)
        if self.order >= 2:
            for a in range(n):
                for b in range(n):
                    alpha = [0] * n
                    alpha[a] += 1
                    alpha[b] += 1
                    hess[a, b] = self.index[tuple(alpha)]
        self._idx_hess = hess

    # -- constructors ------------------------------------------------------

    def constant(self, value: float) -> "Jet":
        c = np.zeros(self.size)
        c[self._idx_zero] = value
        return Jet(self, c)

    def variable(self, i: int, value: float) -> "Jet":
        """The jet of the coordinate function x_i at a point where x_i = value.

        `i` is 0-based here; user-facing surfaces (expressions, chart files)
        use 1-based names and shift before calling.
        """
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} outside 0..{self.nvars - 1}")
        c = np.zeros(self.size)
        c[self._idx_zero] = value
        c[self._idx_grad[i]] = 1.0
        return Jet(self, c)

    def variables(self, point) -> list["Jet"]:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.nvars,):
            raise ValueError(f"expected point of length {self.nvars}")
        return [self.variable(i, point[i]) for i in range(self.nvars)]

    def zeros(self, shape=()) -> "JetArray":
        if isinstance(shape, int):
            shape = (shape,)
        return JetArray(self, np.zeros(tuple(shape) + (self.size,)))

    # -- low-level batched kernels ----------------------------------------

    def _mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Truncated product of coefficient arrays with matching lead shape."""
        lead = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
        a = np.broadcast_to(a, lead + (self.size,))
        b = np.broadcast_to(b, lead + (self.size,))
        m = int(np.prod(lead)) if lead else 1
        af = a.reshape(m, self.size)
        bf = b.reshape(m, self.size)
        out = np.zeros((self.size, m))
        step = max(1, _CHUNK_BUDGET // max(m, 1))
        for lo in range(0, len(self._ti), step):
            sl = slice(lo, lo + step)
            prod = af[:, self._ti[sl]] * bf[:, self._tj[sl]]  # (m, Tc)
            out += self._scatter[sl].T @ prod.T
        return out.T.reshape(lead + (self.size,))

    def _tensordot_coeffs(self, a, b, k: int) -> np.ndarray:
        """Contract (FA, k, B) x (k, FB, B) -> (FA, FB, B) with jet products."""
        fa = a.shape[0]
        fb = b.shape[1]
        out = np.zeros((fa * fb, self.size))
        off = self._deg_off
        for d1 in range(self.order + 1):
            n1 = off[d1 + 1] - off[d1]
            if n1 == 0:
                continue
            # (fa, k, n1) -> (fa*n1, k)
            a_mat = np.swapaxes(a[:, :, off[d1]:off[d1 + 1]], 1, 2).reshape(fa * n1, k)
            for d2 in range(self.order + 1 - d1):
                n2 = off[d2 + 1] - off[d2]
                if n2 == 0:
                    continue
                b_mat = b[:, :, off[d2]:off[d2 + 1]].reshape(k, fb * n2)
                prod = a_mat @ b_mat  # (fa*n1, fb*n2)
                pairs = (prod.reshape(fa, n1, fb, n2).transpose(0, 2, 1, 3)
                         .reshape(fa * fb, n1 * n2))
                block = self._pair_scatter[(d1, d2)] @ pairs.T  # (n3, fa*fb)
                o3 = off[d1 + d2]
                out[:, o3:o3 + block.shape[0]] += block.T
        return out.reshape(fa, fb, self.size)


class Jet:
    """A single truncated Taylor expansion in a fixed `JetSpace`."""

    __slots__ = ("space", "coeffs")
    __array_priority__ = 10.0  # keep numpy scalars from hijacking ops

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = coeffs

    @property
    def value(self) -> float:
        return float(self.coeffs[self.space._idx_zero])

    def derivative(self, alpha) -> float:
        """The derivative d^alpha f(p), i.e. coefficient times alpha!."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.space.nvars:
            raise ValueError("multi-index length does not match variable count")
        if any(a < 0 for a in alpha):
            raise ValueError("multi-index entries must be nonnegative")
        if sum(alpha) > self.space.order:
            raise ValueError(
                f"degree {sum(alpha)} exceeds jet order {self.space.order}"
            )
        i = self.space.index[alpha]
        return float(self.coeffs[i] * self.space.factorial[i])

    def gradient(self) -> np.ndarray:
        return self.coeffs[self.space._idx_grad].copy()

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets from different spaces")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return self.space.constant(float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, o.coeffs - self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Jet(self.space, self.coeffs * float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.space._mul_coeffs(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            if other == 0.0:
                raise JetDomainError("division by zero")
            return Jet(self.space, self.coeffs / float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * reciprocal(o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * reciprocal(self)

    def __pow__(self, r):
        return power(self, r)


def reciprocal(b: Jet) -> Jet:
    """1/b as a jet; the divisor's constant term must be nonzero."""
    b0 = b.value
    if b0 == 0.0:
        raise JetDomainError("division by a jet with zero constant term")
    space = b.space
    # 1/(b0 + u) = (1/b0) * sum (-u/b0)^k, exact at the truncation order
    u = Jet(space, b.coeffs.copy())
    u.coeffs[space._idx_zero] = 0.0
    coeffs = [(-1.0) ** k / b0 ** (k + 1) for k in range(space.order + 1)]
    return _horner(u, coeffs)


def _horner(u: Jet, cs: list[float]) -> Jet:
    """sum cs[k] * u^k via Horner; u must have zero constant term."""
    space = u.space
    acc = space.constant(cs[-1])
    for c in reversed(cs[:-1]):
        acc = acc * u
        acc.coeffs[space._idx_zero] += c
    return acc


def _compose(a: Jet, deriv_at_value) -> Jet:
    """Compose a univariate function with `a` given its Taylor coefficients.

    `deriv_at_value(k)` must return f^(k)(a0)/k! for the constant term a0.
    """
    space = a.space
    u = Jet(space, a.coeffs.copy())
    u.coeffs[space._idx_zero] = 0.0
    cs = [deriv_at_value(k) for k in range(space.order + 1)]
    return _horner(u, cs)


def sin(a: Jet) -> Jet:
    a0 = a.value
    table = (math.sin(a0), math.cos(a0), -math.sin(a0), -math.cos(a0))
    return _compose(a, lambda k: table[k % 4] / math.factorial(k))


def cos(a: Jet) -> Jet:
    a0 = a.value
    table = (math.cos(a0), -math.sin(a0), -math.cos(a0), math.sin(a0))
    return _compose(a, lambda k: table[k % 4] / math.factorial(k))


def exp(a: Jet) -> Jet:
    e0 = math.exp(a.value)
    return _compose(a, lambda k: e0 / math.factorial(k))


def sqrt(a: Jet) -> Jet:
    a0 = a.value
    if a0 <= 0.0:
        raise JetDomainError(f"sqrt needs a positive constant term, got {a0}")
    return power(a, 0.5)


def power(a: Jet, r) -> Jet:
    """a**r: repeated multiplication for integer r, binomial series otherwise."""
    if isinstance(r, float) and r.is_integer():
        r = int(r)
    if isinstance(r, (int, np.integer)):
        r = int(r)
        if r == 0:
            return a.space.constant(1.0)
        n = abs(r)
        acc = a.space.constant(1.0)
        base = a
        while n:
            if n & 1:
                acc = acc * base
            n >>= 1
            if n:
                base = base * base
        return acc if r > 0 else reciprocal(acc)
    r = float(r)
    a0 = a.value
    if a0 <= 0.0:
        raise JetDomainError(
            f"fractional power needs a positive constant term, got {a0}"
        )

    def coeff(k: int) -> float:
        # binom(r, k) * a0^(r-k), the Taylor coefficient of t^r about a0
        c = 1.0
        for i in range(k):
            c *= (r - i) / (i + 1)
        return c * a0 ** (r - k)

    return _compose(a, coeff)


class JetArray:
    """An ndarray of jets over one shared space; last axis is the basis.

    Only the operations the curvature pipeline needs are implemented: linear
    combinations, elementwise jet products, tensordot-style contractions with
    jet products, partial derivatives, and extraction of value/jacobian/
    hessian arrays.
    """

    __slots__ = ("space", "data")

    def __init__(self, space: JetSpace, data: np.ndarray):
        if data.shape[-1] != space.size:
            raise ValueError("last axis must match the jet basis size")
        self.space = space
        self.data = data

    @property
    def shape(self):
        return self.data.shape[:-1]

    @classmethod
    def from_jets(cls, jets, shape=None) -> "JetArray":
        """Stack scalar jets (any nested sequence) into an array."""
        flat = []

        def walk(node):
            if isinstance(node, Jet):
                flat.append(node)
            else:
                for item in node:
                    walk(item)

        walk(jets)
        if not flat:
            raise ValueError("no jets given")
        space = flat[0].space
        data = np.stack([j.coeffs for j in flat])
        if shape is None:
            shape = _nested_shape(jets)
        return cls(space, data.reshape(tuple(shape) + (space.size,)))

    def __getitem__(self, key) -> "JetArray":
        if not isinstance(key, tuple):
            key = (key,)
        return JetArray(self.space, self.data[key + (slice(None),)])

    def jet(self, *index) -> Jet:
        return Jet(self.space, self.data[tuple(index)])

    def __add__(self, other):
        return JetArray(self.space, self.data + other.data)

    def __sub__(self, other):
        return JetArray(self.space, self.data - other.data)

    def __mul__(self, scalar):
        return JetArray(self.space, self.data * float(scalar))

    __rmul__ = __mul__

    def mul(self, other: "JetArray") -> "JetArray":
        """Elementwise (broadcasting) jet product."""
        return JetArray(self.space, self.space._mul_coeffs(self.data, other.data))

    def tensordot(self, other: "JetArray", axes) -> "JetArray":
        """np.tensordot semantics over the lead axes, with jet products."""
        ax_a, ax_b = axes
        if isinstance(ax_a, int):
            ax_a = [ax_a]
            ax_b = [ax_b]
        ax_a = [a % len(self.shape) for a in ax_a]
        ax_b = [b % len(other.shape) for b in ax_b]
        free_a = [i for i in range(len(self.shape)) if i not in ax_a]
        free_b = [i for i in range(len(other.shape)) if i not in ax_b]
        k = int(np.prod([self.shape[i] for i in ax_a])) if ax_a else 1
        a2 = np.transpose(self.data, free_a + ax_a + [len(self.shape)])
        b2 = np.transpose(other.data, ax_b + free_b + [len(other.shape)])
        fa_shape = tuple(self.shape[i] for i in free_a)
        fb_shape = tuple(other.shape[i] for i in free_b)
        fa = int(np.prod(fa_shape)) if fa_shape else 1
        fb = int(np.prod(fb_shape)) if fb_shape else 1
        a2 = np.ascontiguousarray(a2.reshape(fa, k, self.space.size))
        b2 = np.ascontiguousarray(b2.reshape(k, fb, self.space.size))
        out = self.space._tensordot_coeffs(a2, b2, k)
        return JetArray(self.space, out.reshape(fa_shape + fb_shape + (self.space.size,)))

    def transpose(self, *axes) -> "JetArray":
        """Permute the shape axes (np.transpose semantics); basis axis stays last."""
        perm = tuple(axes) + (len(self.shape),)
        return JetArray(self.space, np.transpose(self.data, perm))

    def partial(self, v: int) -> "JetArray":
        """d/dx_v applied to every entry; top-order coefficients become 0."""
        src, dst, fac = self.space._partial[v]
        out = np.zeros_like(self.data)
        out[..., dst] = self.data[..., src] * fac
        return JetArray(self.space, out)

    def gradient_stack(self) -> "JetArray":
        """Stack the partials along a new leading axis: out[v] = d/dx_v."""
        parts = [self.partial(v).data for v in range(self.space.nvars)]
        return JetArray(self.space, np.stack(parts))

    def truncate(self, space: JetSpace) -> "JetArray":
        """Restrict to a lower-order space with the same variables."""
        if space.nvars != self.space.nvars or space.order > self.space.order:
            raise ValueError("can only truncate to a lower order, same variables")
        return JetArray(space, np.ascontiguousarray(self.data[..., : space.size]))

    def values(self) -> np.ndarray:
        return self.data[..., self.space._idx_zero].copy()

    def jacobian(self) -> np.ndarray:
        """d/dx_v of every entry, stacked on a new leading axis."""
        return np.moveaxis(self.data[..., self.space._idx_grad], -1, 0)

    def hessian(self) -> np.ndarray:
        """Second derivatives on two new leading axes (full symmetric array)."""
        if self.space.order < 2:
            raise ValueError("hessian needs a space of order >= 2")
        n = self.space.nvars
        h = self.data[..., self.space._idx_hess.reshape(-1)]
        h = np.moveaxis(h, -1, 0).reshape((n, n) + self.shape)
        diag = np.arange(n)
        h[diag, diag] *= 2.0  # coefficient of x_v^2 is f_vv/2
        return h


def _nested_shape(node):
    shape = []
    while not isinstance(node, Jet):
        node = list(node)
        shape.append(len(node))
        node = node[0]
    return tuple(shape)
