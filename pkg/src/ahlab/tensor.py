"""Dense point-tensor algebra.

Components of tensors at a single point, in coordinates or in an adapted
orthonormal frame. Variance is tracked per slot ('l' covariant, 'u'
contravariant); contraction between equal-variance slots requires the dual
pairing (inverse metric for two lower slots, metric for two upper slots).

Declared symmetries are validated, never enforced: a violation raises
TensorError instead of being silently symmetrized, so upstream bugs stay
visible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SYM_TOL = 1e-10
_SPAN_TOL = 1e-6
_FRAME_TOL = 1e-9
_STRUCT_TOL = 1e-8


class TensorError(ValueError):
    """Structural or numerical-consistency failure in tensor data."""


def residual(delta: np.ndarray, *scales: np.ndarray) -> float:
    """Max-norm residual normalized by 1 + largest participating component."""
    denom = 1.0 + max((float(np.max(np.abs(s))) for s in scales), default=0.0)
    return float(np.max(np.abs(delta))) / denom


@dataclass(frozen=True, eq=False)
class TensorComponents:
    """Dense components of a tensor at a point.

    data has shape (dim,) * rank; variance is a string of 'l'/'u' flags,
    one per slot, e.g. "llll" for a fully covariant rank-4 tensor or "ul"
    for an endomorphism J^i_j acting as (JX)^i = J^i_j X^j.
    """

    data: np.ndarray
    variance: str
    symmetries: tuple = field(default=(), compare=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim != len(self.variance):
            raise TensorError(
                f"variance {self.variance!r} has {len(self.variance)} slots "
                f"but data has rank {arr.ndim}"
            )
        if arr.ndim > 0 and any(n != arr.shape[0] for n in arr.shape):
            raise TensorError(f"non-cubic component array of shape {arr.shape}")
        if set(self.variance) - {"l", "u"}:
            raise TensorError(f"bad variance string {self.variance!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        for spec in self.symmetries:
            check_symmetry(self, *spec)

    @property
    def dim(self) -> int:
        return self.data.shape[0] if self.rank else 0

    @property
    def rank(self) -> int:
        return self.data.ndim


def check_symmetry(t: TensorComponents, kind: str, *slots, tol: float = _SYM_TOL):
    """Verify a declared symmetry; raise TensorError above tol (normalized).

    kind is one of:
      "sym" a b      -- invariant under exchanging slots a and b
      "antisym" a b  -- flips sign under exchanging slots a and b
      "swap" (a,b) (c,d) -- invariant under exchanging the slot pairs
    """
    perm = list(range(t.rank))
    if kind in ("sym", "antisym"):
        a, b = slots
        perm[a], perm[b] = perm[b], perm[a]
        sign = 1.0 if kind == "sym" else -1.0
    elif kind == "swap":
        (a, b), (c, d) = slots
        perm[a], perm[c] = perm[c], perm[a]
        perm[b], perm[d] = perm[d], perm[b]
        sign = 1.0
    else:
        raise TensorError(f"unknown symmetry kind {kind!r}")
    res = residual(t.data - sign * np.transpose(t.data, perm), t.data)
    if res > tol:
        raise TensorError(
            f"declared symmetry {kind}{slots} violated: residual {res:.3e} > {tol:g}"
        )


def contract(t: TensorComponents, slot_a: int, slot_b: int,
             g_inv: TensorComponents | None = None) -> TensorComponents:
    """Contract two slots, reducing rank by 2.

    Mixed-variance slots trace directly. Two covariant slots need g_inv;
    two contravariant slots need the metric itself in the same argument
    (the dual pairing for the slots being contracted).
    """
    rank = t.rank
    if not (0 <= slot_a < rank and 0 <= slot_b < rank):
        raise TensorError(f"slot out of range for rank-{rank} tensor")
    if slot_a == slot_b:
        raise TensorError("contraction slots must be distinct")
    va, vb = t.variance[slot_a], t.variance[slot_b]
    arr = np.moveaxis(t.data, (slot_a, slot_b), (rank - 2, rank - 1))
    if va != vb:
        out = np.einsum("...ii->...", arr)
    else:
        if g_inv is None:
            raise TensorError(
                "contracting two slots of equal variance needs the dual pairing"
            )
        want = "uu" if va == "l" else "ll"
        if g_inv.variance != want:
            raise TensorError(
                f"pairing tensor must have variance {want!r} to contract "
                f"two {'covariant' if va == 'l' else 'contravariant'} slots"
            )
        out = np.einsum("...ij,ij->...", arr, g_inv.data)
    keep = [v for k, v in enumerate(t.variance) if k not in (slot_a, slot_b)]
    return TensorComponents(out, "".join(keep))


def raise_lower(t: TensorComponents, slot: int, metric: TensorComponents
                ) -> TensorComponents:
    """Flip the variance of one slot using g (to lower) or g_inv (to raise)."""
    if not 0 <= slot < t.rank:
        raise TensorError(f"slot out of range for rank-{t.rank} tensor")
    v = t.variance[slot]
    want = "ll" if v == "u" else "uu"
    if metric.variance != want:
        raise TensorError(
            f"need a {want!r} metric tensor to flip a {v!r} slot"
        )
    try:
        np.linalg.cholesky(metric.data)
    except np.linalg.LinAlgError:
        raise TensorError("metric is not positive definite") from None
    arr = np.tensordot(metric.data, np.moveaxis(t.data, slot, 0), axes=(1, 0))
    arr = np.moveaxis(arr, 0, slot)
    flipped = t.variance[:slot] + ("l" if v == "u" else "u") + t.variance[slot + 1:]
    return TensorComponents(arr, flipped)


@dataclass(frozen=True, eq=False)
class AdaptedFrame:
    """Orthonormal frame e_1..e_2m with e_{m+i} = J e_i.

    vectors[a] holds the coordinate components of e_{a+1}; the second half
    is exactly J applied to the first half, so frame components of J-related
    identities can be checked against the constant block form of J.
    """

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def m(self) -> int:
        return self.vectors.shape[0] // 2


def standard_j(dim: int) -> np.ndarray:
    """Block form of J in an adapted frame: J e_i = e_{m+i}, J e_{m+i} = -e_i."""
    m = dim // 2
    j = np.zeros((dim, dim))
    j[m:, :m] = np.eye(m)
    j[:m, m:] = -np.eye(m)
    return j


def adapted_frame(g: TensorComponents, J: TensorComponents,
                  struct_tol: float = _STRUCT_TOL) -> AdaptedFrame:
    """Build a J-adapted g-orthonormal frame by greedy plane-by-plane sweep.

    Seeds each J-invariant plane with the first coordinate direction not
    already spanned (residual g-norm > 1e-6 after projection), normalizes it
    to e_i, and takes e_{m+i} = J e_i exactly; compatibility of (g, J) makes
    the second vector orthonormal automatically.
    """
    if g.variance != "ll" or g.rank != 2:
        raise TensorError("metric must be a rank-2 covariant tensor")
    if J.variance != "ul" or J.rank != 2:
        raise TensorError("J must be a (1,1) tensor with variance 'ul'")
    dim = g.dim
    if dim % 2:
        raise TensorError(f"almost-complex structure needs even dimension, got {dim}")
    gm, jm = g.data, J.data
    res = residual(jm @ jm + np.eye(dim), jm @ jm)
    if res > struct_tol:
        raise TensorError(f"J^2 + I residual {res:.3e} exceeds {struct_tol:g}")
    pulled = jm.T @ gm @ jm
    res = residual(pulled - gm, pulled, gm)
    if res > struct_tol:
        raise TensorError(
            f"g(JX,JY) = g(X,Y) residual {res:.3e} exceeds {struct_tol:g}"
        )

    m = dim // 2
    firsts: list[np.ndarray] = []
    seconds: list[np.ndarray] = []

    def project_out(v):
        # two classical Gram-Schmidt passes keep orthogonality near roundoff
        for _ in range(2):
            for w in firsts + seconds:
                v = v - (w @ gm @ v) * w
        return v

    for _ in range(m):
        seed = None
        for k in range(dim):
            cand = project_out(np.eye(dim)[k])
            if np.sqrt(cand @ gm @ cand) > _SPAN_TOL:
                seed = cand
                break
        if seed is None:
            raise TensorError("coordinate directions do not span the space")
        e = seed / np.sqrt(seed @ gm @ seed)
        firsts.append(e)
        seconds.append(jm @ e)

    frame = AdaptedFrame(np.vstack(firsts + seconds))
    gram = frame.vectors @ gm @ frame.vectors.T
    res = residual(gram - np.eye(dim), gram)
    if res > _FRAME_TOL:
        raise TensorError(f"frame failed orthonormality at {res:.3e}")
    return frame


def frame_components(t: TensorComponents, frame: AdaptedFrame,
                     g: TensorComponents | None = None) -> np.ndarray:
    """Components of t against the frame vectors; returns a plain array.

    Covariant slots contract with the frame vectors themselves, contravariant
    slots with the g-dual coframe, so the result is variance-free. g is only
    needed when t has contravariant slots.
    """
    lower = frame.vectors
    upper = None
    if "u" in t.variance:
        if g is None:
            raise TensorError("contravariant slots need the metric for the coframe")
        upper = frame.vectors @ g.data
    arr = t.data
    for axis, v in enumerate(t.variance):
        mat = lower if v == "l" else upper
        arr = np.moveaxis(np.tensordot(mat, np.moveaxis(arr, axis, 0),
                                       axes=(1, 0)), 0, axis)
    return arr
