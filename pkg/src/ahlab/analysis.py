"""Pointwise structure classification and identity verification.

Everything here consumes a CurvatureBundle and asks questions about it:
which structure class the chart belongs to at the point (Kahler / nearly
Kahler / almost Kahler, plus the three curvature symmetry classes), whether
the universal curvature identities hold, and whether the longer chain of
identities that is valid for conformally flat almost-Kahler charts with the
second curvature symmetry goes through.

Two policies apply throughout:

* Conditional contracts.  Checks whose derivations require hypotheses
  (conformal flatness, the almost-Kahler condition, curvature symmetry
  class 2) first measure those hypotheses numerically.  Conclusions are
  asserted only when the hypotheses pass; otherwise the residuals are still
  computed and reported, but marked informational.

* Exhaustive frame enumeration.  Identities quantified over vectors are
  evaluated over all tuples of adapted-frame vectors (dimension <= 8 keeps
  that cheap and deterministic) rather than random directions.

Residuals are max-norm differences normalized by 1 + the largest
participating component, so pass thresholds are scale-free.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Chart,
    CurvatureBundle,
    curvature_bundle,
    sectional_curvature,
)
from .tensor import AdaptedFrame, TensorComponents, frame_components, residual, standard_j

# relative gap below which adjacent Ricci eigenvalues count as one cluster
EIGEN_GAP = 1e-6
_JACOBI_SWEEP_LIMIT = 60

UNIVERSAL_IDS = ("2.1", "2.2", "2.3")
CONDITIONAL_IDS = ("2.4", "2.5", "2.6")
CHAIN_IDS = ("sprime", "3.1", "3.2", "dtau", "3.3", "3.4", "3.5", "3.6",
             "3.7", "3.8", "3.9", "3.10", "3.11", "nablaS")
EIGENFRAME_IDS = ("3.5", "3.6", "3.7", "3.8", "3.9", "3.10", "3.11")


class AnalysisError(ValueError):
    """An analysis precondition failed."""


# ---------------------------------------------------------------------------
# structure classification


@dataclass(frozen=True, eq=False)
class ClassReport:
    """Structure-class residuals of one chart at one point.

    curvature_class_residuals are the residuals of the three curvature
    symmetry identities, weakest last; conformal flatness rides along
    because the downstream checks gate on it.
    """

    point: tuple
    tol: float
    residual_kahler: float
    residual_nearly_kahler: float
    residual_almost_kahler: float
    residual_identity_12: float
    curvature_class_residuals: tuple
    residual_conformal_flat: float

    @property
    def verdicts(self) -> dict:
        c1, c2, c3 = self.curvature_class_residuals
        t = self.tol
        return {
            "kahler": self.residual_kahler <= t,
            "nearly_kahler": self.residual_nearly_kahler <= t,
            "almost_kahler": self.residual_almost_kahler <= t,
            "identity_12": self.residual_identity_12 <= t,
            "class_1": c1 <= t,
            "class_2": c2 <= t,
            "class_3": c3 <= t,
            "conformally_flat": self.residual_conformal_flat <= t,
        }

    def to_json(self) -> dict:
        c1, c2, c3 = self.curvature_class_residuals
        return {
            "point": list(self.point),
            "tol": self.tol,
            "residuals": {
                "kahler": self.residual_kahler,
                "nearly_kahler": self.residual_nearly_kahler,
                "1.1": self.residual_almost_kahler,
                "1.2": self.residual_identity_12,
                "id1": c1,
                "id2": c2,
                "id3": c3,
                "conformal_flat": self.residual_conformal_flat,
            },
            "verdicts": self.verdicts,
        }


def classify_point(bundle: CurvatureBundle, tol: float = 1e-6) -> ClassReport:
    """Structure-class residuals of the bundle, all in the adapted frame."""
    dim = bundle.dim
    jf = standard_j(dim)

    # a[k, c, b]: component along e_c of (nabla_{e_k} J) e_b
    a = bundle.in_frame(bundle.nabla_j, "lul")
    r_kahler = residual(a)

    diag = np.einsum("aca->ac", a)  # (nabla_{e_a} J) e_a
    r_nearly = float(np.max(np.linalg.norm(diag, axis=1)))

    # f[a, b, c] = g((nabla_{e_a} J) e_b, e_c); its cyclic sum must vanish
    # exactly when the fundamental 2-form is closed
    f = np.einsum("acb->abc", a)
    cyc = f + np.einsum("bca->abc", f) + np.einsum("cab->abc", f)
    r_almost = residual(cyc, f)

    # (nabla_X J)Y + (nabla_{JX} J) JY = 0
    twist = a + np.einsum("pa,qb,piq->aib", jf, jf, a)
    r_12 = residual(twist, a)

    rf = bundle.in_frame(bundle.riemann, "llll")
    jj = np.einsum("pa,qb,pqcd->abcd", jf, jf, rf)
    r_c1 = residual(rf - jj, rf)
    r_c2 = residual(
        rf - (jj + np.einsum("pa,rc,pbrd->abcd", jf, jf, rf)
              + np.einsum("pa,sd,pbcs->abcd", jf, jf, rf)),
        rf,
    )
    r_c3 = residual(rf - np.einsum("pa,qb,rc,sd,pqrs->abcd", jf, jf, jf, jf, rf), rf)

    wf = bundle.in_frame(bundle.weyl, "llll")
    r_cf = residual(wf, rf)

    return ClassReport(
        point=bundle.point,
        tol=tol,
        residual_kahler=r_kahler,
        residual_nearly_kahler=r_nearly,
        residual_almost_kahler=r_almost,
        residual_identity_12=r_12,
        curvature_class_residuals=(r_c1, r_c2, r_c3),
        residual_conformal_flat=r_cf,
    )


def classify(chart: Chart, points, tol: float = 1e-6) -> list:
    """ClassReport for the chart at each sample point."""
    return [classify_point(curvature_bundle(chart, p), tol) for p in points]


# ---------------------------------------------------------------------------
# identity checkers


def universal_residuals(bundle: CurvatureBundle) -> dict:
    """Residuals of the three identities that hold on every chart.

    The commutator identity is instantiated with the Ricci operator, both
    sides computed independently: the left from second covariant derivatives
    of S raised by the metric, the right from the curvature operator acting
    on the Ricci operator.
    """
    q = bundle.g_inv @ bundle.ricci  # Ricci operator Q^i_j
    comm = bundle.nabla2_s - np.einsum("klij->lkij", bundle.nabla2_s)
    lhs = np.einsum("im,lkmj->lkij", bundle.g_inv, comm)
    rhs = (np.einsum("ilkm,mj->lkij", bundle.riemann_mixed, q)
           - np.einsum("im,mlkj->lkij", q, bundle.riemann_mixed))
    r_comm = residual(lhs - rhs, lhs, rhs)

    # divergence of R in its last slot against the antisymmetrized nabla S
    lhs = np.einsum("ab,axyzb->xyz", bundle.g_inv, bundle.nabla_r)
    rhs = bundle.nabla_s - np.einsum("yxz->xyz", bundle.nabla_s)
    r_div_r = residual(lhs - rhs, lhs, rhs)

    # divergence of S against half the scalar-curvature gradient
    lhs = np.einsum("ab,axb->x", bundle.g_inv, bundle.nabla_s)
    rhs = 0.5 * bundle.dscalar
    r_div_s = residual(lhs - rhs, lhs, rhs)

    return {"2.1": r_comm, "2.2": r_div_r, "2.3": r_div_s}


def check_universal(chart: Chart, point) -> dict:
    """Unconditional identity residuals at one point of the chart."""
    return universal_residuals(curvature_bundle(chart, point))


def conditional_residuals(bundle: CurvatureBundle) -> dict:
    """Residuals of the identities valid under the AK + class-2 hypothesis."""
    j0 = bundle.J
    nj = bundle.nabla_j

    t = bundle.ricci - bundle.sprime
    nt = bundle.nabla_s - bundle.nabla_sprime
    lhs = 2.0 * nt
    rhs = (np.einsum("mn,kmi,nj->kij", t, nj, j0)
           + np.einsum("mn,mi,knj->kij", t, j0, nj))
    r_24 = residual(lhs - rhs, lhs, rhs)

    # rough Laplacian of J against the quadratic right side, composed
    # left-to-right as written
    lhs = np.einsum("lk,lkij->ij", bundle.g_inv, bundle.nabla2_j)
    rhs = np.einsum("im,ab,amn,bnj->ij", j0, bundle.g_inv, nj, nj)
    r_25 = residual(lhs - rhs, lhs, rhs)

    lhs = bundle.riemann - np.einsum("ijcd,ck,dl->ijkl", bundle.riemann, j0, j0)
    rhs = 0.5 * np.einsum("cd,cij,dkl->ijkl", bundle.g, bundle.k_tensor,
                          bundle.k_tensor)
    r_26 = residual(lhs - rhs, lhs, rhs)

    return {"2.4": r_24, "2.5": r_25, "2.6": r_26}


@dataclass(frozen=True, eq=False)
class AK2Report:
    """Conditional identity residuals with their measured hypotheses."""

    point: tuple
    tol: float
    hypothesis_residuals: dict  # "1.1" (almost Kahler) and "id2"
    residuals: dict             # "2.4", "2.5", "2.6"

    @property
    def applicable(self) -> bool:
        return all(v <= self.tol for v in self.hypothesis_residuals.values())

    @property
    def passed(self) -> bool:
        if not self.applicable:
            return True
        return all(v <= self.tol for v in self.residuals.values())

    def to_json(self) -> dict:
        return {
            "point": list(self.point),
            "tol": self.tol,
            "hypothesis_residuals": dict(self.hypothesis_residuals),
            "applicable": self.applicable,
            "residuals": dict(self.residuals),
            "passed": self.passed,
        }


def check_ak2(chart: Chart, point, tol: float = 1e-6) -> AK2Report:
    """Conditional contract for the AK + class-2 identities at one point."""
    bundle = curvature_bundle(chart, point)
    report = classify_point(bundle, tol)
    return AK2Report(
        point=bundle.point,
        tol=tol,
        hypothesis_residuals={
            "1.1": report.residual_almost_kahler,
            "id2": report.curvature_class_residuals[1],
        },
        residuals=conditional_residuals(bundle),
    )


# ---------------------------------------------------------------------------
# Ricci spectrum with J-paired eigenframe


@dataclass(frozen=True, eq=False)
class RicciSpectrum:
    """Eigenvalues of the Ricci operator with a J-adapted eigenframe.

    eigenvalues holds one value per J-invariant pair, ascending; frame rows
    are e_1..e_m followed by J e_1..J e_m in coordinate components, with the
    second half computed by applying J so the pairing is exact.  clusters
    lists (value, multiplicity) with multiplicities counted in the full
    dimension.
    """

    eigenvalues: np.ndarray
    frame: AdaptedFrame
    clusters: tuple
    j_invariance_residual: float

    @property
    def paired_eigenvalues(self) -> np.ndarray:
        return np.concatenate([self.eigenvalues, self.eigenvalues])


def _jacobi_eigh(a: np.ndarray):
    """Cyclic Jacobi eigensolve of a small symmetric matrix.

    Returns (w, v) with w ascending and v's columns the eigenvectors.
    Deterministic: fixed sweep order, stable sort.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    diag_scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(_JACOBI_SWEEP_LIMIT):
        off = float(np.max(np.abs(a - np.diag(np.diag(a))))) if n > 1 else 0.0
        if off <= 1e-15 * diag_scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * diag_scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    else:
        raise AnalysisError("Jacobi eigensolve did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _cluster_groups(w: np.ndarray, gap: float = EIGEN_GAP) -> list:
    """Partition sorted eigenvalues into clusters by relative gap."""
    groups = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[k - 1] <= gap * (1.0 + abs(w[k])):
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def ricci_spectrum(bundle: CurvatureBundle, tol: float = 1e-6) -> RicciSpectrum:
    """Diagonalize the Ricci operator and regroup eigenvectors into J-pairs.

    Requires S to be J-invariant at tol; each eigenvalue cluster must then
    have even dimension, and within a cluster the basis is rebuilt so the
    second half is exactly J applied to the first half.
    """
    dim = bundle.dim
    m = dim // 2
    jf = standard_j(dim)

    sf = bundle.in_frame(bundle.ricci, "ll")
    sf = 0.5 * (sf + sf.T)  # frame conversion leaves roundoff asymmetry
    jres = residual(np.einsum("pa,qb,pq->ab", jf, jf, sf) - sf, sf)
    if jres > tol:
        raise AnalysisError(
            f"Ricci tensor is not J-invariant (residual {jres:.3e} > {tol:.1e})")

    w, v = _jacobi_eigh(sf)
    groups = _cluster_groups(w)

    firsts = []
    values = []
    clusters = []
    for idx in groups:
        if len(idx) % 2:
            raise AnalysisError("odd-dimensional eigenvalue cluster cannot be J-paired")
        lam = float(np.mean(w[idx]))
        width = float(w[idx[-1]] - w[idx[0]])
        clusters.append((lam, len(idx)))

        chosen = []
        for k in idx:
            if len(chosen) == len(idx):
                break
            u = v[:, k].copy()
            for _ in range(2):  # classical Gram-Schmidt, two passes
                for b in chosen:
                    u -= (b @ u) * b
            nrm = float(np.linalg.norm(u))
            if nrm < 1e-8:
                continue
            u /= nrm
            chosen.append(u)
            chosen.append(jf @ u)
        if len(chosen) != len(idx):
            raise AnalysisError("could not J-pair an eigenvalue cluster")

        allowed = width + tol * (1.0 + abs(lam))
        for u in chosen:
            if float(np.linalg.norm(sf @ u - lam * u)) > allowed:
                raise AnalysisError(
                    "J-paired vector left its eigenvalue cluster; pairing failed")
        firsts.extend(chosen[0::2])
        values.extend([lam] * (len(idx) // 2))

    # back to coordinates; the second half applies the coordinate J directly
    # so e_{m+i} = J e_i holds exactly in the returned data
    first_coords = np.array([u @ bundle.frame.vectors for u in firsts])
    second_coords = first_coords @ bundle.J.T
    frame = AdaptedFrame(np.vstack([first_coords, second_coords]))

    return RicciSpectrum(
        eigenvalues=np.array(values),
        frame=frame,
        clusters=tuple(clusters),
        j_invariance_residual=jres,
    )


# ---------------------------------------------------------------------------
# the conformally-flat chain


@dataclass(frozen=True, eq=False)
class IdentityReport:
    """Residuals of the full identity chain over a set of points.

    residuals maps equation id to the worst residual across the points
    (None when an eigenframe identity had no content, e.g. the mixed-plane
    relation on a single-cluster spectrum).  asserted records which ids are
    contract assertions given the measured hypotheses; the rest are
    informational.
    """

    tol: float
    points: tuple
    hypothesis_residuals: dict  # "conformal_flat", "1.1", "id2"
    applicable: bool
    residuals: dict
    asserted: dict

    @property
    def passed(self) -> bool:
        for key, value in self.residuals.items():
            if self.asserted.get(key) and value is not None and value > self.tol:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "tol": self.tol,
            "points": [list(p) for p in self.points],
            "hypothesis_residuals": dict(self.hypothesis_residuals),
            "applicable": self.applicable,
            "residuals": dict(self.residuals),
            "asserted": dict(self.asserted),
            "passed": self.passed,
        }


def _eigenframe_residuals(bundle: CurvatureBundle, spectrum: RicciSpectrum,
                          tol: float) -> dict:
    """The eigenframe identities, evaluated over all frame index tuples."""
    dim = bundle.dim
    m = dim // 2
    fr = spectrum.frame
    g_cov = TensorComponents(bundle.g, "ll")
    lam = spectrum.paired_eigenvalues

    njf = frame_components(TensorComponents(bundle.nabla_j, "lul"), fr, g_cov)
    rf = frame_components(TensorComponents(bundle.riemann, "llll"), fr)
    n2sf = frame_components(TensorComponents(bundle.nabla2_s, "llll"), fr)

    dl = lam[None, :] - lam[:, None]               # dl[i, j] = lam_j - lam_i
    ip_cross = np.einsum("icj,jci->ij", njf, njf)  # <(n_i J)e_j, (n_j J)e_i>
    ip_self = np.einsum("icj,icj->ij", njf, njf)   # |(n_i J)e_j|^2
    ip_diag = np.einsum("ici,jcj->ij", njf, njf)   # <(n_i J)e_i, (n_j J)e_j>
    sec = np.einsum("ijji->ij", rf)                # R(e_i, e_j, e_j, e_i)
    lap = np.einsum("iijj->j", n2sf)               # rough Laplacian of S, slot (e_j, e_j)

    out = {}
    rhs = 0.5 * np.einsum("ij,ij->j", dl, ip_cross - ip_self)
    out["3.5"] = residual(lap - rhs, lap, rhs)
    rhs = np.einsum("ij,ij->j", dl, sec)
    out["3.6"] = residual(lap - rhs, lap, rhs)
    lhs = dl * sec
    rhs = 0.5 * dl * (ip_cross - ip_diag)
    out["3.7"] = residual(lhs - rhs, lhs, rhs)
    rhs = 0.5 * dl * ip_cross
    out["3.8"] = residual(lhs - rhs, lhs, rhs)
    sums = np.einsum("ij,ij->j", dl, ip_cross)
    out["3.9"] = residual(sums, dl * ip_cross)

    # dichotomy: each first-half index agrees with the extreme eigenvalue or
    # kills the matching derivative of J
    to_first = np.linalg.norm(njf[:m, :, 0], axis=1)
    to_last = np.linalg.norm(njf[:m, :, m - 1], axis=1)
    gap_first = np.abs(lam[:m] - lam[0])
    gap_last = np.abs(lam[:m] - lam[m - 1])
    out["3.10"] = float(max(np.minimum(gap_first, to_first).max(),
                            np.minimum(gap_last, to_last).max()))

    groups = _cluster_members(spectrum)
    out["3.11"] = _mixed_plane_residual(bundle.riemann, bundle.J, groups)
    return out


def _cluster_members(spectrum: RicciSpectrum) -> list:
    """Frame vectors (coordinate components) grouped by eigenvalue cluster."""
    m = len(spectrum.eigenvalues)
    groups = []
    start = 0
    for _, mult in spectrum.clusters:
        pairs = mult // 2
        rows = list(range(start, start + pairs)) + \
            list(range(m + start, m + start + pairs))
        groups.append([spectrum.frame.vectors[r] for r in rows])
        start += pairs
    return groups


def _mixed_plane_residual(riemann: np.ndarray, j0: np.ndarray,
                          groups: list) -> float | None:
    """Worst residual of R(x,y,y,x) + R(z,Jz,Jz,z) over mixed cluster planes.

    x, y run over orthonormal pairs inside one cluster, z over another;
    None when there is only one cluster (no product split to test).
    """
    if len(groups) < 2:
        return None
    sums = []
    mags = []
    for ia, ib in itertools.permutations(range(len(groups)), 2):
        z_terms = []
        for z in groups[ib]:
            jz = j0 @ z
            z_terms.append(float(np.einsum("ijkl,i,j,k,l->", riemann, z, jz, jz, z)))
        for x, y in itertools.combinations(groups[ia], 2):
            t1 = float(np.einsum("ijkl,i,j,k,l->", riemann, x, y, y, x))
            for t2 in z_terms:
                sums.append(t1 + t2)
                mags.append(t1)
                mags.append(t2)
    return residual(np.array(sums), np.array(mags))


def _chain_point(bundle: CurvatureBundle, tol: float):
    report = classify_point(bundle, tol)
    hypothesis = {
        "conformal_flat": report.residual_conformal_flat,
        "1.1": report.residual_almost_kahler,
        "id2": report.curvature_class_residuals[1],
    }
    applicable = all(v <= tol for v in hypothesis.values())

    res = {}
    res.update(universal_residuals(bundle))
    res.update(conditional_residuals(bundle))

    m = bundle.dim // 2
    g0 = bundle.g
    s0 = bundle.ricci
    ns = bundle.nabla_s
    dtau = bundle.dscalar

    lhs = bundle.sprime
    rhs = s0 / (m - 1) - bundle.scalar * g0 / (2.0 * (m - 1) * (2 * m - 1))
    res["sprime"] = residual(lhs - rhs, lhs, rhs)

    antisym = ns - np.einsum("yxz->xyz", ns)
    rhs = (np.einsum("yz,x->xyz", g0, dtau)
           - np.einsum("xz,y->xyz", g0, dtau)) / (2.0 * (2 * m - 1))
    res["3.1"] = residual(antisym - rhs, antisym, rhs)

    s_twist = (np.einsum("mn,xmy,nz->xyz", s0, bundle.nabla_j, bundle.J)
               + np.einsum("mn,my,xnz->xyz", s0, bundle.J, bundle.nabla_j))
    rhs = s_twist - np.einsum("x,yz->xyz", dtau, g0) / ((m - 1) * (2 * m - 1))
    res["3.2"] = residual(2.0 * ns - rhs, ns, rhs)

    res["dtau"] = float(np.max(np.abs(dtau))) / (1.0 + abs(bundle.scalar))
    res["3.3"] = residual(antisym, ns)
    res["3.4"] = residual(2.0 * ns - s_twist, ns, s_twist)
    res["nablaS"] = residual(ns)

    spectrum = None
    try:
        spectrum = ricci_spectrum(bundle, tol)
    except AnalysisError:
        if applicable:
            raise
    if spectrum is None:
        for key in EIGENFRAME_IDS:
            res[key] = None
    else:
        res.update(_eigenframe_residuals(bundle, spectrum, tol))

    return hypothesis, res, applicable


def check_cf_ak2_chain(chart: Chart, points, tol: float = 1e-6) -> IdentityReport:
    """Run the full conditional identity chain over the sample points.

    Hypotheses (conformal flatness, the almost-Kahler condition, curvature
    class 2) are measured at every point; the chain's conclusions are
    asserted only when all of them pass everywhere.
    """
    pts = [tuple(float(x) for x in p) for p in points]
    if not pts:
        raise AnalysisError("the identity chain needs at least one sample point")
    if chart.dim < 4:
        raise AnalysisError("the identity chain needs dimension >= 4")

    merged_res: dict = {}
    merged_hyp: dict = {}
    applicable = True
    for p in pts:
        bundle = curvature_bundle(chart, p)
        hyp, res, app = _chain_point(bundle, tol)
        applicable = applicable and app
        for key, value in hyp.items():
            merged_hyp[key] = max(merged_hyp.get(key, 0.0), value)
        for key, value in res.items():
            if value is None:
                merged_res.setdefault(key, None)
            elif merged_res.get(key) is None:
                merged_res[key] = value
            else:
                merged_res[key] = max(merged_res[key], value)

    asserted = {}
    for key, value in merged_res.items():
        if key in UNIVERSAL_IDS:
            asserted[key] = True
        else:
            asserted[key] = applicable and value is not None

    return IdentityReport(
        tol=tol,
        points=tuple(pts),
        hypothesis_residuals=merged_hyp,
        applicable=applicable,
        residuals=merged_res,
        asserted=asserted,
    )


# ---------------------------------------------------------------------------
# theorem case matching


@dataclass(frozen=True, eq=False)
class CurvatureSummary:
    """Pointwise facts the case matcher consumes.

    clusters: Ricci-operator eigenvalue clusters as (value, multiplicity),
    ascending.  sectional_samples: sectional curvatures over eigenframe
    planes.  mixed_plane_residual: worst R(x,y,y,x) + R(z,Jz,Jz,z) over
    mixed cluster planes, None for a single cluster.  hypothesis_measured
    distinguishes measured flags from asserted ones (synthetic inputs).
    """

    dim: int
    tol: float
    conformally_flat: bool
    ak2: bool
    hypothesis_measured: bool
    clusters: tuple
    sectional_samples: tuple
    mixed_plane_residual: float | None
    diagnostics: dict

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "tol": self.tol,
            "conformally_flat": self.conformally_flat,
            "ak2": self.ak2,
            "hypothesis_measured": self.hypothesis_measured,
            "clusters": [[v, int(mult)] for v, mult in self.clusters],
            "sectional_samples": list(self.sectional_samples),
            "mixed_plane_residual": self.mixed_plane_residual,
            "diagnostics": {k: v for k, v in self.diagnostics.items()},
        }


@dataclass(frozen=True, eq=False)
class MatchResult:
    """Outcome of the case matcher.

    consistent=False flags a summary that satisfies the hypotheses but
    contradicts a known classification fact (an impossible sign or
    dimension pattern); constant carries the curvature scale when one is
    determined.
    """

    case: str
    consistent: bool
    constant: float | None
    diagnostics: dict

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "consistent": self.consistent,
            "constant": self.constant,
            "diagnostics": {k: v for k, v in self.diagnostics.items()},
        }


def summarize_chart(chart: Chart, points, tol: float = 1e-6) -> CurvatureSummary:
    """Measure the matcher's inputs on a chart over the sample points."""
    pts = [tuple(float(x) for x in p) for p in points]
    if not pts:
        raise AnalysisError("summary needs at least one sample point")

    cf = 0.0
    ak = 0.0
    c2 = 0.0
    sectionals = []
    mixed = None
    clusters = None
    mult_signature = None
    diagnostics: dict = {}

    for p in pts:
        bundle = curvature_bundle(chart, p)
        report = classify_point(bundle, tol)
        cf = max(cf, report.residual_conformal_flat)
        ak = max(ak, report.residual_almost_kahler)
        c2 = max(c2, report.curvature_class_residuals[1])

        spectrum = ricci_spectrum(bundle, tol)
        mults = tuple(mult for _, mult in spectrum.clusters)
        if clusters is None:
            clusters = spectrum.clusters
            mult_signature = mults
        elif mults != mult_signature:
            diagnostics["cluster_mismatch"] = (
                f"cluster multiplicities vary across points: "
                f"{mult_signature} vs {mults}")

        fr = spectrum.frame
        for a, b in itertools.combinations(range(chart.dim), 2):
            sectionals.append(
                sectional_curvature(bundle, fr.vectors[a], fr.vectors[b]))

        mp = _mixed_plane_residual(bundle.riemann, bundle.J,
                                   _cluster_members(spectrum))
        if mp is not None:
            mixed = mp if mixed is None else max(mixed, mp)

    diagnostics["residual_conformal_flat"] = cf
    diagnostics["residual_almost_kahler"] = ak
    diagnostics["residual_id2"] = c2

    return CurvatureSummary(
        dim=chart.dim,
        tol=tol,
        conformally_flat=cf <= tol,
        ak2=ak <= tol and c2 <= tol,
        hypothesis_measured=True,
        clusters=clusters,
        sectional_samples=tuple(sectionals),
        mixed_plane_residual=mixed,
        diagnostics=diagnostics,
    )


def summarize_synthetic(synth, tol: float = 1e-6,
                        assume_ak2: bool = True) -> CurvatureSummary:
    """Summary from a synthetic curvature table (model point, g = identity).

    Synthetic curvature carries no derivative-of-J data, so the almost
    Kahler and class-2 flags cannot be measured; they are asserted when
    assume_ak2 is set and the summary records that they were assumptions.
    """
    dim = synth.dim
    cf = residual(synth.weyl, synth.riemann)

    w, v = _jacobi_eigh(synth.ricci)
    groups = _cluster_groups(w)
    clusters = tuple((float(np.mean(w[idx])), len(idx)) for idx in groups)
    members = [[v[:, k] for k in idx] for idx in groups]

    sectionals = []
    for a, b in itertools.combinations(range(dim), 2):
        x = v[:, a]
        y = v[:, b]
        num = float(np.einsum("ijkl,i,j,k,l->", synth.riemann, x, y, y, x))
        den = float((x @ x) * (y @ y) - (x @ y) ** 2)
        sectionals.append(num / den)

    mixed = _mixed_plane_residual(synth.riemann, synth.j, members)

    id2_residual = _class2_residual_of_values(synth.riemann, synth.j)
    diagnostics = {
        "residual_conformal_flat": cf,
        "residual_id2": id2_residual,
        "profile": synth.describe(),
    }
    if assume_ak2:
        diagnostics["ak_hypothesis"] = "asserted, not measured"

    return CurvatureSummary(
        dim=dim,
        tol=tol,
        conformally_flat=cf <= tol,
        ak2=assume_ak2 and id2_residual <= tol,
        hypothesis_measured=False,
        clusters=clusters,
        sectional_samples=tuple(sectionals),
        mixed_plane_residual=mixed,
        diagnostics=diagnostics,
    )


def _class2_residual_of_values(riemann: np.ndarray, j0: np.ndarray) -> float:
    """Class-2 curvature symmetry residual straight from components (g = I)."""
    jj = np.einsum("pi,qj,pqkl->ijkl", j0, j0, riemann)
    rhs = (jj + np.einsum("pi,rk,pjrl->ijkl", j0, j0, riemann)
           + np.einsum("pi,sl,pjks->ijkl", j0, j0, riemann))
    return residual(riemann - rhs, riemann)


def theorem_case_match(summary: CurvatureSummary) -> MatchResult:
    """Map a curvature summary to one of the classification outcomes.

    Decision tree over the Ricci cluster structure: one cluster means a
    constant-curvature candidate (flat, or negative curvature in the one
    admissible dimension); a 2 + (dim-2) split with opposite factor
    curvatures matches the product profiles; anything else is reported as
    not applicable with diagnostics.  Summaries that satisfy the hypotheses
    but contradict a known impossibility are flagged inconsistent rather
    than assigned a case.
    """
    tol = summary.tol
    diag = dict(summary.diagnostics)
    if summary.dim < 6 or summary.dim % 2:
        raise AnalysisError("the case matcher needs even dimension >= 6")

    if not (summary.conformally_flat and summary.ak2):
        diag["reason"] = ("hypotheses not met: needs conformal flatness and the "
                          "almost-Kahler class-2 structure")
        return MatchResult("not_applicable", True, None, diag)
    if "cluster_mismatch" in diag:
        diag["reason"] = "Ricci cluster structure varies across sample points"
        return MatchResult("not_applicable", True, None, diag)

    clusters = sorted(summary.clusters)

    if len(clusters) == 1:
        value, _ = clusters[0]
        kappa = value / (summary.dim - 1)
        samples = np.array(summary.sectional_samples, dtype=float)
        if samples.size:
            spread = float(np.max(np.abs(samples - kappa)))
            scale = 1.0 + abs(kappa) + float(np.max(np.abs(samples)))
            if spread > tol * scale:
                diag["reason"] = "Einstein but not of constant sectional curvature"
                diag["sectional_spread"] = spread
                return MatchResult("not_applicable", True, None, diag)
        diag["curvature"] = kappa
        if abs(kappa) <= tol:
            return MatchResult("case_a", True, 0.0, diag)
        if kappa < 0:
            if summary.dim == 6:
                return MatchResult("case_b", True, kappa, diag)
            diag["reason"] = ("almost-Kahler constant curvature in dimension >= 8 "
                              "forces the structure to be parallel, which "
                              "contradicts the negative curvature")
            return MatchResult("einstein_space_form", False, kappa, diag)
        diag["reason"] = ("almost-Kahler constant positive curvature is impossible "
                          "in dimension >= 4")
        return MatchResult("einstein_space_form", False, kappa, diag)

    if len(clusters) == 2:
        (v_lo, m_lo), (v_hi, m_hi) = clusters
        if sorted((m_lo, m_hi)) != [2, summary.dim - 2]:
            diag["reason"] = (f"eigenvalue multiplicities {m_lo}+{m_hi} match "
                              "no product profile")
            return MatchResult("not_applicable", True, None, diag)
        if m_lo == 2:
            small_value, big_value, big_mult = v_lo, v_hi, m_hi
        else:
            small_value, big_value, big_mult = v_hi, v_lo, m_lo
        kappa_big = big_value / (big_mult - 1)
        kappa_small = small_value  # 2-dim factor: Ricci = curvature * metric
        diag["factor_curvatures"] = (kappa_big, kappa_small)
        scale = 1.0 + max(abs(kappa_big), abs(kappa_small))
        if big_mult not in (4, 6):
            diag["reason"] = f"no case covers a {big_mult}+2 split"
            return MatchResult("not_applicable", True, None, diag)
        if abs(kappa_big + kappa_small) > tol * scale:
            diag["reason"] = "factor curvatures are not opposite"
            return MatchResult("not_applicable", True, None, diag)
        if kappa_big >= -tol * scale:
            diag["reason"] = ("product split needs strictly negative curvature "
                              "on the large factor")
            return MatchResult("not_applicable", True, None, diag)
        if (summary.mixed_plane_residual is not None
                and summary.mixed_plane_residual > tol):
            diag["reason"] = "mixed-plane curvature relation fails"
            diag["mixed_plane_residual"] = summary.mixed_plane_residual
            return MatchResult("not_applicable", True, None, diag)
        case = "case_c" if big_mult == 4 else "case_d"
        return MatchResult(case, True, kappa_small, diag)

    diag["reason"] = f"{len(clusters)} eigenvalue clusters"
    return MatchResult("not_applicable", True, None, diag)
