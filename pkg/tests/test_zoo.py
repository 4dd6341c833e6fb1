"""Gallery entries deliver exactly what their expected tables promise."""

import itertools

import numpy as np
import pytest

from ahlab import analysis, geometry, zoo
from ahlab.zoo import ZooError


def sample_points(chart, count=3):
    """Deterministic off-center points spread through the domain box."""
    fracs = (0.5, 0.37, 0.64, 0.45, 0.58)[:count]
    pts = []
    for k, frac in enumerate(fracs):
        p = []
        for i, (lo, hi) in enumerate(zip(chart.domain.lo, chart.domain.hi)):
            # stagger the fraction per axis so points avoid symmetry axes
            f = frac + 0.04 * ((i + k) % 3 - 1)
            p.append(lo + f * (hi - lo))
        pts.append(tuple(p))
    return pts


VERDICT_KEYS = ("kahler", "nearly_kahler", "almost_kahler",
                "class_1", "class_2", "class_3", "conformally_flat")


def assert_expected(entry, bundle):
    report = analysis.classify_point(bundle)
    verdicts = report.verdicts
    for key in VERDICT_KEYS:
        if key in entry.expected:
            assert verdicts[key] == entry.expected[key], (
                f"{entry.name}: verdict {key} is {verdicts[key]}, "
                f"table says {entry.expected[key]}")
    if "scalar" in entry.expected:
        want = entry.expected["scalar"]
        assert abs(bundle.scalar - want) <= 1e-6 * (1.0 + abs(want))
    if "sectional" in entry.expected:
        want = entry.expected["sectional"]
        for a, b in itertools.combinations(range(bundle.dim), 2):
            got = geometry.sectional_curvature(
                bundle, bundle.frame.vectors[a], bundle.frame.vectors[b])
            assert abs(got - want) <= 1e-6 * (1.0 + abs(want))
    if "holomorphic_sectional" in entry.expected:
        want = entry.expected["holomorphic_sectional"]
        for a in range(bundle.m):
            x = bundle.frame.vectors[a]
            got = geometry.sectional_curvature(bundle, x, bundle.J @ x)
            assert abs(got - want) <= 1e-6 * (1.0 + abs(want))
    if "ricci_spectrum" in entry.expected:
        spec = analysis.ricci_spectrum(bundle)
        want = entry.expected["ricci_spectrum"]
        assert len(spec.clusters) == len(want)
        for (got_v, got_m), (want_v, want_m) in zip(spec.clusters, want):
            assert got_m == want_m
            assert abs(got_v - want_v) <= 1e-6 * (1.0 + abs(want_v))


class TestExpectedTables:
    @pytest.mark.parametrize("entry", zoo.entries(), ids=lambda e: e.name)
    def test_table_holds_at_sample_points(self, entry):
        chart = entry.default_chart()
        for p in sample_points(chart):
            assert_expected(entry, geometry.curvature_bundle(chart, p))


class TestBuilders:
    def test_flat_kahler_dimensions(self):
        assert zoo.flat_kahler(1).dim == 2
        assert zoo.flat_kahler(4).dim == 8
        with pytest.raises(ZooError, match="m >= 1"):
            zoo.flat_kahler(0)

    def test_sphere2_needs_positive_curvature(self):
        with pytest.raises(ZooError, match="c > 0"):
            zoo.sphere2(-1.0)

    def test_hyperbolic_validation(self):
        with pytest.raises(ZooError, match="even"):
            zoo.hyperbolic(3, 1.0)
        with pytest.raises(ZooError, match="c > 0"):
            zoo.hyperbolic(4, -1.0)

    def test_s2_x_h2_validation(self):
        with pytest.raises(ZooError, match="c > 0"):
            zoo.s2_x_h2(-2.0)

    def test_param_override_scales_curvature(self):
        chart = zoo.get("sphere2").build(c=4.0)
        bundle = geometry.curvature_bundle(chart, (0.1, 0.2))
        assert abs(bundle.scalar - 8.0) <= 1e-9

    def test_unknown_override_rejected(self):
        with pytest.raises(ZooError, match="no parameter"):
            zoo.get("sphere2").build(radius=2)

    def test_scaled_product_chart(self):
        chart = zoo.get("product_s2_h2").build(c=2.0)
        pts = sample_points(chart, count=2)
        report = analysis.check_cf_ak2_chain(chart, pts)
        assert report.applicable
        assert report.passed


class TestProductCombinator:
    def test_spheres_cross_hyperbolic_plane(self):
        # both factors bind c to 1.0, so the shared symbol survives
        chart = zoo.product(zoo.sphere2(1.0), zoo.hyperbolic(2, 1.0))
        assert chart.dim == 4
        assert chart.params == {"c": 1.0}
        bundle = geometry.curvature_bundle(chart, (0.1, 0.2, 0.05, -0.1))
        assert abs(bundle.scalar) <= 1e-12
        spec = analysis.ricci_spectrum(bundle)
        assert [m for _, m in spec.clusters] == [2, 2]
        assert np.allclose([v for v, _ in spec.clusters], [-1.0, 1.0], atol=1e-9)

    def test_conflicting_parameters_inline(self):
        # c means +1 in the first factor and -4 in the second, so the
        # combinator must freeze the values into the expressions
        chart = zoo.product(zoo.sphere2(1.0), zoo.hyperbolic(2, 4.0))
        assert chart.params == {}
        bundle = geometry.curvature_bundle(chart, (0.1, 0.2, 0.05, -0.1))
        assert abs(bundle.scalar - (2.0 - 8.0)) <= 1e-9

    def test_agreeing_parameters_stay_symbolic(self):
        chart = zoo.product(zoo.sphere2(2.0), zoo.sphere2(2.0))
        assert chart.params == {"c": 2.0}
        bundle = geometry.curvature_bundle(chart, (0.1, 0.2, 0.05, -0.1))
        assert abs(bundle.scalar - 8.0) <= 1e-9

    def test_flat_times_flat_is_flat(self):
        chart = zoo.product(zoo.flat_kahler(1), zoo.flat_kahler(2))
        assert chart.dim == 6
        bundle = geometry.curvature_bundle(chart, (0.1,) * 6)
        assert np.max(np.abs(bundle.riemann)) == 0.0

    def test_domain_concatenates(self):
        a = zoo.sphere2(1.0)
        b = zoo.hyperbolic(2, 1.0)
        chart = zoo.product(a, b)
        assert chart.domain.lo == a.domain.lo + b.domain.lo
        assert chart.domain.hi == a.domain.hi + b.domain.hi

    def test_embedded_factor_rejected(self):
        with pytest.raises(geometry.GeometryError, match="direct"):
            zoo.product(zoo.sphere2(1.0), zoo.s6_nearly_kahler())


class TestSyntheticCurvature:
    def test_space_form_closed_forms(self):
        synth = zoo.space_form(6, -1.0)
        assert np.array_equal(synth.ricci, -5.0 * np.eye(6))
        assert synth.scalar == -30.0
        assert np.max(np.abs(synth.weyl)) <= 1e-12
        assert np.array_equal(synth.j @ synth.j, -np.eye(6))

    def test_space_form_riemann_symmetries(self):
        r = zoo.space_form(4, 2.0).riemann
        assert np.array_equal(r, -np.einsum("jikl->ijkl", r))
        assert np.array_equal(r, np.einsum("klij->ijkl", r))
        bianchi = r + np.einsum("jkil->ijkl", r) + np.einsum("kijl->ijkl", r)
        assert np.max(np.abs(bianchi)) == 0.0

    def test_product_blocks(self):
        synth = zoo.product_space_forms(4, -1.0, 2, 1.0)
        assert synth.dim == 6
        want = np.diag([-3.0, -3.0, -3.0, -3.0, 1.0, 1.0])
        assert np.array_equal(synth.ricci, want)
        assert synth.scalar == -10.0
        assert np.max(np.abs(synth.weyl)) <= 1e-12
        # no curvature couples the factors
        assert np.max(np.abs(synth.riemann[:4, :, :, 4:])) == 0.0

    def test_unbalanced_product_keeps_weyl(self):
        synth = zoo.product_space_forms(4, -1.0, 2, 0.5)
        assert np.max(np.abs(synth.weyl)) > 1e-3

    def test_odd_factor_rejected(self):
        with pytest.raises(ZooError, match="even"):
            zoo.space_form(5, 1.0)

    def test_describe(self):
        assert "6" in zoo.space_form(6, -1.0).describe()
        assert "product" in zoo.product_space_forms(4, -1, 2, 1).describe()

    def test_matcher_consumes_synthetics(self):
        summary = analysis.summarize_synthetic(zoo.product_space_forms(6, -1.0, 2, 1.0))
        match = analysis.theorem_case_match(summary)
        assert match.case == "case_d"
        assert match.constant == pytest.approx(1.0)


class TestRegistry:
    def test_names_unique_and_resolvable(self):
        names = [e.name for e in zoo.entries()]
        assert len(names) == len(set(names))
        for name in names:
            assert zoo.get(name).name == name

    def test_unknown_name_lists_alternatives(self):
        with pytest.raises(ZooError, match="flat_kahler"):
            zoo.get("does-not-exist")

    def test_every_entry_documented(self):
        for entry in zoo.entries():
            assert entry.summary
            assert entry.provenance
            assert entry.expected
