"""Chart file parsing, validation errors, and canonical emission."""

import numpy as np
import pytest

from ahlab import chartfile, expr, geometry, zoo
from ahlab.chartfile import ChartFileError, emit_chart, load_chart, parse_chart
from ahlab.geometry import Box, Chart, Direct, Embedded


MINIMAL = """
dim = 2
metric {
  g[1][1] = 1
  g[2][2] = 1
}
J {
  J[1][2] = -1
  J[2][1] = 1
}
"""


def charts_equal(a: Chart, b: Chart) -> bool:
    if (a.dim, a.params, a.domain) != (b.dim, b.params, b.domain):
        return False
    pa, pb = a.presentation, b.presentation
    if isinstance(pa, Direct) != isinstance(pb, Direct):
        return False
    if isinstance(pa, Direct):
        return pa.g == pb.g and pa.j == pb.j
    return (pa.phi == pb.phi and pa.ambient_dim == pb.ambient_dim
            and np.array_equal(pa.product, pb.product))


class TestRoundTrip:
    @pytest.mark.parametrize("name", [e.name for e in zoo.entries()])
    def test_zoo_entry_survives_emit_and_parse(self, name):
        chart = zoo.get(name).default_chart()
        text = emit_chart(chart)
        again = parse_chart(text, name=chart.name)
        assert charts_equal(chart, again)
        # canonical emission is a fixed point
        assert emit_chart(again) == text

    @pytest.mark.parametrize("name", [e.name for e in zoo.entries()])
    def test_shipped_file_matches_builder(self, name):
        path = zoo.shipped_chart_path(name)
        loaded = load_chart(path)
        assert emit_chart(loaded) == emit_chart(zoo.get(name).default_chart())

    def test_reparsed_chart_reproduces_curvature_exactly(self):
        chart = zoo.get("product_s2_h2").default_chart()
        again = parse_chart(emit_chart(chart))
        p = (0.11, -0.07, 0.2, 0.05)
        b1 = geometry.curvature_bundle(chart, p)
        b2 = geometry.curvature_bundle(again, p)
        assert np.array_equal(b1.riemann, b2.riemann)
        assert np.array_equal(b1.nabla_j, b2.nabla_j)
        assert b1.scalar == b2.scalar

    def test_load_chart_names_by_stem(self, tmp_path):
        path = tmp_path / "my_surface.chart"
        path.write_text(MINIMAL, encoding="utf-8")
        chart = load_chart(str(path))
        assert chart.name == "my_surface"

    def test_save_then_load(self, tmp_path):
        chart = zoo.sphere2(2.0)
        path = tmp_path / "s.chart"
        chartfile.save_chart(chart, str(path))
        assert charts_equal(chart, load_chart(str(path)))


class TestParsing:
    def test_comments_and_blank_lines_ignored(self):
        text = MINIMAL.replace("dim = 2", "# full-line comment\n\ndim = 2  # trailing")
        chart = parse_chart(text)
        assert chart.dim == 2

    def test_missing_domain_defaults_to_unit_box(self):
        chart = parse_chart(MINIMAL)
        assert chart.domain == Box((-1.0, -1.0), (1.0, 1.0))

    def test_metric_mirrors_unstated_transpose(self):
        text = """
dim = 2
metric {
  g[1][1] = 1 + x2^2
  g[1][2] = x1*x2
  g[2][2] = 2
}
J { J[1][2] = -1
    J[2][1] = 1 }
"""
        # the one-line J body above is intentionally invalid: sections are
        # line-oriented, so the opener must end the line
        with pytest.raises(ChartFileError):
            parse_chart(text)
        text = text.replace("J { J[1][2] = -1\n    J[2][1] = 1 }",
                            "J {\n  J[1][2] = -1\n  J[2][1] = 1\n}")
        chart = parse_chart(text)
        g = chart.presentation.g
        assert g[1][0] == g[0][1] == expr.parse("x1*x2", 2)

    def test_unstated_j_entries_are_zero(self):
        chart = parse_chart(MINIMAL)
        zero = expr.parse("0")
        assert chart.presentation.j[0][0] == zero
        assert chart.presentation.j[1][1] == zero

    def test_explicit_zero_beats_mirroring(self):
        text = """
dim = 2
metric {
  g[1][2] = x1
  g[2][1] = 0
  g[1][1] = 1
  g[2][2] = 1
}
J {
  J[1][2] = -1
  J[2][1] = 1
}
"""
        chart = parse_chart(text)
        assert chart.presentation.g[1][0] == expr.parse("0")

    def test_params_feed_expressions(self):
        text = """
dim = 2
params {
  a = 2.5
}
metric {
  g[1][1] = a
  g[2][2] = a
}
J {
  J[1][2] = -1
  J[2][1] = 1
}
"""
        chart = parse_chart(text)
        assert chart.params == {"a": 2.5}
        bundle = geometry.curvature_bundle(chart, (0.0, 0.0))
        assert bundle.g[0, 0] == 2.5

    def test_named_ambient_product(self):
        text = """
dim = 2
domain {
  lo = [-0.3, -0.3]
  hi = [0.3, 0.3]
}
embedding {
  ambient_dim = 3
  phi[1] = x1
  phi[2] = x2
  phi[3] = sqrt(1 - x1^2 - x2^2)
  ambient_product = cross-r3
}
"""
        chart = parse_chart(text)
        pres = chart.presentation
        assert isinstance(pres, Embedded)
        assert pres.product[0, 1, 2] == 1.0
        assert pres.product[1, 0, 2] == -1.0
        # orthographic hemisphere patch of the unit sphere: curvature 1
        bundle = geometry.curvature_bundle(chart, (0.1, -0.2))
        x = np.array([1.0, 0.0])
        y = np.array([0.0, 1.0])
        assert abs(geometry.sectional_curvature(bundle, x, y) - 1.0) <= 1e-9

    def test_inline_triples(self):
        text = """
dim = 2
embedding {
  ambient_dim = 3
  phi[1] = x1
  phi[2] = x2
  phi[3] = 1 + x1*x2
  ambient_product = [[1, 2, 3]]
}
"""
        pres = parse_chart(text).presentation
        named = zoo.cross_product_table(((1, 2, 3),), 3)
        assert np.array_equal(pres.product, named)


def _expect_error(text, fragment, line=None):
    with pytest.raises(ChartFileError) as exc:
        parse_chart(text)
    assert fragment in str(exc.value)
    if line is not None:
        assert exc.value.line == line
        assert f"line {line}:" in str(exc.value)


class TestParseErrors:
    def test_missing_dim(self):
        _expect_error("metric {\n}\nJ {\n}\n", "missing required 'dim")

    def test_dim_not_integer(self):
        _expect_error("dim = two\nmetric {\n}\nJ {\n}\n",
                      "dim must be an integer", line=1)

    def test_unknown_top_level_key(self):
        _expect_error("dim = 2\nradius = 3\nmetric {\n}\nJ {\n}\n",
                      "unknown top-level key 'radius'", line=2)

    def test_unknown_section(self):
        _expect_error("dim = 2\nvolume {\n}\nmetric {\n}\nJ {\n}\n",
                      "unknown section 'volume'")

    def test_duplicate_section(self):
        _expect_error("dim = 2\nmetric {\n}\nmetric {\n}\nJ {\n}\n",
                      "duplicate section 'metric'", line=4)

    def test_unclosed_section(self):
        _expect_error("dim = 2\nmetric {\n  g[1][1] = 1\n",
                      "never closed")

    def test_stray_closing_brace(self):
        _expect_error("dim = 2\n}\nmetric {\n}\nJ {\n}\n",
                      "unmatched closing brace", line=2)

    def test_bad_assignment(self):
        _expect_error("dim = 2\nmetric {\n  g[1][1]\n}\nJ {\n}\n",
                      "expected 'key = value'", line=3)

    def test_bad_parameter_name(self):
        _expect_error("dim = 2\nparams {\n  2c = 1\n}\nmetric {\n}\nJ {\n}\n",
                      "bad parameter name", line=3)

    def test_parameter_needs_number(self):
        _expect_error("dim = 2\nparams {\n  c = x1\n}\nmetric {\n}\nJ {\n}\n",
                      "needs a numeric value", line=3)

    def test_domain_unknown_key(self):
        _expect_error(
            "dim = 2\ndomain {\n  mid = [0, 0]\n}\nmetric {\n}\nJ {\n}\n",
            "domain knows 'lo' and 'hi'", line=3)

    def test_domain_needs_both_bounds(self):
        _expect_error("dim = 2\ndomain {\n  lo = [-1, -1]\n}\nmetric {\n}\nJ {\n}\n",
                      "needs both lo and hi")

    def test_domain_wrong_length(self):
        _expect_error(
            "dim = 2\ndomain {\n  lo = [-1]\n  hi = [1]\n}\nmetric {\n}\nJ {\n}\n",
            "must have 2 entries")

    def test_domain_not_a_list(self):
        _expect_error(
            "dim = 2\ndomain {\n  lo = -1, -1\n  hi = [1, 1]\n}\nmetric {\n}\nJ {\n}\n",
            "expected a [..] list", line=3)

    def test_domain_bad_number(self):
        _expect_error(
            "dim = 2\ndomain {\n  lo = [-1, oops]\n  hi = [1, 1]\n}\nmetric {\n}\nJ {\n}\n",
            "bad number in list", line=3)

    def test_both_presentations_rejected(self):
        _expect_error(
            "dim = 2\nmetric {\n}\nJ {\n}\nembedding {\n  ambient_dim = 3\n}\n",
            "not both")

    def test_no_presentation_rejected(self):
        _expect_error("dim = 2\n", "needs metric/J sections or an embedding")

    def test_metric_entry_key_shape(self):
        _expect_error("dim = 2\nmetric {\n  g[1] = 1\n}\nJ {\n}\n",
                      "expected g[i][j]", line=3)

    def test_j_entry_in_metric_section(self):
        _expect_error("dim = 2\nmetric {\n  J[1][1] = 1\n}\nJ {\n}\n",
                      "expected g[i][j]", line=3)

    def test_index_out_of_range(self):
        _expect_error("dim = 2\nmetric {\n  g[3][1] = 1\n}\nJ {\n}\n",
                      "index out of range", line=3)

    def test_expression_error_carries_line(self):
        _expect_error("dim = 2\nmetric {\n  g[1][1] = 1 +\n}\nJ {\n}\n",
                      "line 3:", line=3)

    def test_coordinate_beyond_dim_rejected(self):
        _expect_error("dim = 2\nmetric {\n  g[1][1] = x3\n}\nJ {\n}\n",
                      "line 3:", line=3)

    def test_unknown_parameter_in_expression(self):
        _expect_error("dim = 2\nmetric {\n  g[1][1] = c\n}\nJ {\n}\n",
                      "line 3:", line=3)

    def test_embedding_needs_ambient_dim(self):
        _expect_error(
            "dim = 2\nembedding {\n  phi[1] = x1\n  ambient_product = cross-r3\n}\n",
            "needs ambient_dim")

    def test_embedding_needs_product(self):
        _expect_error(
            "dim = 2\nembedding {\n  ambient_dim = 3\n  phi[1] = x1\n"
            "  phi[2] = x2\n  phi[3] = 1\n}\n",
            "needs ambient_product")

    def test_embedding_needs_all_components(self):
        _expect_error(
            "dim = 2\nembedding {\n  ambient_dim = 3\n  phi[1] = x1\n"
            "  phi[3] = 1\n  ambient_product = cross-r3\n}\n",
            "phi[1] .. phi[3]")

    def test_embedding_unknown_key(self):
        _expect_error(
            "dim = 2\nembedding {\n  ambient_dim = 3\n  psi[1] = x1\n}\n",
            "embedding knows", line=4)

    def test_named_product_dimension_mismatch(self):
        _expect_error(
            "dim = 2\nembedding {\n  ambient_dim = 7\n" +
            "".join(f"  phi[{k}] = x1\n" for k in range(1, 8)) +
            "  ambient_product = cross-r3\n}\n",
            "lives in dimension 3")

    def test_unknown_product_name(self):
        _expect_error(
            "dim = 2\nembedding {\n  ambient_dim = 3\n  phi[1] = x1\n"
            "  phi[2] = x2\n  phi[3] = 1\n  ambient_product = octonions\n}\n",
            "unknown product 'octonions'")

    def test_triple_out_of_range(self):
        _expect_error(
            "dim = 2\nembedding {\n  ambient_dim = 3\n  phi[1] = x1\n"
            "  phi[2] = x2\n  phi[3] = 1\n  ambient_product = [[1, 2, 4]]\n}\n",
            "out of range")

    def test_empty_triples(self):
        _expect_error(
            "dim = 2\nembedding {\n  ambient_dim = 3\n  phi[1] = x1\n"
            "  phi[2] = x2\n  phi[3] = 1\n  ambient_product = []\n}\n",
            "no triples")


class TestEmission:
    def test_zero_rows_skipped(self):
        chart = zoo.flat_kahler(1)
        text = emit_chart(chart)
        assert "g[1][2]" not in text
        assert "g[1][1] = 1" in text

    def test_named_product_recognized(self):
        chart = zoo.s6_nearly_kahler()
        assert "ambient_product = cross-r7" in emit_chart(chart)

    def test_unnamed_table_emitted_inline(self):
        table = zoo.cross_product_table(((1, 2, 3),), 4)
        chart = Chart(dim=2,
                      presentation=Embedded(
                          phi=tuple(expr.parse(s, 2) for s in
                                    ("x1", "x2", "x1*x2", "1")),
                          ambient_dim=4, product=table),
                      domain=Box((-0.5, -0.5), (0.5, 0.5)))
        text = emit_chart(chart)
        # the builder closes each triple cyclically, so emission lists the
        # whole (sorted) cyclic family; parsing it rebuilds the same table
        assert "ambient_product = [[1,2,3], [2,3,1], [3,1,2]]" in text
        assert charts_equal(parse_chart(text), chart)

    def test_non_unit_table_rejected(self):
        table = zoo.cross_product_table(((1, 2, 3),), 3) * 0.5
        chart = Chart(dim=2,
                      presentation=Embedded(
                          phi=tuple(expr.parse(s, 2) for s in ("x1", "x2", "1")),
                          ambient_dim=3, product=table))
        with pytest.raises(ChartFileError, match="unit structure constants"):
            emit_chart(chart)

    def test_non_antisymmetric_table_rejected(self):
        table = zoo.cross_product_table(((1, 2, 3),), 3)
        table[1, 0, 2] = 1.0  # same sign as its transpose
        chart = Chart(dim=2,
                      presentation=Embedded(
                          phi=tuple(expr.parse(s, 2) for s in ("x1", "x2", "1")),
                          ambient_dim=3, product=table))
        with pytest.raises(ChartFileError, match="not antisymmetric"):
            emit_chart(chart)

    def test_asymmetric_metric_round_trips(self):
        # the file layer is agnostic about symmetry; both halves survive
        g = ((expr.parse("1"), expr.parse("x1", 2)),
             (expr.parse("0"), expr.parse("1")))
        j = ((expr.parse("0"), expr.parse("-1")),
             (expr.parse("1"), expr.parse("0")))
        chart = Chart(dim=2, presentation=Direct(g, j))
        text = emit_chart(chart)
        assert "g[1][2] = x1" in text
        assert "g[2][1] = 0" in text
        assert charts_equal(parse_chart(text), chart)

    def test_params_sorted_and_exact(self):
        chart = Chart(dim=2,
                      presentation=Direct(
                          ((expr.parse("b", param_names={"b"}), expr.parse("0")),
                           (expr.parse("0"), expr.parse("a", param_names={"a"}))),
                          ((expr.parse("0"), expr.parse("-1")),
                           (expr.parse("1"), expr.parse("0")))),
                      params={"b": 2.0, "a": 0.1})
        text = emit_chart(chart)
        assert text.index("a = 0.1") < text.index("b = 2.0")
        assert parse_chart(text).params == {"a": 0.1, "b": 2.0}
