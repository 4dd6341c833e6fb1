"""Plain-text chart files: parse, validate, and canonically emit charts.

The format is line-oriented with brace-delimited sections and 1-based
indices::

    dim = 4
    params {
      c = 1.0
    }
    domain {
      lo = [-0.5, -0.5, -0.5, -0.5]
      hi = [0.5, 0.5, 0.5, 0.5]
    }
    metric {
      g[1][1] = 4 / (1 + c*(x1^2 + x2^2))^2
    }
    J {
      J[2][1] = 1
      J[1][2] = -1
    }

Unstated metric entries mirror their transpose or default to zero, and
unstated J entries default to zero, so only the informative half needs
writing.  Embedded charts replace metric/J with an embedding section::

    embedding {
      ambient_dim = 7
      phi[1] = x1
      ambient_product = cross-r7        # or inline: [[1,2,3], [1,4,5], ...]
    }

Emission is canonical: fixed section order, sorted parameters, upper
triangle of the metric, zero entries skipped.  Parsing what was emitted
reproduces the chart exactly, and equal charts emit byte-identical text,
which the CLI hashes to seed its point sampler.
"""

from __future__ import annotations

import re

import numpy as np

from . import expr
from .geometry import Box, Chart, Direct, Embedded
from .zoo import CROSS_TRIPLES_R7, cross_product_table


class ChartFileError(ValueError):
    """Malformed chart file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# named ambient product tables usable in embedding sections
NAMED_PRODUCTS = {
    "cross-r3": (3, ((1, 2, 3),)),
    "cross-r7": (7, CROSS_TRIPLES_R7),
}

_ENTRY_RE = re.compile(r"^(g|J)\[(\d+)\]\[(\d+)\]$")
_PHI_RE = re.compile(r"^phi\[(\d+)\]$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


def _strip(line: str) -> str:
    cut = line.find("#")
    if cut >= 0:
        line = line[:cut]
    return line.strip()


def _parse_vector(text: str, lineno: int) -> tuple:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ChartFileError("expected a [..] list", lineno)
    body = text[1:-1].strip()
    if not body:
        raise ChartFileError("empty list", lineno)
    try:
        return tuple(float(part) for part in body.split(","))
    except ValueError:
        raise ChartFileError(f"bad number in list {text!r}", lineno) from None


def _parse_triples(text: str, lineno: int) -> tuple:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ChartFileError("expected triples like [[1,2,3], [1,4,5]]", lineno)
    triples = []
    for chunk in re.findall(r"\[\s*\d+\s*,\s*\d+\s*,\s*\d+\s*\]", body[1:-1]):
        triples.append(tuple(int(v) for v in re.findall(r"\d+", chunk)))
    if not triples:
        raise ChartFileError("no triples found", lineno)
    return tuple(triples)


def _scan_sections(text: str):
    """Split into top-level assignments and named sections of (lineno, line)."""
    top = []
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if current is not None:
            if line == "}":
                current = None
                continue
            sections[current].append((lineno, line))
            continue
        if line.endswith("{"):
            name = line[:-1].strip()
            if not _NAME_RE.match(name):
                raise ChartFileError(f"bad section name {name!r}", lineno)
            if name in sections:
                raise ChartFileError(f"duplicate section {name!r}", lineno)
            sections[name] = []
            current = name
            continue
        if line == "}":
            raise ChartFileError("unmatched closing brace", lineno)
        top.append((lineno, line))
    if current is not None:
        raise ChartFileError(f"section {current!r} is never closed")
    return top, sections


def _split_assignment(line: str, lineno: int):
    if "=" not in line:
        raise ChartFileError(f"expected 'key = value', got {line!r}", lineno)
    key, _, value = line.partition("=")
    key = key.strip()
    value = value.strip()
    if not key or not value:
        raise ChartFileError(f"expected 'key = value', got {line!r}", lineno)
    return key, value


def parse_chart(text: str, name: str = "") -> Chart:
    """Parse chart file text into a Chart; raises ChartFileError on junk."""
    top, sections = _scan_sections(text)

    known = {"params", "domain", "metric", "J", "embedding"}
    for sec in sections:
        if sec not in known:
            raise ChartFileError(
                f"unknown section {sec!r}; expected one of {sorted(known)}")

    dim = None
    for lineno, line in top:
        key, value = _split_assignment(line, lineno)
        if key != "dim":
            raise ChartFileError(f"unknown top-level key {key!r}", lineno)
        try:
            dim = int(value)
        except ValueError:
            raise ChartFileError(f"dim must be an integer, got {value!r}",
                                 lineno) from None
    if dim is None:
        raise ChartFileError("missing required 'dim = <even integer>'")

    params = {}
    for lineno, line in sections.get("params", []):
        key, value = _split_assignment(line, lineno)
        if not _NAME_RE.match(key):
            raise ChartFileError(f"bad parameter name {key!r}", lineno)
        try:
            params[key] = float(value)
        except ValueError:
            raise ChartFileError(
                f"parameter {key!r} needs a numeric value, got {value!r}",
                lineno) from None
    param_names = set(params)

    domain = None
    if "domain" in sections:
        lo = hi = None
        for lineno, line in sections["domain"]:
            key, value = _split_assignment(line, lineno)
            if key == "lo":
                lo = _parse_vector(value, lineno)
            elif key == "hi":
                hi = _parse_vector(value, lineno)
            else:
                raise ChartFileError(f"domain knows 'lo' and 'hi', not {key!r}",
                                     lineno)
        if lo is None or hi is None:
            raise ChartFileError("domain section needs both lo and hi")
        if len(lo) != dim or len(hi) != dim:
            raise ChartFileError(
                f"domain bounds must have {dim} entries")
        domain = Box(lo, hi)

    has_direct = "metric" in sections or "J" in sections
    has_embedded = "embedding" in sections
    if has_direct and has_embedded:
        raise ChartFileError("give either metric/J sections or an embedding "
                             "section, not both")
    if not has_direct and not has_embedded:
        raise ChartFileError("chart needs metric/J sections or an embedding")

    def parse_expr(text_, lineno, edim):
        try:
            return expr.parse(text_, edim, param_names)
        except expr.ExprError as err:
            raise ChartFileError(str(err), lineno) from None

    if has_direct:
        zero = expr.parse("0")
        g_rows = [[None] * dim for _ in range(dim)]
        j_rows = [[zero] * dim for _ in range(dim)]
        for section, rows, label in (("metric", g_rows, "g"), ("J", j_rows, "J")):
            for lineno, line in sections.get(section, []):
                key, value = _split_assignment(line, lineno)
                match = _ENTRY_RE.match(key)
                if not match or match.group(1) != label:
                    raise ChartFileError(
                        f"expected {label}[i][j] = <expr>, got {key!r}", lineno)
                i, j = int(match.group(2)), int(match.group(3))
                if not (1 <= i <= dim and 1 <= j <= dim):
                    raise ChartFileError(
                        f"index out of range in {key} (dim = {dim})", lineno)
                rows[i - 1][j - 1] = parse_expr(value, lineno, dim)
        # unstated metric entries mirror the transpose, then default to zero
        for i in range(dim):
            for j in range(dim):
                if g_rows[i][j] is None:
                    g_rows[i][j] = g_rows[j][i] if g_rows[j][i] is not None else zero
        presentation = Direct(tuple(tuple(r) for r in g_rows),
                              tuple(tuple(r) for r in j_rows))
    else:
        ambient = None
        phi = {}
        product = None
        for lineno, line in sections["embedding"]:
            key, value = _split_assignment(line, lineno)
            if key == "ambient_dim":
                try:
                    ambient = int(value)
                except ValueError:
                    raise ChartFileError("ambient_dim must be an integer",
                                         lineno) from None
                continue
            if key == "ambient_product":
                product = (lineno, value)
                continue
            match = _PHI_RE.match(key)
            if match:
                phi[int(match.group(1))] = (lineno, value)
                continue
            raise ChartFileError(
                f"embedding knows ambient_dim, phi[k], ambient_product; "
                f"got {key!r}", lineno)
        if ambient is None:
            raise ChartFileError("embedding needs ambient_dim")
        if product is None:
            raise ChartFileError("embedding needs ambient_product")
        if set(phi) != set(range(1, ambient + 1)):
            raise ChartFileError(
                f"embedding needs phi[1] .. phi[{ambient}], "
                f"got {sorted(phi)}")
        components = tuple(parse_expr(phi[k][1], phi[k][0], dim)
                           for k in range(1, ambient + 1))
        lineno, value = product
        if value in NAMED_PRODUCTS:
            n, triples = NAMED_PRODUCTS[value]
            if n != ambient:
                raise ChartFileError(
                    f"product {value!r} lives in dimension {n}, "
                    f"not {ambient}", lineno)
            table = cross_product_table(triples, ambient)
        elif value.startswith("["):
            triples = _parse_triples(value, lineno)
            for t in triples:
                if not all(1 <= v <= ambient for v in t):
                    raise ChartFileError(
                        f"triple {t} out of range for ambient_dim {ambient}",
                        lineno)
            table = cross_product_table(triples, ambient)
        else:
            raise ChartFileError(
                f"unknown product {value!r}; name one of "
                f"{sorted(NAMED_PRODUCTS)} or inline [[i,j,k], ...]", lineno)
        presentation = Embedded(phi=components, ambient_dim=ambient,
                                product=table)

    return Chart(dim=dim, presentation=presentation, params=params,
                 domain=domain, name=name)


def load_chart(path: str) -> Chart:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    name = re.sub(r"\.[^.]*$", "", path.replace("\\", "/").rsplit("/", 1)[-1])
    return parse_chart(text, name=name)


# ---------------------------------------------------------------------------
# canonical emission


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _table_triples(table: np.ndarray) -> tuple:
    """Recover positive 1-based triples; error if the table is not of that form."""
    n = table.shape[0]
    triples = []
    rebuilt = np.zeros_like(table)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                v = table[i, j, k]
                if v == 0.0:
                    continue
                if v not in (1.0, -1.0):
                    raise ChartFileError(
                        "only unit structure constants can be written as triples")
                if v == 1.0:
                    triples.append((i + 1, j + 1, k + 1))
                    rebuilt[i, j, k] = 1.0
                    rebuilt[j, i, k] = -1.0
                else:
                    triples.append((j + 1, i + 1, k + 1))
                    rebuilt[i, j, k] = -1.0
                    rebuilt[j, i, k] = 1.0
    if not np.array_equal(rebuilt, table):
        raise ChartFileError("ambient product is not antisymmetric; "
                             "cannot be written as triples")
    return tuple(sorted(triples))


def _product_value(table: np.ndarray) -> str:
    for name, (n, triples) in sorted(NAMED_PRODUCTS.items()):
        if table.shape[0] == n and np.array_equal(
                table, cross_product_table(triples, n)):
            return name
    triples = _table_triples(table)
    return "[" + ", ".join(f"[{i},{j},{k}]" for (i, j, k) in triples) + "]"


def emit_chart(chart: Chart) -> str:
    """Canonical chart file text; parse_chart inverts it exactly."""
    lines = [f"dim = {chart.dim}"]
    if chart.params:
        lines.append("params {")
        for key in sorted(chart.params):
            lines.append(f"  {key} = {_fmt_float(chart.params[key])}")
        lines.append("}")
    lines.append("domain {")
    lines.append("  lo = [" + ", ".join(_fmt_float(v) for v in chart.domain.lo) + "]")
    lines.append("  hi = [" + ", ".join(_fmt_float(v) for v in chart.domain.hi) + "]")
    lines.append("}")

    pres = chart.presentation
    if isinstance(pres, Direct):
        zero = expr.parse("0")
        lines.append("metric {")
        for i in range(chart.dim):
            for j in range(i, chart.dim):
                if pres.g[i][j] == zero and pres.g[j][i] == zero:
                    continue
                lines.append(f"  g[{i + 1}][{j + 1}] = {expr.pretty(pres.g[i][j])}")
                if pres.g[j][i] != pres.g[i][j]:
                    lines.append(
                        f"  g[{j + 1}][{i + 1}] = {expr.pretty(pres.g[j][i])}")
        lines.append("}")
        lines.append("J {")
        for i in range(chart.dim):
            for j in range(chart.dim):
                if pres.j[i][j] != zero:
                    lines.append(
                        f"  J[{i + 1}][{j + 1}] = {expr.pretty(pres.j[i][j])}")
        lines.append("}")
    else:
        lines.append("embedding {")
        lines.append(f"  ambient_dim = {pres.ambient_dim}")
        for k, component in enumerate(pres.phi, start=1):
            lines.append(f"  phi[{k}] = {expr.pretty(component)}")
        lines.append(f"  ambient_product = {_product_value(pres.product)}")
        lines.append("}")
    return "\n".join(lines) + "\n"


def save_chart(chart: Chart, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(emit_chart(chart))
