"""Input parsing and output rendering for the command-line tool.

Input is a small text format::

    # comments start with '#'
    kind: distance_matrix        # or similarity_matrix, points, graph
    labels: a, b, c              # optional
    0, 1, 2
    1, 0, 1
    2, 1, 0

A file without a ``kind:`` header is read as a plain CSV distance matrix.
Graph tables hold one ``head, tail`` edge per row (0-based vertices); an optional
``vertices: count`` header adds isolated trailing vertices.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .linalg import SymmetricMatrix
from .magnitude import require_unit_diagonal
from .metric import MetricSpace, path_metric_graph, similarity_matrix

KINDS = ("distance_matrix", "similarity_matrix", "points", "graph")
_HEADER = re.compile(r"^([A-Za-z_][\w-]*)\s*:\s*(.*)$")


@dataclass(frozen=True, eq=False)
class InputDocument:
    kind: str
    table: np.ndarray
    metadata: dict = field(default_factory=dict)
    digest: str = ""

    @property
    def labels(self):
        raw = self.metadata.get("labels")
        return [part.strip() for part in raw.split(",")] if raw else None

    @property
    def is_metric(self) -> bool:
        return self.kind != "similarity_matrix"

    def metric_space(self) -> MetricSpace:
        if self.kind == "distance_matrix":
            return MetricSpace(self.table, self.labels)
        if self.kind == "points":
            return MetricSpace.from_points(self.table, self.labels)
        if self.kind == "graph":
            edges = self.table.astype(int)
            n_vertices = int(self.metadata.get("vertices", edges.max() + 1 if edges.size else 0))
            return path_metric_graph(edges, n_vertices, self.labels)
        raise InvalidInput("a similarity matrix does not define a metric space")

    def similarity(self, scale: float = 1.0) -> SymmetricMatrix:
        if self.kind == "similarity_matrix":
            return require_unit_diagonal(SymmetricMatrix(self.table))
        return similarity_matrix(self.metric_space(), scale)


def _parse_row(line: str, lineno: int) -> list[float]:
    try:
        return [float(tok) for tok in line.split(",")]
    except ValueError:
        raise InvalidInput(f"line {lineno}: not a comma-separated row of numbers: {line!r}") from None


def parse_input(text: str) -> InputDocument:
    """Parse and validate an input document."""
    metadata: dict[str, str] = {}
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = _HEADER.match(line)
        if header and not rows:
            metadata[header.group(1).lower()] = header.group(2).strip()
            continue
        rows.append(_parse_row(line, lineno))

    kind = metadata.get("kind", "distance_matrix")
    if kind not in KINDS:
        raise InvalidInput(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if not rows:
        raise InvalidInput("no numeric rows")
    if len({len(row) for row in rows}) != 1:
        raise InvalidInput("rows have different lengths")
    table = np.array(rows)
    if not np.all(np.isfinite(table)):
        raise InvalidInput("non-finite number in table")
    if kind in ("distance_matrix", "similarity_matrix") and table.shape[0] != table.shape[1]:
        raise InvalidInput(f"{kind} must be square, got {table.shape[0]}x{table.shape[1]}")
    if kind == "graph" and (table.shape[1] != 2 or np.any(table != np.round(table)) or np.any(table < 0)):
        raise InvalidInput("graph rows must be pairs of non-negative vertex indices")

    doc = InputDocument(kind, table, metadata, "sha256:" + hashlib.sha256(text.encode()).hexdigest())
    # validate eagerly so malformed input is reported before any computation
    if kind == "similarity_matrix":
        doc.similarity()
    else:
        doc.metric_space()
    return doc


# -- output --------------------------------------------------------------------

def _number(value: float) -> str:
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    return format(value, ".17g")


def to_jsonable(obj):
    """Convert numpy containers and scalars into plain Python values."""
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def render_structured(doc, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(doc, dict):
        if not doc:
            return "{}"
        items = [f"{pad}{_string(key)}: {render_structured(value, indent, _level + 1)}" for key, value in doc.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(doc, list):
        if not doc:
            return "[]"
        if all(not isinstance(item, (dict, list)) for item in doc):
            return "[" + ", ".join(render_structured(item) for item in doc) + "]"
        items = [pad + render_structured(item, indent, _level + 1) for item in doc]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(doc, bool):
        return "true" if doc else "false"
    if doc is None:
        return "null"
    if isinstance(doc, int):
        return str(doc)
    if isinstance(doc, float):
        return _number(doc)
    return _string(str(doc))


def _string(text: str) -> str:
    return json.dumps(text)


def render_human(doc, prefix: str = "") -> str:
    lines = []
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.append(render_human(value, name + "."))
        elif isinstance(value, list) and value and isinstance(value[0], (list, dict)):
            for i, item in enumerate(value):
                if isinstance(item, dict):
                    lines.append(render_human(item, f"{name}[{i}]."))
                else:
                    lines.append(f"{name}[{i}]: " + ", ".join(_human_scalar(entry) for entry in item))
        elif isinstance(value, list):
            lines.append(f"{name}: " + ", ".join(_human_scalar(entry) for entry in value))
        else:
            lines.append(f"{name}: {_human_scalar(value)}")
    return "\n".join(line for line in lines if line)


def _human_scalar(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return "-"
    return str(value)
