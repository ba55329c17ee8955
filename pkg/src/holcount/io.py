"""Instance documents: JSON loading, validation, and canonical dumping.

The on-disk format is a UTF-8 JSON object with keys ``vertices`` (list
of string ids), ``edges`` (list of [u, v] pairs), optional
``half_edges`` (list of [v] singletons), and ``signatures`` (map from
vertex to either an explicit list of rationals or the shorthands
``"atmost:b"`` / ``"atleast:b"``, expanded against the vertex degree).
Rationals are JSON integers or strings ``"p/q"``; floats are rejected
so no value ever passes through binary floating point.

Loading is strict: structural problems raise :class:`ParseError` with
the offending field, and documents that parse but violate an instance
invariant raise :class:`ValidationError` naming the rule and vertex.
Dumping produces a canonical form — explicit signature lists, integers
where the denominator is 1, otherwise lowest-terms ``"p/q"`` with a
positive denominator — so dump(load(text)) is stable.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from .errors import ParseError, ValidationError
from .graphs import Graph, build_graph
from .instances import (
    HolantInstance,
    Signature,
    atleast_signature,
    atmost_signature,
    validate_instance,
)

_RATIONAL_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")
_SHORTHAND_RE = re.compile(r"^(atmost|atleast):(\d+)$")

_TOP_KEYS = {"vertices", "edges", "half_edges", "signatures"}


def parse_rational(value: Any, where: str) -> Fraction:
    """An exact rational from a JSON integer or a "p/q" string."""

    if isinstance(value, bool):
        raise ParseError(f"field '{where}': booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RATIONAL_RE.match(value):
            raise ParseError(f"field '{where}': {value!r} is not an integer or 'p/q' string")
        return Fraction(value)
    if isinstance(value, float):
        raise ParseError(f"field '{where}': floats are rejected; write rationals as 'p/q'")
    raise ParseError(f"field '{where}': expected a rational, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    """Canonical "p/q" with q > 0 in lowest terms, including q = 1."""

    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def rational_or_int(value: Fraction) -> int | str:
    """Canonical JSON form for documents: int when integral, else "p/q"."""

    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return format_rational(value)


def _string_list(raw: Any, where: str, length: int) -> list[str]:
    if not isinstance(raw, list) or len(raw) != length or not all(
        isinstance(x, str) for x in raw
    ):
        raise ParseError(f"field '{where}': expected a list of {length} vertex ids")
    return list(raw)


def loads_instance(text: str) -> HolantInstance:
    """Parse and validate an instance document from JSON text.

    Raises:
        ParseError: malformed JSON or a structural problem, with location.
        ValidationError: the parsed instance violates an invariant.
    """

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise ParseError("top level: expected a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ParseError(f"top level: unknown keys {unknown}")
    for key in ("vertices", "edges", "signatures"):
        if key not in doc:
            raise ParseError(f"top level: missing required key '{key}'")

    raw_vertices = doc["vertices"]
    if not isinstance(raw_vertices, list) or not all(
        isinstance(v, str) for v in raw_vertices
    ):
        raise ParseError("field 'vertices': expected a list of strings")

    raw_edges = doc["edges"]
    if not isinstance(raw_edges, list):
        raise ParseError("field 'edges': expected a list of [u, v] pairs")
    edges = [
        tuple(_string_list(pair, f"edges[{i}]", 2)) for i, pair in enumerate(raw_edges)
    ]

    raw_half = doc.get("half_edges", [])
    if not isinstance(raw_half, list):
        raise ParseError("field 'half_edges': expected a list of [v] singletons")
    half_edges = [
        tuple(_string_list(stub, f"half_edges[{i}]", 1))
        for i, stub in enumerate(raw_half)
    ]

    try:
        graph = build_graph(raw_vertices, edges, half_edges)
    except Exception as err:
        raise ParseError(f"graph: {err}") from err

    raw_sigs = doc["signatures"]
    if not isinstance(raw_sigs, dict):
        raise ParseError("field 'signatures': expected an object keyed by vertex")
    unknown_sigs = sorted(set(raw_sigs) - set(graph.vertices))
    if unknown_sigs:
        raise ParseError(f"field 'signatures': unknown vertices {unknown_sigs}")
    missing = [v for v in graph.vertices if v not in raw_sigs]
    if missing:
        raise ParseError(f"field 'signatures': missing vertices {missing}")

    signatures: dict[str, Signature] = {}
    for v in graph.vertices:
        raw = raw_sigs[v]
        where = f"signatures['{v}']"
        if isinstance(raw, str):
            match = _SHORTHAND_RE.match(raw)
            if not match:
                raise ParseError(
                    f"field '{where}': expected 'atmost:b', 'atleast:b', or a value list"
                )
            kind, bound = match.group(1), int(match.group(2))
            maker = atmost_signature if kind == "atmost" else atleast_signature
            signatures[v] = maker(bound, graph.degree(v))
        elif isinstance(raw, list):
            values = tuple(
                parse_rational(x, f"{where}[{k}]") for k, x in enumerate(raw)
            )
            if not values:
                raise ParseError(f"field '{where}': empty signature")
            signatures[v] = Signature(values)
        else:
            raise ParseError(
                f"field '{where}': expected 'atmost:b', 'atleast:b', or a value list"
            )

    instance = HolantInstance(graph, signatures)
    report = validate_instance(instance)
    if not report.ok:
        first = report.first
        raise ValidationError(f"{first.rule} at vertex {first.vertex!r}: {first.detail}")
    return instance


def load_instance(path: str) -> HolantInstance:
    """Load an instance document from a file path ("-" reads stdin)."""

    if path == "-":
        import sys

        return loads_instance(sys.stdin.read())
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror or err}") from err
    return loads_instance(text)


def instance_document(instance: HolantInstance) -> dict:
    """The canonical JSON-ready document for an instance."""

    graph: Graph = instance.graph
    doc: dict[str, Any] = {
        "vertices": list(graph.vertices),
        "edges": [list(pair) for pair in graph.normal_edges],
        "signatures": {
            v: [rational_or_int(x) for x in instance.signature_of(v).values]
            for v in graph.vertices
        },
    }
    if graph.half_edges:
        doc["half_edges"] = [list(stub) for stub in graph.half_edges]
    return doc


def dump_instance(instance: HolantInstance) -> str:
    """Canonical JSON text; dump(load(text)) is stable for canonical input."""

    return json.dumps(instance_document(instance), sort_keys=True, indent=2)
