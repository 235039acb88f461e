"""Reading operator files written by the CLI (text or JSON)."""
from __future__ import annotations

import json
import re
from typing import List, Optional

from .determining_solver import EtaMatrix
from .errors import MalformedInput
from .graded_poly import ZERO, parse_polynomial
from .operator_engine import CanonicalOperator, Form

_SECTION = re.compile(r"^\[(?P<name>[^\]]+)\](?P<rest>.*)$")
_ENTRY = re.compile(r"^(?P<sym>eta|ae)\^(?P<i>\d+)\s*=\s*(?P<poly>.+)$")
_N = re.compile(r"\bN=(\d+)")
_FORM = re.compile(r"\bform=(\w+)")


def load_operators(text: str) -> List[CanonicalOperator]:
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        try:
            return _from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            if stripped.startswith("{"):
                raise MalformedInput(str(exc)) from exc
    return _from_text(text)


def _operator_from_dict(d: dict) -> CanonicalOperator:
    try:
        form = Form(d.get("form", "moment"))
        coords = [None if c is None else parse_polynomial(c) for c in d["coords"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(f"bad operator JSON: {exc}") from exc
    return CanonicalOperator(coords, form, d.get("name", ""))


def _from_json(data) -> List[CanonicalOperator]:
    if isinstance(data, list):
        return [_operator_from_dict(d) for d in data]
    if not isinstance(data, dict):
        raise MalformedInput("operator JSON must be an object or array")
    if "rows" in data:
        matrix = EtaMatrix.from_json(data)
        return [CanonicalOperator.from_row(row) for _, row in sorted(matrix.rows.items())]
    if "operators" in data:
        return [_operator_from_dict(d) for d in data["operators"]]
    if "coords" in data:
        return [_operator_from_dict(data)]
    raise MalformedInput("unrecognised operator JSON")


def _from_text(text: str) -> List[CanonicalOperator]:
    global_n: Optional[int] = None
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _N.search(line)
            if m and current is None:
                global_n = int(m.group(1))
            continue
        m = _SECTION.match(line)
        if m:
            rest = m.group("rest")
            n_match, form_match = _N.search(rest), _FORM.search(rest)
            current = {
                "name": m.group("name").strip(),
                "N": int(n_match.group(1)) if n_match else None,
                "form": form_match.group(1) if form_match else None,
                "entries": {},
                "sym": None,
            }
            sections.append(current)
            continue
        m = _ENTRY.match(line)
        if m is None or current is None:
            raise MalformedInput(f"line {lineno}: cannot parse {raw!r}")
        current["sym"] = current["sym"] or m.group("sym")
        current["entries"][int(m.group("i"))] = parse_polynomial(m.group("poly"))
    if not sections:
        raise MalformedInput("no operator sections found")

    ops = []
    for sec in sections:
        n = sec["N"] if sec["N"] is not None else global_n
        if n is None:
            n = max(sec["entries"], default=0)
        if any(i > n for i in sec["entries"]):
            raise MalformedInput(f"section [{sec['name']}] has entries beyond N={n}")
        form = Form(sec["form"]) if sec["form"] else (Form.MOMENT_ONLY if sec["sym"] != "ae" else Form.JET)
        # missing eta entries are zero; missing ae entries are out of reach of the horizon
        fill = None if sec["sym"] == "ae" and form is Form.JET else ZERO
        coords = [sec["entries"].get(i, fill) for i in range(n + 1)]
        ops.append(CanonicalOperator(coords, form, sec["name"]))
    return ops
