"""Line-oriented scenario files describing loss/station chains and sweeps.

Format: a header of ``key = value`` pairs, then ``[segment]`` blocks in chain
order, then at most one ``[sweep]`` block. ``#`` starts a comment. Matrices
(kind "custom") are row-major bracketed lists. Example::

    name = psa-sandwich
    ordering = xxpp
    outputs = eb, thresholds, bound

    [segment]
    kind = loss
    eta = 0.5

    [segment]
    kind = psa
    gain = 2.0

    [segment]
    kind = loss
    eta = 0.5

    [sweep]
    parameter = segment[2].gain
    min = 1.0
    max = 5.0
    steps = 81

Sweep paths use 1-based segment indices. A JSON document with the same
structure is accepted as an alternative entry point (parse_scenario_json).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioError, ValidationError
from .stations import STATION_PARAMS, StationSpec

ANALYSES = ("compose", "decompose", "eb", "thresholds", "bound")

_HEADER_KEYS = ("name", "ordering", "outputs")
_MATRIX_PARAMS = ("transfer", "noise", "shift")


@dataclass(frozen=True)
class Sweep:
    """Linear grid over one scalar parameter of one segment (1-based index)."""

    segment: int
    parameter: str
    lo: float
    hi: float
    steps: int

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class Scenario:
    name: str
    segments: tuple[StationSpec, ...]
    outputs: tuple[str, ...] = ()
    sweep: Sweep | None = None
    ordering: str = "xxpp"

    def with_sweep_value(self, value: float) -> "Scenario":
        """Scenario at one sweep grid point (sweep dropped)."""
        if self.sweep is None:
            return self
        idx = self.sweep.segment - 1
        seg = self.segments[idx]
        params = dict(seg.params)
        params[self.sweep.parameter] = float(value)
        segments = self.segments[:idx] + (StationSpec(seg.kind, params),) + self.segments[idx + 1 :]
        return Scenario(self.name, segments, self.outputs, None, self.ordering)


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.problems: list[tuple[int, int, str]] = []

    def fail(self, line: int, col: int, msg: str) -> None:
        self.problems.append((line, col, msg))

    def parse(self) -> Scenario:
        header: dict[str, tuple[str, int, int]] = {}
        segments: list[tuple[int, dict[str, tuple[str, int, int]]]] = []
        sweep_block: tuple[int, dict[str, tuple[str, int, int]]] | None = None
        current: dict[str, tuple[str, int, int]] | None = None
        target = "header"

        for lineno, raw in enumerate(self.lines, start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            stripped = line.strip()
            if stripped.startswith("["):
                if stripped == "[segment]":
                    if sweep_block is not None:
                        self.fail(lineno, 1, "[segment] blocks must precede the [sweep] block")
                    current = {}
                    segments.append((lineno, current))
                    target = "segment"
                elif stripped == "[sweep]":
                    if sweep_block is not None:
                        self.fail(lineno, 1, "only one [sweep] block is allowed")
                    current = {}
                    sweep_block = (lineno, current)
                    target = "sweep"
                else:
                    self.fail(lineno, 1, f"unknown section {stripped!r}")
                    current = {}
                    target = "ignored"
                continue
            if "=" not in line:
                self.fail(lineno, 1, "expected 'key = value'")
                continue
            key, _, raw_value = line.partition("=")
            key = key.strip()
            value = raw_value.strip()
            # 1-based column where the value text starts
            col = line.index("=") + 2 + (len(raw_value) - len(raw_value.lstrip()))
            if not key:
                self.fail(lineno, 1, "empty key")
                continue
            entry = (value, lineno, col)
            if target == "header":
                if key not in _HEADER_KEYS:
                    self.fail(lineno, 1, f"unknown header key {key!r} (expected one of {_HEADER_KEYS})")
                elif key in header:
                    self.fail(lineno, 1, f"duplicate header key {key!r}")
                else:
                    header[key] = entry
            elif target in ("segment", "sweep"):
                if key in current:
                    self.fail(lineno, 1, f"duplicate key {key!r} in this block")
                else:
                    current[key] = entry
            # target "ignored": swallow keys of an unknown section

        name = header.get("name", ("scenario", 0, 0))[0]
        ordering_entry = header.get("ordering")
        ordering = "xxpp"
        if ordering_entry is not None:
            ordering = ordering_entry[0]
            if ordering != "xxpp":
                self.fail(ordering_entry[1], ordering_entry[2], f"unsupported quadrature ordering {ordering!r} (only 'xxpp')")
        outputs: tuple[str, ...] = ()
        if "outputs" in header:
            value, lineno, col = header["outputs"]
            tokens = tuple(tok.strip() for tok in value.split(",") if tok.strip())
            for tok in tokens:
                if tok not in ANALYSES:
                    self.fail(lineno, col, f"unknown output {tok!r} (expected one of {ANALYSES})")
            outputs = tokens

        specs = [self._build_segment(i, lineno, block) for i, (lineno, block) in enumerate(segments, start=1)]
        if not specs and not self.problems:
            self.fail(len(self.lines) or 1, 1, "scenario has no [segment] blocks")

        sweep = None
        if sweep_block is not None:
            sweep = self._build_sweep(sweep_block[0], sweep_block[1], specs)

        if self.problems:
            raise ScenarioError(self.problems)
        return Scenario(name=name, segments=tuple(specs), outputs=outputs, sweep=sweep, ordering=ordering)

    def _scalar(self, entry: tuple[str, int, int], what: str) -> float:
        value, lineno, col = entry
        try:
            return float(value)
        except ValueError:
            self.fail(lineno, col, f"{what}: expected a number, got {value!r}")
            return float("nan")

    def _vector(self, entry: tuple[str, int, int], what: str) -> tuple[float, ...]:
        value, lineno, col = entry
        body = value.strip()
        if not (body.startswith("[") and body.endswith("]")):
            self.fail(lineno, col, f"{what}: expected a bracketed row-major list")
            return ()
        try:
            return tuple(float(tok) for tok in body[1:-1].split(",") if tok.strip())
        except ValueError:
            self.fail(lineno, col, f"{what}: list entries must be numbers")
            return ()

    def _build_segment(self, index: int, lineno: int, block: dict) -> StationSpec | None:
        if "kind" in block:
            kind = block["kind"][0]
        else:
            self.fail(lineno, 1, f"segment {index}: missing 'kind'")
            return None
        if kind not in STATION_PARAMS:
            self.fail(block["kind"][1], block["kind"][2], f"segment {index}: unknown kind {kind!r}")
            return None
        params: dict = {}
        for key, entry in block.items():
            if key == "kind":
                continue
            if key not in STATION_PARAMS[kind]:
                self.fail(entry[1], 1, f"segment {index}: kind {kind!r} does not take parameter {key!r}")
                continue
            if kind == "custom" and key in _MATRIX_PARAMS:
                params[key] = self._vector(entry, f"segment {index}: parameter {key!r}")
            else:
                params[key] = self._scalar(entry, f"segment {index}: parameter {key!r}")
        try:
            spec = StationSpec(kind, params)
            spec.to_channel()  # surfaces range errors against the segment's first line
        except (ValidationError, KeyError, ValueError) as exc:
            detail = f"missing parameter {exc}" if isinstance(exc, KeyError) else str(exc)
            self.fail(lineno, 1, f"segment {index}: {detail}")
            return None
        return spec

    def _build_sweep(self, lineno: int, block: dict, specs: list) -> Sweep | None:
        required = ("parameter", "min", "max", "steps")
        for key in required:
            if key not in block:
                self.fail(lineno, 1, f"sweep: missing {key!r}")
                return None
        path, pline, pcol = block["parameter"]
        seg_idx, param = None, None
        if path.startswith("segment[") and "]." in path:
            head, _, param = path.partition("].")
            try:
                seg_idx = int(head[len("segment[") :])
            except ValueError:
                seg_idx = None
        if seg_idx is None or not param:
            self.fail(pline, pcol, f"sweep: parameter path {path!r} must look like segment[N].name")
            return None
        if not 1 <= seg_idx <= len(specs) or specs[seg_idx - 1] is None:
            self.fail(pline, pcol, f"sweep: segment index {seg_idx} is out of range")
            return None
        spec = specs[seg_idx - 1]
        if param not in STATION_PARAMS[spec.kind] or param in _MATRIX_PARAMS:
            self.fail(pline, pcol, f"sweep: segment {seg_idx} (kind {spec.kind!r}) has no sweepable parameter {param!r}")
            return None
        lo = self._scalar(block["min"], "sweep: min")
        hi = self._scalar(block["max"], "sweep: max")
        steps_value, sline, scol = block["steps"]
        try:
            steps = int(steps_value)
        except ValueError:
            self.fail(sline, scol, f"sweep: steps must be an integer, got {steps_value!r}")
            return None
        if steps < 1:
            self.fail(sline, scol, f"sweep: steps must be >= 1, got {steps}")
            return None
        if not lo <= hi:
            self.fail(block["min"][1], block["min"][2], f"sweep: min {lo} must not exceed max {hi}")
            return None
        sweep = Sweep(segment=seg_idx, parameter=param, lo=lo, hi=hi, steps=steps)
        # Endpoint construction surfaces out-of-domain sweep ranges; the grid
        # is linear, so the endpoints bound every grid point.
        for endpoint in (lo, hi):
            trial = Scenario("check", tuple(specs), (), sweep).with_sweep_value(endpoint)
            try:
                trial.segments[seg_idx - 1].to_channel()
            except (ValidationError, ValueError) as exc:
                self.fail(pline, pcol, f"sweep: value {endpoint} out of domain: {exc}")
                return None
        return sweep


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; raises ScenarioError with positioned problems."""
    return _Parser(text).parse()


def _format_float(x: float) -> str:
    return f"{x:.17g}"


def render_scenario(scenario: Scenario) -> str:
    """Canonical text for a scenario; parse(render(s)) == s."""
    out = [f"name = {scenario.name}", f"ordering = {scenario.ordering}"]
    if scenario.outputs:
        out.append("outputs = " + ", ".join(scenario.outputs))
    for spec in scenario.segments:
        out.append("")
        out.append("[segment]")
        out.append(f"kind = {spec.kind}")
        for key in STATION_PARAMS[spec.kind]:
            if key not in spec.params:
                continue
            value = spec.params[key]
            if isinstance(value, tuple):
                out.append(f"{key} = [" + ", ".join(_format_float(v) for v in value) + "]")
            else:
                out.append(f"{key} = {_format_float(value)}")
    if scenario.sweep is not None:
        sw = scenario.sweep
        out.append("")
        out.append("[sweep]")
        out.append(f"parameter = segment[{sw.segment}].{sw.parameter}")
        out.append(f"min = {_format_float(sw.lo)}")
        out.append(f"max = {_format_float(sw.hi)}")
        out.append(f"steps = {sw.steps}")
    return "\n".join(out) + "\n"


def parse_scenario_json(text: str) -> Scenario:
    """JSON alternative: {name, ordering, outputs, segments: [{kind, ...}], sweep: {...}}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([(exc.lineno, exc.colno, f"invalid JSON: {exc.msg}")]) from exc
    if not isinstance(doc, dict):
        raise ScenarioError([(1, 1, "top-level JSON value must be an object")])
    lines: list[str] = [f"name = {doc.get('name', 'scenario')}", f"ordering = {doc.get('ordering', 'xxpp')}"]
    outputs = doc.get("outputs", [])
    if outputs:
        lines.append("outputs = " + ", ".join(str(tok) for tok in outputs))
    for seg in doc.get("segments", []):
        lines.append("[segment]")
        for key, value in seg.items():
            if isinstance(value, (list, tuple)):
                lines.append(f"{key} = [" + ", ".join(_format_float(float(v)) for v in value) + "]")
            else:
                lines.append(f"{key} = {value}")
    sweep = doc.get("sweep")
    if sweep:
        lines.append("[sweep]")
        lines.append(f"parameter = {sweep.get('parameter', '')}")
        for key in ("min", "max", "steps"):
            if key in sweep:
                lines.append(f"{key} = {sweep[key]}")
    return parse_scenario("\n".join(lines) + "\n")
