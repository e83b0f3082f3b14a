"""Execute scenario analyses and emit CSV files plus a text report.

Outputs are deterministic: sweep points may be evaluated by a thread pool,
but rows are written in grid order and floats are rendered with 17
significant digits, so identical scenario + seed gives byte-identical files.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .channels import GaussianChannel, apply_chain, compose_chain, extract_displacements
from .ebreak import (
    channel_is_eb,
    choi_ppt_oracle,
    pia_threshold_gain,
    psa_threshold_gain,
    rate_upper_bound,
    reduce_standard_form,
    sandwich_is_eb,
)
from .errors import ValidationError
from .numerics import POLICY
from .relay import (
    PsaChainSpec,
    SandwichInput,
    collapse_chain,
    decompose_sandwich,
    psa_chain_params,
    sandwich_total,
)
from .sampling import random_state
from .scenario import ANALYSES, Scenario
from .stations import StationSpec, phase_sensitive_amp, quantum_limited_amp

DEFAULT_OUT_ENV = "GAUSSCHAIN_OUT"


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (np.floating,)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])


@dataclass
class RunResult:
    report: str
    csv_paths: list[Path] = field(default_factory=list)
    numeric_ok: bool = True


def _segment_channels(scenario: Scenario) -> list[GaussianChannel]:
    return [spec.to_channel() for spec in scenario.segments]


def _is_alternating(scenario: Scenario) -> bool:
    segs = scenario.segments
    if len(segs) < 3 or len(segs) % 2 == 0:
        return False
    return all(spec.is_loss() == (i % 2 == 0) for i, spec in enumerate(segs))


def _alternating_parts(scenario: Scenario) -> list:
    parts: list = []
    for spec in scenario.segments:
        parts.append(spec.params["eta"] if spec.is_loss() else spec.to_channel())
    return parts


def _is_sandwich(scenario: Scenario) -> bool:
    return _is_alternating(scenario) and len(scenario.segments) == 3 and scenario.segments[1].to_channel().n == 1


def _sandwich_input(scenario: Scenario) -> SandwichInput:
    return SandwichInput(
        scenario.segments[0].params["eta"],
        scenario.segments[2].params["eta"],
        scenario.segments[1].to_channel(),
    )


def _total_loss_eta(scenario: Scenario) -> float:
    return math.prod(spec.params["eta"] for spec in scenario.segments if spec.is_loss())


def _matrix_rows(point_cells: list, component: str, mat: np.ndarray) -> list[list]:
    rows = []
    m = np.atleast_2d(np.asarray(mat, dtype=float))
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            rows.append(point_cells + [component, i, j, float(m[i, j])])
    return rows


def _scalar_row(point_cells: list, component: str, value: float) -> list[list]:
    return [point_cells + [component, 0, 0, float(value)]]


class _Analysis:
    """One requested analysis: per-point rows plus report lines at the end."""

    name: str = ""
    header: tuple[str, ...] = ()

    def __init__(self, scenario: Scenario, tol: float, seed: int):
        self.scenario = scenario
        self.tol = tol
        self.seed = seed
        self.numeric_ok = True
        self.notes: list[str] = []

    def point_rows(self, point: Scenario, point_index: int) -> list[list]:
        raise NotImplementedError


class _ComposeAnalysis(_Analysis):
    name = "compose"
    header = ("point", "component", "row", "col", "value")

    def point_rows(self, point, point_index):
        total = compose_chain(_segment_channels(point))
        cells = [point_index]
        rows = _matrix_rows(cells, "transfer", total.transfer)
        rows += _matrix_rows(cells, "shift", total.shift.reshape(-1, 1))
        rows += _matrix_rows(cells, "noise", total.noise)
        if point_index == 0:
            self.notes.append(f"total transfer det = {np.linalg.det(total.transfer):.12g}")
        return rows


class _DecomposeAnalysis(_Analysis):
    name = "decompose"
    header = ("point", "component", "row", "col", "value")

    def point_rows(self, point, point_index):
        if not _is_alternating(point):
            raise ValidationError("decompose needs an alternating loss/station/.../loss chain")
        channels = _segment_channels(point)
        shifted = any(float(np.max(np.abs(ch.shift))) > 0.0 for ch in channels)
        if shifted:
            zeroed_chain, total_shift = extract_displacements(channels)
            rng = np.random.default_rng(self.seed)
            n = channels[0].n
            worst = 0.0
            for _ in range(5):
                probe = random_state(rng, n)
                a = apply_chain(channels, probe)
                b = apply_chain(zeroed_chain, probe)
                worst = max(worst, float(np.max(np.abs(a.cov - b.cov))), float(np.max(np.abs(a.mean - b.mean))))
            if point_index == 0:
                self.notes.append(
                    f"shifts extracted into final link (max probe deviation {worst:.3e}); "
                    "decomposition applies to the shift-free chain"
                )
            if worst > self.tol:
                self.numeric_ok = False
            point = _strip_shifts(point)

        collapsed = collapse_chain(_alternating_parts(point))
        cells = [point_index]
        rows = _matrix_rows(cells, "front_transfer", collapsed.front.transfer)
        rows += _matrix_rows(cells, "front_noise", collapsed.front.noise)
        rows += _matrix_rows(cells, "back_transfer", collapsed.back.transfer)
        rows += _scalar_row(cells, "loss_eta", collapsed.loss_eta)
        rows += _scalar_row(cells, "recomposition_error", collapsed.recomposition_error)
        if len(point.segments) == 3:
            witness = decompose_sandwich(_sandwich_input(point))
            rows += _scalar_row(cells, "mix_prob", witness.mix_prob)
            rows += _matrix_rows(cells, "state_cov", witness.state_cov)
            rows += _matrix_rows(cells, "mixed_cov", witness.mixed_cov)
            rows += _matrix_rows(cells, "transform", witness.transform)
        if collapsed.recomposition_error > self.tol:
            self.numeric_ok = False
            self.notes.append(
                f"point {point_index}: recomposition error {collapsed.recomposition_error:.3e} exceeds tol {self.tol:.1e}"
            )
        elif point_index == 0:
            self.notes.append(
                f"recomposition error {collapsed.recomposition_error:.3e} (tol {self.tol:.1e}); "
                f"loss eta = {collapsed.loss_eta:.17g}"
            )
        return rows


def _strip_shifts(scenario: Scenario) -> Scenario:
    segments = []
    for spec in scenario.segments:
        if spec.kind == "custom" and "shift" in spec.params:
            params = {k: v for k, v in spec.params.items() if k != "shift"}
            segments.append(StationSpec(spec.kind, params))
        else:
            segments.append(spec)
    return Scenario(scenario.name, tuple(segments), scenario.outputs, None, scenario.ordering)


class _EbAnalysis(_Analysis):
    name = "eb"
    header = ("eta1", "eta2", "gain", "margin_closed_form", "margin_oracle_min_nu", "eb_flag")

    def point_rows(self, point, point_index):
        if not _is_sandwich(point):
            raise ValidationError("eb analysis needs a single-mode loss/station/loss sandwich")
        inp = _sandwich_input(point)
        verdict = sandwich_is_eb(inp)
        oracle = choi_ppt_oracle(sandwich_total(inp))
        gain = point.segments[1].gain_like()
        if verdict.eb != oracle.eb and abs(verdict.margin) > 1e-6:
            self.numeric_ok = False
            self.notes.append(
                f"closed-form and oracle verdicts disagree at gain {gain:.12g} (margin {verdict.margin:.3e})"
            )
        return [[inp.eta1, inp.eta2, gain, verdict.margin, oracle.margin, verdict.eb]]


class _ThresholdAnalysis(_Analysis):
    name = "thresholds"
    header = ("eta1", "eta2", "kind", "threshold_closed_form", "threshold_bisection", "abs_diff")

    def point_rows(self, point, point_index):
        if not _is_sandwich(point) or point.segments[1].kind not in ("psa", "pia"):
            raise ValidationError("thresholds analysis needs a loss/psa/loss or loss/pia/loss sandwich")
        kind = point.segments[1].kind
        eta1 = point.segments[0].params["eta"]
        eta2 = point.segments[2].params["eta"]
        closed = psa_threshold_gain(eta1, eta2) if kind == "psa" else pia_threshold_gain(eta1)
        if math.isinf(closed):
            return [[eta1, eta2, kind, closed, closed, 0.0]]
        bisected = bisect_sandwich_flip(kind, eta1, eta2)
        diff = abs(closed - bisected)
        if diff > max(self.tol, 1e-9) * max(1.0, closed):
            self.numeric_ok = False
            self.notes.append(f"threshold mismatch at eta1={eta1}, eta2={eta2}: {diff:.3e}")
        return [[eta1, eta2, kind, closed, bisected, diff]]


class _BoundAnalysis(_Analysis):
    name = "bound"
    header = ("eta_total", "rate_upper_bound_bits_per_mode")

    def point_rows(self, point, point_index):
        eta = _total_loss_eta(point)
        return [[eta, rate_upper_bound(eta)]]


_ANALYSIS_TYPES: dict[str, type[_Analysis]] = {
    cls.name: cls
    for cls in (_ComposeAnalysis, _DecomposeAnalysis, _EbAnalysis, _ThresholdAnalysis, _BoundAnalysis)
}


def _station_builder(kind: str) -> Callable[[float], GaussianChannel]:
    return phase_sensitive_amp if kind == "psa" else quantum_limited_amp


def bisect_sandwich_flip(kind: str, eta1: float, eta2: float, tol: float = 5e-10) -> float:
    """Gain at which the sandwich's closed-form breaking margin crosses zero."""
    build = _station_builder(kind)

    def margin(g: float) -> float:
        return sandwich_is_eb(SandwichInput(eta1, eta2, build(g))).margin

    lo, hi = 1.0, 2.0
    while margin(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e9:
            raise ValidationError(f"no breaking flip found below gain {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def applicable_analyses(scenario: Scenario) -> tuple[str, ...]:
    out = ["compose"]
    if _is_alternating(scenario):
        out.append("decompose")
    if _is_sandwich(scenario):
        out.append("eb")
        if scenario.segments[1].kind in ("psa", "pia"):
            out.append("thresholds")
    if any(spec.is_loss() for spec in scenario.segments):
        out.append("bound")
    return tuple(out)


def summary_lines(scenario: Scenario, tol: float) -> list[str]:
    """Headline facts for the report: collapsed loss, standard form, margins, bound."""
    lines: list[str] = []
    chain = " -> ".join(
        spec.kind + "(" + ", ".join(f"{k}={format_cell(v)}" for k, v in spec.params.items() if not isinstance(v, tuple)) + ")"
        for spec in scenario.segments
    )
    lines.append(f"chain: {chain}")
    etas = [spec.params["eta"] for spec in scenario.segments if spec.is_loss()]
    if etas:
        eta = math.prod(etas)
        lines.append(f"total loss transmittance: eta = {eta:.17g}")
        if eta < 1.0:
            lines.append(f"rate upper bound: R_UB = {rate_upper_bound(eta):.10f} bits/mode")
        else:
            lines.append("rate upper bound: R_UB diverges (eta = 1)")
    try:
        total = compose_chain(_segment_channels(scenario))
        if total.n == 1 and float(np.max(np.abs(total.shift))) == 0.0:
            form = reduce_standard_form(total)
            lines.append(
                f"standard form: gain eta_s = {form.gain:.12g}, excess noise N_s = {form.excess_noise:.12g} ({form.branch})"
            )
            verdict = channel_is_eb(total)
            oracle = choi_ppt_oracle(total)
            lines.append(
                f"entanglement breaking: {str(verdict.eb).lower()} "
                f"(closed-form margin {verdict.margin:.12g}, oracle margin {oracle.margin:.12g})"
            )
    except ValidationError:
        pass
    if _is_sandwich(scenario) and scenario.segments[1].kind in ("psa", "pia"):
        kind = scenario.segments[1].kind
        eta1 = scenario.segments[0].params["eta"]
        eta2 = scenario.segments[2].params["eta"]
        thr = psa_threshold_gain(eta1, eta2) if kind == "psa" else pia_threshold_gain(eta1)
        lines.append(f"{kind} breaking threshold gain: {format_cell(thr)}")
    if _is_alternating(scenario) and all(s.kind == "psa" for s in scenario.segments[1::2]):
        spec = PsaChainSpec(
            [s.params["eta"] for s in scenario.segments[0::2]],
            [s.params["gain"] for s in scenario.segments[1::2]],
        )
        params = psa_chain_params(spec)
        fold = compose_chain(_segment_channels(scenario))
        err = max(
            float(np.linalg.norm(params.transfer - fold.transfer) / np.linalg.norm(fold.transfer)),
            float(np.linalg.norm(params.noise - fold.noise) / max(np.linalg.norm(fold.noise), 1e-30)),
        )
        lines.append(
            f"squeezer-chain closed form: alpha+ = {params.alpha_plus:.12g}, alpha- = {params.alpha_minus:.12g}, "
            f"fold agreement {err:.3e}"
        )
    return lines


def run(
    scenario: Scenario,
    analyses: Sequence[str] | None = None,
    out_dir: Path | str = ".",
    workers: int = 1,
    tol: float | None = None,
    seed: int = 0,
) -> RunResult:
    """Run the requested analyses over the scenario's sweep grid.

    ``analyses`` defaults to the scenario's outputs, or to every applicable
    analysis when the scenario requests none.
    """
    if analyses is None:
        analyses = scenario.outputs or applicable_analyses(scenario)
    for name in analyses:
        if name not in ANALYSES:
            raise ValidationError(f"unknown analysis {name!r}")
    tol = POLICY.eigen_tol if tol is None else float(tol)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if scenario.sweep is not None:
        points = [scenario.with_sweep_value(v) for v in scenario.sweep.values()]
    else:
        points = [scenario]

    result = RunResult(report="")
    report: list[str] = [f"scenario: {scenario.name}"]
    report.extend(summary_lines(scenario, tol))
    if scenario.sweep is not None:
        sw = scenario.sweep
        report.append(
            f"sweep: segment[{sw.segment}].{sw.parameter} over [{format_cell(sw.lo)}, {format_cell(sw.hi)}] "
            f"in {sw.steps} steps"
        )

    for name in analyses:
        analysis = _ANALYSIS_TYPES[name](scenario, tol, seed)

        def evaluate(args):
            index, point = args
            return analysis.point_rows(point, index)

        if workers > 1 and len(points) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                per_point = list(pool.map(evaluate, enumerate(points)))
        else:
            per_point = [evaluate(item) for item in enumerate(points)]

        rows = [row for chunk in per_point for row in chunk]
        path = out_dir / f"{scenario.name}__{name}.csv"
        write_csv(path, analysis.header, rows)
        result.csv_paths.append(path)
        report.append(f"[{name}] wrote {len(rows)} rows to {path.name}")
        if name == "eb" and scenario.sweep is not None and rows:
            flips = [
                (prev, cur)
                for prev, cur in zip(rows, rows[1:])
                if prev[5] != cur[5]
            ]
            for prev, cur in flips:
                report.append(
                    f"[eb] verdict flips between gain {format_cell(prev[2])} (margin {format_cell(prev[3])}) "
                    f"and gain {format_cell(cur[2])} (margin {format_cell(cur[3])})"
                )
        report.extend(f"[{name}] {note}" for note in analysis.notes)
        result.numeric_ok = result.numeric_ok and analysis.numeric_ok

    result.report = "\n".join(report) + "\n"
    report_path = out_dir / f"{scenario.name}__report.txt"
    report_path.write_text(result.report, encoding="utf-8")
    result.csv_paths.append(report_path)
    return result
