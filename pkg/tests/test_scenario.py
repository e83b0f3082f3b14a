import numpy as np
import pytest

from gausschain.errors import ScenarioError
from gausschain.scenario import (
    Scenario,
    Sweep,
    parse_scenario,
    parse_scenario_json,
    render_scenario,
)
from gausschain.stations import StationSpec

MINIMAL = """
[segment]
kind = loss
eta = 0.5
"""

PSA_SWEEP = """
name = psa-sandwich
ordering = xxpp
outputs = eb, thresholds, bound

[segment]
kind = loss
eta = 0.5

[segment]
kind = psa
gain = 2.0
angle = 0.0

[segment]
kind = loss
eta = 0.5

[sweep]
parameter = segment[2].gain
min = 1.0
max = 5.0
steps = 81
"""


def test_parse_minimal_scenario():
    scenario = parse_scenario(MINIMAL)
    assert scenario.name == "scenario"
    assert len(scenario.segments) == 1
    assert scenario.segments[0] == StationSpec("loss", {"eta": 0.5})
    assert scenario.sweep is None


def test_parse_sweep_scenario():
    scenario = parse_scenario(PSA_SWEEP)
    assert scenario.name == "psa-sandwich"
    assert scenario.outputs == ("eb", "thresholds", "bound")
    assert scenario.sweep == Sweep(segment=2, parameter="gain", lo=1.0, hi=5.0, steps=81)
    values = scenario.sweep.values()
    assert len(values) == 81
    assert values[0] == 1.0 and values[-1] == 5.0
    point = scenario.with_sweep_value(3.0)
    assert point.segments[1].params["gain"] == 3.0
    assert point.sweep is None


def test_parse_comments_and_blank_lines():
    text = "# header comment\n\nname = x  # trailing\n\n[segment]\nkind = loss\neta = 0.9 # ok\n"
    scenario = parse_scenario(text)
    assert scenario.name == "x"
    assert scenario.segments[0].params["eta"] == 0.9


def test_out_of_range_parameter_names_the_field():
    text = "[segment]\nkind = loss\neta = 1.2\n"
    with pytest.raises(ScenarioError) as excinfo:
        parse_scenario(text)
    (line, _, message) = excinfo.value.problems[0]
    assert line == 1
    assert "eta" in message and "1.2" in message


def test_unknown_kind_reports_position():
    text = "[segment]\nkind = warp\n"
    with pytest.raises(ScenarioError) as excinfo:
        parse_scenario(text)
    (line, col, message) = excinfo.value.problems[0]
    assert (line, col) == (2, 8)
    assert "warp" in message


def test_parse_collects_multiple_problems():
    text = "outputs = eb, nonsense\n\n[segment]\nkind = loss\neta = oops\n"
    with pytest.raises(ScenarioError) as excinfo:
        parse_scenario(text)
    messages = [msg for _, _, msg in excinfo.value.problems]
    assert any("nonsense" in m for m in messages)
    assert any("oops" in m for m in messages)


def test_sweep_validation_errors():
    base = PSA_SWEEP.replace("steps = 81", "steps = 0")
    with pytest.raises(ScenarioError, match="steps"):
        parse_scenario(base)
    base = PSA_SWEEP.replace("parameter = segment[2].gain", "parameter = segment[9].gain")
    with pytest.raises(ScenarioError, match="out of range"):
        parse_scenario(base)
    base = PSA_SWEEP.replace("parameter = segment[2].gain", "parameter = segment[1].gain")
    with pytest.raises(ScenarioError, match="sweepable"):
        parse_scenario(base)
    base = PSA_SWEEP.replace("min = 1.0", "min = 0.5")  # squeezer gain below 1
    with pytest.raises(ScenarioError, match="out of domain"):
        parse_scenario(base)
    base = PSA_SWEEP.replace("min = 1.0", "min = 6.0")
    with pytest.raises(ScenarioError, match="must not exceed"):
        parse_scenario(base)


def test_duplicate_keys_rejected():
    text = "[segment]\nkind = loss\neta = 0.5\neta = 0.6\n"
    with pytest.raises(ScenarioError, match="duplicate"):
        parse_scenario(text)


def test_rejects_unknown_ordering():
    text = "ordering = xpxp\n\n[segment]\nkind = loss\neta = 0.5\n"
    with pytest.raises(ScenarioError, match="ordering"):
        parse_scenario(text)


def test_round_trip_identity():
    scenario = parse_scenario(PSA_SWEEP)
    assert parse_scenario(render_scenario(scenario)) == scenario


def test_round_trip_with_custom_matrix_segment():
    scenario = Scenario(
        name="custom-chain",
        segments=(
            StationSpec("loss", {"eta": 0.8}),
            StationSpec(
                "custom",
                {
                    "n": 1.0,
                    "transfer": (1.0, 0.0, 0.0, 1.0),
                    "noise": (0.125, 0.0, 0.0, 0.125),
                    "shift": (0.25, -0.5),
                },
            ),
            StationSpec("loss", {"eta": 0.7}),
        ),
        outputs=("compose", "decompose"),
    )
    rendered = render_scenario(scenario)
    assert parse_scenario(rendered) == scenario


def test_json_import_equivalence():
    doc = """
    {
      "name": "psa-sandwich",
      "outputs": ["eb", "thresholds", "bound"],
      "segments": [
        {"kind": "loss", "eta": 0.5},
        {"kind": "psa", "gain": 2.0, "angle": 0.0},
        {"kind": "loss", "eta": 0.5}
      ],
      "sweep": {"parameter": "segment[2].gain", "min": 1.0, "max": 5.0, "steps": 81}
    }
    """
    assert parse_scenario_json(doc) == parse_scenario(PSA_SWEEP)


def test_json_import_reports_syntax_errors():
    with pytest.raises(ScenarioError):
        parse_scenario_json("{not json")


def test_scenario_without_segments_is_an_error():
    with pytest.raises(ScenarioError, match="no \\[segment\\]"):
        parse_scenario("name = empty\n")
