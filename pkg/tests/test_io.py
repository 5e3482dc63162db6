"""CSV curve files and JSON model files: round trips and rejections."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasemix.curves import CurveGrid
from phasemix.errors import ModelValidationError, PhasemixError
from phasemix.marriage import marriage_model
from phasemix.modelfile import (
    SCHEMA_VERSION,
    ModelLabels,
    dump_model,
    load_model,
    loads_model,
    write_model,
)


def sample_curve():
    return CurveGrid(
        abscissa_name="t",
        abscissa=np.array([0.0, 0.1, 0.25]),
        columns={"value": np.array([1.0, 0.5, 1 / 3]),
                 "se": np.array([0.0, 1e-3, 2e-3])},
        metadata={"quantity": "demo", "state": "married"},
    )


def test_csv_round_trip_bit_exact():
    curve = sample_curve()
    back = CurveGrid.parse_csv(curve.format_csv())
    assert back.abscissa_name == "t"
    np.testing.assert_array_equal(back.abscissa, curve.abscissa)
    for name, col in curve.columns.items():
        np.testing.assert_array_equal(back.columns[name], col)
    assert back.metadata == curve.metadata


@given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False,
                               width=64), min_size=1, max_size=30))
@settings(max_examples=60, deadline=None)
def test_csv_floats_survive_exactly(vals):
    xs = np.arange(len(vals), dtype=float)
    curve = CurveGrid("x", xs, {"y": np.array(vals)}, {})
    back = CurveGrid.parse_csv(curve.format_csv())
    np.testing.assert_array_equal(back.columns["y"], np.array(vals))


def test_csv_file_round_trip(tmp_path):
    path = tmp_path / "curve.csv"
    curve = sample_curve()
    curve.write_csv(path)
    back = CurveGrid.read_csv(path)
    np.testing.assert_array_equal(back.abscissa, curve.abscissa)


def test_csv_parse_errors_carry_line_numbers():
    good = sample_curve().format_csv()
    lines = good.splitlines()
    # a row with a missing cell
    broken = "\n".join(lines[:4] + ["0.3,0.25"]) + "\n"
    with pytest.raises(ModelValidationError, match="line"):
        CurveGrid.parse_csv(broken)
    # a non-numeric cell
    broken = good.replace("0.5", "abc")
    with pytest.raises(ModelValidationError, match="line"):
        CurveGrid.parse_csv(broken)
    with pytest.raises(ModelValidationError):
        CurveGrid.parse_csv("# only=metadata\n")


def test_model_round_trip():
    model, labels = marriage_model()
    text = json.dumps(dump_model(model, labels))
    back, back_labels = loads_model(text)
    np.testing.assert_array_equal(back.gen.sub_generator,
                                  model.gen.sub_generator)
    np.testing.assert_array_equal(back.gen.exit_rates, model.gen.exit_rates)
    np.testing.assert_array_equal(back.speed, model.speed)
    np.testing.assert_array_equal(back.initial, model.initial)
    np.testing.assert_array_equal(back.scaled_weight, model.scaled_weight)
    assert back_labels == labels


def test_model_file_round_trip(tmp_path):
    path = tmp_path / "model.json"
    model, labels = marriage_model(heterogeneous=False)
    write_model(path, model, labels)
    back, back_labels = load_model(path)
    np.testing.assert_array_equal(back.scaled_weight, model.scaled_weight)
    assert back_labels.absorbing == ("dead",)


def test_model_rejects_unknown_keys():
    model, labels = marriage_model()
    doc = dump_model(model, labels)
    doc["extra_knob"] = 1
    with pytest.raises(ModelValidationError, match="extra_knob"):
        loads_model(json.dumps(doc))


def test_model_rejects_wrong_schema():
    model, labels = marriage_model()
    doc = dump_model(model, labels)
    doc["schema_version"] = SCHEMA_VERSION + 1
    with pytest.raises(ModelValidationError, match="schema"):
        loads_model(json.dumps(doc))


def test_model_rejects_missing_required():
    model, labels = marriage_model()
    doc = dump_model(model, labels)
    del doc["initial"]
    with pytest.raises(ModelValidationError, match="initial"):
        loads_model(json.dumps(doc))


def test_model_scalar_broadcasts():
    doc = {
        "schema_version": SCHEMA_VERSION,
        "transient_rates": [[-1.0, 1.0], [0.0, -1.0]],
        "initial": [1.0, 0.0],
        "speed": 2.0,
        "scaled_weight": 0.25,
    }
    model, labels = loads_model(json.dumps(doc))
    np.testing.assert_array_equal(model.speed, [2.0, 2.0])
    np.testing.assert_array_equal(model.scaled_weight, [0.25, 0.25])
    # default labels are generated
    assert len(labels.states) == 2 and len(labels.absorbing) == 1


def test_model_defaults_when_optional_missing():
    doc = {
        "schema_version": SCHEMA_VERSION,
        "transient_rates": [[-1.0, 1.0], [0.0, -1.0]],
        "initial": [0.6, 0.4],
    }
    model, _ = loads_model(json.dumps(doc))
    # no speed/weight keys: a degenerate mixture pinned to base rates
    np.testing.assert_array_equal(model.scaled_weight, [0.0, 0.0])
    np.testing.assert_array_equal(model.gen.exit_rates, [[0.0], [1.0]])


def test_labels_lookup():
    labels = ModelLabels(states=("a", "b"), absorbing=("end",))
    assert labels.state_index("b") == 1
    with pytest.raises(PhasemixError, match="unknown"):
        labels.state_index("zzz")
