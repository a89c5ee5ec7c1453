"""Tests for the common package: serialization, worker pool, errors, metrics."""

import json

import numpy as np
import pandas as pd
import pytest

from common.errors import (
    AdmissibilityFailure,
    ConfigError,
    InvalidArgumentError,
    WaveLabError,
)
from common.io import dumps_report, write_csv, write_json
from common.metrics import experiment_points, solver_steps
from common.parallel import map_ordered


class TestDumpsReport:
    """Tests for dumps_report function."""

    def test_floats_have_17_digits(self):
        """0.1 is written with 17 significant digits."""
        text = dumps_report({"x": 0.1})
        assert "0.10000000000000001" in text

    def test_floats_round_trip(self):
        """Every written float parses back to the same double."""
        values = [1.0 / 3.0, 2.0**-40, 1e300, -7.25]
        parsed = json.loads(dumps_report({"v": values}))
        assert parsed["v"] == values

    def test_non_finite_becomes_null(self):
        """NaN and inf are written as null."""
        parsed = json.loads(dumps_report({"a": float("nan"), "b": float("inf")}))
        assert parsed == {"a": None, "b": None}

    def test_keys_sorted(self):
        """Keys come out sorted so documents are reproducible."""
        text = dumps_report({"b": 1, "a": 2})
        assert text.index('"a"') < text.index('"b"')

    def test_numpy_values(self):
        """Numpy scalars and arrays are serialized as plain numbers."""
        parsed = json.loads(dumps_report({"n": np.int64(3), "arr": np.array([0.5, 1.5])}))
        assert parsed == {"n": 3, "arr": [0.5, 1.5]}

    def test_booleans_and_none_preserved(self):
        """Booleans stay booleans, None stays null."""
        parsed = json.loads(dumps_report({"ok": True, "missing": None}))
        assert parsed == {"ok": True, "missing": None}

    def test_unknown_type_raises(self):
        """Objects without a JSON form raise TypeError."""
        with pytest.raises(TypeError):
            dumps_report({"x": object()})


class TestWriters:
    """Tests for write_json and write_csv."""

    def test_write_json_creates_parents(self, tmp_path):
        """Nested output directories are created."""
        path = write_json(tmp_path / "a" / "b" / "report.json", {"x": 1.5})
        assert json.loads(path.read_text()) == {"x": 1.5}

    def test_csv_round_trip_exact(self, tmp_path):
        """CSV floats read back bitwise identical."""
        frame = pd.DataFrame({"t": [0.1, 1.0 / 3.0], "value": [2.0**-30, 1e-17]})
        path = write_csv(tmp_path / "table.csv", frame)
        back = pd.read_csv(path, float_precision="round_trip")
        assert list(back.columns) == ["t", "value"]
        np.testing.assert_array_equal(back.to_numpy(), frame.to_numpy())

    def test_identical_writes_identical_bytes(self, tmp_path):
        """Writing the same report twice gives identical files."""
        report = {"ratio": 0.123456789, "points": [1, 2, 3]}
        first = write_json(tmp_path / "one.json", report).read_bytes()
        second = write_json(tmp_path / "two.json", report).read_bytes()
        assert first == second


class TestMapOrdered:
    """Tests for map_ordered function."""

    def test_serial_preserves_order(self):
        """threads=1 maps in order."""
        assert map_ordered(lambda x: x * x, [3, 1, 2]) == [9, 1, 4]

    def test_threaded_preserves_order(self):
        """A thread pool returns results in input order."""
        items = list(range(20))
        assert map_ordered(lambda x: -x, items, threads=4) == [-x for x in items]

    def test_empty_input(self):
        """No items, no results."""
        assert map_ordered(lambda x: x, [], threads=4) == []


class TestErrors:
    """Tests for the exception hierarchy."""

    def test_invalid_argument_is_value_error(self):
        """InvalidArgumentError can be caught as ValueError."""
        with pytest.raises(ValueError):
            raise InvalidArgumentError("bad")

    def test_admissibility_failure_carries_indices(self):
        """Stage and segment indices travel with the exception."""
        e = AdmissibilityFailure("left the ball", k=3, segment=1, sup_h=0.2)
        assert (e.k, e.segment, e.sup_h) == (3, 1, 0.2)
        assert isinstance(e, WaveLabError)

    def test_config_error_carries_key(self):
        """ConfigError names the offending key."""
        e = ConfigError("mu must lie in (0, 1/2)", key="mu")
        assert e.key == "mu"


class TestMetrics:
    """Tests for the metric instruments."""

    def test_instruments_record_without_endpoint(self):
        """Counters accept values without a configured exporter."""
        solver_steps.add(10)
        experiment_points.add(1, {"experiment": "test"})
