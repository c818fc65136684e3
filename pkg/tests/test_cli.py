"""End-to-end runs of the gsw command line through main()."""

import json
import logging
import math

import pytest

from cli import build_parser, main
from homodyne import read_samples_csv
from logging_system import get_logger
from phasespace import FieldLabel, read_field

SMALL = ["--dim", "16", "--grid-min", "-6", "--grid-max", "6"]


def _origin(field):
    centre = field.grid.points // 2
    return field.values[centre, centre]


def _status(out):
    return dict(part.split("=", 1) for part in out.split())


class TestDist:

    def test_fock_one_wigner(self, tmp_path, capsys):
        path = tmp_path / "w.csv"
        assert main(["dist", "--state", "fock:1", "--which", "wigner", "--output", str(path)] + SMALL) == 0
        field = read_field(path)
        assert field.label is FieldLabel.WIGNER
        assert _origin(field) == pytest.approx(-2 / math.pi, abs=1e-9)
        status = _status(capsys.readouterr().out)
        assert float(status["normalization"]) == pytest.approx(1.0, abs=1e-6)
        assert status["physical"] == "false"

    def test_vacuum_q_json(self, tmp_path, capsys):
        path = tmp_path / "q.json"
        assert main(["dist", "--which", "q", "--format", "json", "--output", str(path)] + SMALL) == 0
        field = read_field(path)
        assert field.label is FieldLabel.Q
        assert _origin(field) == pytest.approx(1 / math.pi, abs=1e-12)
        assert _status(capsys.readouterr().out)["physical"] == "true"

    def test_narrow_smoothing_is_not_physical(self, tmp_path, capsys):
        path = tmp_path / "g.csv"
        args = ["dist", "--state", "fock:1", "--which", "g", "--sigma1", "0.2", "--sigma2", "0.2",
                "--output", str(path)]
        assert main(args + SMALL) == 0
        status = _status(capsys.readouterr().out)
        assert status["physical"] == "false"
        assert float(status["min"]) < 0
        assert read_field(path).label is FieldLabel.G

    def test_husimi(self, tmp_path, capsys):
        path = tmp_path / "h.csv"
        assert main(["dist", "--which", "husimi", "--sigma1", "0.4", "--output", str(path)] + SMALL) == 0
        field = read_field(path)
        assert field.label is FieldLabel.HUSIMI
        assert field.sigma1 * field.sigma2 == pytest.approx(0.25, abs=1e-12)

    def test_unpaired_sigma(self, tmp_path, capsys):
        args = ["dist", "--which", "g", "--sigma1", "0.5", "--output", str(tmp_path / "g.csv")]
        assert main(args + SMALL) == 2
        assert "error=UsageError" in capsys.readouterr().err

    @pytest.mark.parametrize("state", ["fock:inf", "fock:1e400"])
    def test_non_finite_fock_index(self, tmp_path, capsys, state):
        args = ["dist", "--state", state, "--output", str(tmp_path / "w.csv")]
        assert main(args + SMALL) == 2
        assert capsys.readouterr().err.startswith("error=InvalidSpec")


class TestMoments:

    def test_json_entries(self, capsys):
        args = ["moments", "--state", "coherent:1.5", "--eta1", "0.8", "--eta2", "0.6", "--dim", "40",
                "--targets", "1,1", "0,1"]
        assert main(args) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["state"] == "coherent:1.5+0i"
        assert set(data) == {"state", "sigma1", "sigma2", "s", "r", "entries"}
        assert set(data["entries"][0]) == {"target", "g_path_value", "oracle_value", "abs_error"}
        assert data["s"] == pytest.approx(-math.sqrt(3.5), abs=1e-12)
        photon, amplitude = data["entries"]
        assert photon["target"] == [1, 1]
        assert photon["g_path_value"]["re"] == pytest.approx(2.25, abs=5e-3)
        assert photon["oracle_value"]["re"] == pytest.approx(2.25, abs=1e-12)
        assert amplitude["abs_error"] < 5e-3

    def test_target_out_of_range(self, capsys):
        assert main(["moments", "--targets", "3,2"] + SMALL) == 2
        assert "error=TargetOutOfRange" in capsys.readouterr().err


class TestSimulate:

    def test_small_run(self, tmp_path, capsys):
        samples = tmp_path / "samples.csv"
        report = tmp_path / "report.json"
        args = ["simulate", "--count", "2000", "--seed", "3", "--targets", "1,1", "--emit-samples", str(samples),
                "--output", str(report)] + SMALL
        assert main(args) == 0
        captured = capsys.readouterr()
        data = json.loads(captured.out)
        assert data["sample_count"] == 2000
        assert set(data) == {"state", "detector", "sample_count", "seed", "wall_time", "entries"}
        assert set(data["entries"][0]) == {"target", "estimate", "oracle", "abs_error", "within_three_sigma"}
        assert data["seed"] == 3
        assert "wall_time=" in captured.err
        assert json.loads(report.read_text(encoding="utf-8")) == data
        sample_set = read_samples_csv(samples)
        assert sample_set.count == 2000
        assert sample_set.state_descriptor == "fock:0"

    def test_zero_count(self, capsys):
        assert main(["simulate", "--count", "0"] + SMALL) == 2
        assert "error=InsufficientSamples" in capsys.readouterr().err

    def test_unphysical_efficiency(self, capsys):
        assert main(["simulate", "--eta1", "1.2"] + SMALL) == 2
        assert "error=UnphysicalEfficiency" in capsys.readouterr().err

    def test_widths_come_from_efficiencies(self, capsys):
        assert main(["simulate", "--sigma1", "0.5", "--sigma2", "0.5"] + SMALL) == 2
        assert "error=UsageError" in capsys.readouterr().err


class TestOrdering:

    def _lines(self, capsys, *args):
        assert main(["ordering", *args]) == 0
        return capsys.readouterr().out.splitlines()

    def test_q_function_case(self, capsys):
        assert self._lines(capsys, "1", "1", "--s", "-1") == ["k=0: 1", "k=1: 0"]

    def test_s_minus_two(self, capsys):
        assert self._lines(capsys, "2", "2", "--s", "-2") == ["k=0: 1", "k=1: 2", "k=2: 0.5"]

    def test_no_contraction(self, capsys):
        assert self._lines(capsys, "0", "3", "--s", "-1.5") == ["k=0: 1"]

    def test_rational_s(self, capsys):
        assert self._lines(capsys, "1", "1", "--s=-7/2") == ["k=0: 1", "k=1: 1.25"]

    def test_check(self, capsys):
        lines = self._lines(capsys, "2", "2", "--s", "-1.5", "--check", "--r", "0.2")
        assert lines[-1].startswith("residual=")
        assert float(lines[-1].split("=")[1]) < 1e-9

    def test_out_of_range(self, capsys):
        assert main(["ordering", "9", "1", "--s", "-1"]) == 2
        assert "error=OrderingRangeError" in capsys.readouterr().err

    def test_missing_s(self, capsys):
        assert main(["ordering", "1", "1"]) == 2
        assert "error=UsageError" in capsys.readouterr().err

    @pytest.mark.parametrize("s", ["1e999", "inf", "nan"])
    def test_non_finite_s(self, capsys, s):
        assert main(["ordering", "1", "1", f"--s={s}"]) == 2
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "error=UsageError" in captured.err

    def test_overflowing_coefficients(self, capsys):
        assert main(["ordering", "2", "2", "--s=-1e300"]) == 2
        captured = capsys.readouterr()
        assert captured.out == ""
        assert captured.err.startswith("error=OrderingRangeError")


class TestParser:

    def test_unknown_command(self, capsys):
        assert main(["bogus"]) == 2
        assert capsys.readouterr().err.startswith("error=UsageError")

    def test_error_report_is_one_line(self, capsys):
        assert main(["dist", "--state", "laser:1"] + SMALL) == 2
        assert capsys.readouterr().err.strip().splitlines() == [
            "error=InvalidSpec message=unknown state spec 'laser:1'; expected kind:args"
        ]
        error_logger = get_logger("error")
        assert not any(type(handler) is logging.StreamHandler for handler in error_logger.handlers)

    def test_defaults_follow_config(self):
        args = build_parser().parse_args(["simulate"])
        assert args.dim == 64
        assert args.grid_step == 0.05
        assert args.seed == 42
        assert args.targets == [(1, 1)]
