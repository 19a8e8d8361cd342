import math
import pathlib

import pytest

from plotkit import PlotSpec, read_rows, render
from plotkit.cli import main
from plotkit.fit import least_squares_line
from plotkit.reader import SchemaError

DATA = pathlib.Path(__file__).parent / "data"


class TestReader:
    def test_reads_fixture(self):
        rows = read_rows(DATA / "bias.csv")
        assert len(rows) == 10
        assert {r.mode for r in rows} == {"robust", "plain"}
        assert rows[0].n == 10

    def test_schema_mismatch(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("# some-other-schema/9\na,b\n1,2\n")
        with pytest.raises(SchemaError):
            read_rows(bad)

    def test_empty_data(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text(
            "# phaseshadow-csv/1\n"
            "experiment,n,p_e,mode,N,estimate,stderr,variance,ng_mean,time_ms,seed\n"
        )
        with pytest.raises(SchemaError):
            read_rows(bad)


@pytest.mark.parametrize(
    "kind,fixture",
    [
        ("bias-vs-pe", "bias.csv"),
        ("timing-cuberoot", "timing.csv"),
        ("variance-vs-n", "variance_n.csv"),
        ("slope-fit", "slope.csv"),
    ],
)
class TestRenderDeterminism:
    def test_renders_and_repeats_identically(self, kind, fixture, tmp_path):
        out1 = tmp_path / "one.png"
        out2 = tmp_path / "two.png"
        render(PlotSpec(str(DATA / fixture), kind, str(out1)))
        render(PlotSpec(str(DATA / fixture), kind, str(out2)))
        b1, b2 = out1.read_bytes(), out2.read_bytes()
        assert b1 and b1 == b2


class TestSlopeFit:
    def test_matches_closed_form(self, tmp_path, capsys):
        out = tmp_path / "slope.png"
        slope = render(PlotSpec(str(DATA / "slope.csv"), "slope-fit", str(out)))
        printed = capsys.readouterr().out
        assert f"slope {slope!r}" in printed
        rows = read_rows(DATA / "slope.csv")
        xs = [r.p_e for r in rows]
        ys = [math.log(r.variance) for r in rows]
        xbar = sum(xs) / len(xs)
        ybar = sum(ys) / len(ys)
        want = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum(
            (x - xbar) ** 2 for x in xs
        )
        assert abs(slope - want) < 1e-9

    def test_least_squares_exact_line(self):
        slope, intercept = least_squares_line([0, 1, 2], [5, 7, 9])
        assert abs(slope - 2.0) < 1e-12
        assert abs(intercept - 5.0) < 1e-12

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            least_squares_line([1, 1], [2, 3])
        with pytest.raises(ValueError):
            least_squares_line([1], [2])


class TestCli:
    def test_cli_renders(self, tmp_path):
        out = tmp_path / "chart.png"
        rc = main(["--kind", "bias-vs-pe", "--in", str(DATA / "bias.csv"), "--out", str(out)])
        assert rc == 0
        assert out.stat().st_size > 0

    def test_unknown_kind(self):
        with pytest.raises(SystemExit):
            main(["--kind", "pie", "--in", "x.csv", "--out", "y.png"])
