import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from rdw3r import io as fmt
from rdw3r.cli import build_parser, main
from rdw3r.kinematics import ManipulatorType
from rdw3r.rdw import RdwConfig
from rdw3r.sweep import GridSpec, sweep_eta

DATA = Path(__file__).parent / "data"
FAST = ["--grid-n", "256", "--n-scan", "40"]


@pytest.fixture(scope="module")
def toy_sweep():
    grid = GridSpec.for_type(ManipulatorType.C, 1.0, 3.0, 1.0)
    return sweep_eta(ManipulatorType.C, grid, 0.25, RdwConfig(grid_n=128, n_scan=16, reach_grid_n=64))


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_rdw_json(capsys):
    code, out, err = run(["rdw", "--type", "C", "--d4", "1.5", "--r2", "1", *FAST], capsys)
    assert code == 0, err
    data = json.loads(out)
    assert list(data) == [
        "type", "params", "free_square", "rdw_square", "k_min_inv", "rho_max", "eta", "scan_step",
        "singular_samples",
    ]
    assert list(data["free_square"]) == ["rho", "z", "edge"]
    assert data["free_square"]["edge"] == pytest.approx(1.727, abs=0.02)
    assert np.isfinite(data["eta"])
    assert data["params"] == {"d2": 0.0, "d3": 0.0, "d4": 1.5, "r2": 1.0, "r3": 0.0}


def test_rdw_type_violation(capsys):
    code, out, err = run(["rdw", "--type", "C", "--d4", "1.5", "--r2", "1", "--d3", "2"], capsys)
    assert code == 1
    assert out == ""
    assert "d3" in err and len(err.strip().splitlines()) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["rdw", "--type", "Q", "--d4", "1"],
        ["rdw", "--type", "C", "--d4", "1", "--r2", "1", "--bogus", "3"],
        ["rdw", "--type", "C", "--d4", "1", "--r2", "1", "--kmin", "1.5"],
        ["contour", "--in", "/nonexistent/sweep.csv"],
        ["sweep", "--type", "C", "--min", "0"],
        ["sweep", "--type", "Generic"],
        [],
    ],
)
def test_validation_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 1
    assert out == ""
    assert err.startswith("error:")


def test_computation_error_exit_code(capsys):
    # a lone d4 link: det J vanishes on whole joint lines, no reachable free interval
    code, _, err = run(["rdw", "--type", "Generic", "--d4", "1", *FAST], capsys)
    assert code == 2
    assert "computation failed" in err


def test_singular_csv(tmp_path, capsys):
    out = tmp_path / "sing.csv"
    code, stdout, _ = run(["singular", "--type", "C", "--d4", "1.5", "--r2", "1", "--grid-n", "256",
                           "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["rho", "z", "theta2", "theta3"]
    assert len(rows) > 100
    for row in rows[1:50]:
        for v in row:
            mantissa = v.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(mantissa) <= 9


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# resolution\ntype = C\nd4 = 1.5\nr2 = 1\ngrid-n = 256\nn_scan = 40\nkmin = 0.3\n")
    code, out, _ = run(["rdw", "--config", str(cfg), "--kmin", "0.25"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["k_min_inv"] == 0.25
    assert data["params"]["d4"] == 1.5

    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, err = run(["rdw", "--type", "C", "--config", str(bad)], capsys)
    assert code == 1 and "colour" in err


def test_help_lists_every_flag(capsys):
    _, subs = build_parser()
    for name, parser in subs.items():
        text = parser.format_help()
        for action in parser._actions:
            for opt in action.option_strings:
                assert opt in text
    assert main(["rdw", "--help"]) == 0


def test_sweep_csv_round_trip(toy_sweep):
    buf = io.StringIO()
    fmt.write_sweep_csv(toy_sweep, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == ",".join(fmt.SWEEP_HEADER)
    back = fmt.read_sweep_csv(io.StringIO(text))
    np.testing.assert_allclose(back.eta, toy_sweep.eta, rtol=5e-6)
    np.testing.assert_array_equal(back.mask_reason, toy_sweep.mask_reason)
    again = io.StringIO()
    fmt.write_sweep_csv(back, again)
    assert again.getvalue().replace("p1", "r2", 0) == text.replace("p1", "r2", 0)


def test_read_sweep_csv_rejects_garbage():
    with pytest.raises(ValueError):
        fmt.read_sweep_csv(io.StringIO("a,b\n1,2\n"))


def test_contour_golden_and_deterministic(tmp_path, capsys):
    src = DATA / "toy_sweep.csv"
    outs = []
    for k in range(2):
        out = tmp_path / f"c{k}.csv"
        assert run(["contour", "--in", str(src), "--levels", "0.3,0.5", "--out", str(out)], capsys)[0] == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] == (DATA / "toy_contours.csv").read_bytes()


def test_contour_svg(tmp_path, capsys):
    out = tmp_path / "c.svg"
    code, _, _ = run(["contour", "--in", str(DATA / "toy_sweep.csv"), "--levels", "0.3,0.5",
                      "--out", str(out)], capsys)
    assert code == 0
    svg = out.read_text()
    assert 'width="800" height="800"' in svg
    assert svg.count("<path") == svg.count("<text") > 0
    assert ">0.5<" in svg


def test_sweep_cli(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, err = run(["sweep", "--type", "H", "--min", "1", "--max", "2", "--step", "1",
                        "--grid-n", "128", "--n-scan", "16", "--jobs", "1", "--out", str(out)], capsys)
    assert code == 0
    assert "100%" in err
    field = fmt.read_sweep_csv(out.open())
    assert field.grid.shape == (2, 2)
    assert field.valid.all()


def test_config_boolean_keys(tmp_path, capsys):
    cfg = tmp_path / "q.cfg"
    cfg.write_text("quiet = false\n")
    code, _, err = run(["sweep", "--type", "C", "--min", "1", "--max", "2", "--step", "1", "--grid-n", "128",
                        "--n-scan", "8", "--jobs", "1", "--config", str(cfg)], capsys)
    assert code == 0 and "100%" in err
    cfg.write_text("quiet = maybe\n")
    assert main(["sweep", "--type", "C", "--config", str(cfg)]) == 1
