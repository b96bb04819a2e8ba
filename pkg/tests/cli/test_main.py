import json

from igeflow.cli.commands.models import model_rows
from igeflow.main import main


def write_config(path, **overrides):
    data = {
        "model": {"name": "gaussian_mean_only"},
        "theta0": [0.0],
        "theta_dot0": [1.0],
        "tau_max": 100.0,
        "grid_points": 200,
        "output": path.stem,
    }
    data.update(overrides)
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def coded_lines(text, code):
    return [line for line in text.splitlines() if line.startswith(f"{code}:")]


def test_list_models(capsys):
    assert main(["list-models"]) == 0
    out = capsys.readouterr().out
    assert "gaussian_1d | 2 | (-inf,inf)x(0,inf) | closed-form" in out.splitlines()
    assert "bernoulli | 1 | (0,1) | closed-form" in out.splitlines()
    assert any(row.startswith("gaussian_product_3 | 6 | ") for row in model_rows())


def test_validate(tmp_path, capsys):
    path = write_config(tmp_path / "flat.json")
    assert main(["validate", str(path)]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_reports_mismatched_vectors(tmp_path, capsys):
    path = write_config(
        tmp_path / "bad.json",
        model={"name": "gaussian_1d"},
        theta0=[0.0, 1.0, 2.0],
        theta_dot0=[1.0, 0.0],
    )
    assert main(["validate", str(path)]) == 2
    lines = coded_lines(capsys.readouterr().err, "CONFIG_INVALID")
    assert len(lines) == 1
    assert "theta0: expected 2, got 3" in lines[0]


def test_run_with_overrides(tmp_path, capsys):
    path = write_config(tmp_path / "flat.json")
    out = tmp_path / "out"
    code = main(["run", str(path), "--out", str(out), "--tau-max", "20", "--grid-points", "40"])
    assert code == 0
    rows = (out / "flat.csv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 41
    assert rows[-1].startswith("20,")
    assert (out / "flat.summary.json").exists()


def test_run_reports_degenerate_axis(tmp_path, capsys):
    path = write_config(
        tmp_path / "vertical.json",
        model={"name": "gaussian_1d"},
        theta0=[0.0, 1.0],
        theta_dot0=[0.0, 1.0],
        tau_max=5.0,
        grid_points=20,
    )
    assert main(["run", str(path), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    lines = coded_lines(err, "DEGENERATE_AXIS")
    assert len(lines) == 1
    assert [line for line in err.splitlines() if "DEGENERATE_AXIS" in line] == lines
    assert "axis 0" in lines[0]


def test_run_rejects_invalid_override(tmp_path, capsys):
    path = write_config(tmp_path / "flat.json")
    assert main(["run", str(path), "--grid-points", "3"]) == 2
    assert coded_lines(capsys.readouterr().err, "CONFIG_INVALID")


def test_run_directory(tmp_path, capsys):
    configs = tmp_path / "configs"
    configs.mkdir()
    write_config(configs / "long.json", tau_max=30.0)
    write_config(configs / "short.json", tau_max=10.0)
    out = tmp_path / "out"
    assert main(["run", str(configs), "--out", str(out), "--bounds-mode", "envelope"]) == 0
    assert (out / "long.csv").exists()
    assert (out / "short.csv").exists()


def test_run_empty_directory(tmp_path, capsys):
    assert main(["run", str(tmp_path)]) == 2
    assert coded_lines(capsys.readouterr().err, "CONFIG_INVALID")
