import json
import math

import pytest

from cbimatrix.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_zonal_and_hyp(capsys):
    code, out, _ = run(capsys, "zonal", "eval", "--partition", "2,1", "--eigs", "0.3,0.5")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.24)
    code, out, _ = run(capsys, "hyp", "eval", "--num", "2.5", "--eigs", "0.3,0.1")
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(0.63 ** -2.5, rel=1e-9)
    assert doc["converged"] and doc["version"]


def test_const(capsys):
    _, out, _ = run(capsys, "const", "gamma", "--a", "3", "--m", "2")
    assert json.loads(out)["log"] == pytest.approx(math.log(2 * math.pi), abs=1e-12)
    _, out, _ = run(capsys, "const", "stiefel", "--m", "1", "--n", "1")
    assert json.loads(out)["log"] == pytest.approx(math.log(2 * math.pi), abs=1e-12)


def test_sample_stream_and_sidecar(capsys, tmp_path):
    code, out, err = run(capsys, "sample", "bgb1", "--m", "2", "--a", "3", "--b", "3", "--c", "3",
                         "--n", "0", "--seed", "1")
    assert code == 0 and out == ""
    assert json.loads(err)["n"] == 0
    path = tmp_path / "s.jsonl"
    run(capsys, "sample", "cbeta1", "--a", "2", "--b", "3", "--n", "4", "--seed", "9", "--out", str(path))
    first = path.read_text()
    assert len(first.splitlines()) == 4
    assert json.loads((tmp_path / "s.jsonl.meta.json").read_text())["seed"] == 9
    run(capsys, "sample", "cbeta1", "--a", "2", "--b", "3", "--n", "4", "--seed", "9", "--out", str(path))
    assert path.read_text() == first


def test_density_round_trip(capsys, tmp_path):
    m = tmp_path / "u.json"
    m.write_text(json.dumps([[0.3]]))
    code, out, _ = run(capsys, "density", "cbeta1", "--a", "2", "--b", "3", "--matrix", str(m))
    assert code == 0
    # log Beta(2, 3) density at 0.3 = log(12 * 0.3 * 0.49)
    assert json.loads(out)["logpdf"] == pytest.approx(math.log(12 * 0.3 * 0.49), abs=1e-12)


def test_bgb1_commands(capsys):
    _, out, _ = run(capsys, "bgb1", "eigdensity", "--m", "2", "--a", "3", "--b", "3", "--c", "3",
                    "--lambda", "0.6,0.2", "--delta", "0.5,0.1")
    assert json.loads(out)["converged"]
    _, out, _ = run(capsys, "maxeig", "oracle", "--a", "3", "--b", "3", "--c", "3", "--x", "0.6", "--y", "0.6")
    assert json.loads(out)["value"] == pytest.approx(0.5458832446, abs=1e-9)


def test_errors_and_usage(capsys):
    code, _, err = run(capsys, "hyp", "eval", "--num", "1", "--eigs", "1.5")
    assert code == 1 and json.loads(err)["error"] == "DivergenceError"
    with pytest.raises(SystemExit) as exc:
        main(["bgb1", "moment", "--a", "3"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# shapes\na = 3\nb = 3\nc = 3\nm = 2\n")
    code, out, _ = run(capsys, "--config", str(cfg), "bgb1", "moment", "--r", "1", "--s", "0")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(0.2, rel=1e-8)


def test_verify_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, _, _ = run(capsys, "verify", "zonal", "--m", "3", "--seed", "7", "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_failure_exit(capsys):
    code, out, _ = run(capsys, "verify", "hyp", "--m", "2", "--seed", "1")
    doc = json.loads(out)
    assert code == (0 if doc["passed"] else 1)


def test_grid_csv(capsys, tmp_path):
    path = tmp_path / "grid.csv"
    argv = ["maxeig", "grid", "--a", "3", "--b", "3", "--c", "3", "--xs", "0.5,1", "--ys", "0.5,1",
            "--n", "500", "--seed", "2", "--format", "csv", "--out", str(path)]
    assert main(argv) == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# version") and lines[2].startswith("x,y,mean")
    assert len(lines) == 3 + 4
    assert lines[-1].split(",")[2] == "1.0"
    first = path.read_text()
    main(argv)
    assert path.read_text() == first
