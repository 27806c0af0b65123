import json

import pytest

from _configs import preset
from delsarte.cli import PRESETS, main
from delsarte.hyper import HGSeries, entry_series
from delsarte.lattice import build
from delsarte.series import expand


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out), err


def test_analyze_diag236(capsys):
    rep, _ = run_json(capsys, "analyze", "--preset", "section1")
    assert rep["weights"] == {"ell": [3, 2, 1], "ell0": 6}
    assert (rep["d"], rep["N"]) == (36, 6)
    assert sorted(c["R"] for c in rep["cosets"]) == [1, 1, 2, 2, 2, 2]


def test_analyze_chain4_and_fermat(capsys):
    rep, _ = run_json(capsys, "analyze", "--preset", "section7")
    assert rep["weights"] == {"ell": [2, 2, 1, 5], "ell0": 10}
    rep, _ = run_json(capsys, "analyze", "--preset", "fermat2")
    assert (rep["d"], rep["N"]) == (4, 2)


def test_analyze_input_file(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"columns": [[2, 0], [0, 2]], "a0": [1, 1]}))
    rep, _ = run_json(capsys, "analyze", "--input", str(path))
    assert rep["d"] == 4


def test_matrix_round_trip(capsys):
    rep, _ = run_json(capsys, "matrix", "--preset", "section1")
    lat = build(preset("section1"))
    T = 6 * lat.ell0 + 1
    for coset in rep["cosets"]:
        pts = [tuple(p) for p in coset["points"]]
        for bi, row in zip(pts, coset["entries"]):
            for bj, data in zip(pts, row):
                parsed = HGSeries.from_dict(data)
                mem = entry_series(lat, bi, bj).cancel()
                assert parsed == mem
                assert expand(parsed, T) == expand(mem, T)
    assert "scalar multiple" in rep["note"]


def test_matrix_sextic_coset(capsys):
    rep, _ = run_json(capsys, "matrix", "--preset", "section11")
    for coset in rep["cosets"]:
        if [1, 2, 3] in coset["points"]:
            pts = coset["points"]
            i, j = pts.index([1, 2, 3]), pts.index([5, 4, 3])
            text = [[coset["entries"][a][b]["text"] for b in (i, j)] for a in (i, j)]
    assert text[0][0] == "2F1(1/6,1/6;1/3;λ^6)"
    assert text[0][1].endswith("λ^4*2F1(5/6,5/6;5/3;λ^6)")
    assert text[1][0].endswith("λ^2*2F1(7/6,7/6;4/3;λ^6)")
    assert text[1][1] == "2F1(5/6,5/6;2/3;λ^6)"


def test_operators_forms(capsys):
    rep, _ = run_json(capsys, "operators", "--preset", "section7", "--coset", "1")
    (coset,) = rep["cosets"]
    assert all("lambda_form" in r and "x_form" in r for r in coset["rows"])


def test_operators_annihilators(capsys):
    rep, _ = run_json(capsys, "operators", "--preset", "fermat2", "--annihilators")
    for coset in rep["cosets"]:
        for row in coset["rows"]:
            assert "annihilator" in row


def test_infinity_chain4(capsys):
    rep, err = run_json(capsys, "infinity", "--preset", "section7")
    texts = {s["text"] for op in rep["operators"] for s in op["solutions"]}
    assert "λ^-1*4F3(1/10,3/10,7/10,9/10;1/2,1,1;λ^-10)" in texts
    assert rep["warnings"] and "warning:" in err


@pytest.mark.parametrize("name", PRESETS)
def test_verify_presets(capsys, name):
    rep, _ = run_json(capsys, "verify", "--preset", name)
    assert rep["all_pass"]


def test_verify_threads(capsys, monkeypatch):
    monkeypatch.setenv("PF_THREADS", "2")
    rep, _ = run_json(capsys, "verify", "--preset", "fermat2")
    assert rep["all_pass"] and [r["coset"] for r in rep["cosets"]] == [0, 1]


def test_hypersurface(capsys):
    rep, _ = run_json(capsys, "hypersurface", "--degree", "6", "--weights", "1", "2", "3")
    assert rep["basis_size"] == 20
    assert rep["block_sizes"] == [2, 2, 3, 3, 5, 5]
    assert sum(rep["block_sizes"]) == rep["basis_size"]


def test_hypersurface_preset(capsys):
    rep, _ = run_json(capsys, "hypersurface", "--preset", "section11")
    assert rep["block_sizes"] == [2, 2, 3, 3, 5, 5]


def test_format_both(capsys, tmp_path):
    out = tmp_path / "report"
    code, _, _ = run(capsys, "analyze", "--preset", "fermat2", "--format", "both", "--out", str(out))
    assert code == 0
    assert json.loads(out.with_suffix(".json").read_text())["d"] == 4
    assert r"\begin{tabular}" in out.with_suffix(".tex").read_text()


def test_latex_stdout(capsys):
    code, out, _ = run(capsys, "operators", "--preset", "section11", "--format", "latex")
    assert code == 0 and r"\delta" in out


@pytest.mark.parametrize("argv", [
    ["analyze"],
    ["analyze", "--input", "/nonexistent.json"],
    ["verify", "--preset", "section1", "--order", "3"],
    ["matrix", "--preset", "fermat2", "--coset", "9"],
    ["hypersurface", "--degree", "6", "--weights", "1", "1", "1"],
])
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_bad_json(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(capsys, "analyze", "--input", str(path))[0] == 2


def test_invalid_config(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"columns": [[2, 0], [0, 2]], "a0": [2, 2]}))
    assert run(capsys, "analyze", "--input", str(path))[0] == 2


def test_arithmetic_failure(capsys, monkeypatch):
    import delsarte.cli as cli

    def boom(*_):
        raise ZeroDivisionError("pole")
    monkeypatch.setattr(cli, "cmd_analyze", boom)
    assert run(capsys, "analyze", "--preset", "fermat2")[0] == 3


def test_verify_failure_exit(capsys, monkeypatch):
    import delsarte.cli as cli

    def failing(lat, args, T):
        return {"all_pass": False}, ""
    monkeypatch.setattr(cli, "cmd_verify", failing)
    assert run(capsys, "verify", "--preset", "fermat2")[0] == 1
