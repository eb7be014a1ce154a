import json

import numpy as np
import pytest

from inflap.cli import (EXIT_CHECK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NOT_CONVERGED, EXIT_OK,
                        main, parse_config)
from inflap.coneops import ScalarField
from inflap.errors import BadValue, MissingRequired, UnknownKey
from inflap.fieldio import read_field, read_report, write_field
from inflap.lattice import build_domain

SOLVE = ["solve", "--bounds", "0,1,0,1", "--h", "0.03125", "--eps", "0.125", "--norm", "euclidean",
         "--boundary", "cone:0,1,3,3", "--tol", "1e-10"]


def test_parse_solve_example():
    cfg = parse_config(SOLVE + ["--out", "field.csv", "--report", "report.json"])
    assert cfg.command == "solve" and cfg.h == 0.03125 and cfg.eps == 0.125
    assert cfg.solve.tol == 1e-10 and cfg.out == "field.csv" and cfg.report == "report.json"


def test_parse_non_commensurate():
    with pytest.raises(BadValue):
        parse_config(["solve", "--bounds", "0,0.96", "--h", "0.03", "--eps", "0.1",
                      "--boundary", "linear:1,0"])


def test_parse_bad_norm_lists_choices():
    with pytest.raises(BadValue) as info:
        parse_config(SOLVE + ["--norm", "l3"])
    assert info.value.key == "norm"
    for n in ("euclidean", "l1", "linf"):
        assert n in str(info.value)


def test_parse_unknown_and_missing():
    with pytest.raises(UnknownKey):
        parse_config(SOLVE + ["--colour", "red"])
    with pytest.raises(MissingRequired) as info:
        parse_config(["solve", "--bounds", "0,1", "--h", "0.25", "--boundary", "linear:1,0"])
    assert info.value.key == "eps"


def test_config_file(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"bounds": [0, 1], "h": 0.125, "eps": 0.25,
                                "boundary": "linear:1,0", "max_iter": 50}))
    cfg = parse_config(["solve", "--config", str(conf), "--eps", "0.375"])
    assert cfg.eps == 0.375 and cfg.solve.max_iter == 50
    conf.write_text(json.dumps({"bounds": [0, 1], "speed": 3}))
    with pytest.raises(UnknownKey) as info:
        parse_config(["solve", "--config", str(conf)])
    assert info.value.key == "speed"


def test_solve_outputs_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        d.mkdir()
        assert main(SOLVE + ["--out", str(d / "f.csv"), "--report", str(d / "r.txt")]) == EXIT_OK
    assert (a / "f.csv").read_bytes() == (b / "f.csv").read_bytes()
    assert (a / "r.txt").read_bytes() == (b / "r.txt").read_bytes()
    rep = read_report(a / "r.txt")["solve"]
    assert rep["converged"] == "true" and int(rep["iterations"]) > 0
    assert read_field(a / "f.csv").domain.shape == (33, 33)


def test_solve_not_converged_exit(tmp_path):
    assert main(SOLVE + ["--max-iter", "3"]) == EXIT_NOT_CONVERGED


def test_bad_config_exit(capsys):
    assert main(SOLVE + ["--norm", "l3"]) == EXIT_CONFIG
    assert "norm" in capsys.readouterr().err


def _solve_to(path, boundary):
    return main(["solve", "--bounds", "0,1,0,1", "--h", "0.0625", "--eps", "0.25",
                 "--boundary", boundary, "--out", str(path)])


def test_lemma1_and_jensen_commands(tmp_path):
    assert _solve_to(tmp_path / "u.csv", "cone:0,1,3,3") == EXIT_OK
    assert _solve_to(tmp_path / "v.csv", "linear:0.5,-0.2,1") == EXIT_OK
    common = ["--u", str(tmp_path / "u.csv"), "--v", str(tmp_path / "v.csv"), "--eps", "0.25"]
    assert main(["check-lemma1", *common, "--report", str(tmp_path / "l1.txt")]) == EXIT_OK
    assert read_report(tmp_path / "l1.txt")["check"]["passed"] == "true"
    assert main(["jensen", *common]) == EXIT_OK


def test_lemma1_hypothesis_exit(tmp_path):
    dom = build_domain([0, 1, 0, 1], 0.0625)
    write_field(ScalarField(dom, np.random.default_rng(0).normal(size=dom.shape)), tmp_path / "r.csv")
    assert _solve_to(tmp_path / "v.csv", "cone:0,1,3,3") == EXIT_OK
    code = main(["check-lemma1", "--u", str(tmp_path / "r.csv"), "--v", str(tmp_path / "v.csv"),
                 "--eps", "0.25", "--report", str(tmp_path / "h.txt")])
    assert code == EXIT_HYPOTHESIS
    assert read_report(tmp_path / "h.txt")["hypothesis"]["passed"] == "false"


def test_lemma1_conclusion_failure_report(tmp_path):
    dom = build_domain([0, 1, 0, 1], 0.0625)
    x = dom.points()
    inner = (x[..., 0] > 0.3) & (x[..., 0] < 0.7) & (x[..., 1] > 0.3) & (x[..., 1] < 0.7)
    write_field(ScalarField(dom, np.where(inner, 1.0, 0.0)), tmp_path / "u.csv")
    write_field(ScalarField(dom, np.zeros(dom.shape)), tmp_path / "v.csv")
    code = main(["check-lemma1", "--u", str(tmp_path / "u.csv"), "--v", str(tmp_path / "v.csv"),
                 "--eps", "0.25", "--hyp-tol", "100", "--report", str(tmp_path / "c.txt")])
    assert code == EXIT_CHECK
    rep = read_report(tmp_path / "c.txt")["check"]
    assert rep["passed"] == "false" and rep["slack"] == "1" and rep["witness"] != "none"


def test_check_commands_on_analytic_samples():
    base = ["--bounds", "-1,1,-1,1", "--h", "0.0625"]
    assert main(["check-lemma2", *base, "--field", "aronsson", "--eps", "0.25"]) == EXIT_OK
    assert main(["check-lemma2", *base, "--field", "cone:0,-1,0,0", "--eps", "0.25"]) == EXIT_CHECK
    assert main(["check-cones", *base, "--field", "cone:0,1,3,3", "--sides", "4"]) == EXIT_OK
    assert main(["check-convexity", *base, "--field", "linear:1,0,0", "--node", "16,16",
                 "--radii", "0.125,0.25,0.375"]) == EXIT_OK
    assert main(["check-convexity", "--bounds", "-2,2", "--h", "1/64", "--field", "cone:0,-1,0",
                 "--node", "160", "--radii", "0.25,0.5,0.75", "--tol", "1/32"]) == EXIT_CHECK


def test_converge_and_stencil(tmp_path, capsys):
    assert main(["converge", "--bounds", "-1,1,-1,1", "--exact", "linear:0.3,0.4,0",
                 "--levels", "1/8,1/16", "--report", str(tmp_path / "c.txt")]) == EXIT_OK
    blocks = read_report(tmp_path / "c.txt")
    assert [k for k in blocks if k.startswith("row")] == ["row 0", "row 1"]
    assert float(blocks["row 0"]["h"]) == 0.125
    assert main(["stencil", "--h", "1", "--eps", "1", "--out", str(tmp_path / "s.csv")]) == EXIT_OK
    assert (tmp_path / "s.csv").read_text().split() == ["-1,0", "0,-1", "0,0", "0,1", "1,0"]
