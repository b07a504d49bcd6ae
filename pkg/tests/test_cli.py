import csv
import io

import pytest

from qpriors.cli import EXIT_DOMAIN, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_metric_eval_aberaj(capsys):
    code, out, _ = run(capsys, "metric", "eval", "--family", "aberaj", "--point", "0.1,4.0")
    assert code == 0
    d = {r[0]: r[1] for r in rows(out) if len(r) == 2}
    assert abs(float(d["det_ratio"])) < 1e-10
    assert d["degenerate"] == "true"


def test_metric_check_bloch(capsys):
    code, out, _ = run(capsys, "metric", "check", "--family", "bloch", "--samples", "20")
    assert code == 0
    assert float(rows(out)[1][2]) < 1e-5


def test_metric_detnull_escort(capsys):
    code, out, _ = run(capsys, "metric", "detnull", "--family", "escort", "--samples", "200")
    r = rows(out)
    assert code == 0 and r[1][-1] == "true" and float(r[1][2]) < 1e-10


def test_prior_normalize(capsys):
    code, out, _ = run(capsys, "prior", "normalize", "--name", "p_F")
    assert code == 0
    assert abs(float(rows(out)[1][1]) - 1.39350989) < 1e-4 * 1.4


def test_prior_marginal_file(capsys, tmp_path):
    path = tmp_path / "m.csv"
    code, out, _ = run(capsys, "prior", "marginal", "--name", "p_B", "--points", "0.5,0.9", "--out", str(path))
    assert code == 0 and out == ""
    data = path.read_bytes()
    assert data.startswith(b"variable,value,density\r\n")
    assert len(rows(data.decode())) == 3


def test_kl(capsys):
    code, out, _ = run(capsys, "kl", "--p", "p_B", "--q", "p_Btrunc")
    assert code == 0
    assert abs(float(rows(out)[1][2]) - 0.101846) < 0.02 * 0.101846
    code, out, _ = run(capsys, "kl", "--p", "p_B", "--q", "p_B")
    assert float(rows(out)[1][2]) == 0.0


def test_kl_support_error_exit_code(capsys):
    code, out, err = run(capsys, "--pb-convention", "printed", "kl", "--p", "p_F", "--q", "p_B")
    assert code == EXIT_DOMAIN and out == "" and "SupportMismatch" in err


def test_infogain(capsys):
    code, out, _ = run(capsys, "infogain", "--prior", "p_B", "--spec", "z:1,0")
    assert code == 0 and abs(float(rows(out)[1][2]) - 0.140186) < 1e-4
    code, out, _ = run(capsys, "infogain", "--prior", "p_B", "--spec", "pow:1")
    assert float(rows(out)[1][2]) == 0.0


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["metric", "bogus", "--family", "bloch"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["prior", "normalize", "--name", "p_X"])
    assert exc.value.code == EXIT_USAGE
    code, out, _ = run(capsys, "infogain", "--prior", "p_B", "--spec", "zz")
    assert code == EXIT_USAGE and out == ""
    code, _, _ = run(capsys, "metric", "eval", "--family", "bloch")
    assert code == EXIT_USAGE


def test_domain_error(capsys):
    code, out, err = run(capsys, "metric", "eval", "--family", "bloch", "--point", "1.5,1,1")
    assert code == EXIT_DOMAIN and out == "" and "DomainError" in err


def test_bad_config(capsys, tmp_path):
    f = tmp_path / "bad.conf"
    f.write_text("q_min = 10\nq_max = 1\n")
    code, _, err = run(capsys, "--config", str(f), "prior", "normalize", "--name", "p_F")
    assert code == EXIT_USAGE and "configuration" in err


def test_report_sections_deterministic(capsys, tmp_path):
    for d in ("a", "b"):
        code, _, _ = run(
            capsys, "report", "--section", "normalizations", "--section", "closed_marginals",
            "--out", str(tmp_path / d), "--workers", "2",
        )
        assert code == 0
    a = (tmp_path / "a" / "summary.md").read_text()
    assert a == (tmp_path / "b" / "summary.md").read_text()
    assert "Checks passed: 12 of 12." in a
