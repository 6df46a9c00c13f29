import csv
import io
import json
import math

import numpy as np
import pytest

import oracles
from fcplab import cli
from fcplab.compound import Bernoulli, BetaUnit, DiscretePmf, GammaJump, Geometric, PoissonJump
from fcplab.errors import ValidationError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return rows[0], [[_num(v) for v in r] for r in rows[1:]]


def _num(v):
    try:
        return float(v)
    except ValueError:
        return v


def test_pmf_poisson(capsys):
    code, out, _ = run(capsys, "pmf", "--lambda", "3", "--t", "1", "--n-max", "6")
    assert code == 0
    assert out.startswith("# schema: fcplab/pmf/v1\n")
    head, rows = parse_csv(out)
    assert head == ["n", "probability"]
    for n, p in rows:
        assert p == pytest.approx(oracles.poisson_pmf(int(n), 3.0), rel=1e-11)


def test_json_output_mirrors_csv(capsys):
    code, out, _ = run(capsys, "pmf", "--mu", "0.8", "--vartheta", "0.8", "--t", "1", "--n-max", "3",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "fcplab/pmf/v1"
    assert doc["columns"] == ["n", "probability"]
    assert len(doc["rows"]) == 4
    assert doc["config"]["mu"] == 0.8


def test_moments_with_infinite_variance(capsys):
    code, out, _ = run(capsys, "moments", "--sub", "stable", "--alpha", "0.8", "--theta", "0.5",
                       "--t-grid", "1,2", "--orders", "2")
    assert code == 0
    head, rows = parse_csv(out.replace("inf", "Infinity"))
    assert "mean" in head
    assert all(math.isinf(r[head.index("variance")]) for r in rows)


@pytest.mark.parametrize("argv", [
    ("waiting-time", "--sub", "gamma", "--tau-grid", "0.5:2:4"),
    ("first-passage", "--w", "3", "--t-grid", "0.5,1,2"),
    ("compound", "--t", "1.5", "--kind", "fgcp", "--jump", "geometric:0.4", "--s-max", "5"),
    ("compound", "--t", "1.5", "--kind", "fgcp", "--jump", "gamma:1.5,0.5", "--y-grid", "0:3:4"),
    ("compound", "--t", "1.5", "--kind", "mcfcp", "--jump", "beta", "--y-grid", "0.1,0.5,1"),
    ("bell", "--x", "2", "--m-max", "4"),
    ("shock", "--a", "1", "--b", "0.5", "--r0", "3", "--k-p", "0.5", "--tau-grid", "0:3:4"),
    ("simulate", "--target", "fgcp", "--jump", "poisson:1", "--draws", "2000"),
])
def test_subcommands_produce_tables(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    head, rows = parse_csv(out)
    assert rows and all(len(r) == len(head) for r in rows)


def test_bell_numbers_column(capsys):
    code, out, _ = run(capsys, "bell", "--x", "1", "--m-max", "5")
    head, rows = parse_csv(out)
    col = [r[1] for r in rows]
    assert col == pytest.approx([oracles.bell_number(m) for m in range(6)], rel=1e-12)


def test_shock_curve_is_monotone(capsys):
    code, out, _ = run(capsys, "shock", "--mu", "0.7", "--vartheta", "0.9", "--a", "1", "--b", "0.5",
                       "--r0", "3", "--gradual-rate", "0.1", "--tau-grid", "0:5:6")
    head, rows = parse_csv(out)
    fail = [r[head.index("failure")] for r in rows]
    assert fail[0] == 0.0
    assert all(b > a for a, b in zip(fail, fail[1:]))


def test_simulate_reports_analytic_values(capsys):
    code, out, _ = run(capsys, "simulate", "--target", "fcp", "--lambda", "4", "--draws", "50000",
                       "--seed", "3")
    head, rows = parse_csv(out)
    mean = rows[0]
    assert mean[0] == "mean" and mean[3] == pytest.approx(4.0)
    assert abs(mean[1] - mean[3]) < 5 * mean[2]


def test_simulate_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    hists = [tmp_path / "ha.csv", tmp_path / "hb.csv"]
    for p, h in zip(paths, hists):
        code = cli.main(["simulate", "--target", "tcfcp", "--sub", "gamma", "--mu", "0.8",
                         "--vartheta", "0.8", "--draws", "20000", "--seed", "17", "-o", str(p),
                         "--histogram", str(h)])
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert hists[0].read_bytes() == hists[1].read_bytes()
    assert "# seed: 17" in paths[0].read_text()
    other = tmp_path / "c.csv"
    cli.main(["simulate", "--target", "tcfcp", "--sub", "gamma", "--mu", "0.8", "--vartheta", "0.8",
              "--draws", "20000", "--seed", "18", "-o", str(other)])
    assert other.read_bytes() != paths[0].read_bytes()


def test_invalid_parameters_are_reported_together(capsys):
    code, out, err = run(capsys, "pmf", "--t", "1", "--mu", "1.5", "--zeta", "-1", "--lambda", "0")
    assert code == 1
    assert out == ""
    assert err.startswith("fcplab-error: ")
    payload = json.loads(err.split("fcplab-error: ", 1)[1])
    text = json.dumps(payload)
    for name in ("mu", "zeta", "lambda"):
        assert name in text


def test_usage_errors_exit_with_invalid_code(capsys):
    assert run(capsys, "pmf", "--no-such-flag")[0] == 1
    assert run(capsys, "pmf", "--t", "-1")[0] == 1
    assert run(capsys, "compound", "--t", "1", "--jump", "nonsense:1")[0] == 1


def test_parse_grid():
    np.testing.assert_allclose(cli.parse_grid("0:1:3", "g"), [0, 0.5, 1])
    assert cli.parse_grid("0:1", "g").size == 11
    assert cli.parse_grid("2:2", "g").tolist() == [2.0]
    assert cli.parse_grid("1, 3,4", "g").tolist() == [1.0, 3.0, 4.0]
    for bad in ("1:2:0", "a:b", "1:2:3:4", ""):
        with pytest.raises(ValidationError):
            cli.parse_grid(bad, "g")


def test_parse_jump():
    assert cli.parse_jump("poisson:2") == PoissonJump(2.0)
    assert cli.parse_jump("bernoulli:0.3") == Bernoulli(0.3)
    assert cli.parse_jump("geometric:0.5") == Geometric(0.5)
    assert cli.parse_jump("gamma:2,0.5") == GammaJump(2.0, 0.5)
    assert cli.parse_jump("beta") == BetaUnit()
    assert cli.parse_jump("discrete:0,2/0.25,0.75") == DiscretePmf((0, 2), (0.25, 0.75))
    with pytest.raises(ValidationError):
        cli.parse_jump("bernoulli:2")


def test_output_file(tmp_path, capsys):
    target = tmp_path / "pmf.json"
    assert cli.main(["pmf", "--t", "1", "--n-max", "2", "--format", "json", "-o", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["rows"][0][0] == 0


def test_simulate_reports_missing_variance(capsys):
    assert cli.main(["simulate", "--target", "tcfcp", "--sub", "stable", "--alpha", "0.8",
                     "--theta", "0.4", "--draws", "2000"]) == 0
    out = capsys.readouterr().out
    assert "variance," in out and out.strip().endswith(",inf")
