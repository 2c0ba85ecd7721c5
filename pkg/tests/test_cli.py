import csv
import io
import json
from fractions import Fraction

import pytest

from classdens import cli
from classdens import densities as den


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eta_mod5_table(capsys):
    code, out, _ = run(capsys, "eta", "--modulus", "5", "--primes", "20000", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == cli.SCHEMA and doc["command"] == "eta"
    vals = [r["value"] for r in doc["rows"]]
    for v, ref in zip(vals, (0.40322, 0.20461, 0.27013, 0.06857, 0.05344)):
        assert abs(v - ref) < 1e-4
    assert doc["rows"][0]["exact"] == "25/62"
    assert abs(doc["summary"]["row_sum"] - 1) < 1e-8


def test_eta_modulus_one(capsys):
    code, out, _ = run(capsys, "eta", "--modulus", "1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and float(rows[0]["value"]) == 1.0


def test_eta_with_direct_cross_check(capsys):
    code, out, _ = run(capsys, "eta", "--modulus", "5", "--terms", "200000", "--primes", "20000",
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["summary"]["max_W_route_gap"] < 1e-6


def test_twelve_significant_digits(capsys):
    code, out, _ = run(capsys, "eta", "--modulus", "5", "--residue", "1", "--primes", "20000",
                       "--format", "csv")
    value = list(csv.DictReader(io.StringIO(out)))[0]["value"]
    digits = value.replace("0.", "", 1).lstrip("0")
    assert len(digits) <= 12


def test_eta_fundamental(capsys):
    code, out, _ = run(capsys, "eta-fundamental", "--modulus", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["rows"][0]["value"] - 0.42699) < 1e-4
    code, out, _ = run(capsys, "eta-fundamental", "--modulus", "5", "--format", "json")
    vals = [r["value"] for r in json.loads(out)["rows"]]
    assert all(v >= 0 for v in vals)
    for v, ref in zip(vals, (0.1498, 0.0603, 0.0792, 0.0780, 0.0594)):
        assert abs(v - ref) < 1e-3


def test_local(capsys):
    code, out, _ = run(capsys, "local", "--modulus", "5", "--k", "0", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert [r["eta_closed"] for r in doc["rows"]] == ["25/62", "63/248", "125/372", "1/372", "1/248"]
    assert doc["rows"][0]["gamma_hat"] == "24"
    assert doc["summary"]["eta_sum"] == "1"


def test_config_errors(capsys):
    assert run(capsys, "eta", "--modulus", "0")[0] == 2
    assert run(capsys, "eta", "--residue", "x")[0] == 2
    assert run(capsys, "local", "--modulus", "6")[0] == 2
    assert run(capsys, "eta", "--primes", "10")[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["eta", "--format", "xml"])
    assert exc.value.code == 2


def test_census_cap(capsys, tmp_path):
    code, _, err = run(capsys, "census", "--x", "1e8", "--cache", str(tmp_path))
    assert code == 3 and "cap" in err


def test_census_and_cache(capsys, tmp_path):
    out_csv = tmp_path / "census.csv"
    code, out, _ = run(capsys, "census", "--x", "1000", "--cache", str(tmp_path / "c"),
                       "--output", str(out_csv), "--format", "json")
    assert code == 0
    s = json.loads(out)["summary"]
    assert abs(s["ratio"] - 1) < 0.1
    assert out_csv.read_text().splitlines()[0] == "D,h,t1,u1,log_eps"
    cached = sorted(p.name for p in (tmp_path / "c").iterdir())
    code, out2, _ = run(capsys, "census", "--x", "1000", "--cache", str(tmp_path / "c"), "--format", "json")
    s2 = json.loads(out2)["summary"]
    assert sorted(p.name for p in (tmp_path / "c").iterdir()) == cached
    assert (s2["pi"], s2["records"]) == (s["pi"], s["records"])


def test_cache_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CLASSDENS_CACHE_DIR", str(tmp_path))
    assert run(capsys, "census", "--x", "200")[0] == 0
    assert any(p.name.endswith(".csv") for p in tmp_path.iterdir())


def test_compare_mod4(capsys, tmp_path):
    code, out, _ = run(capsys, "compare", "--modulus", "4", "--x", "1000", "--cache", str(tmp_path),
                       "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[2]["theory"] == 0 and rows[2]["pi"] == 0
    assert rows[3]["theory"] == 0 and rows[3]["pi"] == 0


def test_compare_squarefree(capsys, tmp_path):
    code, out, _ = run(capsys, "compare", "--modulus", "3", "--x", "1000", "--cache", str(tmp_path),
                       "--squarefree", "--twisted", "--primes", "20000", "--format", "json")
    assert code == 0
    assert len(json.loads(out)["rows"]) == 3


def test_oracle_verify_passes(capsys):
    code, out, _ = run(capsys, "oracle-verify", "--odd-max", "27", "--two-max", "64", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert {r["suite"] for r in rows} == {"count_T", "count_A", "gamma_hat", "series_vs_closed"}
    assert all(r["cases"] > 0 and r["passed"] for r in rows)


@pytest.fixture
def corrupted_A(monkeypatch):
    """Break the (delta/p) = -1 branch of A at p = 5."""
    real = den.count_A

    def broken(p, r, delta):
        val = real(p, r, delta)
        if p == 5 and delta % 5 in (2, 3):
            return val + 1
        return val

    monkeypatch.setattr(den, "count_A", broken)
    return broken


def test_oracle_verify_detects_corruption(capsys, corrupted_A):
    code, out, err = run(capsys, "oracle-verify", "--odd-max", "27", "--two-max", "32")
    assert code == 4
    assert "count_A (5, 1, 2)" in err


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and "status: pass" in out


def test_fraction_format():
    assert cli.fmt_exact(Fraction(3, 1)) == "3"
    assert cli.fmt_exact(Fraction(25, 62)) == "25/62"
    assert cli.fmt_exact(0.5) is None
