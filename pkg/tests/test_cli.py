import json

import pytest

from chromysamp.cli import main
from chromysamp.io import read_matrix

from conftest import FIVE_UNITS, N8, reference_entry


def write_pop(path, probs, column="prob"):
    path.write_text(f"unit_id,{column}\n" + "".join(f"{k},{p}\n" for k, p in enumerate(probs, start=1)))
    return path


@pytest.fixture
def five_csv(tmp_path):
    return write_pop(tmp_path / "five_csv.csv", FIVE_UNITS)


@pytest.fixture
def n8_csv(tmp_path):
    return write_pop(tmp_path / "n8.csv", N8)


def test_enumerate_five_units(five_csv, tmp_path):
    out = tmp_path / "design.json"
    assert main(["enumerate", "--method", "chromy", "--input", str(five_csv), "--output", str(out)]) == 0
    design = json.loads(out.read_text())
    assert design["1,2,4"] == "3/35" and design["2,4,5"] == "9/40" and len(design) == 8


def test_jip_exact_matrix(n8_csv, tmp_path):
    out = tmp_path / "m.csv"
    assert main(["jip", "--exact", "--input", str(n8_csv), "--output", str(out)]) == 0
    labels, M = read_matrix(out)
    assert labels == [str(k) for k in range(1, 9)]
    for k in range(8):
        for l in range(8):
            if k != l:
                assert abs(M[k, l] - reference_entry(k + 1, l + 1)) <= 0.0005
    assert json.loads((tmp_path / "m.csv.json").read_text())["provenance"] == "permutation-averaged"


def test_jip_rational(n8_csv, tmp_path):
    out = tmp_path / "m.csv"
    assert main(["--rational", "jip", "--input", str(n8_csv), "--output", str(out)]) == 0
    first = out.read_text().splitlines()[1].split(",")
    assert first[1] == "1/5"
    _, M = read_matrix(out, "exact")
    assert M[2, 7] == M[7, 2]
    assert sum(M[0, 1:]) == 3 * M[0, 0]


def test_jip_monte_carlo_sidecar(n8_csv, tmp_path):
    out = tmp_path / "mc.csv"
    assert main(["--seed", "3", "jip", "--mc", "2000", "--input", str(n8_csv), "--output", str(out)]) == 0
    side = json.loads((tmp_path / "mc.csv.json").read_text())
    assert side["provenance"] == "monte-carlo" and side["draws"] == 2000 and side["seed"] == 3


def test_sample_estimate_round_trip(n8_csv, tmp_path, capsys):
    s1, s2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    for out in (s1, s2):
        assert main(["--seed", "12", "sample", "--input", str(n8_csv), "--output", str(out)]) == 0
    assert s1.read_bytes() == s2.read_bytes()
    side = json.loads((tmp_path / "s1.csv.json").read_text())
    assert side["seed"] == 12 and side["permutation_start"] in [str(k) for k in range(1, 9)]
    assert len(s1.read_text().splitlines()) == 5
    m = tmp_path / "m.csv"
    main(["jip", "--input", str(n8_csv), "--output", str(m)])
    y = tmp_path / "y.csv"
    y.write_text("unit_id,y\n" + "".join(f"{k},{k * k}\n" for k in range(1, 9)))
    capsys.readouterr()
    assert main(["estimate", "--sample", str(s1), "--values", str(y), "--matrix", str(m)]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["ci_low"] <= rec["ht"] <= rec["ci_high"] and rec["syg_var"] >= 0


@pytest.mark.parametrize("method", ["chromy", "pivotal", "randomized-chromy"])
def test_sample_methods(method, five_csv, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["--seed", "1", "sample", "--method", method, "--input", str(five_csv), "--output", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4


def test_missing_seed_is_drawn_and_printed(five_csv, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sample", "--input", str(five_csv), "--output", str(out)]) == 0
    seed = int(capsys.readouterr().err.split("seed:")[1])
    assert json.loads((tmp_path / "s.csv.json").read_text())["seed"] == seed


def test_size_input_with_certainty(tmp_path):
    pop = write_pop(tmp_path / "x.csv", [1, 2, 3, 4, 30], column="size")
    out = tmp_path / "s.csv"
    assert main(["--seed", "2", "sample", "--input", str(pop), "--n", "3", "--output", str(out)]) == 0
    assert "5" in out.read_text().split()
    m = tmp_path / "m.csv"
    assert main(["jip", "--input", str(pop), "--n", "3", "--output", str(m)]) == 0
    _, M = read_matrix(m)
    assert M[4, 4] == 1.0 and M[4, 0] == pytest.approx(0.2)


def test_inspect_clusters(five_csv, tmp_path):
    out = tmp_path / "c.json"
    assert main(["inspect", "--clusters", "--input", str(five_csv), "--output", str(out)]) == 0
    info = json.loads(out.read_text())
    assert info["cross_border"] == ["2", "4"]
    assert info["transition"]["rows"]["1,1"]["2"] == "1/2"
    assert [c["units"] for c in info["clusters"]] == [["1"], ["2"], ["3"], ["4"], ["5"]]


def test_simulate(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"population": {"N": 50}, "sample_sizes": [10], "replicates": 30, "seed": 2}))
    out = tmp_path / "r.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("label,variable,n,relative_bias,rrmse") and len(lines) == 5
    first = out.read_bytes()
    main(["simulate", "--config", str(cfg), "--out", str(out)])
    assert out.read_bytes() == first


def test_missing_input_exit_code(tmp_path, capsys):
    code = main(["sample", "--input", str(tmp_path / "nope.csv"), "--output", str(tmp_path / "o.csv")])
    assert code == 3
    assert json.loads(capsys.readouterr().err)["error"] == "IoError"


def test_validation_exit_code(tmp_path, capsys):
    pop = write_pop(tmp_path / "bad.csv", ["0.5", "0.6"])
    assert main(["sample", "--input", str(pop), "--output", str(tmp_path / "o.csv")]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "NonIntegerTotal" and err["nearest"] == 1
    assert not (tmp_path / "o.csv").exists()


def test_usage_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["sample", "--method", "bogus"])
    assert info.value.code == 2
