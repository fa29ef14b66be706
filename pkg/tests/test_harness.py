import csv
import io
import json
from pathlib import Path

import pytest

from dpat.errors import ConfigError
from dpat.harness import COLUMNS, SCHEMA_VERSION, ExperimentConfig, load_config_doc, parse_range, run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _rows(report):
    return list(csv.reader(io.StringIO(report.to_csv())))


def test_parse_range():
    assert parse_range("5..499") == (5, 499)
    assert parse_range([3, 7]) == (3, 7)
    for bad in ("5-7", "9..5", "a..b", 5):
        with pytest.raises(ConfigError):
            parse_range(bad)


@pytest.mark.parametrize("doc", [
    {"mode": "roth", "set": "squares", "r": 1},                                   # missing field range
    {"mode": "roth", "set": "squares", "p_range": "5..11"},                       # no threshold
    {"mode": "roth", "set": "squares", "formula": "x = x", "p_range": "5..11", "r": 1},
    {"mode": "roth", "set": "squares", "primes": [9], "r": 1},
    {"mode": "roth", "set": "nosuch", "primes": [7], "r": 1},
    {"mode": "roth", "set": "squares", "primes": [7], "delta": "3/2"},
    {"mode": "cdm", "formula": "E y (", "primes": [7]},
    {"mode": "sarkozy", "set": "squares", "primes": [7]},
    {"mode": "wat", "set": "squares", "primes": [7]},
    {"mode": "roth", "set": "squares", "primes": [7], "r": 1, "typo": 1},
    {"mode": "zap3", "set": "SF", "a": [1]},
    {"mode": "zsarkozy", "set": "SF", "a": [1], "n_max": 5, "kind": "XX"},
    {"mode": "zskew", "set": "SF", "lo": 0, "hi": 5},
    {"mode": "zap3", "set": "QQ", "a": [1], "gap_bound": 3},
    {"mode": "roth", "set": "squares", "primes": [7], "r": 1, "jobs": 0},
    {"set": "squares"},
])
def test_validation_errors(doc):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(doc)


def test_roth_report_schema():
    rep = run_experiment({"mode": "roth", "set": "squares", "p_range": "5..31", "r": 1}, write=False)
    rows = _rows(rep)
    assert tuple(rows[0]) == COLUMNS["roth"]
    assert {r[3] for r in rows[1:]} <= {"bad", "mid", "dense"}
    assert len(rep.summary["per_field"]) == 9
    d = rep.result_dict()
    assert d["schema_version"] == SCHEMA_VERSION
    assert d["conventions"]["include_zero"] is True
    assert d["conventions"]["thresholds"]["r"] == 1


def test_roth_nontrivial_shifts_counts():
    base = {"mode": "roth", "set": "squares", "primes": [13], "r": 0}
    a = run_experiment(base, write=False)
    b = run_experiment({**base, "include_zero": False}, write=False)
    assert [r[2] - 1 for r in a.rows] == [r[2] for r in b.rows]
    assert b.conventions["include_zero"] is False


def test_cdm_cubes_branches():
    rep = run_experiment({"mode": "cdm", "set": "cubes", "primes": [7, 13, 31, 61, 97, 103, 5, 11, 17]}, write=False)
    fits = rep.summary["fits"]
    assert set(fits) == {"1 mod 3", "2 mod 3"}
    assert fits["1 mod 3"]["d"] == 1 and abs(fits["1 mod 3"]["mu_value"] - 1 / 3) < 1e-2
    assert fits["2 mod 3"]["d"] == 1 and abs(fits["2 mod 3"]["mu_value"] - 1) < 1e-2
    assert [r[3] for r in rep.rows if r[0] == 7] == [3]


def test_cdm_too_few_points_is_reported():
    rep = run_experiment({"mode": "cdm", "set": "cubes", "primes": [7, 13]}, write=False)
    assert rep.summary["fits"]["1 mod 3"]["verdict"] == "TooFewPoints"


def test_skew_and_sarkozy_modes():
    rep = run_experiment({"mode": "skew", "set": "diagonal", "primes": [5], "delta_prime": "1/100"}, write=False)
    assert [(r[1], r[3]) for r in rep.rows] == [(0, "ok")] + [(g, "exceptional") for g in range(1, 5)]
    assert rep.summary["exceptional_total"] == 4
    rep = run_experiment({"mode": "sarkozy", "set": "full", "primes": [7], "w_subgroup": {"kind": "trivial"}},
                         write=False)
    assert all(r[2] == 1 for r in rep.rows)


def test_formula_source():
    rep = run_experiment({"mode": "cdm", "formula": "x*y = 1", "free": ["x", "y"], "primes": [5, 7, 11]},
                         write=False)
    assert [r[3] for r in rep.rows] == [4, 6, 10]
    assert rep.summary["fits"]["all"]["d"] == 1


def test_mset_source(tmp_path):
    from dpat.evaluate import evaluate
    from dpat.finfield import make_field
    from dpat import formula as fm
    s = evaluate(fm.parse("E y (y*y = x)"), make_field(11, 1), free=("x",))
    s.save(tmp_path / "sq.mset")
    (tmp_path / "c.json").write_text(json.dumps({"mode": "roth", "mset": "sq.mset", "r": 2}))
    rep = run_experiment(ExperimentConfig.from_file(tmp_path / "c.json"), write=False)
    assert [r[1] for r in rep.rows] == list(s.elements())


def test_jobs_match_serial():
    base = {"mode": "roth", "set": "nonzero-squares", "p_range": "5..61", "r": 1, "delta": "1/32"}
    a = run_experiment(base, write=False)
    b = run_experiment({**base, "jobs": 2}, write=False)
    assert a.to_csv() == b.to_csv()
    assert a.result_dict()["summary"] == b.result_dict()["summary"]


def test_z_modes():
    rep = run_experiment({"mode": "zap3", "set": "Z", "k": 3, "a": [0, 5], "gap_bound": 10}, write=False)
    assert rep.rows == [(0, 6), (5, 6)]
    assert rep.conventions["include_zero"] is False
    rep = run_experiment({"mode": "zsarkozy", "set": "SF", "kind": "SF", "a": [1, 2], "n_max": 10}, write=False)
    assert rep.rows == [(1, 7), (2, 5)]
    rep = run_experiment({"mode": "zskew", "zset": {"vars": ["x", "y"], "union": [{}]},
                          "lo": 0, "hi": 9, "gap_bound": 1}, write=False)
    assert rep.rows == [(-1, 1000, False), (0, 1000, False), (1, 1000, False)]
    assert _rows(rep)[1] == ["-1", "1000", "false"]


def test_outputs_written_atomically(tmp_path):
    out, js = tmp_path / "r.csv", tmp_path / "r.json"
    rep = run_experiment({"mode": "zap3", "set": "SF", "a": [5], "gap_bound": 1, "out": str(out), "json": str(js)})
    assert out.read_text() == rep.to_csv()
    doc = json.loads(js.read_text())
    assert doc["schema_version"] == SCHEMA_VERSION and "wall_clock_seconds" in doc["metadata"]
    assert list(tmp_path.iterdir()) == sorted(tmp_path.iterdir()) and len(list(tmp_path.iterdir())) == 2


def test_config_paths_resolve_relative_to_file():
    doc = load_config_doc(CONFIGS / "zap3_sf.json")
    assert Path(doc["zset"]) == CONFIGS / "sf_one_mod_four.json"


@pytest.mark.parametrize("name", ["roth_squares", "cdm_cubes", "zap3_sf", "zskew_diag"])
def test_demo_configs_rerun_identically(name):
    cfg = ExperimentConfig.from_file(CONFIGS / f"{name}.json")
    a, b = run_experiment(cfg, write=False), run_experiment(cfg, write=False)
    assert a.to_csv() == b.to_csv()
    assert json.dumps(a.result_dict(), sort_keys=True) == json.dumps(b.result_dict(), sort_keys=True)
