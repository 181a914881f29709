import csv
import io
import json

import pytest

from zonecheck.cli import CSV_FIELDS, expand, load_suite, main, mask_timing, run_bench
from zonecheck.fixtures import example_pta
from zonecheck.model import render_model

HEADER = "model,property,engine,c,D,lambda,probability,verdict,states_max,time_max,states_min,time_min,iter_maxv,iter_maxu1,digital_states,error"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_header_is_exact():
    assert ",".join(CSV_FIELDS) == HEADER


def test_check_human(capsys):
    code, out, _ = run(capsys, "check", "example", "Pmax=? [ F<=10 done ]")
    assert code == 0
    assert "probability: 0.99\n" in out


def test_check_both_engines_agree(capsys):
    code, out, _ = run(capsys, "check", "example", "Pmin=? [ F<=10 done ]", "--engine", "both", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    a, b = (r["probability"] for r in doc["results"])
    assert abs(a - b) <= 1e-6 and doc["difference"] <= 1e-6


def test_check_csv_row(capsys):
    code, out, _ = run(capsys, "check", "example", "Pmax<=0.99 [ F done ]", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    assert rows[0]["probability"] == "0.999" and rows[0]["verdict"] == "false"


def test_property_and_model_from_files(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(render_model(example_pta()))
    prop = tmp_path / "p.json"
    prop.write_text(json.dumps({"opt": "min", "until": {"right": "done"}}))
    code, out, _ = run(capsys, "check", str(m), str(prop), "--format", "json")
    assert code == 0 and abs(json.loads(out)["results"][0]["probability"] - 0.99) <= 1e-6


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "check", "example", "Pmax=? [ F done ]", "--bogus")[0] == 2
    assert run(capsys, "check", "example", "Pmax=? [ F done ]", "--c", "0")[0] == 2
    assert run(capsys, "check", "nosuch", "Pmax=? [ F done ]")[0] == 3
    assert run(capsys, "check", "example", "Pmax=? [ F nowhere ]")[0] == 3
    doc = json.loads(render_model(example_pta()))
    doc["edges"][0]["guard"] = "x > 1"
    strict = tmp_path / "strict.json"
    strict.write_text(json.dumps(doc))
    code, _, err = run(capsys, "check", str(strict), "Pmax=? [ F done ]", "--engine", "digital")
    assert code == 4 and "x > 1" in err
    assert run(capsys, "check", str(strict), "Pmax=? [ F done ]")[0] == 0


def test_info(capsys):
    code, out, _ = run(capsys, "info", "example", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["closed"] and doc["max_constants"] == {"x": 8, "y": 24}


def test_empty_suite_gives_header_only(capsys, tmp_path):
    suite = tmp_path / "empty.json"
    suite.write_text(json.dumps({"runs": []}))
    code, out, _ = run(capsys, "bench", str(suite))
    assert code == 0 and out == HEADER + "\n"


def test_bad_suite_is_a_model_error(capsys, tmp_path):
    suite = tmp_path / "bad.json"
    suite.write_text(json.dumps({"runs": [{"model": "example", "target": "done", "opt": "max", "colour": 1}]}))
    assert run(capsys, "bench", str(suite))[0] == 3


def test_failures_become_rows(capsys, tmp_path):
    doc = json.loads(render_model(example_pta()))
    doc["edges"][0]["guard"] = "x > 1"
    model = tmp_path / "strict.json"
    model.write_text(json.dumps(doc))
    suite = tmp_path / "s.json"
    suite.write_text(json.dumps({"runs": [{"model": str(model), "target": "done", "opt": "max", "engines": ["digital", "backwards"]}]}))
    code, out, _ = run(capsys, "bench", str(suite))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert rows[0]["error"] and not rows[1]["error"]


def test_c_sweep_iterations_do_not_grow(capsys, tmp_path):
    suite = tmp_path / "fw.json"
    suite.write_text(json.dumps({"runs": [{"model": "firewire", "target": "done", "opt": "min", "engines": ["backwards"]}]}))
    code, out, _ = run(capsys, "bench", str(suite), "--c-sweep", "1,4,17,40,100", "--deadline-sweep", "40")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [int(r["c"]) for r in rows] == [1, 4, 17, 40, 100]
    its = [int(r["iter_maxv"]) for r in rows]
    assert its == sorted(its, reverse=True)
    assert len({r["probability"] for r in rows}) == 1


def test_parallel_rows_keep_order():
    jobs = expand(load_suite("all"))
    one = [r.row() for r in run_bench(jobs, 1)]
    two = [r.row() for r in run_bench(jobs, 2)]
    strip = lambda rows: [[v for k, v in zip(CSV_FIELDS, r) if not k.startswith("time")] for r in rows]
    assert strip(one) == strip(two)


def test_mask_timing():
    text = HEADER + "\nexample,p,backwards,1,,,0.5,,3,0.123,,4.5,,,,\n"
    masked = mask_timing(text).splitlines()[1].split(",")
    assert masked[CSV_FIELDS.index("time_max")] == "*"
    assert masked[CSV_FIELDS.index("time_min")] == "*"
