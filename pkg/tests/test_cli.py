import csv
import io
import json
import xml.etree.ElementTree as ET

import jsonschema
import pytest

from evoflow.cli import BS_SAMPLE_HEADER, HISTOGRAM_HEADER, SWEEP_HEADER, TIMESERIES_HEADER, RunConfig, load_schema, main, parse_config
from evoflow.errors import ParameterError

SVG_NS = "{http://www.w3.org/2000/svg}"


def invoke(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_oracle_lpmf_rows():
    code, out = invoke("oracle", "lpmf", "--p", "0.6667", "--n", "2")
    rows = read_csv(out)
    assert code == 0 and rows[0] == ["k", "probability"]
    got = [(int(k), float(v)) for k, v in rows[1:]]
    assert [k for k, _ in got] == [0, 1, 2]
    for (_, v), ref in zip(got, [5 / 9, 1 / 3, 1 / 9]):
        assert v == pytest.approx(ref, abs=2e-4)


def test_oracle_srw_and_binomial():
    _, out = invoke("oracle", "srw", "--n", "1")
    assert read_csv(out)[-1] == ["1", "0.5"]
    _, out = invoke("oracle", "binomial", "--n", "2", "--p", "0.6667", "--k", "2")
    assert float(read_csv(out)[1][1]) == pytest.approx(4 / 9, abs=2e-4)
    _, out = invoke("oracle", "geometric", "--p", "1/3", "--k", "2")
    assert float(read_csv(out)[1][1]) == pytest.approx(2 / 9)


def test_simulate_zero_steps(tmp_path):
    code, out = invoke("simulate", "--steps", "0", "--seed", "3")
    summary = json.loads(out)
    assert code == 0 and summary["pop_size"] == 0 and summary["t_n"] == 0
    jsonschema.validate(summary, load_schema("summary"))


def test_simulate_outputs(tmp_path):
    paths = {k: tmp_path / f"out.{k}" for k in ("csv", "json", "svg")}
    hist = tmp_path / "hist.csv"
    code, _ = invoke("simulate", "--p", "0.6667", "--steps", "100000", "--seed", "1", "--hist-bins", "20",
                     "--interval", "0.6,0.8", "--csv", str(paths["csv"]), "--json", str(paths["json"]),
                     "--svg", str(paths["svg"]), "--hist-csv", str(hist))
    assert code == 0
    summary = json.loads(paths["json"].read_text())
    jsonschema.validate(summary, load_schema("summary"))
    assert summary["steps"] == 100000 and summary["tail_check"]["pass"]
    assert summary["densities"][0]["target"] == pytest.approx(0.6667 * 0.2)
    rows = read_csv(paths["csv"].read_text())
    assert rows[0] == TIMESERIES_HEADER and rows[-1][0] == "100000" and len(rows) == 102
    assert read_csv(hist.read_text())[0] == HISTOGRAM_HEADER

    root = ET.fromstring(paths["svg"].read_text())
    bars = [r for r in root.iter(SVG_NS + "rect") if r.get("class") == "bar"]
    counts = [int(b.get("data-count")) for b in bars]
    assert len(counts) == 20
    low, high = counts[:10], counts[10:]
    assert sum(low) < 0.02 * sum(counts)
    assert max(high) < 1.2 * min(high)
    assert any(l.get("class") == "marker" for l in root.iter(SVG_NS + "line"))


def test_simulate_replicates_and_jobs_agree(tmp_path):
    args = ["simulate", "--steps", "20000", "--seed", "5", "--replicates", "3", "--interval", "0.6,0.8"]
    _, serial = invoke(*args)
    _, parallel = invoke(*args, "--jobs", "2")
    assert serial == parallel
    jsonschema.validate(json.loads(serial), load_schema("summary"))


def test_simulate_event_log(tmp_path):
    log = tmp_path / "events.csv"
    invoke("simulate", "--steps", "50", "--seed", "2", "--event-log", str(log))
    lines = log.read_text().splitlines()
    assert lines[0] == "n,event_type,fitness" and len(lines) == 51


def test_simulate_subcritical_summary():
    code, out = invoke("simulate", "--p", "0.4", "--steps", "5000")
    summary = json.loads(out)
    assert code == 0 and summary["v_c"] is None and summary["tail_check"] is None
    jsonschema.validate(summary, load_schema("summary"))


@pytest.mark.parametrize("argv", [
    ["simulate", "--steps", "30000", "--seed", "11", "--interval", "0.6,0.8"],
    ["simulate", "--steps", "30000", "--seed", "11", "--law", "exp:1", "--interval", "1,2"],
    ["sweep", "--p-values", "0.6,0.8", "--interval", "0.6,0.8", "--steps", "20000", "--seed", "4"],
    ["bs", "--sites", "16", "--steps", "30000", "--burn-in", "5000", "--seed", "6"],
], ids=["simulate", "simulate-exp", "sweep", "bs"])
def test_byte_identical_outputs(tmp_path, argv):
    outputs = []
    for rep in range(2):
        d = tmp_path / str(rep)
        d.mkdir()
        extra = ["--csv", str(d / "a.csv"), "--svg", str(d / "a.svg")] if argv[0] != "sweep" else ["--csv", str(d / "a.csv")]
        if argv[0] != "sweep":
            extra += ["--json", str(d / "a.json")]
        assert main(argv + extra, stdout=io.StringIO()) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outputs[0] == outputs[1]


def test_sweep_rows():
    grid = "0.55,0.65,0.75,0.85,0.95"
    code, out = invoke("sweep", "--p-values", grid, "--interval", "0.6,0.8", "--steps", "2000")
    rows = read_csv(out)
    assert code == 0 and rows[0] == SWEEP_HEADER
    body = [dict(zip(rows[0], r)) for r in rows[1:]]
    f_c = [float(r["f_c"]) for r in body]
    assert all(x > y for x, y in zip(f_c, f_c[1:]))
    assert f_c[-1] == pytest.approx(1 / 19)
    for r in body:
        assert float(r["target"]) == pytest.approx(0.2 * float(r["p"]))


def test_sweep_rejects_subcritical_p():
    assert invoke("sweep", "--p-values", "0.4,0.6", "--interval", "0.6,0.8")[0] == 2


def test_bs_tiny_run(tmp_path):
    samples = tmp_path / "s.csv"
    code, out = invoke("bs", "--sites", "3", "--steps", "10", "--burn-in", "0", "--sample-every", "10",
                       "--csv", str(samples))
    rows = read_csv(samples.read_text())
    assert code == 0 and rows[0] == BS_SAMPLE_HEADER
    assert [r[:2] for r in rows[1:]] == [["10", "0"], ["10", "1"], ["10", "2"]]
    summary = json.loads(out)
    jsonschema.validate(summary, load_schema("bs"))
    assert summary["threshold"] is None


def test_bs_summary_schema():
    code, out = invoke("bs", "--sites", "32", "--steps", "100000", "--burn-in", "20000")
    summary = json.loads(out)
    assert code == 0 and summary["threshold"]["moment"] > 0.4
    jsonschema.validate(summary, load_schema("bs"))


@pytest.mark.parametrize("argv", [
    ["simulate", "--p", "1.5"],
    ["simulate", "--law", "gauss"],
    ["simulate", "--interval", "0.8,0.6"],
    ["oracle", "lpmf", "--p", "0.5", "--n", "3"],
    ["bs", "--sites", "2"],
    ["simulate", "--steps", "-1"],
    ["nonsense"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_unwritable_path_exit_3(tmp_path):
    assert main(["simulate", "--steps", "10", "--json", str(tmp_path / "missing" / "x.json")]) == 3


@pytest.mark.parametrize("argv", [
    ["simulate", "--p", "0.6667", "--steps", "1000", "--seed", "9", "--interval", "0.6,0.8", "--interval", "0.7,0.9",
     "--hist-bins", "10", "--json", "o.json"],
    ["simulate", "--law", "exp:1.5", "--replicates", "4", "--jobs", "2", "--eps", "0.2", "--report-every", "100"],
    ["sweep", "--p-values", "0.55,2/3", "--interval", "0.6,0.8", "--steps", "500"],
    ["oracle", "lpmf", "--p", "0.9", "--n", "7"],
    ["bs", "--sites", "64", "--steps", "5000", "--burn-in", "100", "--sample-every", "7"],
])
def test_config_round_trip(argv):
    cfg = parse_config(argv)
    assert parse_config(cfg.to_argv()) == cfg


def test_config_validates_before_work():
    with pytest.raises(ParameterError):
        RunConfig("bs", sites=3, steps=10, burn_in=20)
