import json

import pytest

from decayrank import analytics, cli, reports, verify

jsonschema = pytest.importorskip("jsonschema")


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def final_probs(doc):
    return {e["item"]: e["probability"] for e in doc["result"]["reports"][-1]["top"]}


def test_rank_hand_worked(capsys, monkeypatch, fixed_clock):
    code, out, _ = run(capsys, "rank", "--alpha", "0.5", "--items", "a,b", "--k", "2",
                       stdin="a\na\na\nb\n", monkeypatch=monkeypatch)
    assert code == 0
    assert final_probs(json.loads(out)) == {"a": 0.46875, "b": 0.53125}


def test_rank_empty_stream_uniform(capsys, monkeypatch):
    code, out, _ = run(capsys, "rank", "--alpha", "0.5", "--items", "a,b", stdin="", monkeypatch=monkeypatch)
    assert code == 0
    assert final_probs(json.loads(out)) == {"a": 0.5, "b": 0.5}


def test_rank_repeated_item(capsys, monkeypatch):
    code, out, _ = run(capsys, "rank", "--alpha", "0.9", "--items", "x,y",
                       stdin="x\n" * 20, monkeypatch=monkeypatch)
    probs = final_probs(json.loads(out))
    assert probs["x"] == pytest.approx(1 - 0.5 * 0.9**20, abs=1e-12)


def test_rank_periodic_reports_and_csv(capsys, tmp_path):
    events = tmp_path / "ev.txt"
    events.write_text("a\n\nb\nc\na\nb\n")
    code, out, _ = run(capsys, "rank", str(events), "--half-life", "2", "--snapshot-every", "2",
                       "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "step,rank,item,probability"
    assert sorted({int(l.split(",")[0]) for l in lines[1:]}) == [2, 4, 5]


def test_rank_resume_equals_uninterrupted(capsys, tmp_path, fixed_clock):
    import random

    rng = random.Random(1)
    stream = [rng.choice("abcdef") for _ in range(500)]
    (tmp_path / "all.txt").write_text("\n".join(stream) + "\n")
    (tmp_path / "p1.txt").write_text("\n".join(stream[:200]) + "\n")
    (tmp_path / "p2.txt").write_text("\n".join(stream[200:]) + "\n")
    snap1, snap2, snapall = (tmp_path / n for n in ("s1.json", "s2.json", "sall.json"))
    run(capsys, "rank", str(tmp_path / "all.txt"), "--alpha", "0.97", "--save-snapshot", str(snapall))
    run(capsys, "rank", str(tmp_path / "p1.txt"), "--alpha", "0.97", "--save-snapshot", str(snap1))
    _, out2, _ = run(capsys, "rank", str(tmp_path / "p2.txt"), "--resume", str(snap1), "--save-snapshot", str(snap2))
    assert snap2.read_bytes() == snapall.read_bytes()
    _, outall, _ = run(capsys, "rank", str(tmp_path / "all.txt"), "--alpha", "0.97")
    assert json.loads(out2)["result"] == json.loads(outall)["result"]


@pytest.mark.parametrize(
    "argv",
    [
        ["rank", "--alpha", "0.5", "--half-life", "2", "/dev/null"],
        ["rank", "/dev/null"],
        ["rank", "--alpha", "0.5", "--k", "0", "/dev/null"],
        ["bounds", "--alpha", "1.5", "--q", "0.5", "--eps", "0.1"],
        ["bounds", "--alpha", "0.5", "--q", "0.5", "--eps", "-1"],
        ["moments", "--alpha", "0.5", "--q", "abc"],
        ["eigen", "--q", "0.3,0.3"],
        ["simulate", "--alpha", "0.5", "--q", "0.5,0.5", "--steps", "-4"],
        ["boost", "--alpha", "0.5", "--t1", "0", "--t2", "3"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "--" in err  # the offending flag is named


def test_argparse_usage_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2


def test_unreadable_input_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "rank", "--alpha", "0.5", str(tmp_path / "missing.txt"))
    assert code == 1 and "cannot read" in err


def test_unwritable_output_exit_1(capsys, tmp_path):
    code, _, _ = run(capsys, "boost", "--alpha", "0.9", "--t1", "2", "--t2", "3",
                     "--output", str(tmp_path / "no" / "such" / "dir.json"))
    assert code == 1


def test_moments_example(capsys):
    code, out, _ = run(capsys, "moments", "--alpha", "0.9", "--q", "0.3", "--order", "4")
    M = json.loads(out)["result"]["central_moments"]["moments"]
    a, q = 0.9, 0.3
    pq = q * (1 - q)
    assert M[2] == pytest.approx((1 - a) / (1 + a) * pq, abs=1e-12)
    assert M[3] == pytest.approx((1 - a) ** 3 / (1 - a**3) * pq * (1 - 2 * q), abs=1e-12)
    # the re-derived fourth moment, constant term 1 - 3q + 3q^2
    m4 = (1 - a) ** 4 / (1 - a**4) * pq * (6 * a**2 / (1 - a**2) * pq + 1 - 3 * q + 3 * q * q)
    assert M[4] == pytest.approx(m4, abs=1e-12)


def test_eigen_example(capsys):
    code, out, _ = run(capsys, "eigen", "--q", "0.3,0.7")
    res = json.loads(out)["result"]
    assert res["secular_roots"] == pytest.approx([0.42], abs=1e-12)
    assert res["covariance"]["eigenvalues"] == pytest.approx([0.42], abs=1e-12)


def test_simulate_degenerate(capsys):
    code, out, _ = run(capsys, "simulate", "--mode", "simplex", "--q", "1.0", "--alpha", "0.9",
                       "--steps", "5", "--paths", "10")
    stats = json.loads(out)["result"]["stats"]
    assert code == 0 and stats["covariance"] == [[0.0]]


def test_simulate_config_file(capsys, tmp_path):
    cfg = {"mode": "complex", "alpha": 0.9, "q": [0.2, 0.3, 0.5], "angles": [0, 2.0943951023931953,
           4.1887902047863905], "steps": 12, "paths": 2000, "seed": 3}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "simulate", "--config", str(path), "--enumerate")
    res = json.loads(out)["result"]
    assert code == 0
    assert res["stats"]["complex_variance"] == pytest.approx(res["exact"]["complex_variance"], rel=0.1)


def test_bounds_text(capsys):
    code, out, _ = run(capsys, "bounds", "--alpha", "0.99", "--q", "0.5", "--eps", "0.1", "--format", "text")
    assert code == 0 and "0.125628" in out


ALL_COMMANDS = [
    ["rank", "--alpha", "0.8", "--items", "a,b", "/dev/null"],
    ["simulate", "--alpha", "0.9", "--q", "0.2,0.3,0.5", "--steps", "10", "--paths", "500", "--seed", "7",
     "--enumerate"],
    ["simulate", "--mode", "real", "--vertices", "0,1;1,0;2,2", "--alpha", "0.9", "--q", "0.2,0.3,0.5",
     "--steps", "infinite", "--paths", "100"],
    ["simulate", "--mode", "complex", "--alpha", "0.8", "--q", "0.5,0.5", "--y0", "0,1", "--steps", "6",
     "--paths", "100"],
    ["moments", "--alpha", "0.9", "--q", "0.3", "--order", "6", "--steps", "10"],
    ["eigen", "--q", "0.2,0.3,0.5", "--alpha", "0.9", "--steps", "8"],
    ["eigen", "--q", "0.25,0.25,0.5"],
    ["bounds", "--alpha", "0.9", "--q", "0.2,0.8", "--eps", "0.1", "--steps", "5", "--y0", "0,1"],
    ["boost", "--alpha", "0.99", "--t1", "100", "--t2", "100"],
    ["verify", "--only", "c01", "c10", "--format", "json"],
]


@pytest.mark.parametrize("argv", ALL_COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_json_outputs_validate_and_repeat(capsys, fixed_clock, argv):
    code, first, _ = run(capsys, *argv)
    assert code == 0
    doc = json.loads(first)
    jsonschema.validate(doc, reports.document_schema(argv[0]))
    if argv[0] != "verify":  # verify records timings
        _, second, _ = run(capsys, *argv)
        assert first == second


def test_output_file(capsys, tmp_path, fixed_clock):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "boost", "--alpha", "0.9", "--t1", "2", "--t2", "3", "--output", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["manifest"]["timestamp"] == "2023-11-14T22:13:20Z"


def test_verify_exit_codes(capsys):
    assert run(capsys, "verify", "--quick", "--only", "c07", "c10")[0] == 0
    code, out, _ = run(capsys, "verify", "--quick", "--only", "c05b")
    assert code == 3 and "FAIL c05b" in out


def test_verify_catches_altered_covariance_factor(capsys, monkeypatch):
    monkeypatch.setattr(analytics, "stationary_factor", lambda a: (1 - a) / (1 - a * a))
    res = verify.run_check("c03", "quick")
    assert not res.passed and res.residual > 1e-3
    code, out, _ = run(capsys, "verify", "--quick", "--only", "c03")
    assert code == 3
