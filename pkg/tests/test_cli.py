import io
import json
import random
from pathlib import Path

import pytest

from balfilt.cli import run_command
from balfilt.documents import DocumentError, emit_state, parse_report, parse_state, state_to_obj
from balfilt.exactq import as_rational
from balfilt.random_suite import random_suite

GOLDEN = Path(__file__).parent / "golden"
TWO = '{"rank":2,"characters":[[1,0],[1,1]]}'


def run(argv, text=""):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, stdin=io.StringIO(text), stdout=out, stderr=err)
    report = json.loads(out.getvalue()) if out.getvalue() else None
    return code, report, err.getvalue()


# documents

def test_parse_defaults():
    s = parse_state(TWO)
    assert s.characters == ((1, 0), (1, 1))
    assert s.polarisation == (0, 0)
    assert s.metric.gram == ((1, 0), (0, 1))


@pytest.mark.parametrize("text,field", [
    ('{"rank":1,"characters":[[0]]}', "characters[0]: zero character"),
    ('{"rank":2,"characters":[[1,0]],"gram":[[1,"1"],["1","1"]]}', "positive-definite"),
    ('{"rank":2,"characters":[[1,"1/2"]]}', "characters[0][1]"),
    ('{"rank":2,"characters":[[1,0]],"polarisation":["1/0",0]}', "polarisation[0]"),
    ('{"rank":2,"characters":[[1,0]],"polarisation":[0.5,0]}', "polarisation[0]"),
    ('{"rank":2,"characters":[[1,0,0]]}', "characters[0]"),
    ('{"characters":[[1]]}', "rank"),
    ('{"rank":1,"characters":[[1]],"colour":1}', "colour"),
    ('{"rank":1,\n"characters":[[1],]}', "line 2"),
])
def test_parse_errors(text, field):
    with pytest.raises(DocumentError) as info:
        parse_state(text)
    assert field in str(info.value)


def test_parse_point_block():
    s = parse_state('{"rank":2,"point":{"weights":[[1,0],[1,1],[0,0],[1,0]],"coordinates":[1,"1/3",5,0]}}')
    assert s.characters == ((1, 0), (1, 1))


def test_emit_round_trip():
    for s in random_suite(50, seed=5):
        text = emit_state(s)
        assert parse_state(text) == s
        assert emit_state(parse_state(text)) == text


def test_canonical_form():
    s = parse_state('{"rank":2,"characters":[[1,0]],"polarisation":["2/4",0],"gram":[[2,1],[1,"3"]]}')
    assert state_to_obj(s) == {
        "rank": 2,
        "characters": [[1, 0]],
        "polarisation": ["1/2", "0"],
        "gram": [["2", "1"], ["1", "3"]],
    }


# commands

def test_golden_iterate_report():
    text = (GOLDEN / "two_characters.json").read_text()
    out = io.StringIO()
    assert run_command(["iterate"], stdin=io.StringIO(text), stdout=out) == 0
    assert out.getvalue() == (GOLDEN / "two_characters_iterate.json").read_text()


def test_golden_report_content():
    report = parse_report((GOLDEN / "two_characters_iterate.json").read_text())
    result = report["result"]
    assert result["sequence"] == [["1", "0"], ["0", "1"]]
    first = result["chain"][0]
    assert first["lambda_state"]["characters"] == [[1, 0], [1, 1]]
    assert first["lambda_state"]["polarisation"] == ["1", "0"]
    assert result["chain"][1]["filtration"] == ["0", "1"]
    assert len(result["chain"]) == 3


def test_report_carries_kkt_certificates():
    code, report, _ = run(["iterate"], TWO)
    for step in report["result"]["chain"]:
        b = step["balanced"]
        gram = [[as_rational(x) for x in row] for row in b["slice"]["gram"]]
        lam = [as_rational(x) for x in b["intrinsic"]]
        g_lam = [sum(g * x for g, x in zip(row, lam)) for row in gram]
        combo = [0] * len(lam)
        for c, chi in zip(b["kkt_coefficients"], b["active_characters"]):
            assert as_rational(c) >= 0
            combo = [a + as_rational(c) * x for a, x in zip(combo, chi)]
        assert g_lam == combo


def test_deterministic_output():
    a = run(["iterate", "--algo", "both"], TWO)
    b = run(["iterate", "--algo", "both"], TWO)
    assert a == b and a[0] == 0 and a[1]["result"]["agree"]


def test_check_polystable():
    code, report, _ = run(["check"], '{"rank":1,"characters":[[1],[-1]]}')
    assert code == 0 and report["result"] == {"semistable": True, "polystable": True}


def test_check_expect_exit_codes():
    assert run(["check", "--expect", "polystable"], TWO)[0] == 1
    assert run(["check", "--expect", "semistable"], TWO)[0] == 0


def test_input_errors_exit_2(tmp_path):
    assert run(["check"], '{"rank":1,"characters":[[0]]}')[0] == 2
    assert run(["check"], "not json")[0] == 2
    assert run(["balanced"], '{"rank":2,"characters":[[1,0],[0,1]],"polarisation":[1,-1]}')[0] == 2
    assert run(["check", "--input", str(tmp_path / "missing.json")])[0] == 2
    assert run(["kempf", "--lambda", "0,-1"], TWO)[0] == 2
    assert run(["nonsense"])[0] == 2


def test_input_file(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(TWO)
    code, report, _ = run(["balanced", "--input", str(f)])
    assert code == 0 and report["result"]["filtration"] == ["1", "0"]
    assert report["result"]["certified"]


def test_kempf():
    code, report, _ = run(["kempf", "--lambda", "2,0"], TWO)
    assert report["result"]["complementedness"] == "2"
    code, report, _ = run(["kempf", "--lambda", '["1/2", 0]'], TWO)
    assert report["result"]["complementedness"] == "1/2"
    code, report, _ = run(["kempf", "--lambda", "0"], '{"rank":1,"characters":[[1],[-1]]}')
    assert report["result"]["complementedness"] == "inf"


def test_oracle():
    code, report, _ = run(["oracle"], '{"rank":2,"characters":[[1,0],[0,1]]}')
    assert code == 0 and report["result"]["filtration"] == ["1", "1"]


def test_iterate_both_on_random_suite():
    for s in random_suite(30, seed=9):
        code, report, err = run(["iterate", "--algo", "both"], emit_state(s))
        assert code == 0, err
        assert report["result"]["agree"]


def test_flow_command(tmp_path):
    csv = tmp_path / "run.csv"
    code, report, _ = run(["flow", "--starts", "2", "--tau-max", "200", "--csv", str(csv), "--expect-bounded"], TWO)
    assert code == 0 and report["result"]["bounded"]
    assert report["result"]["prediction"] == [["1", "0"], ["0", "1"]]
    assert (tmp_path / "run-0.csv").exists() and (tmp_path / "run-1.csv").exists()


def test_flow_truncated_prediction(tmp_path):
    pred = tmp_path / "pred.json"
    pred.write_text('[[1, 0]]')
    code, report, _ = run(["flow", "--starts", "0", "--start", "0,0", "--prediction", str(pred), "--expect-bounded"], TWO)
    assert code == 1 and not report["result"]["bounded"]


def test_selftest(monkeypatch):
    monkeypatch.setenv("BALFILT_SEED", str(random.Random(3).randint(0, 10**6)))
    code, report, _ = run(["selftest", "--count", "20"])
    assert code == 0 and report["result"]["ok"]
    monkeypatch.setenv("BALFILT_SEED", "x")
    assert run(["selftest"])[0] == 2
