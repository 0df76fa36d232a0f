import dataclasses
import json
import subprocess
import sys
import textwrap

import pytest

from ctiroi.cli import main, run
from ctiroi.config import load_document, parse_config, parse_money
from ctiroi.errors import ValidationError
from ctiroi.report import format_ratio
from ctiroi.risk import BUILTIN_SCENARIOS

MINIMAL_TIEI = """
[tiei]
scores = [85, 70, 60, 90]
weights = [0.40, 0.20, 0.25, 0.15]
"""


def _cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text), encoding="utf-8")
    return str(p)


# -- parse_config ---------------------------------------------------------------------


def test_minimal_tiei_config_gets_defaults():
    cfg = parse_config(MINIMAL_TIEI)
    assert cfg.command == "tiei"
    assert (cfg.currency, cfg.output, cfg.precision, cfg.seed) == ("USD", "text", 2, None)
    assert cfg.payload["weights"].as_tuple() == (0.40, 0.20, 0.25, 0.15)


def test_config_from_file(tmp_path):
    cfg = parse_config(_write(tmp_path, MINIMAL_TIEI))
    assert cfg.payload["scores"].as_tuple() == (85, 70, 60, 90)


def test_weight_sum_rejection_names_block():
    with pytest.raises(ValidationError) as exc:
        parse_config(MINIMAL_TIEI.replace("0.15]", "0.05]"))
    assert exc.value.code == "E104"
    assert "[tiei] weights" in str(exc.value)


@pytest.mark.parametrize(
    "text, code, needle",
    [
        ("[tiei]\nscores = [85, 70, 60, 90]\nweights = [0.4, 0.2, 0.25, 0.15]\ncolour = 1\n", "E103", "colour"),
        ("[tiei]\nweights = [0.4, 0.2, 0.25, 0.15]\n", "E101", "scores"),
        ("[tiei]\nscores = \"high\"\nweights = [0.4, 0.2, 0.25, 0.15]\n", "E102", "scores"),
        ("[scenario]\nlef0 = 0.5\nlm = \"1M\"\nreduction = 0.5\n", "E101", "cti_cost"),
        ("[scenario]\nbuiltin = \"finance\"\nextra = true\n", "E103", "extra"),
        ("[scenario]\nlef0 = 0.5\nlm = \"1M EUR\"\ncti_cost = 1\nreduction = 0.5\n", "E105", "EUR"),
        ("[tiei]\nscores = [85, 70, 60, 120]\nweights = [0.4, 0.2, 0.25, 0.15]\n", "E105", "scores"),
        ("[gl]\nmode = \"single\"\nloss = 10\n", "E101", "breach"),
        ("[gl]\nmode = \"single\"\nloss = 10\nbreach = {family = \"gl_i\", v = 0.5, alpha = 1, bogus = 3}\n", "E103", "gl.breach"),
        ('command = "tiei"\n' + MINIMAL_TIEI + "[ahp]\nbudget = [1, 2]\n", "E103", "one command"),
        (MINIMAL_TIEI + "[ahp]\nbudget = [1, 2]\n", "E101", "which command"),
        ("[ahp]\nmatrix = [[1, \"1/0\"], [1, 1]]\n", "E102", "fraction"),
    ],
)
def test_distinct_diagnostics(text, code, needle):
    with pytest.raises(ValidationError) as exc:
        parse_config(text)
    assert exc.value.code == code
    assert needle in str(exc.value)


def test_syntax_error_reports_position():
    with pytest.raises(ValidationError) as exc:
        parse_config("[tiei]\nscores = [85, 70,\nweights = oops\n")
    assert exc.value.code == "E100"
    assert "line" in str(exc.value) and "column" in str(exc.value)


def test_missing_file():
    with pytest.raises(ValidationError):
        load_document("/nonexistent/config.toml")


@pytest.mark.parametrize(
    "text, value",
    [("6.08M USD", 6.08e6), ("500k", 5e5), ("$1,200", 1200.0), ("2bn", 2e9), ("0.5M", 5e5), (7, 7.0), ("11.62M", 11.62e6)],
)
def test_money(text, value):
    assert parse_money(text) == value


@pytest.mark.parametrize("text", ["six", "1.2X USD", True, [1]])
def test_bad_money(text):
    with pytest.raises(ValidationError):
        parse_money(text)


def test_builtin_scenario_reference():
    cfg = parse_config('[scenario]\nbuiltin = "finance"\n')
    assert cfg.payload == BUILTIN_SCENARIOS["finance"]
    s = cfg.payload
    assert (s.lef0.mean(), s.reduction, s.lm.mean(), s.cti_cost) == (0.48, 0.60, 6.08e6, 0.5e6)


def test_builtins_values():
    expected = {"finance": (0.48, 0.60, 6.08e6, 0.5e6), "healthcare": (0.67, 0.60, 11.62e6, 0.6e6), "retail": (0.43, 0.60, 5.41e6, 0.6e6)}
    for key, vals in expected.items():
        s = BUILTIN_SCENARIOS[key]
        assert (s.lef0.mean(), s.reduction, s.lm.mean(), s.cti_cost) == vals


# -- CLI ---------------------------------------------------------------------------


def test_scenario_finance_report(capsys):
    code, out, err = _cli(capsys, "scenario", "run", "finance")
    assert code == 0 and err == ""
    assert "2.92M USD" in out and "1.75M USD" in out and "3.50 (350%)" in out


def test_scenario_healthcare_percent(capsys):
    code, out, _ = _cli(capsys, "scenario", "run", "healthcare", "--precision", "1")
    assert code == 0
    assert "7.8 (780%)" in out


def test_tiei_from_flags(capsys):
    code, out, _ = _cli(capsys, "tiei", "--scores", "85,70,60,90", "--weights", "0.40,0.20,0.25,0.15", "--precision", "1")
    assert code == 0
    assert "75.6" in out and "76.5" in out


def test_precision_two_rendering():
    assert format_ratio(3.50208, 2).startswith("3.50 ")


def test_validation_error_exit_code(capsys):
    code, out, err = _cli(capsys, "tiei", "--scores", "85,70,60,90", "--weights", "0.4,0.2,0.2,0.1")
    assert code == 1
    assert out == ""
    assert "error[E104]" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["scenario", "run"])
    assert exc.value.code == 1
    out, err = capsys.readouterr()
    assert out == "" and "usage" in err


def test_numeric_error_exit_code(tmp_path, capsys):
    path = _write(tmp_path, """
        [scenario]
        lef0 = 0.5
        lm = "1M"
        cti_cost = 0
        reduction = 0.5
    """)
    code, out, err = _cli(capsys, "scenario", "run", path)
    assert code == 2
    assert out == "" and "error[numeric]" in err


def test_json_round_trip(capsys):
    code, out, _ = _cli(capsys, "scenario", "run", "retail", "--output", "json")
    assert code == 0
    obj = json.loads(out)
    assert json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n" == out
    assert obj["results"]["roi_ratio"] == pytest.approx(2.33, abs=0.01)


def test_csv_sweep(capsys):
    code, out, _ = _cli(capsys, "sweep", "--target", "scenario:reduction", "--lo", "0", "--hi", "1", "--steps", "11", "--base", "finance", "--output", "csv")
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "x,roi_ratio"
    assert lines[-1] == "" and len(lines) == 1 + 11 + 1
    assert "\r" not in out


def test_default_tiei_sweep(capsys):
    code, out, _ = _cli(capsys, "sweep", "--target", "tiei:I", "--output", "csv")
    assert code == 0
    assert len(out.splitlines()) == 101


def test_monte_carlo_is_byte_identical(tmp_path, capsys):
    path = _write(tmp_path, """
        seed = 7
        [scenario]
        name = "ransomware"
        lef0 = {triangular = [0.3, 0.5, 0.7]}
        lm = {pert = ["2M", "5M", "14M"]}
        cti_cost = "600k"
        reduction = 0.55
        monte_carlo = 20000
    """)
    first = _cli(capsys, "scenario", "run", path, "--output", "json")
    second = _cli(capsys, "scenario", "run", path, "--output", "json")
    assert first[0] == 0 and first == second
    other = _cli(capsys, "scenario", "run", path, "--output", "json", "--seed", "8")
    assert other[1] != first[1]


def test_point_monte_carlo_matches_analytic(capsys):
    a = json.loads(_cli(capsys, "scenario", "run", "finance", "--output", "json")[1])
    b = json.loads(_cli(capsys, "scenario", "run", "finance", "--output", "json", "--monte-carlo", "100")[1])
    assert a["results"]["delta_ale"] == b["results"]["delta_ale"]


def test_roi_command(tmp_path, capsys):
    path = _write(tmp_path, """
        [roi]
        tco = { platform = "200k", feeds = "150k", personnel = "150k" }
        [[roi.threats]]
        name = "fraud"
        p = 0.48
        c = "6.08M USD"
        m = 0.60
    """)
    code, out, _ = _cli(capsys, "roi", "--config", path, "--output", "json")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["tco"] == 500000 and res["roi_percent"] == pytest.approx(250.21)


@pytest.mark.parametrize(
    "mode, body, check",
    [
        ("single", 'loss = 10\nbreach = {family = "gl_i", v = 0.5, alpha = 1, beta = 1}\n', lambda r: abs(r["z_star"] - 1.24) < 0.01),
        (
            "two",
            'loss = 10\nbreach = {family = "gl_i", v = 0.5, alpha = 1}\nmultiplier = {family = "constant_one"}\n',
            lambda r: abs(r["z_star"] - 1.24) < 0.01,
        ),
        (
            "portfolio",
            'loss = 10\ncontrols = [{family = "gl_i", v = 0.5, alpha = 1}, {family = "gl_ii", v = 0.8, alpha = 0.5}]\n',
            lambda r: r["total_spend"] > 0,
        ),
    ],
)
def test_gl_modes(tmp_path, capsys, mode, body, check):
    path = _write(tmp_path, f"[gl]\n{body}")
    code, out, err = _cli(capsys, "gl", mode, "--config", path, "--output", "json", "--precision", "6")
    assert code == 0, err
    assert check(json.loads(out)["results"])


def test_gl_mode_conflict(tmp_path, capsys):
    path = _write(tmp_path, '[gl]\nmode = "two"\nloss = 10\nbreach = {family = "gl_i", v = 0.5, alpha = 1}\n')
    code, _, err = _cli(capsys, "gl", "single", "--config", path)
    assert code == 1 and "mode" in err


def test_ahp_matrix_flag(capsys):
    code, out, _ = _cli(capsys, "ahp", "--matrix", "1,2,8/5,8/3;1/2,1,4/5,4/3;5/8,5/4,1,5/3;3/8,3/4,3/5,1", "--output", "json")
    assert code == 0
    obj = json.loads(out)
    assert [r[0] for r in obj["table"]["rows"]] == ["Q", "E", "I", "O"]
    assert [r[1] for r in obj["table"]["rows"]] == [0.4, 0.2, 0.25, 0.15]
    assert obj["results"]["acceptable"] == "yes"


def test_ahp_rounded_judgments_rejected(capsys):
    code, _, err = _cli(capsys, "ahp", "--matrix", "1,3;0.333,1")
    assert code == 1 and "reciprocal" in err


def test_ahp_weights_feed_tiei(tmp_path, capsys):
    path = _write(tmp_path, """
        [tiei]
        scores = [85, 70, 60, 90]
        weights_budget = [40, 20, 25, 15]
    """)
    code, out, _ = _cli(capsys, "tiei", "--config", path, "--output", "json")
    assert code == 0
    assert json.loads(out)["results"]["tiei"] == pytest.approx(75.59, abs=0.01)


def test_tornado_config(tmp_path, capsys):
    path = _write(tmp_path, """
        [sweep]
        base = "finance"
        spans = { lm = ["3.04M", "12.16M"], reduction = [0.4, 0.8] }
    """)
    code, out, _ = _cli(capsys, "sweep", "--config", path, "--output", "json")
    assert code == 0
    rows = json.loads(out)["table"]["rows"]
    assert rows[0][0] == "lm" and rows[0][3:] == [1.75, 7.0]


def test_component_config(tmp_path, capsys):
    path = _write(tmp_path, """
        [tiei]
        weights = { Q = 0.40, E = 0.20, I = 0.25, O = 0.15 }
        [tiei.components.Q.targets]
        accuracy = 95
        timeliness = 4
        relevance = 90
        duplicates = 90
        [tiei.components.Q.raw]
        accuracy = 90
        timeliness = 6
        relevance = 60
        duplicates = 95
    """)
    code, _, err = _cli(capsys, "tiei", "--config", path)
    # E, I and O blocks are missing: named in the diagnostic
    assert code == 1
    assert "error[E101]: missing required field 'E' in [tiei.components]" in err


def test_zero_score_is_noted(capsys):
    code, out, _ = _cli(capsys, "tiei", "--scores", "85,0,60,90", "--weights", "0.4,0.2,0.25,0.15")
    assert code == 0
    assert "note: E: zero capability recorded" in out


def test_installed_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ctiroi.cli", "scenario", "run", "finance", "--output", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stderr == ""
    assert "roi_ratio,3.5" in proc.stdout


def test_run_returns_rendered_text():
    status, text = run(parse_config(MINIMAL_TIEI))
    assert status == 0 and text.startswith("Threat Intelligence Effectiveness Index\n")


FULL_COMPONENTS = """
[tiei]
weights = [0.40, 0.20, 0.25, 0.15]

[tiei.components.Q]
targets = { accuracy = 95, timeliness = 4, relevance = 90, duplicates = 90 }
raw = { accuracy = 90, timeliness = 6, relevance = 60, duplicates = 95 }

[tiei.components.E]
targets = { attack_coverage = 80, internal_correlation = 70, actionability_notes = 90 }
raw = { attack_coverage = 50, internal_correlation = 35, actionability_notes = 81 }
confidence = 0.8

[tiei.components.I]
targets = { control_breadth = 10, feed_health = 99, automation_utilization = 80, ticket_assist = 60 }
raw = { control_breadth = 6, feed_health = 97, automation_utilization = 40, ticket_assist = 30 }

[tiei.components.O]
targets = { detection_lift = 30, response_lift = 40, prevented_events = 12, risk_reduction = 25 }
raw = { detection_lift = 24, response_lift = 10, prevented_events = 9, risk_reduction = 20 }
"""


def test_component_pipeline_matches_library(capsys):
    from ctiroi import tiei

    cfg = parse_config(FULL_COMPONENTS)
    p = cfg.payload
    direct = tiei.tiei_from_measurements(p["rubrics"], p["raws"], p["weights"], p["policies"])
    _, text = run(dataclasses.replace(cfg, output="json", precision=12))
    got = json.loads(text)["results"]
    assert got["tiei"] == pytest.approx(direct.tiei, abs=1e-12)
    assert p["policies"]["E"].confidence == 0.8 and "Q" not in p["policies"]
    assert direct.tiei <= direct.linear


def test_single_budget_vote_rejected_downstream():
    with pytest.raises(ValidationError):
        parse_config("[tiei]\nscores = [85, 70, 60, 90]\nweights_budget = [5, 0, 0, 0]\n")


def _doc_blocks():
    import pathlib
    import re

    text = (pathlib.Path(__file__).parents[1] / "docs" / "config.md").read_text(encoding="utf-8")
    return re.findall(r"```toml\n(.*?)```", text, re.S)


@pytest.mark.parametrize("block", _doc_blocks())
def test_documented_examples_run(block):
    status, text = run(parse_config(block))
    assert status == 0 and text


def test_joint_grid_excludes_controls():
    base = '[gl]\nmode = "portfolio"\nloss = 100\njoint = { axes = [[0, 10], [0, 10]], values = [[0.5, 0.3], [0.3, 0.1]] }\n'
    assert parse_config(base).payload["portfolio"].m == 2
    with pytest.raises(ValidationError) as exc:
        parse_config(base + 'controls = [{ family = "gl_ii", v = 0.5, alpha = 1 }]\n')
    assert exc.value.code == "E103"
