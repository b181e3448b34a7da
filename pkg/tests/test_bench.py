import json
import shutil

import pytest

from conftest import FIXTURES, GOLDEN
from reqnav.bench import (
    BenchConfig,
    CaseResult,
    ConfusionMatrix,
    compute_metrics,
    fmt_pct,
    load_corpus,
    metrics_from_matrix,
    pct,
    report_data,
    report_json,
    report_markdown,
    run_batch,
    run_case,
    write_report,
)
from reqnav.cli import main
from reqnav.errors import ConfigError, SchemaError
from reqnav.scoring import LexicalScorer

MINI = FIXTURES / "mini_corpus"


def mini_results(jobs=1):
    return run_batch(load_corpus(MINI).cases, BenchConfig(), LexicalScorer(), jobs=jobs)


def test_metrics_reproduce_reference_matrix():
    m = metrics_from_matrix(ConfusionMatrix(tp=65, fn=15, tn=57, fp=7))
    assert m["precision"] == pytest.approx(65 / 72)
    assert (fmt_pct(m["precision"]), fmt_pct(m["recall"]), fmt_pct(m["specificity"])) == ("90.3", "81.2", "89.1")


def test_undefined_ratios_are_none():
    m = metrics_from_matrix(ConfusionMatrix(tn=3))
    assert m == {"precision": None, "recall": None, "specificity": 1.0}
    assert fmt_pct(None) == pct(None) == "n/a" and pct(0.5) == "50.0%"


def test_verdict_and_outcome_mapping():
    assert CaseResult("a", True, True, True, True).outcome == "TP"
    assert CaseResult("b", True, True, False).outcome == "FN"
    assert CaseResult("c", False, True, True, True).outcome == "FP"
    assert CaseResult("d", False).outcome == "TN"


def test_stagewise_denominators_follow_survivors():
    rs = [CaseResult("a", True, True, True, True), CaseResult("b", True, True, False),
          CaseResult("c", True), CaseResult("d", False)]
    sw = compute_metrics(rs)["stagewise"]
    assert sw == {"cases": 3, "phase1": [2, 3], "phase2": [1, 2], "phase3": [1, 1], "end_to_end": [1, 3]}
    with pytest.raises(ValueError):
        compute_metrics([])


def test_golden_report_for_mini_corpus():
    results = mini_results()
    assert report_json(results, BenchConfig()) == (GOLDEN / "mini_report.json").read_text(encoding="utf-8")
    assert report_markdown(results, BenchConfig()) == (GOLDEN / "mini_report.md").read_text(encoding="utf-8")


def test_parallel_batch_matches_serial():
    assert report_json(mini_results(jobs=3)) == report_json(mini_results())


def test_untagged_corpus_omits_group_tables(tmp_path):
    root = tmp_path / "c"
    shutil.copytree(MINI, root)
    manifest = json.loads((root / "manifest.json").read_text())
    for case in manifest["cases"]:
        case.pop("tags")
    (root / "manifest.json").write_text(json.dumps(manifest))
    results = run_batch(load_corpus(root).cases, BenchConfig(), LexicalScorer())
    data = report_data(results)
    assert "by_app" not in data and "by_category" not in data
    assert "By category" not in report_markdown(results)
    json.loads(report_json(results))


def test_corpus_validation(tmp_path):
    root = tmp_path / "c"
    shutil.copytree(MINI, root)
    manifest = json.loads((root / "manifest.json").read_text())
    manifest["cases"][1]["correct"] = True
    (root / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(SchemaError):
        load_corpus(root)
    manifest["cases"][1]["correct"] = False
    manifest["cases"].append(manifest["cases"][0])
    (root / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(SchemaError):
        load_corpus(root)
    with pytest.raises(ConfigError):
        load_corpus(tmp_path / "missing")


def test_config_validation():
    with pytest.raises(ConfigError):
        BenchConfig(max_steps=0)
    with pytest.raises(ConfigError):
        BenchConfig(scorer="oracle")


def test_run_case_writes_trace(tmp_path):
    case = load_corpus(MINI).cases[0]
    res = run_case(case, BenchConfig(), LexicalScorer(), tmp_path)
    lines = (tmp_path / "chain-dark.jsonl").read_text().splitlines()
    assert res.trace_path.endswith("chain-dark.jsonl")
    phases = [json.loads(x)["phase"] for x in lines]
    assert phases[0] == "phase1" and phases[-1] == "phase3"


def test_broken_app_is_attributed_not_raised(tmp_path):
    root = tmp_path / "c"
    shutil.copytree(MINI, root)
    (root / "apps" / "chain.json").write_text("{")
    res = run_case(load_corpus(root).cases[0], BenchConfig(), LexicalScorer())
    assert res.failed_phase == "phase1" and "ParseError" in res.detail


def test_write_report_formats(tmp_path):
    results = mini_results()
    assert write_report(results, tmp_path / "r.json").read_text().startswith("{")
    assert write_report(results, tmp_path / "r.md", fmt="markdown").read_text().startswith("# Benchmark")
    with pytest.raises(ValueError):
        write_report([], tmp_path / "x.json")


def test_cli_run_exit_codes_and_outputs(tmp_path, capsys):
    report = tmp_path / "out.json"
    code = main(["run", "--corpus", str(MINI), "--case", "chain-dark", "--report", str(report),
                 "--trace-dir", str(tmp_path / "traces")])
    assert code == 0
    out = capsys.readouterr().out
    assert "chain-dark" in out and "TP=1" in out
    assert json.loads(report.read_text())["metrics"]["confusion"]["tp"] == 1
    assert (tmp_path / "traces" / "chain-dark.jsonl").exists()
    assert main(["run", "--corpus", str(MINI), "--case", "nope"]) == 2
    assert main(["run", "--corpus", str(tmp_path / "missing")]) == 2
    assert main(["run", "--scorer", "remote"]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--max-steps", "0"])
