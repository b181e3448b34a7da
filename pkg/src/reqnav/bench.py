"""Batch runner: three-phase pipeline per case, phase attribution, metrics, reports."""

from __future__ import annotations

import json
import logging
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path as FsPath
from typing import Any, Iterable, Sequence

from .device import AppSpec, Mutation, apply_mutation, load_app, load_mutations, open_session
from .errors import ConfigError, NoDiffDerivable, ParseError, ReqnavError, SchemaError
from .navigator import DEFAULT_MAX_STEPS, navigate
from .oracle import DEFAULT_ETA, capture_pre_post, evaluate, generate_oracle
from .scoring import DEFAULT_K
from .trigger import DEFAULT_MAX_ROUNDS, iterate_until_complete

log = logging.getLogger(__name__)

PHASES = ("phase1", "phase2", "phase3")


def default_corpus() -> FsPath:
    return FsPath(str(resources.files("reqnav").joinpath("corpus")))


@dataclass(frozen=True)
class BenchConfig:
    max_steps: int = DEFAULT_MAX_STEPS
    k: int = DEFAULT_K
    eta: int = DEFAULT_ETA
    max_rounds: int = DEFAULT_MAX_ROUNDS
    scroll_iters: int | None = None
    scorer: str = "lexical"
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("max_steps", "k", "eta", "max_rounds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.scorer not in ("lexical", "remote"):
            raise ConfigError(f"unknown scorer mode {self.scorer!r}")

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class BenchCase:
    case_id: str
    requirement: str
    app_path: FsPath
    correct: bool
    mutation: Mutation | None = None
    tags: dict[str, str] = field(default_factory=dict)

    def load(self) -> AppSpec:
        app = load_app(self.app_path)
        if self.mutation is not None:
            app = apply_mutation(app, self.mutation)
        return app


@dataclass
class CaseResult:
    case_id: str
    correct: bool
    phase1_ok: bool = False
    phase2_ok: bool = False
    phase3_ok: bool = False
    failed_phase: str | None = None
    detail: str = ""
    steps_used: int = 0
    rounds: int = 0
    executed_ops: int = 0
    expect_phase: str | None = None
    tags: dict[str, str] = field(default_factory=dict)
    oracle: dict[str, Any] | None = None
    timings: dict[str, float] = field(default_factory=dict)
    trace_path: str | None = None

    @property
    def verdict(self) -> str:
        return "pass" if self.phase1_ok and self.phase2_ok and self.phase3_ok else "fail"

    @property
    def outcome(self) -> str:
        if self.correct:
            return "TP" if self.verdict == "pass" else "FN"
        return "FP" if self.verdict == "pass" else "TN"

    def to_json(self) -> dict[str, Any]:
        out = {
            "case_id": self.case_id,
            "correct": self.correct,
            "phase1_ok": self.phase1_ok,
            "phase2_ok": self.phase2_ok,
            "phase3_ok": self.phase3_ok,
            "verdict": self.verdict,
            "outcome": self.outcome,
            "failed_phase": self.failed_phase,
            "detail": self.detail,
            "steps_used": self.steps_used,
            "rounds": self.rounds,
            "executed_ops": self.executed_ops,
            "tags": dict(self.tags),
            "oracle": self.oracle,
        }
        if self.expect_phase is not None:
            out["expect_phase"] = self.expect_phase
        return out


# --------------------------------------------------------------------------
# corpus


@dataclass
class Corpus:
    root: FsPath
    cases: list[BenchCase]


def load_corpus(root: str | FsPath | None = None) -> Corpus:
    """Read ``manifest.json`` plus the app and mutation files it references."""
    base = FsPath(root) if root is not None else default_corpus()
    manifest = base / "manifest.json"
    try:
        data = json.loads(manifest.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"no manifest.json in {base}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{manifest}: {exc}") from None

    mutations: dict[str, list[Mutation]] = {}
    if data.get("mutations"):
        mutations = load_mutations(base / data["mutations"])
    by_id = {m.id: m for items in mutations.values() for m in items}

    cases = []
    seen: set[str] = set()
    for i, raw in enumerate(data.get("cases", [])):
        try:
            cid = raw["case_id"]
            mut = None
            if raw.get("mutation"):
                if raw["mutation"] not in by_id:
                    raise SchemaError(f"cases/{i}/mutation", f"unknown mutation {raw['mutation']!r}")
                mut = by_id[raw["mutation"]]
            correct = bool(raw.get("correct", mut is None))
            if correct == (mut is not None):
                raise SchemaError(f"cases/{i}", "correct cases carry no mutation, faulty ones need one")
            case = BenchCase(cid, raw["requirement"], base / raw["app"], correct, mut, dict(raw.get("tags", {})))
        except KeyError as exc:
            raise SchemaError(f"cases/{i}/{exc.args[0]}", "missing field") from None
        if cid in seen:
            raise SchemaError(f"cases/{i}/case_id", f"duplicate id {cid!r}")
        seen.add(cid)
        cases.append(case)
    return Corpus(base, cases)


# --------------------------------------------------------------------------
# pipeline


def run_case(case: BenchCase, config: BenchConfig, scorer, trace_dir: str | FsPath | None = None) -> CaseResult:
    res = CaseResult(
        case.case_id,
        case.correct,
        expect_phase=case.mutation.expect_phase if case.mutation else None,
        tags=dict(case.tags),
    )
    trace: list[dict[str, Any]] = []
    phase = "phase1"
    clock = time.perf_counter()

    def lap() -> None:
        nonlocal clock
        now = time.perf_counter()
        res.timings[phase] = now - clock
        clock = now

    try:
        app = case.load()
        session = open_session(app)
        nav = navigate(
            case.requirement, session, scorer, config.max_steps, config.k,
            on_iteration=lambda r: trace.append({"phase": "phase1", **r}),
        )
        res.steps_used = nav.steps_used
        lap()
        if not nav.found:
            res.failed_phase, res.detail = "phase1", f"no entry state within {config.max_steps} steps"
            return res
        res.phase1_ok = True

        phase = "phase2"
        outcome = iterate_until_complete(
            case.requirement, session, scorer, nav.trigger_ops[:1], config.max_rounds, config.scroll_iters
        )
        res.rounds = outcome.rounds
        res.executed_ops = len(outcome.executed_ops)
        trace.append(
            {
                "phase": "phase2",
                "assertions": [r.to_json() for r in outcome.assertion_results],
                "executed": [op.to_json() for op in outcome.executed_ops],
            }
        )
        lap()
        if not outcome.confirmed:
            failed = outcome.failed_assertion
            res.failed_phase, res.detail = "phase2", failed.message if failed else "presence not confirmed"
            return res
        res.phase2_ok = True

        phase = "phase3"
        pair = capture_pre_post(app, nav.entry_path, outcome.executed_ops)
        trace.append({"phase": "phase3", "pair": pair.to_json()})
        try:
            subs = generate_oracle(case.requirement, pair, config.eta, scorer)
        except NoDiffDerivable as exc:
            lap()
            res.failed_phase, res.detail = "phase3", f"no oracle derivable: {exc}"
            return res
        verdict = evaluate(subs, pair)
        res.oracle = verdict.to_json()
        lap()
        if not verdict.passed:
            bad = next(r for r in verdict.sub_results if not r.passed)
            res.failed_phase, res.detail = "phase3", bad.oracle.assertion.message
            return res
        res.phase3_ok = True
    except ReqnavError as exc:
        lap()
        res.failed_phase, res.detail = phase, f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # a broken case must not abort the batch
        log.exception("case %s crashed in %s", case.case_id, phase)
        lap()
        res.failed_phase, res.detail = phase, f"internal error {type(exc).__name__}: {exc}"
    finally:
        if trace_dir is not None:
            out = FsPath(trace_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{case.case_id}.jsonl"
            with path.open("w", encoding="utf-8") as fh:
                for rec in trace:
                    fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
            res.trace_path = str(path)
    return res


def run_batch(
    cases: Sequence[BenchCase],
    config: BenchConfig,
    scorer,
    trace_dir: str | FsPath | None = None,
    jobs: int = 1,
) -> list[CaseResult]:
    if jobs <= 1:
        return [run_case(c, config, scorer, trace_dir) for c in cases]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda c: run_case(c, config, scorer, trace_dir), cases))


# --------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp

    def to_json(self) -> dict[str, int]:
        return {"tp": self.tp, "fn": self.fn, "tn": self.tn, "fp": self.fp}


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def metrics_from_matrix(cm: ConfusionMatrix) -> dict[str, float | None]:
    return {
        "precision": _ratio(cm.tp, cm.tp + cm.fp),
        "recall": _ratio(cm.tp, cm.tp + cm.fn),
        "specificity": _ratio(cm.tn, cm.tn + cm.fp),
    }


def confusion(results: Iterable[CaseResult]) -> ConfusionMatrix:
    counts = {"TP": 0, "FN": 0, "TN": 0, "FP": 0}
    for r in results:
        counts[r.outcome] += 1
    return ConfusionMatrix(counts["TP"], counts["FN"], counts["TN"], counts["FP"])


def stagewise(results: Sequence[CaseResult]) -> dict[str, Any]:
    """Success of correct cases per phase, each relative to the previous phase's survivors."""
    pos = [r for r in results if r.correct]
    n = len(pos)
    p1 = sum(r.phase1_ok for r in pos)
    p2 = sum(r.phase2_ok for r in pos)
    p3 = sum(r.phase3_ok for r in pos)
    return {
        "cases": n,
        "phase1": [p1, n],
        "phase2": [p2, p1],
        "phase3": [p3, p2],
        "end_to_end": [p3, n],
    }


def compute_metrics(results: Sequence[CaseResult]) -> dict[str, Any]:
    if not results:
        raise ValueError("no results to summarise")
    cm = confusion(results)
    faulty = [r for r in results if not r.correct]
    caught = {p: sum(r.failed_phase == p for r in faulty) for p in PHASES}
    expected = [r for r in faulty if r.expect_phase]
    return {
        "confusion": cm.to_json(),
        **metrics_from_matrix(cm),
        "stagewise": stagewise(results),
        "faulty_by_phase": caught,
        "attribution_matches": [sum(r.failed_phase == r.expect_phase for r in expected), len(expected)],
    }


def fmt_pct(x: float | None) -> str:
    return "n/a" if x is None else f"{x * 100:.1f}"


def pct(x: float | None) -> str:
    return "n/a" if x is None else f"{fmt_pct(x)}%"


def _frac(pair: Sequence[int]) -> str:
    num, den = pair
    return f"{num}/{den} ({pct(_ratio(num, den))})"


def _grouped(results: Sequence[CaseResult], tag: str) -> "OrderedDict[str, list[CaseResult]]":
    groups: OrderedDict[str, list[CaseResult]] = OrderedDict()
    for r in results:
        if tag in r.tags:
            groups.setdefault(r.tags[tag], []).append(r)
    return OrderedDict(sorted(groups.items()))


def _group_rows(results: Sequence[CaseResult], tag: str) -> dict[str, Any]:
    out = {}
    for name, rs in _grouped(results, tag).items():
        cm = confusion(rs)
        out[name] = {"stagewise": stagewise(rs), "confusion": cm.to_json(), **metrics_from_matrix(cm)}
    return out


# --------------------------------------------------------------------------
# reports


def report_data(results: Sequence[CaseResult], config: BenchConfig | None = None) -> dict[str, Any]:
    data: dict[str, Any] = {
        "config": (config or BenchConfig()).to_json(),
        "verdict_rule": "pass iff every sub-oracle passes",
        "cases": [r.to_json() for r in results],
        "metrics": compute_metrics(results),
    }
    for tag, key in (("app", "by_app"), ("category", "by_category")):
        rows = _group_rows(results, tag)
        if rows:
            data[key] = rows
    return data


def report_json(results: Sequence[CaseResult], config: BenchConfig | None = None) -> str:
    return json.dumps(report_data(results, config), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def report_markdown(results: Sequence[CaseResult], config: BenchConfig | None = None) -> str:
    m = compute_metrics(results)
    cm = m["confusion"]
    sw = m["stagewise"]
    lines = ["# Benchmark report", ""]
    cfg = config or BenchConfig()
    lines.append(
        f"Scorer `{cfg.scorer}`, M={cfg.max_steps}, k={cfg.k}, eta={cfg.eta}, "
        f"max rounds={cfg.max_rounds}. A case passes only when every sub-oracle passes."
    )
    lines += ["", "## Cases", "", "| case | correct | P1 | P2 | P3 | verdict | outcome | failed phase | detail |",
              "|---|---|---|---|---|---|---|---|---|"]
    mark = {True: "ok", False: "-"}
    for r in results:
        detail = r.detail.replace("|", "\\|")
        lines.append(
            f"| {r.case_id} | {'yes' if r.correct else 'no'} | {mark[r.phase1_ok]} | {mark[r.phase2_ok]} "
            f"| {mark[r.phase3_ok]} | {r.verdict} | {r.outcome} | {r.failed_phase or ''} | {detail} |"
        )
    lines += [
        "", "## Confusion matrix", "",
        "| | judged pass | judged fail |", "|---|---|---|",
        f"| correct | TP={cm['tp']} | FN={cm['fn']} |",
        f"| faulty | FP={cm['fp']} | TN={cm['tn']} |",
        "", "## Metrics", "",
        "| precision | recall | specificity |", "|---|---|---|",
        f"| {pct(m['precision'])} | {pct(m['recall'])} | {pct(m['specificity'])} |",
        "", "## Stage-wise success on correct cases", "",
        "| phase 1 | phase 2 | phase 3 | end-to-end |", "|---|---|---|---|",
        f"| {_frac(sw['phase1'])} | {_frac(sw['phase2'])} | {_frac(sw['phase3'])} | {_frac(sw['end_to_end'])} |",
        "", "## Faulty cases by failing phase", "",
        "| phase 1 | phase 2 | phase 3 | attribution matches |", "|---|---|---|---|",
        f"| {m['faulty_by_phase']['phase1']} | {m['faulty_by_phase']['phase2']} | "
        f"{m['faulty_by_phase']['phase3']} | {m['attribution_matches'][0]}/{m['attribution_matches'][1]} |",
    ]
    for tag, title in (("app", "By app"), ("category", "By category")):
        rows = _group_rows(results, tag)
        if not rows:
            continue
        lines += ["", f"## {title}", "",
                  f"| {tag} | phase 1 | phase 2 | phase 3 | end-to-end | precision | recall | specificity |",
                  "|---|---|---|---|---|---|---|---|"]
        for name, row in rows.items():
            s = row["stagewise"]
            lines.append(
                f"| {name} | {_frac(s['phase1'])} | {_frac(s['phase2'])} | {_frac(s['phase3'])} "
                f"| {_frac(s['end_to_end'])} | {fmt_pct(row['precision'])} | {fmt_pct(row['recall'])} "
                f"| {fmt_pct(row['specificity'])} |"
            )
    return "\n".join(lines) + "\n"


def write_report(
    results: Sequence[CaseResult], path: str | FsPath, fmt: str = "json", config: BenchConfig | None = None
) -> FsPath:
    if not results:
        raise ValueError("no results to report")
    body = report_json(results, config) if fmt == "json" else report_markdown(results, config)
    out = FsPath(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(body, encoding="utf-8")
    return out
