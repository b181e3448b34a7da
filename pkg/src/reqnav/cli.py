"""Command-line entry point: ``reqnav run`` and ``reqnav serve``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import BenchConfig, compute_metrics, load_corpus, pct, report_json, report_markdown, run_batch
from .errors import ConfigError, ReqnavError

EXIT_OK = 0
EXIT_CONFIG = 2


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reqnav", description="Requirement-driven GUI test generation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the benchmark corpus")
    run.add_argument("--corpus", type=Path, help="corpus directory (default: bundled corpus)")
    run.add_argument("--case", action="append", default=[], help="case id to run; repeatable")
    run.add_argument("--scorer", choices=("lexical", "remote"), default="lexical")
    run.add_argument("--endpoint", help="base URL of the remote scorer")
    run.add_argument("--max-steps", type=_positive, default=5)
    run.add_argument("--candidates", type=_positive, default=3)
    run.add_argument("--eta", type=_positive, default=3)
    run.add_argument("--max-rounds", type=_positive, default=3)
    run.add_argument("--scroll-iters", type=_positive, default=None)
    run.add_argument("--timeout", type=float, default=10.0, help="remote request timeout in seconds")
    run.add_argument("--retries", type=int, default=2, help="remote retries after the first attempt")
    run.add_argument("--max-in-flight", type=_positive, default=4)
    run.add_argument("--seed", type=int, default=0, help="seeds remote retry jitter only")
    run.add_argument("--jobs", type=_positive, default=1)
    run.add_argument("--report", type=Path, help="write the JSON report here")
    run.add_argument("--markdown", type=Path, help="write the markdown report here")
    run.add_argument("--trace-dir", type=Path)

    serve = sub.add_parser("serve", help="serve the lexical scorer and runner over HTTP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    return p


def _run(args: argparse.Namespace) -> int:
    config = BenchConfig(
        max_steps=args.max_steps,
        k=args.candidates,
        eta=args.eta,
        max_rounds=args.max_rounds,
        scroll_iters=args.scroll_iters,
        scorer=args.scorer,
        seed=args.seed,
    )
    if args.scorer == "remote":
        if not args.endpoint:
            raise ConfigError("--scorer remote needs --endpoint")
        if args.retries < 0:
            raise ConfigError("--retries must be >= 0")
        from .remote import RemoteScorer

        scorer = RemoteScorer(
            args.endpoint, timeout=args.timeout, retries=args.retries,
            max_in_flight=args.max_in_flight, seed=args.seed,
        )
    else:
        from .scoring import LexicalScorer

        scorer = LexicalScorer()

    corpus = load_corpus(args.corpus)
    cases = corpus.cases
    if args.case:
        known = {c.case_id for c in cases}
        missing = [c for c in args.case if c not in known]
        if missing:
            raise ConfigError(f"unknown case id(s): {', '.join(missing)}")
        wanted = set(args.case)
        cases = [c for c in cases if c.case_id in wanted]

    results = run_batch(cases, config, scorer, args.trace_dir, args.jobs)
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(report_json(results, config), encoding="utf-8")
    if args.markdown:
        args.markdown.parent.mkdir(parents=True, exist_ok=True)
        args.markdown.write_text(report_markdown(results, config), encoding="utf-8")

    for r in results:
        tail = f"  [{r.failed_phase}] {r.detail}" if r.failed_phase else ""
        print(f"{r.case_id:<32} {r.verdict:<4} {r.outcome}{tail}")
    m = compute_metrics(results)
    cm = m["confusion"]
    print(
        f"TP={cm['tp']} FN={cm['fn']} TN={cm['tn']} FP={cm['fp']}  "
        f"precision={pct(m['precision'])} recall={pct(m['recall'])} "
        f"specificity={pct(m['specificity'])}"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "serve":
            import uvicorn

            from .service import create_app

            uvicorn.run(create_app(), host=args.host, port=args.port)
            return EXIT_OK
        return _run(args)
    except (ConfigError, ReqnavError, OSError) as exc:
        print(f"reqnav: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
