"""FastAPI service exposing the lexical scorer and the batch runner over HTTP.

The /v1 routes implement the remote-scorer contract, so a running service is
a drop-in endpoint for ``--scorer remote``.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException

from .bench import BenchConfig, load_corpus, report_json, run_batch
from .errors import NoDiffDerivable, ReqnavError, UnplannableRequirement
from .oracle import StatePair, lexical_oracle
from .scoring import LexicalScorer
from .trigger import PlanContext, element_identity, plan_round, step_to_json
from .ui_model import Operation, UIState
from .wire import ExploreRequest, OracleReply, OracleRequest, RunRequest, ScriptReply, ScriptRequest


def create_app(scorer: LexicalScorer | None = None) -> FastAPI:
    scorer = scorer or LexicalScorer()
    lex = scorer.lexicon
    app = FastAPI(title="reqnav", version="0.1.0")

    def bad(exc: Exception) -> HTTPException:
        return HTTPException(status_code=400, detail=f"{type(exc).__name__}: {exc}")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "scorer": scorer.mode}

    @app.post("/v1/explore")
    def explore(req: ExploreRequest) -> dict:
        try:
            state = UIState.from_json(req.page)
            return scorer.page_explore(req.requirement, state, req.k).to_json()
        except (ReqnavError, ValueError, KeyError) as exc:
            raise bad(exc) from None

    @app.post("/v1/script")
    def script(req: ScriptRequest) -> ScriptReply:
        try:
            state = UIState.from_json(req.page)
            trigger = [Operation.from_json(op) for op in req.trigger]
            ctx = PlanContext(
                round=req.round,
                covered=set(req.covered),
                acted_ids=[element_identity(lex, a) for a in req.acted],
                acted=list(req.acted),
            )
            if req.round == 1 and not trigger:
                raise UnplannableRequirement("round 1 needs trigger operations")
            plan = plan_round(req.requirement, state, trigger, scorer, ctx)
        except UnplannableRequirement as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except (ReqnavError, ValueError, KeyError) as exc:
            raise bad(exc) from None
        return ScriptReply(
            steps=[step_to_json(s) for s in plan.steps], complete=plan.complete, covered=sorted(ctx.covered)
        )

    @app.post("/v1/oracle")
    def oracle(req: OracleRequest) -> OracleReply:
        try:
            pair = StatePair(
                UIState.from_json(req.pre),
                UIState.from_json(req.post),
                tuple(Operation.from_json(op) for op in req.ops),
            )
            subs = lexical_oracle(req.requirement, pair, req.eta, scorer)
        except NoDiffDerivable as exc:
            return OracleReply(sub_oracles=[], error=str(exc))
        except (ReqnavError, ValueError, KeyError) as exc:
            raise bad(exc) from None
        return OracleReply(sub_oracles=[s.to_json() for s in subs])

    @app.post("/v1/run")
    def run(req: RunRequest) -> dict:
        try:
            corpus = load_corpus(req.corpus)
            cases = corpus.cases
            if req.cases:
                wanted = set(req.cases)
                cases = [c for c in cases if c.case_id in wanted]
                missing = wanted - {c.case_id for c in cases}
                if missing:
                    raise HTTPException(status_code=404, detail=f"unknown case(s): {sorted(missing)}")
            config = BenchConfig(req.max_steps, req.candidates, req.eta, req.max_rounds)
        except ReqnavError as exc:
            raise bad(exc) from None
        results = run_batch(cases, config, scorer)
        return json.loads(report_json(results, config))

    return app


app = create_app()
