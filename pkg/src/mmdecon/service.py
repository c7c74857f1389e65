"""Read-only review API over a completed run directory.

Serves cascade results, sweep profiles, and flagged-pair detail. The only
mutable state is an in-memory draft config for staging per-benchmark policy
overrides; run artifacts are never touched.
"""

from __future__ import annotations

import threading
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, ConfigDict

from .config import EngineConfig, PolicySet, config_to_json, load_config
from .errors import ConfigError
from .flops import efficiency_record, frontier_from_records, load_model_specs
from .runio import (
    CONFIG_FILE,
    iter_matches,
    read_benchmarks,
    read_manifest,
    read_report,
    read_sweep,
)

PAGE_SIZE = 50
_ASSET_EXTENSIONS = ("", ".png", ".jpg", ".jpeg", ".webp", ".gif")


class OverrideRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    benchmark: str
    tau_i: float | None = None
    tau_t: float | None = None
    mode: str | None = None
    n_default: int | None = None
    short_threshold: int | None = None
    ack_low_tau_i: bool | None = None


class _DraftState:
    """Single-writer section around the staged override config."""

    def __init__(self, base: EngineConfig):
        self.base = base
        self.config = base
        self.lock = threading.Lock()

    def stage(self, benchmark: str, fields: dict) -> EngineConfig:
        with self.lock:
            current = self.config.policy_for(benchmark)
            candidate = replace(current, **fields).validate()
            overrides = dict(self.config.policies.overrides)
            overrides[benchmark] = candidate
            self.config = EngineConfig(
                strip_list=self.config.strip_list,
                policies=PolicySet(self.config.policies.default, overrides),
            )
            return self.config


def create_app(
    run_dir: str | Path,
    specs_path: str | Path | None = None,
    assets_dir: str | Path | None = None,
) -> FastAPI:
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    benchmarks = read_benchmarks(run_dir)
    known = {row["benchmark"] for row in benchmarks}
    matches = list(iter_matches(run_dir))
    report = read_report(run_dir)
    draft = _DraftState(load_config(run_dir / CONFIG_FILE))
    frontier_rows: list[dict] | None = None
    if specs_path is not None:
        records = [efficiency_record(s) for s in load_model_specs(specs_path)]
        frontier_rows = [
            {"name": p.name, "response_flops": p.cost, "accuracy": p.accuracy}
            for p in frontier_from_records(records)
        ]
    assets = Path(assets_dir) if assets_dir is not None else None

    app = FastAPI(title="decontamination review", version=manifest.engine_version)

    @app.exception_handler(RequestValidationError)
    async def _bad_request(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={
                "type": "validation_error",
                "message": "malformed request",
                "detail": jsonable_encoder(exc.errors()),
            },
        )

    def _require_benchmark(name: str) -> None:
        if name not in known:
            raise HTTPException(status_code=404, detail=f"unknown benchmark {name!r}")

    @app.get("/benchmarks")
    def get_benchmarks() -> list[dict]:
        return benchmarks

    @app.get("/run")
    def get_run() -> dict:
        return {"manifest": manifest.to_json(), "report": report}

    @app.get("/flagged")
    def get_flagged(
        benchmark: str | None = None,
        min_sim: float | None = Query(default=None, ge=0.0, le=1.0),
        min_c: float | None = Query(default=None, ge=0.0, le=1.0),
        page: int = Query(default=1, ge=1),
    ) -> dict:
        if benchmark is not None:
            _require_benchmark(benchmark)
        rows = matches
        if benchmark is not None:
            rows = [m for m in rows if m["benchmark"] == benchmark]
        if min_sim is not None:
            rows = [m for m in rows if m["sim_img"] >= min_sim]
        if min_c is not None:
            rows = [m for m in rows if m["c_text"] is not None and m["c_text"] >= min_c]
        total = len(rows)
        lo = (page - 1) * PAGE_SIZE
        return {
            "page": page,
            "page_size": PAGE_SIZE,
            "total": total,
            "total_pages": (total + PAGE_SIZE - 1) // PAGE_SIZE,
            "items": rows[lo : lo + PAGE_SIZE],
        }

    @app.get("/sweep/{benchmark}")
    def get_sweep(benchmark: str) -> dict:
        _require_benchmark(benchmark)
        profile = read_sweep(run_dir, benchmark)
        if profile is None:
            raise HTTPException(
                status_code=404, detail=f"no sweep profile for benchmark {benchmark!r}"
            )
        return profile

    @app.get("/overrides")
    def get_overrides() -> dict:
        with draft.lock:
            return {"draft_config": config_to_json(draft.config)}

    @app.post("/overrides")
    def post_override(body: OverrideRequest) -> dict:
        _require_benchmark(body.benchmark)
        fields = body.model_dump(exclude_unset=True, exclude_none=True)
        fields.pop("benchmark", None)
        try:
            config = draft.stage(body.benchmark, fields)
        except ConfigError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {
            "draft_config": config_to_json(config),
            "benchmark": body.benchmark,
            "policy": config.policy_for(body.benchmark).to_json(),
        }

    @app.get("/frontier")
    def get_frontier() -> list[dict]:
        if frontier_rows is None:
            raise HTTPException(
                status_code=404, detail="frontier unavailable: no model specs configured"
            )
        return frontier_rows

    @app.get("/assets/{image_id}")
    def get_asset(image_id: str):
        if assets is None:
            raise HTTPException(status_code=404, detail="no assets directory configured")
        if "/" in image_id or "\\" in image_id or image_id in (".", ".."):
            raise HTTPException(status_code=404, detail="bad asset id")
        for ext in _ASSET_EXTENSIONS:
            candidate = assets / (image_id + ext)
            if candidate.is_file():
                return FileResponse(candidate)
        raise HTTPException(status_code=404, detail=f"no asset for {image_id!r}")

    return app
