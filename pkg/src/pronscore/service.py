"""HTTP scoring service.

POST /v1/score takes a target text plus exactly one logits source
(inline base64 container, a pre-registered container id, or audio bytes
for a remote acoustic backend) and optional per-request calibration
overrides. Overrides never persist: each learner's difficulty setting
rides on the request, so concurrent sessions cannot disturb each other.

GET /v1/phrases lists the practice phrases; GET /v1/health is a liveness
probe. Responses carry no timestamps, so identical requests produce
byte-identical bodies.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
from dataclasses import dataclass, field

import httpx
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .calibrate import CalibrationConfig, score_transcript
from .errors import (
    BackendUnavailable,
    ConfigError,
    ContainerFormatError,
    EmptyTarget,
    InfeasibleTarget,
    UnknownToken,
    VocabMismatch,
)
from .fixtures import DEFAULT_PHRASES
from .logits import LogitMatrix, read_ctcl, read_ctcl_file
from .vocab import Vocabulary, default_vocabulary


@dataclass(frozen=True)
class FileBackend:
    """Resolves logits ids against <directory>/<id>.ctcl containers."""

    directory: str

    def resolve(self, logits_id: str) -> tuple[LogitMatrix, Vocabulary] | None:
        safe = os.path.basename(logits_id)
        path = os.path.join(self.directory, f"{safe}.ctcl")
        if safe != logits_id or not os.path.isfile(path):
            return None
        return read_ctcl_file(path)


@dataclass(frozen=True)
class RemoteBackend:
    """POSTs raw audio bytes to an inference endpoint that answers with a
    logit container. Audio is opaque here; the backend owns decoding."""

    endpoint: str
    timeout: float = 10.0
    transport: httpx.BaseTransport | None = field(default=None, compare=False)

    def infer(self, audio: bytes) -> tuple[LogitMatrix, Vocabulary]:
        try:
            with httpx.Client(timeout=self.timeout, transport=self.transport) as client:
                response = client.post(
                    self.endpoint,
                    content=audio,
                    headers={"content-type": "application/octet-stream"},
                )
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"acoustic backend unreachable: {exc}") from exc
        if response.status_code != 200:
            raise BackendUnavailable(
                f"acoustic backend answered HTTP {response.status_code}"
            )
        try:
            return read_ctcl(response.content)
        except ContainerFormatError as exc:
            raise BackendUnavailable(f"acoustic backend returned a bad container: {exc}") from exc


def fetch_remote_logits(audio: bytes, backend: RemoteBackend, vocab: Vocabulary) -> LogitMatrix:
    """Run remote inference and validate the returned container against
    the service vocabulary."""
    logits, container_vocab = backend.infer(audio)
    if container_vocab.labels != vocab.labels or container_vocab.blank_index != vocab.blank_index:
        raise VocabMismatch("backend container labels differ from the service vocabulary")
    return logits


def load_phrases(path: str | None) -> list[dict]:
    if path is None:
        phrases = [dict(p) for p in DEFAULT_PHRASES]
    else:
        with open(path, encoding="utf-8") as fh:
            phrases = json.load(fh)
    ids = [p.get("id") for p in phrases]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate phrase ids in phrase file")
    for p in phrases:
        if not p.get("id") or not p.get("text"):
            raise ConfigError("every phrase needs an id and a text")
    return phrases


@dataclass(frozen=True)
class ServiceSettings:
    vocab: Vocabulary
    config: CalibrationConfig
    phrases: list[dict]
    file_backend: FileBackend | None = None
    remote_backend: RemoteBackend | None = None


class OverrideModel(BaseModel):
    T: float | None = Field(default=None, ge=0)
    k: int | None = Field(default=None, ge=1)
    theta: float | None = Field(default=None, ge=0, le=1)
    partial: tuple[float, float] | None = None


class ScoreRequestModel(BaseModel):
    target: str
    logits_inline: str | None = None
    logits_id: str | None = None
    audio: str | None = None
    overrides: OverrideModel | None = None


class _HttpDomainError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


def _resolve_logits(req: ScoreRequestModel, settings: ServiceSettings) -> LogitMatrix:
    provided = [
        name
        for name, value in (
            ("logits_inline", req.logits_inline),
            ("logits_id", req.logits_id),
            ("audio", req.audio),
        )
        if value is not None
    ]
    if len(provided) != 1:
        raise _HttpDomainError(400, f"exactly one input required, got {provided or 'none'}")

    if req.logits_inline is not None:
        try:
            blob = base64.b64decode(req.logits_inline, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise _HttpDomainError(400, f"logits_inline is not valid base64: {exc}") from exc
        try:
            logits, vocab = read_ctcl(blob)
        except ContainerFormatError as exc:
            raise _HttpDomainError(400, f"bad logit container: {exc}") from exc
        if vocab.labels != settings.vocab.labels:
            raise _HttpDomainError(400, "container labels differ from the service vocabulary")
        return logits

    if req.logits_id is not None:
        if settings.file_backend is None:
            raise _HttpDomainError(400, "service has no file backend configured")
        resolved = settings.file_backend.resolve(req.logits_id)
        if resolved is None:
            raise _HttpDomainError(404, f"unknown logits_id {req.logits_id!r}")
        logits, vocab = resolved
        if vocab.labels != settings.vocab.labels:
            raise _HttpDomainError(400, "registered container labels differ from the vocabulary")
        return logits

    if settings.remote_backend is None:
        raise _HttpDomainError(400, "service has no remote backend configured")
    try:
        audio = base64.b64decode(req.audio, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise _HttpDomainError(400, f"audio is not valid base64: {exc}") from exc
    try:
        return fetch_remote_logits(audio, settings.remote_backend, settings.vocab)
    except BackendUnavailable as exc:
        raise _HttpDomainError(502, str(exc)) from exc
    except VocabMismatch as exc:
        raise _HttpDomainError(502, str(exc)) from exc


def create_app(settings: ServiceSettings) -> FastAPI:
    app = FastAPI(title="pronscore", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    @app.exception_handler(_HttpDomainError)
    async def _domain_error(request: Request, exc: _HttpDomainError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.get("/v1/health")
    async def health():
        return {"status": "ok"}

    @app.get("/v1/phrases")
    async def phrases():
        return settings.phrases

    @app.post("/v1/score")
    async def score(req: ScoreRequestModel):
        logits = _resolve_logits(req, settings)
        config = settings.config
        if req.overrides is not None:
            try:
                config = config.merged(
                    temperature=req.overrides.T,
                    top_k=req.overrides.k,
                    threshold=req.overrides.theta,
                    partial_band=req.overrides.partial,
                )
            except ConfigError as exc:
                raise _HttpDomainError(400, str(exc)) from exc
        try:
            scored = score_transcript(logits, req.target, settings.vocab, config)
        except (InfeasibleTarget, UnknownToken, EmptyTarget) as exc:
            raise _HttpDomainError(422, f"target cannot be scored: {exc}") from exc
        return scored.to_dict()

    return app


def build_settings(
    vocab_path: str | None = None,
    phrases_path: str | None = None,
    logits_dir: str | None = None,
    remote_endpoint: str | None = None,
    remote_timeout: float = 10.0,
    config: CalibrationConfig | None = None,
) -> ServiceSettings:
    vocab = Vocabulary.load(vocab_path) if vocab_path else default_vocabulary()
    return ServiceSettings(
        vocab=vocab,
        config=config or CalibrationConfig(),
        phrases=load_phrases(phrases_path),
        file_backend=FileBackend(directory=logits_dir) if logits_dir else None,
        remote_backend=(
            RemoteBackend(endpoint=remote_endpoint, timeout=remote_timeout)
            if remote_endpoint
            else None
        ),
    )
