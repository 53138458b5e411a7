import base64
import io
import json

import httpx
import pytest
from fastapi.testclient import TestClient

from pronscore.calibrate import CalibrationConfig
from pronscore.errors import BackendUnavailable, ConfigError, VocabMismatch
from pronscore.fixtures import DEFAULT_PHRASES, build_fixture, write_fixture_dir
from pronscore.logits import write_ctcl
from pronscore.service import (
    FileBackend,
    RemoteBackend,
    ServiceSettings,
    create_app,
    fetch_remote_logits,
    load_phrases,
)
from pronscore.vocab import Vocabulary, default_vocabulary

VOCAB = default_vocabulary()


def ctcl_blob(name):
    logits, target = build_fixture(name, VOCAB)
    buf = io.BytesIO()
    write_ctcl(buf, logits, VOCAB)
    return base64.b64encode(buf.getvalue()).decode("ascii"), target


@pytest.fixture()
def client(tmp_path):
    write_fixture_dir(str(tmp_path))
    settings = ServiceSettings(
        vocab=VOCAB,
        config=CalibrationConfig(),
        phrases=load_phrases(None),
        file_backend=FileBackend(directory=str(tmp_path)),
    )
    return TestClient(create_app(settings))


class TestScore:
    def test_inline_correct_fixture(self, client):
        blob, target = ctcl_blob("dyr_correct")
        resp = client.post("/v1/score", json={"target": target, "logits_inline": blob})
        assert resp.status_code == 200
        body = resp.json()
        assert body["words"] == [{"text": "dyr", "score": 1.0, "verdict": "correct"}]
        assert body["config"]["T"] == 10.0

    def test_override_temperature_zero_flags_swap(self, client):
        blob, target = ctcl_blob("dyr_yswap")
        resp = client.post(
            "/v1/score",
            json={"target": target, "logits_inline": blob, "overrides": {"T": 0}},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["words"][0]["verdict"] == "mispronounced"
        assert body["config"]["T"] == 0.0

    def test_overrides_do_not_persist(self, client):
        blob, target = ctcl_blob("dyr_yswap")
        client.post(
            "/v1/score", json={"target": target, "logits_inline": blob, "overrides": {"T": 0}}
        )
        resp = client.post("/v1/score", json={"target": target, "logits_inline": blob})
        assert resp.json()["words"][0]["verdict"] == "partial"

    def test_identical_requests_identical_bodies(self, client):
        blob, target = ctcl_blob("banan_correct")
        payload = {"target": target, "logits_inline": blob, "overrides": {"T": 20}}
        first = client.post("/v1/score", json=payload)
        second = client.post("/v1/score", json=payload)
        assert first.content == second.content

    def test_registered_logits_id(self, client):
        resp = client.post("/v1/score", json={"target": "dyr", "logits_id": "dyr_correct"})
        assert resp.status_code == 200
        assert resp.json()["words"][0]["verdict"] == "correct"

    def test_unknown_logits_id_is_404(self, client):
        resp = client.post("/v1/score", json={"target": "dyr", "logits_id": "nope"})
        assert resp.status_code == 404

    def test_multiple_inputs_rejected(self, client):
        blob, target = ctcl_blob("dyr_correct")
        resp = client.post(
            "/v1/score",
            json={"target": target, "logits_inline": blob, "logits_id": "dyr_correct"},
        )
        assert resp.status_code == 400

    def test_no_input_rejected(self, client):
        assert client.post("/v1/score", json={"target": "dyr"}).status_code == 400

    def test_bad_base64_rejected(self, client):
        resp = client.post("/v1/score", json={"target": "dyr", "logits_inline": "@@@"})
        assert resp.status_code == 400

    def test_bad_container_rejected(self, client):
        blob = base64.b64encode(b"garbage bytes").decode("ascii")
        resp = client.post("/v1/score", json={"target": "dyr", "logits_inline": blob})
        assert resp.status_code == 400

    def test_missing_target_rejected(self, client):
        assert client.post("/v1/score", json={"logits_id": "dyr_correct"}).status_code == 400

    def test_infeasible_target_is_422(self, client):
        resp = client.post(
            "/v1/score", json={"target": "banan och mycket mer", "logits_id": "dyr_correct"}
        )
        assert resp.status_code == 422

    def test_out_of_vocab_target_is_422(self, client):
        resp = client.post("/v1/score", json={"target": "d?r", "logits_id": "dyr_correct"})
        assert resp.status_code == 422

    def test_bad_override_rejected(self, client):
        resp = client.post(
            "/v1/score",
            json={"target": "dyr", "logits_id": "dyr_correct", "overrides": {"T": -4}},
        )
        assert resp.status_code == 400


class TestPhrasesAndHealth:
    def test_default_phrases(self, client):
        resp = client.get("/v1/phrases")
        assert resp.status_code == 200
        phrases = resp.json()
        assert len(phrases) == 7
        assert {"id": "sjunga", "text": "jag tycker om att sjunga"} in phrases

    def test_health(self, client):
        assert client.get("/v1/health").json() == {"status": "ok"}

    def test_duplicate_phrase_ids_rejected(self, tmp_path):
        path = tmp_path / "phrases.json"
        path.write_text(json.dumps([{"id": "x", "text": "a"}, {"id": "x", "text": "b"}]))
        with pytest.raises(ConfigError):
            load_phrases(str(path))

    def test_empty_phrase_file_allowed(self, tmp_path):
        path = tmp_path / "phrases.json"
        path.write_text("[]")
        assert load_phrases(str(path)) == []

    def test_default_list_matches_bundle(self):
        assert load_phrases(None) == DEFAULT_PHRASES


def remote_with(handler) -> RemoteBackend:
    return RemoteBackend(
        endpoint="http://backend.test/infer",
        timeout=0.5,
        transport=httpx.MockTransport(handler),
    )


class TestRemoteBackend:
    def test_valid_container_round_trip(self):
        logits, _ = build_fixture("dyr_correct", VOCAB)
        buf = io.BytesIO()
        write_ctcl(buf, logits, VOCAB)

        def handler(request):
            return httpx.Response(200, content=buf.getvalue())

        fetched = fetch_remote_logits(b"fake-audio", remote_with(handler), VOCAB)
        assert fetched.frames == logits.frames

    def test_wrong_label_set_is_vocab_mismatch(self):
        other = Vocabulary(labels=("-", "a", "b"), blank_index=0)
        import numpy as np

        buf = io.BytesIO()
        from pronscore.logits import LogitMatrix

        write_ctcl(buf, LogitMatrix(values=np.zeros((2, 3))), other)

        def handler(request):
            return httpx.Response(200, content=buf.getvalue())

        with pytest.raises(VocabMismatch):
            fetch_remote_logits(b"fake-audio", remote_with(handler), VOCAB)

    def test_timeout_is_backend_unavailable(self):
        def handler(request):
            raise httpx.ReadTimeout("too slow")

        with pytest.raises(BackendUnavailable):
            fetch_remote_logits(b"fake-audio", remote_with(handler), VOCAB)

    def test_http_error_status_is_backend_unavailable(self):
        def handler(request):
            return httpx.Response(500, content=b"boom")

        with pytest.raises(BackendUnavailable):
            fetch_remote_logits(b"fake-audio", remote_with(handler), VOCAB)

    def test_audio_request_through_service(self):
        logits, target = build_fixture("dyr_correct", VOCAB)
        buf = io.BytesIO()
        write_ctcl(buf, logits, VOCAB)
        seen = {}

        def handler(request):
            seen["body"] = request.content
            return httpx.Response(200, content=buf.getvalue())

        settings = ServiceSettings(
            vocab=VOCAB,
            config=CalibrationConfig(),
            phrases=[],
            remote_backend=remote_with(handler),
        )
        client = TestClient(create_app(settings))
        audio = base64.b64encode(b"opaque waveform bytes").decode("ascii")
        resp = client.post("/v1/score", json={"target": target, "audio": audio})
        assert resp.status_code == 200
        assert seen["body"] == b"opaque waveform bytes"
        assert resp.json()["words"][0]["verdict"] == "correct"

    def test_backend_down_maps_to_502(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        settings = ServiceSettings(
            vocab=VOCAB,
            config=CalibrationConfig(),
            phrases=[],
            remote_backend=remote_with(handler),
        )
        client = TestClient(create_app(settings))
        audio = base64.b64encode(b"x").decode("ascii")
        resp = client.post("/v1/score", json={"target": "dyr", "audio": audio})
        assert resp.status_code == 502


def test_service_verdicts_reproducible_by_cli(client, tmp_path, capsys):
    """A response's word verdicts must match an offline CLI run with the
    same logits and effective config."""
    import json as jsonlib

    from pronscore.cli import main
    from pronscore.fixtures import packaged_fixture_dir
    import os

    resp = client.post(
        "/v1/score",
        json={"target": "dyr", "logits_id": "dyr_yswap", "overrides": {"T": 20, "k": 2}},
    )
    assert resp.status_code == 200
    fixture = os.path.join(packaged_fixture_dir(), "dyr_yswap.ctcl")
    code = main(["score", "--logits", fixture, "--target", "dyr", "--T", "20", "--k", "2"])
    assert code == 0
    offline = jsonlib.loads(capsys.readouterr().out)
    assert offline["words"] == resp.json()["words"]
