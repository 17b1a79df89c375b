"""Wire protocol conformance of the scoring service."""

import pytest
from fastapi.testclient import TestClient

from fidattn.service import PROTOCOL_VERSION, create_app


@pytest.fixture(scope="module")
def client(request):
    from fidattn.model import AttentionExporter

    exporter = AttentionExporter(checkpoint="tiny:0", max_source_tokens=48, max_chunks=32)
    app = create_app(exporter)
    with TestClient(app) as c:
        yield c


def score_body(chunks, question="q", **overrides):
    body = {
        "protocol_version": PROTOCOL_VERSION,
        "encoding": "utf-8",
        "question": question,
        "chunks": chunks,
        "options": {},
    }
    body.update(overrides)
    return body


class TestEndpoints:
    def test_health(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_version_reports_identity(self, client):
        payload = client.get("/version").json()
        assert payload["protocol_version"] == PROTOCOL_VERSION
        assert payload["checkpoint"] == "tiny:0"
        assert payload["layers"] == 2
        assert payload["heads"] == 4

    def test_score_round_trip(self, client):
        resp = client.post("/v1/score", json=score_body(["alpha beta", "gamma delta"]))
        assert resp.status_code == 200
        payload = resp.json()
        assert payload["protocol_version"] == PROTOCOL_VERSION
        assert len(payload["per_chunk"]) == 2
        for spans in payload["per_chunk"]:
            assert len(spans) == 2
            for s in spans:
                assert s["score"] >= 0

    def test_zero_chunks_is_protocol_error(self, client):
        resp = client.post("/v1/score", json=score_body([]))
        assert resp.status_code == 400
        assert resp.json()["kind"] == "protocol"

    def test_empty_chunk_text_is_protocol_error(self, client):
        resp = client.post("/v1/score", json=score_body(["ok", ""]))
        assert resp.status_code == 400

    def test_version_mismatch_is_protocol_error(self, client):
        resp = client.post(
            "/v1/score", json=score_body(["ok"], protocol_version="999")
        )
        assert resp.status_code == 400
        assert "version" in resp.json()["error"]

    def test_unknown_encoding_is_protocol_error(self, client):
        resp = client.post("/v1/score", json=score_body(["ok"], encoding="utf-16"))
        assert resp.status_code == 400

    def test_malformed_body_keeps_connection_alive(self, client):
        resp = client.post("/v1/score", json={"nonsense": True})
        assert resp.status_code == 422  # schema validation error
        # next request on the same client still works
        ok = client.post("/v1/score", json=score_body(["still alive"]))
        assert ok.status_code == 200

    def test_chunk_cap_gives_413(self, client):
        resp = client.post("/v1/score", json=score_body(["c"] * 33))
        assert resp.status_code == 413
        assert "split" in resp.json()["error"]

    def test_twenty_passage_request_gets_twenty_span_lists(self, client):
        chunks = [f"Document [{k}](Title: t{k}) passage body {k}" for k in range(1, 21)]
        resp = client.post("/v1/score", json=score_body(chunks))
        assert resp.status_code == 200
        payload = resp.json()
        assert len(payload["per_chunk"]) == 20
        assert payload["backend_meta"]["chunk_count"] == 20

    def test_debug_raw_option_ships_tensor(self, client):
        body = score_body(["alpha beta"], options={"debug_raw": True})
        payload = client.post("/v1/score", json=body).json()
        raw = payload["backend_meta"]["raw_attention"]
        assert len(raw) == 2 and len(raw[0]) == 4  # layers x heads
        plain = client.post("/v1/score", json=score_body(["alpha beta"])).json()
        assert "raw_attention" not in plain["backend_meta"]

    def test_identical_requests_identical_responses(self, client):
        body = score_body(["alpha beta gamma", "delta epsilon"])
        a = client.post("/v1/score", json=body).json()
        b = client.post("/v1/score", json=body).json()
        assert a["per_chunk"] == b["per_chunk"]

    def test_empty_question_allowed(self, client):
        resp = client.post("/v1/score", json=score_body(["some chunk"], question=""))
        assert resp.status_code == 200
        assert len(resp.json()["per_chunk"]) == 1
