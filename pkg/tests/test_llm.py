import json

import pytest
import requests

from cello.errors import ProtocolError, TransportError
from cello.llm import HttpLlmClient, LlmRequest, LlmResponse, ScriptedLlm


def _request(text="hello"):
    return LlmRequest(model="local", messages=(
        {"role": "user", "content": text},))


class _FakeResponse:
    def __init__(self, status_code=200, payload=None):
        self.status_code = status_code
        self._payload = payload

    def json(self):
        if self._payload is None:
            raise ValueError("not json")
        return self._payload


def _ok_payload(content="ok"):
    return {"choices": [{"message": {"content": content},
                         "finish_reason": "stop"}],
            "usage": {"prompt_tokens": 3, "completion_tokens": 1}}


class TestScripted:
    def test_returns_scripted_reply(self):
        llm = ScriptedLlm(["ok"])
        assert llm.complete(_request()).content == "ok"

    def test_callable_script_sees_request(self):
        llm = ScriptedLlm(lambda req: req.messages[-1]["content"].upper())
        assert llm.complete(_request("echo me")).content == "ECHO ME"

    def test_records_requests(self):
        llm = ScriptedLlm(["a", "b"])
        llm.complete(_request("one"))
        llm.complete(_request("two"))
        assert [r.messages[-1]["content"] for r in llm.requests] == ["one", "two"]


class TestHttpClient:
    def test_success(self, tmp_path):
        def post(url, json=None, timeout=None):
            return _FakeResponse(payload=_ok_payload())

        client = HttpLlmClient("http://llm/v1", post=post, sleep=lambda s: None)
        response = client.complete(_request())
        assert response == LlmResponse(content="ok", finish_reason="stop",
                                       token_usage={"prompt_tokens": 3,
                                                    "completion_tokens": 1})

    def test_payload_wire_format(self):
        seen = {}

        def post(url, json=None, timeout=None):
            seen["payload"] = json
            return _FakeResponse(payload=_ok_payload())

        client = HttpLlmClient("http://llm/v1", post=post, sleep=lambda s: None)
        client.complete(LlmRequest(model="m", messages=(
            {"role": "system", "content": "s"}, {"role": "user", "content": "u"}),
            temperature=0.3, max_tokens=55))
        assert seen["payload"] == {
            "model": "m",
            "messages": [{"role": "system", "content": "s"},
                         {"role": "user", "content": "u"}],
            "temperature": 0.3,
            "max_tokens": 55,
        }

    def test_two_failures_then_success(self):
        calls = {"n": 0}

        def post(url, json=None, timeout=None):
            calls["n"] += 1
            if calls["n"] <= 2:
                raise requests.Timeout("slow")
            return _FakeResponse(payload=_ok_payload("third time"))

        client = HttpLlmClient("http://llm/v1", retries=3, post=post,
                               sleep=lambda s: None)
        assert client.complete(_request()).content == "third time"
        assert calls["n"] == 3

    def test_5xx_retried_then_exhausted(self):
        def post(url, json=None, timeout=None):
            return _FakeResponse(status_code=503)

        client = HttpLlmClient("http://llm/v1", retries=2, post=post,
                               sleep=lambda s: None)
        with pytest.raises(TransportError):
            client.complete(_request())

    def test_non_json_is_protocol_error(self):
        def post(url, json=None, timeout=None):
            return _FakeResponse(payload=None)

        client = HttpLlmClient("http://llm/v1", post=post, sleep=lambda s: None)
        with pytest.raises(ProtocolError):
            client.complete(_request())

    def test_missing_choices_is_protocol_error(self):
        def post(url, json=None, timeout=None):
            return _FakeResponse(payload={"unexpected": True})

        client = HttpLlmClient("http://llm/v1", post=post, sleep=lambda s: None)
        with pytest.raises(ProtocolError):
            client.complete(_request())

    def test_backoff_is_exponential(self):
        sleeps = []

        def post(url, json=None, timeout=None):
            raise requests.ConnectionError("down")

        client = HttpLlmClient("http://llm/v1", retries=3, backoff=0.5,
                               post=post, sleep=sleeps.append)
        with pytest.raises(TransportError):
            client.complete(_request())
        assert sleeps == [0.5, 1.0, 2.0, 4.0]

    def test_audit_log_pairs(self, tmp_path):
        audit = tmp_path / "audit.jsonl"

        def post(url, json=None, timeout=None):
            return _FakeResponse(payload=_ok_payload())

        client = HttpLlmClient("http://llm/v1", post=post, audit_path=audit,
                               sleep=lambda s: None)
        client.complete(_request("first"))
        client.complete(_request("second"))
        lines = [json.loads(line) for line in audit.read_text().splitlines()]
        assert len(lines) == 2
        assert lines[0]["request"]["messages"][0]["content"] == "first"
        assert lines[0]["response"]["content"] == "ok"

    def test_audit_logs_errors_too(self, tmp_path):
        audit = tmp_path / "audit.jsonl"

        def post(url, json=None, timeout=None):
            return _FakeResponse(payload=None)

        client = HttpLlmClient("http://llm/v1", post=post, audit_path=audit,
                               sleep=lambda s: None)
        with pytest.raises(ProtocolError):
            client.complete(_request())
        entry = json.loads(audit.read_text().splitlines()[0])
        assert "error" in entry
