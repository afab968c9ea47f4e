import json

import httpx
import pytest

from kitchentamp.backends import (
    API_KEY_ENV,
    LiveBackend,
    LiveConfig,
    PlanBackend,
    RecordingBackend,
    ScriptedBackend,
    Transcript,
    TranscriptExhausted,
    TranscriptMismatch,
    TransportError,
)
from kitchentamp.gateway import SUBGOALS, PromptBundle


def bundle(text="hello", phase=1, image=None):
    return PromptBundle(SUBGOALS, phase, (("system", "sys"), ("user", text)), image=image)


class Echo:
    kind = "echo"

    def complete(self, b):
        return "re: " + b.user


def test_transcript_roundtrip(tmp_path):
    rec = RecordingBackend(Echo(), meta={"plan": 1})
    rec.complete(bundle("a"))
    rec.complete(bundle("b"))
    rec.transcript().save(tmp_path / "t.jsonl")
    tr = Transcript.load(tmp_path / "t.jsonl")
    assert tr.meta == {"plan": 1} and len(tr.exchanges) == 2
    sb = ScriptedBackend(tr)
    assert sb.complete(bundle("a")) == "re: a"
    assert sb.complete(bundle("  b ")) == "re: b"
    with pytest.raises(TranscriptExhausted):
        sb.complete(bundle("c"))


def test_scripted_mismatch_does_not_advance(tmp_path):
    rec = RecordingBackend(Echo())
    rec.complete(bundle("a"))
    sb = ScriptedBackend(rec.transcript())
    with pytest.raises(TranscriptMismatch) as e:
        sb.complete(bundle("different"))
    assert e.value.position == 0 and sb.cursor == 0


def test_plan_backend_numbers_english_and_walks_translations():
    pb = PlanBackend({"queries": [{"english": ["open it", "take it"], "translations": ["bad", "good"]}]})
    assert pb.complete(bundle(phase=1)) == "1. open it\n2. take it"
    assert [pb.complete(bundle(phase=2)) for _ in range(3)] == ["bad", "good", "good"]
    with pytest.raises(TranscriptExhausted):
        pb.complete(bundle(phase=1))


def _reply(text):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


def test_live_payload_and_auth(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    seen = []

    def handler(request):
        seen.append(request)
        return _reply("1. do it")

    be = LiveBackend(LiveConfig(model="m"), client=httpx.Client(transport=httpx.MockTransport(handler)))
    assert be.complete(bundle(image=b"\x89PNG")) == "1. do it"
    req = seen[0]
    assert req.headers["authorization"] == "Bearer sk-test"
    body = json.loads(req.content)
    assert body["model"] == "m"
    user = body["messages"][1]["content"]
    assert user[0] == {"type": "text", "text": "hello"}
    assert user[1]["image_url"]["url"].startswith("data:image/png;base64,")


def test_live_without_image_sends_plain_text():
    be = LiveBackend(LiveConfig(send_image=False), client=httpx.Client(transport=httpx.MockTransport(lambda r: _reply("x"))),
                     api_key="")
    assert be.payload(bundle(image=b"x"))["messages"][1]["content"] == "hello"


def test_live_retries_server_errors_then_succeeds():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(500) if len(calls) < 3 else _reply("ok")

    be = LiveBackend(LiveConfig(retries=3, backoff=0), client=httpx.Client(transport=httpx.MockTransport(handler)))
    assert be.complete(bundle()) == "ok" and len(calls) == 3


def test_live_gives_up():
    be = LiveBackend(LiveConfig(retries=2, backoff=0),
                     client=httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(503))))
    with pytest.raises(TransportError, match="3 attempts"):
        be.complete(bundle())


def test_live_client_error_is_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401)

    be = LiveBackend(LiveConfig(backoff=0), client=httpx.Client(transport=httpx.MockTransport(handler)))
    with pytest.raises(TransportError):
        be.complete(bundle())
    assert len(calls) == 1


def test_live_config_from_mapping_ignores_unknown_keys():
    c = LiveConfig.from_mapping({"model": "x", "api_key": "never-here"})
    assert c.model == "x" and not hasattr(c, "api_key")
