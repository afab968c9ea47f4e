"""Chat backends: scripted transcript replay, live HTTP, recording, and plan files."""
from __future__ import annotations

import base64
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .gateway import PromptBundle

API_KEY_ENV = "KITCHENTAMP_API_KEY"


class TransportError(Exception):
    pass


class TranscriptExhausted(Exception):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"transcript has no entry {position}")


class TranscriptMismatch(Exception):
    def __init__(self, digest: str, expected: str, position: int):
        self.digest, self.expected, self.position = digest, expected, position
        super().__init__(f"prompt digest {digest[:12]} does not match entry {position} ({expected[:12]})")


@dataclass
class Transcript:
    exchanges: list[dict]
    meta: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        rows = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
        meta = rows[0].get("meta", {}) if rows else {}
        return cls(rows, meta)

    def dumps(self) -> str:
        out = []
        for row in self.exchanges:
            rec = {
                "digest": row["digest"],
                "prompt_text": row["prompt_text"],
                "response_text": row["response_text"],
                "meta": self.meta,
            }
            out.append(json.dumps(rec, sort_keys=True))
        return "\n".join(out) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.dumps())


class ScriptedBackend:
    """Replays a transcript; every prompt must match the stored digest."""

    kind = "scripted"

    def __init__(self, transcript: Transcript | str | Path):
        self.transcript = transcript if isinstance(transcript, Transcript) else Transcript.load(transcript)
        self.cursor = 0

    @property
    def meta(self) -> dict:
        return self.transcript.meta

    def complete(self, bundle: PromptBundle) -> str:
        rows = self.transcript.exchanges
        if self.cursor >= len(rows):
            raise TranscriptExhausted(self.cursor)
        row = rows[self.cursor]
        if row["digest"] != bundle.digest:
            raise TranscriptMismatch(bundle.digest, row["digest"], self.cursor)
        self.cursor += 1
        return row["response_text"]


@dataclass
class LiveConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o-mini"
    temperature: float = 0.2
    retries: int = 3
    timeout: float = 60.0
    backoff: float = 0.5  # seconds, doubled per retry
    send_image: bool = True

    @classmethod
    def from_mapping(cls, data: dict) -> "LiveConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


class LiveBackend:
    """Chat-completion client; the API key comes from the environment only."""

    kind = "live"

    def __init__(self, config: LiveConfig | None = None, client: Any = None, api_key: str | None = None):
        import httpx

        self.config = config or LiveConfig()
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.client = client or httpx.Client(timeout=self.config.timeout)
        self._httpx = httpx

    def payload(self, bundle: PromptBundle) -> dict:
        messages = []
        for k, (role, text) in enumerate(bundle.messages):
            content: Any = text
            first_user = role == "user" and all(r != "user" for r, _ in bundle.messages[:k])
            if first_user and bundle.image is not None and self.config.send_image:
                url = "data:image/png;base64," + base64.b64encode(bundle.image).decode("ascii")
                content = [{"type": "text", "text": text}, {"type": "image_url", "image_url": {"url": url}}]
            messages.append({"role": role, "content": content})
        return {"model": self.config.model, "messages": messages, "temperature": self.config.temperature}

    def complete(self, bundle: PromptBundle) -> str:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        body = self.payload(bundle)
        last: Exception | None = None
        for attempt in range(self.config.retries + 1):
            try:
                resp = self.client.post(self.config.endpoint, json=body, headers=headers)
                if resp.status_code in (429, 500, 502, 503, 504):
                    raise TransportError(f"server answered {resp.status_code}")
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except (self._httpx.TransportError, TransportError) as exc:
                last = exc
                if attempt < self.config.retries:
                    time.sleep(min(self.config.backoff * 2**attempt, 4.0))
            except self._httpx.HTTPStatusError as exc:
                raise TransportError(str(exc)) from exc
        raise TransportError(f"giving up after {self.config.retries + 1} attempts: {last}")


class RecordingBackend:
    """Wraps another backend and keeps every exchange for a transcript."""

    def __init__(self, inner, meta: dict | None = None):
        self.inner = inner
        self.kind = inner.kind
        self.rows: list[dict] = []
        self.meta = dict(meta or {})

    def complete(self, bundle: PromptBundle) -> str:
        raw = self.inner.complete(bundle)
        self.rows.append({"digest": bundle.digest, "prompt_text": bundle.text, "response_text": raw})
        return raw

    def transcript(self) -> Transcript:
        return Transcript(list(self.rows), dict(self.meta))


class PlanBackend:
    """Answers from an authored plan file: one entry per query, in order.

    Each query holds the English plan and a list of translations; the first
    translation answers phase 2 and later ones answer retry requests.
    """

    kind = "plan"

    def __init__(self, plan: dict):
        self.plan = plan
        self.queries = plan["queries"]
        self.q = -1
        self.t = 0

    @classmethod
    def load(cls, path: str | Path) -> "PlanBackend":
        return cls(json.loads(Path(path).read_text()))

    def complete(self, bundle: PromptBundle) -> str:
        if bundle.phase == 1:
            self.q += 1
            self.t = 0
            if self.q >= len(self.queries):
                raise TranscriptExhausted(self.q)
            return "\n".join(f"{i + 1}. {s}" for i, s in enumerate(self.queries[self.q]["english"]))
        entry = self.queries[self.q]
        translations = entry["translations"]
        text = translations[min(self.t, len(translations) - 1)]
        self.t += 1
        return text
