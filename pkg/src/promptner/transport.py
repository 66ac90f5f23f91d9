"""Minimal JSON-over-HTTP seam so network access can be swapped out in tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol

import httpx


class TransportError(Exception):
    """Connection-level failure (no HTTP status available)."""


@dataclass
class HttpResponse:
    status: int
    body: Any
    headers: dict[str, str]


class Transport(Protocol):
    def post_json(
        self, url: str, payload: dict, headers: dict[str, str], timeout: float
    ) -> HttpResponse: ...


class HttpxTransport:
    def __init__(self, client: httpx.Client | None = None):
        self._client = client or httpx.Client()

    def post_json(self, url, payload, headers, timeout) -> HttpResponse:
        try:
            resp = self._client.post(url, json=payload, headers=headers, timeout=timeout)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        try:
            body = resp.json()
        except ValueError:
            body = resp.text
        return HttpResponse(resp.status_code, body, dict(resp.headers))


class OfflineTransport:
    """Fails on any use. Injected wherever the network must stay untouched."""

    def __init__(self):
        self.attempts = 0

    def post_json(self, url, payload, headers, timeout) -> HttpResponse:
        self.attempts += 1
        raise AssertionError(f"network access attempted: POST {url}")
