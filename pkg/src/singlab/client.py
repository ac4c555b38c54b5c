"""Thin HTTP client for the service, used by the CLI.

By default requests are served in-process through an ASGI transport (no
socket, no separate process); pass a base URL to talk to a remote server
instead.  Domain failures surface as the library's own exception types so
callers see one error taxonomy regardless of transport.
"""

from __future__ import annotations

import asyncio
from typing import Any, Mapping

import httpx

from .errors import BudgetError, ConfigError, SinglabError


class ServiceError(SinglabError):
    """Transport-level or unexpected server failure."""


class ServiceClient:
    """POSTs JSON envelopes to the service and unwraps domain errors."""

    def __init__(self, base_url: str | None = None, timeout: float = 600.0):
        self._base_url = base_url
        self._timeout = timeout
        self._app = None
        if base_url is None:
            from .service import create_app

            self._app = create_app()

    def get(self, path: str) -> dict:
        return self._request("GET", path, None)

    def post(self, path: str, payload: Mapping[str, Any]) -> dict:
        return self._request("POST", path, dict(payload))

    def _request(self, method: str, path: str, payload: dict | None) -> dict:
        if self._app is not None:
            response = asyncio.run(self._request_asgi(method, path, payload))
        else:
            with httpx.Client(base_url=self._base_url, timeout=self._timeout) as client:
                response = client.request(method, path, json=payload)
        return self._unwrap(response)

    async def _request_asgi(self, method: str, path: str, payload: dict | None) -> httpx.Response:
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://singlab.internal", timeout=self._timeout
        ) as client:
            return await client.request(method, path, json=payload)

    @staticmethod
    def _unwrap(response: httpx.Response) -> dict:
        if response.status_code == 200:
            return response.json()
        try:
            body = response.json()
        except ValueError:
            body = {"detail": response.text}
        detail = body.get("detail", "request failed")
        if response.status_code == 422:
            code = body.get("code", "config")
            if code == "budget":
                raise BudgetError(_format_detail(detail))
            raise ConfigError(_format_detail(detail))
        raise ServiceError(f"HTTP {response.status_code}: {_format_detail(detail)}")


def _format_detail(detail: object) -> str:
    if isinstance(detail, str):
        return detail
    if isinstance(detail, list):  # pydantic validation error list
        parts = []
        for item in detail:
            if isinstance(item, Mapping):
                loc = ".".join(str(x) for x in item.get("loc", ()))
                parts.append(f"{loc}: {item.get('msg', 'invalid')}")
            else:
                parts.append(str(item))
        return "; ".join(parts)
    return str(detail)
