"""Synchronous client for the smoothbandits service.

Talks to a remote server when given a base URL, otherwise drives an
in-process app through the ASGI interface, so the CLI works with or without
a running server.
"""

from __future__ import annotations

import asyncio
from typing import Optional

import httpx

from .service import create_app

__all__ = ["ServiceClient", "ServiceError"]


class ServiceError(RuntimeError):
    """Non-2xx response from the service."""

    def __init__(self, status_code: int, detail: str):
        super().__init__(f"service error {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


class ServiceClient:
    def __init__(self, base_url: Optional[str] = None, app=None):
        self._base_url = base_url
        self._app = None if base_url else (app or create_app())

    def _request(self, method: str, path: str, json_body=None) -> dict:
        if self._base_url is not None:
            with httpx.Client(base_url=self._base_url, timeout=None) as client:
                response = client.request(method, path, json=json_body)
        else:

            async def go() -> httpx.Response:
                transport = httpx.ASGITransport(app=self._app)
                async with httpx.AsyncClient(
                    transport=transport, base_url="http://smoothbandits.local", timeout=None
                ) as client:
                    return await client.request(method, path, json=json_body)

            response = asyncio.run(go())
        if response.status_code >= 300:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(response.status_code, str(detail))
        return response.json()

    def health(self) -> dict:
        return self._request("GET", "/health")

    def run_experiment(self, config: dict) -> dict:
        return self._request("POST", "/experiments", json_body=config)

    def bench(self, suite: str, seed: int = 0) -> dict:
        return self._request("POST", "/bench", json_body={"suite": suite, "seed": seed})

    def report(self, directory: str) -> dict:
        return self._request("POST", "/reports", json_body={"dir": directory})

    def smooth_benchmark(self, means: list[float], h: float) -> float:
        payload = self._request("POST", "/benchmarks/smooth-finite", json_body={"means": means, "h": h})
        return float(payload["value"])
