"""HTTP client for a target model served behind a prediction endpoint.

Protocol: ``POST <url>`` with JSON ``{"text": "..."}`` (plus ``"text_pair"``
for sentence-pair tasks); a 200 response carries
``{"scores": [float, ...], "label": int}``.  Transport failures and non-200
statuses are retried with exponential backoff and end in
:class:`TargetUnavailable`; a 200 with an unusable body raises
:class:`ProtocolError` straight away.
"""

from __future__ import annotations

import json
import logging
import os
import time
from typing import Callable

import httpx

from ..exceptions import ProtocolError, TargetUnavailable
from ..text import TokenizedText
from ..types import Prediction

log = logging.getLogger(__name__)

URL_ENV = "CTXATTACK_TARGET_URL"
API_KEY_ENV = "CTXATTACK_API_KEY"
API_KEY_HEADER_ENV = "CTXATTACK_API_KEY_HEADER"
DEFAULT_API_KEY_HEADER = "X-API-Key"


class RemoteTarget:
    reentrant = True

    def __init__(
        self,
        url: str,
        api_key: str | None = None,
        api_key_header: str = DEFAULT_API_KEY_HEADER,
        attempts: int = 3,
        backoff: float = 0.5,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if attempts < 1:
            raise ValueError("attempts must be >= 1")
        self.url = url
        self.attempts = attempts
        self.backoff = backoff
        self._sleep = sleep
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers[api_key_header] = api_key
        self._client = httpx.Client(headers=headers, timeout=timeout, transport=transport)

    @classmethod
    def from_env(cls, url: str | None = None, **kwargs) -> "RemoteTarget":
        url = url or os.environ.get(URL_ENV)
        if not url:
            raise ValueError(f"no target URL given and {URL_ENV} is unset")
        kwargs.setdefault("api_key", os.environ.get(API_KEY_ENV))
        kwargs.setdefault("api_key_header", os.environ.get(API_KEY_HEADER_ENV, DEFAULT_API_KEY_HEADER))
        return cls(url, **kwargs)

    def close(self):
        self._client.close()

    def predict(self, text: TokenizedText) -> Prediction:
        return self._post({"text": text.text})

    def predict_pair(self, first: str, second: str) -> Prediction:
        return self._post({"text": first, "text_pair": second})

    def _post(self, body: dict) -> Prediction:
        last = None
        for attempt in range(self.attempts):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self._client.post(self.url, json=body)
            except httpx.HTTPError as exc:
                last = f"{type(exc).__name__}: {exc}"
                log.warning("target request failed (attempt %d/%d): %s", attempt + 1, self.attempts, last)
                continue
            if response.status_code != 200:
                last = f"HTTP {response.status_code}"
                log.warning("target returned %s (attempt %d/%d)", last, attempt + 1, self.attempts)
                continue
            return parse_prediction(response.content)
        raise TargetUnavailable(f"{self.url} unavailable after {self.attempts} attempts ({last})")


def parse_prediction(content: bytes) -> Prediction:
    try:
        payload = json.loads(content)
    except ValueError as exc:
        raise ProtocolError(f"response is not JSON: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("scores"), list):
        raise ProtocolError("response must be an object with a 'scores' list")
    label = payload.get("label")
    if not isinstance(label, int) or isinstance(label, bool):
        raise ProtocolError("response 'label' must be an integer")
    try:
        return Prediction.from_dict(payload)
    except (TypeError, ValueError) as exc:
        raise ProtocolError(str(exc)) from exc
