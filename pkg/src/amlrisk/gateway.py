"""Uniform client over external text-generation providers.

Two providers exist: a deterministic offline stub (the default; the entire
test suite runs against it) and a remote HTTPS text-completion endpoint.
Prompt templates are versioned data files under ``data/prompts/``, never
code constants. Calls are logged with purpose and latency; credentials are
read from the environment and never logged.
"""

from __future__ import annotations

import json
import logging
import os
import string
import time
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Optional

import httpx

logger = logging.getLogger(__name__)

PURPOSES = ("customize-questionnaire", "scenario")


class GatewayError(Exception):
    """Base class for gateway failures."""


class GatewayConfigError(GatewayError):
    """Provider configuration is unusable (e.g., unresolvable credential)."""


class TemplateError(GatewayError):
    """A template variable is unbound or the template is missing."""


class TransportError(GatewayError):
    """Typed transport failure callers can catch for fallback logic."""


class GatewayTimeout(TransportError):
    pass


class GatewayAuthError(TransportError):
    pass


class MalformedResponseError(TransportError):
    pass


@dataclass(frozen=True)
class GenerationRequest:
    purpose: str
    template_id: str
    variables: Mapping[str, str]
    max_length: int = 2000
    timeout: float = 10.0


@dataclass(frozen=True)
class ProviderConfig:
    """Provider selection; ``credential_env`` names an env var, never a secret."""

    provider: str = "stub"
    endpoint: str = ""
    credential_env: str = ""
    model: str = ""
    retry_count: int = 3
    retry_backoff: float = 0.1


def _load_template(name: str) -> str:
    path = resources.files("amlrisk.data.prompts").joinpath(f"{name}.txt")
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise TemplateError(f"unknown template {name!r}") from exc


def _render(template: str, variables: Mapping[str, str]) -> str:
    needed = {
        name for _, name, _, _ in string.Formatter().parse(template) if name
    }
    unbound = needed - set(variables)
    if unbound:
        raise TemplateError(f"unbound template variables: {sorted(unbound)}")
    return template.format(**{k: str(v) for k, v in variables.items()})


class GatewayClient:
    """Shareable client; safe for concurrent in-flight requests."""

    def __init__(self, config: ProviderConfig, transport: Optional[httpx.BaseTransport] = None):
        if config.provider not in ("stub", "remote"):
            raise GatewayConfigError(f"unknown provider {config.provider!r}")
        if config.provider == "remote":
            if not config.endpoint:
                raise GatewayConfigError("remote provider requires an endpoint")
            if not config.credential_env or config.credential_env not in os.environ:
                raise GatewayConfigError(
                    f"remote provider requires credential environment variable "
                    f"{config.credential_env or '(unset)'}"
                )
        self.config = config
        self._transport = transport

    def complete(self, request: GenerationRequest) -> str:
        if request.purpose not in PURPOSES:
            raise GatewayError(f"unknown purpose {request.purpose!r}")
        start = time.monotonic()
        if self.config.provider == "stub":
            text = self._complete_stub(request)
        else:
            text = self._complete_remote(request)
        logger.info(
            "gateway call purpose=%s template=%s provider=%s latency=%.3fs",
            request.purpose, request.template_id, self.config.provider,
            time.monotonic() - start,
        )
        return text[: request.max_length]

    def _complete_stub(self, request: GenerationRequest) -> str:
        expanded = _render(_load_template(f"{request.template_id}_stub"), request.variables)
        if request.purpose == "customize-questionnaire":
            # Customization callers expect structured output; keep it valid JSON
            # regardless of what characters the variables contain.
            return json.dumps(
                {"question_id": request.variables.get("question_id", ""), "text": expanded}
            )
        return expanded

    def _complete_remote(self, request: GenerationRequest) -> str:
        prompt = _render(_load_template(request.template_id), request.variables)
        secret = os.environ[self.config.credential_env]
        body = {
            "model": self.config.model,
            "prompt": prompt,
            "max_length": request.max_length,
        }
        headers = {"Authorization": f"Bearer {secret}"}
        attempts = max(1, self.config.retry_count)
        last_error: GatewayError = TransportError("no attempts made")
        for attempt in range(1, attempts + 1):
            try:
                with httpx.Client(transport=self._transport, timeout=request.timeout) as client:
                    response = client.post(self.config.endpoint, json=body, headers=headers)
                logger.info(
                    "gateway attempt %d/%d purpose=%s status=%s",
                    attempt, attempts, request.purpose, response.status_code,
                )
                if response.status_code in (401, 403):
                    raise GatewayAuthError(f"provider rejected credentials ({response.status_code})")
                if response.status_code >= 500:
                    last_error = TransportError(f"provider error {response.status_code}")
                elif response.status_code != 200:
                    raise MalformedResponseError(f"unexpected status {response.status_code}")
                else:
                    try:
                        payload = response.json()
                    except json.JSONDecodeError as exc:
                        raise MalformedResponseError("provider response is not JSON") from exc
                    if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
                        raise MalformedResponseError("provider response missing 'text'")
                    return payload["text"]
            except httpx.TimeoutException as exc:
                logger.info("gateway attempt %d/%d purpose=%s timed out",
                            attempt, attempts, request.purpose)
                last_error = GatewayTimeout(str(exc))
            except httpx.TransportError as exc:
                logger.info("gateway attempt %d/%d purpose=%s transport failure",
                            attempt, attempts, request.purpose)
                last_error = TransportError(str(exc))
            if attempt < attempts:
                time.sleep(self.config.retry_backoff * attempt)
        raise last_error


def complete(request: GenerationRequest, config: ProviderConfig,
             transport: Optional[httpx.BaseTransport] = None) -> str:
    """One-shot completion; see :class:`GatewayClient` for the contract."""
    return GatewayClient(config, transport=transport).complete(request)
