"""Chat-completion and text-to-image provider clients.

Two implementations per provider: live HTTP clients (OpenAI-compatible chat;
a small JSON protocol for image inference, see docs/providers.md) and
deterministic mocks for offline use. Mock output is a pure function of the
prompt, so tests and demos are reproducible across process restarts.
"""

from __future__ import annotations

import base64
import hashlib
import io
import random
import re
import sys
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import httpx
import numpy as np
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, Field

from .errors import BadImagePayload, NotConfigured, ProviderRejected, ProviderTimeout
from .metaphor import PromptText, render_numbered_list

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ProviderMode(str, Enum):
    LIVE = "live"
    MOCK = "mock"


class ProviderSettings(BaseModel):
    mode: ProviderMode = ProviderMode.MOCK
    # Per-provider overrides so a demo can pair live chat with mock images.
    chat_mode: ProviderMode | None = None
    image_mode: ProviderMode | None = None

    chat_base_url: str | None = None
    chat_api_key: str | None = None
    chat_model: str = "gpt-3.5-turbo"
    image_base_url: str | None = None

    deadline_secs: float = 120.0
    retries: int = 2
    backoff_base_secs: float = 0.25
    concurrency_cap: int = 4

    suggestion_temperature: float = 1.0
    depiction_temperature: float = 0.7
    suggestion_max_tokens: int = 256
    depiction_max_tokens: int = 200

    image_width: int = 512
    image_height: int = 512
    image_steps: int = 30
    image_seed: int | None = None
    # Diffusion pass-through knobs; sent only when set, never defaulted.
    guidance_scale: float | None = None
    negative_prompt: str | None = None
    sampler: str | None = None

    @classmethod
    def from_env(cls, env: dict | None = None, **overrides) -> "ProviderSettings":
        import os

        env = env if env is not None else os.environ
        values: dict = {}
        if env.get("MM_PROVIDER_MODE"):
            values["mode"] = env["MM_PROVIDER_MODE"].strip().lower()
        if env.get("MM_CHAT_BASE_URL"):
            values["chat_base_url"] = env["MM_CHAT_BASE_URL"]
        if env.get("MM_CHAT_API_KEY"):
            values["chat_api_key"] = env["MM_CHAT_API_KEY"]
        if env.get("MM_CHAT_MODEL"):
            values["chat_model"] = env["MM_CHAT_MODEL"]
        if env.get("MM_IMAGE_BASE_URL"):
            values["image_base_url"] = env["MM_IMAGE_BASE_URL"]
        if env.get("MM_REQUEST_DEADLINE_SECS"):
            values["deadline_secs"] = float(env["MM_REQUEST_DEADLINE_SECS"])
        values.update(overrides)
        return cls(**values)

    def resolved_chat_mode(self) -> ProviderMode:
        return self.chat_mode or self.mode

    def resolved_image_mode(self) -> ProviderMode:
        return self.image_mode or self.mode


class ChatRequest(BaseModel):
    prompt: PromptText
    temperature: float = Field(ge=0.0, le=2.0)
    max_tokens: int = Field(gt=0)


class ImageRequest(BaseModel):
    prompt: PromptText
    width: int = 512
    height: int = 512
    steps: int = 30
    seed: int | None = None


@dataclass
class ImageResult:
    """One generated image: content-addressed ref plus the encoded bytes."""

    image_ref: str
    data: bytes
    provider_meta: dict[str, str] = field(default_factory=dict)


class ProviderStatus(BaseModel):
    name: str
    mode: ProviderMode
    state: str  # reachable | not_configured | degraded
    detail: str = ""


def content_ref(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# --- retry/deadline plumbing ---------------------------------------------------

class _RetryableFailure(Exception):
    def __init__(self, kind: str, detail: str):
        super().__init__(detail)
        self.kind = kind  # "timeout" | "status"
        self.detail = detail


def _run_with_retries(op, settings: ProviderSettings):
    """Run op(remaining_secs) with exponential backoff.

    At most retries+1 attempts; the total deadline bounds all attempts and
    backoff sleeps together.
    """
    start = time.monotonic()
    last: _RetryableFailure | None = None
    for attempt in range(settings.retries + 1):
        remaining = settings.deadline_secs - (time.monotonic() - start)
        if remaining <= 0:
            raise ProviderTimeout(f"deadline of {settings.deadline_secs}s exhausted")
        try:
            return op(remaining)
        except _RetryableFailure as exc:
            last = exc
            if attempt == settings.retries:
                break
            pause = settings.backoff_base_secs * (2**attempt)
            remaining = settings.deadline_secs - (time.monotonic() - start)
            if remaining <= 0:
                break
            time.sleep(min(pause, remaining))
    assert last is not None
    if last.kind == "timeout":
        raise ProviderTimeout(last.detail)
    err = ProviderRejected(last.detail)
    err.retryable = True  # 429/5xx: safe for the caller to try again later
    raise err


def _check_deadline(start: float, settings: ProviderSettings) -> None:
    if time.monotonic() - start > settings.deadline_secs:
        raise ProviderTimeout(f"deadline of {settings.deadline_secs}s exhausted")


# --- live providers ---------------------------------------------------------------

class LiveChatProvider:
    """OpenAI-compatible chat completion client.

    Instances are shareable; concurrent calls are capped by the settings'
    concurrency_cap.
    """

    def __init__(self, settings: ProviderSettings, transport: httpx.BaseTransport | None = None):
        self.settings = settings
        self._client = httpx.Client(transport=transport)
        self._slots = threading.BoundedSemaphore(settings.concurrency_cap)

    def _require_configured(self) -> None:
        if not self.settings.chat_base_url:
            raise NotConfigured("chat provider: MM_CHAT_BASE_URL is not set")
        if not self.settings.chat_api_key:
            raise NotConfigured("chat provider: MM_CHAT_API_KEY is not set")

    def complete(self, req: ChatRequest) -> str:
        self._require_configured()
        url = self.settings.chat_base_url.rstrip("/") + "/chat/completions"
        messages = []
        if req.prompt.role_preamble:
            messages.append({"role": "system", "content": req.prompt.role_preamble})
        messages.append({"role": "user", "content": req.prompt.body})
        payload = {
            "model": self.settings.chat_model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self.settings.chat_api_key}"}

        def attempt(remaining: float):
            try:
                resp = self._client.post(url, json=payload, headers=headers, timeout=remaining)
            except httpx.TimeoutException as exc:
                raise _RetryableFailure("timeout", f"chat request timed out: {exc}") from exc
            except httpx.TransportError as exc:
                raise _RetryableFailure("timeout", f"chat transport failure: {exc}") from exc
            if resp.status_code == 429 or resp.status_code >= 500:
                raise _RetryableFailure("status", f"chat provider returned {resp.status_code}")
            if resp.status_code >= 400:
                raise ProviderRejected(f"chat provider returned {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise ProviderRejected(f"malformed chat response: {exc}") from exc

        with self._slots:
            return _run_with_retries(attempt, self.settings)

    def health(self) -> ProviderStatus:
        if not self.settings.chat_base_url or not self.settings.chat_api_key:
            return ProviderStatus(
                name="chat", mode=ProviderMode.LIVE, state="not_configured",
                detail="chat base URL or API key missing",
            )
        try:
            self._client.get(self.settings.chat_base_url.rstrip("/") + "/models", timeout=2.0)
        except httpx.HTTPError as exc:
            return ProviderStatus(name="chat", mode=ProviderMode.LIVE, state="degraded", detail=str(exc))
        return ProviderStatus(name="chat", mode=ProviderMode.LIVE, state="reachable")


def _decode_image(data: bytes, want_width: int, want_height: int) -> None:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise BadImagePayload(f"undecodable image payload: {exc}") from exc
    if (img.width, img.height) != (want_width, want_height):
        raise BadImagePayload(
            f"provider returned {img.width}x{img.height}, requested {want_width}x{want_height}"
        )


class LiveImageProvider:
    """Client for an HTTP text-to-image inference service.

    Protocol (see docs/providers.md): POST {base}/generate with prompt,
    width, height, num_inference_steps and optional seed; the response is
    either JSON carrying a base64 image or raw image bytes.
    """

    def __init__(self, settings: ProviderSettings, transport: httpx.BaseTransport | None = None):
        self.settings = settings
        self._client = httpx.Client(transport=transport)
        self._slots = threading.BoundedSemaphore(settings.concurrency_cap)

    def _require_configured(self) -> None:
        if not self.settings.image_base_url:
            raise NotConfigured("image provider: MM_IMAGE_BASE_URL is not set")

    def generate(self, req: ImageRequest) -> ImageResult:
        self._require_configured()
        url = self.settings.image_base_url.rstrip("/") + "/generate"
        payload: dict = {
            "prompt": req.prompt.full,
            "width": req.width,
            "height": req.height,
            "num_inference_steps": req.steps,
        }
        if req.seed is not None:
            payload["seed"] = req.seed
        if self.settings.guidance_scale is not None:
            payload["guidance_scale"] = self.settings.guidance_scale
        if self.settings.negative_prompt is not None:
            payload["negative_prompt"] = self.settings.negative_prompt
        if self.settings.sampler is not None:
            payload["sampler"] = self.settings.sampler

        def attempt(remaining: float):
            try:
                resp = self._client.post(url, json=payload, timeout=remaining)
            except httpx.TimeoutException as exc:
                raise _RetryableFailure("timeout", f"image request timed out: {exc}") from exc
            except httpx.TransportError as exc:
                raise _RetryableFailure("timeout", f"image transport failure: {exc}") from exc
            if resp.status_code == 429 or resp.status_code >= 500:
                raise _RetryableFailure("status", f"image provider returned {resp.status_code}")
            if resp.status_code >= 400:
                raise ProviderRejected(f"image provider returned {resp.status_code}: {resp.text[:200]}")
            content_type = resp.headers.get("content-type", "")
            if content_type.startswith("application/json"):
                try:
                    body = resp.json()
                    encoded = body["image"] if "image" in body else body["images"][0]
                    data = base64.b64decode(encoded)
                except (KeyError, IndexError, ValueError, TypeError) as exc:
                    raise BadImagePayload(f"malformed image response: {exc}") from exc
            else:
                data = resp.content
            _decode_image(data, req.width, req.height)
            return ImageResult(
                image_ref=content_ref(data), data=data, provider_meta={"provider": "live"}
            )

        with self._slots:
            return _run_with_retries(attempt, self.settings)

    def health(self) -> ProviderStatus:
        if not self.settings.image_base_url:
            return ProviderStatus(
                name="image", mode=ProviderMode.LIVE, state="not_configured",
                detail="image base URL missing",
            )
        try:
            self._client.get(self.settings.image_base_url, timeout=2.0)
        except httpx.HTTPError as exc:
            return ProviderStatus(name="image", mode=ProviderMode.LIVE, state="degraded", detail=str(exc))
        return ProviderStatus(name="image", mode=ProviderMode.LIVE, state="reachable")


# --- mock providers ------------------------------------------------------------------

def _default_fixtures_path() -> Path:
    return Path(str(resources.files("dreamloom").joinpath("fixtures/mock_chat.toml")))


def _prompt_seed(material: str) -> int:
    return int.from_bytes(hashlib.sha256(material.encode("utf-8")).digest()[:8], "big")


_BANK_ADJECTIVES = [
    "Silver", "Drifting", "Glass", "Paper", "Midnight", "Amber",
    "Hollow", "Velvet", "Ember", "Quiet", "Restless", "Folded",
]
_BANK_NOUNS = [
    "Lantern", "Tide", "Orchard", "Compass", "Mirror", "Thread",
    "Anthem", "Harbor", "Kite", "Bellows", "Procession", "Aviary",
]
_DEPICTION_SHAPES = [
    "It settles over me like {image}, and I carry the feeling quietly as the dream moves on.",
    "I hold still while it passes through me like {image}, leaving a faint glow behind.",
    "Like {image}, the feeling fills the space around me until it is all I can see.",
]

_COUNT_RE = re.compile(r"exactly (\d+)")


class MockChatProvider:
    """Deterministic offline chat provider backed by a fixture file.

    Suggestion prompts (recognised by the numbered-list instruction) get a
    numbered list: fixture items first when a fixture matches, topped up
    from a word bank seeded by the prompt hash. Anything else is treated as
    a depiction request.
    """

    def __init__(
        self,
        settings: ProviderSettings | None = None,
        fixtures_path: str | Path | None = None,
        latency_secs: float = 0.0,
    ):
        self.settings = settings or ProviderSettings()
        self.latency_secs = latency_secs
        path = Path(fixtures_path) if fixtures_path else _default_fixtures_path()
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        self._suggestion_fixtures = data.get("suggestions", [])
        self._depiction_fixtures = data.get("depictions", [])

    def complete(self, req: ChatRequest) -> str:
        start = time.monotonic()
        if self.latency_secs:
            time.sleep(self.latency_secs)
        _check_deadline(start, self.settings)
        prompt = req.prompt.full
        if "numbered list" in prompt:
            return self._suggest(prompt)
        return self._depict(prompt)

    def _suggest(self, prompt: str) -> str:
        fixture = next(
            (f for f in self._suggestion_fixtures if f["match"] in prompt), None
        )
        if fixture is not None and "raw" in fixture:
            return fixture["raw"]
        m = _COUNT_RE.search(prompt)
        n = int(m.group(1)) if m else 5
        items: list[str] = list(fixture["items"]) if fixture else []
        rng = random.Random(_prompt_seed(prompt))
        while len(items) < n:
            candidate = f"{rng.choice(_BANK_ADJECTIVES)} {rng.choice(_BANK_NOUNS)}"
            if candidate not in items:
                items.append(candidate)
        return render_numbered_list(items[:n])

    def _depict(self, prompt: str) -> str:
        fixture = next(
            (f for f in self._depiction_fixtures if f["match"] in prompt), None
        )
        if fixture is not None:
            return fixture["text"]
        rng = random.Random(_prompt_seed(prompt))
        image = f"a {rng.choice(_BANK_ADJECTIVES).lower()} {rng.choice(_BANK_NOUNS).lower()}"
        return rng.choice(_DEPICTION_SHAPES).format(image=image)

    def health(self) -> ProviderStatus:
        return ProviderStatus(name="chat", mode=ProviderMode.MOCK, state="reachable")


_MOCK_COLOR_POOL = [
    (220, 40, 40), (240, 150, 40), (240, 220, 60), (60, 180, 75),
    (40, 160, 160), (50, 90, 200), (90, 60, 180), (150, 60, 170),
    (220, 70, 150), (140, 90, 50), (100, 110, 130), (30, 100, 60),
]
_GRADIENT_FRACTION = 0.2  # top strip; the rest is solid bands


class MockImageProvider:
    """Procedural image generator with known dominant colors.

    The image is a thin horizontal gradient strip over 2-4 solid vertical
    bands, all chosen by a RNG seeded from the prompt (and request seed when
    given), so palette extraction has a reproducible ground truth.
    """

    def __init__(self, settings: ProviderSettings | None = None, latency_secs: float = 0.0):
        self.settings = settings or ProviderSettings()
        self.latency_secs = latency_secs

    def generate(self, req: ImageRequest) -> ImageResult:
        start = time.monotonic()
        if self.latency_secs:
            time.sleep(self.latency_secs)
        _check_deadline(start, self.settings)
        material = req.prompt.full
        if req.seed is not None:
            material += f"|seed={req.seed}"
        rng = random.Random(_prompt_seed(material))

        w, h = req.width, req.height
        arr = np.zeros((h, w, 3), dtype=np.uint8)
        n_bands = rng.randint(2, 4)
        band_colors = rng.sample(_MOCK_COLOR_POOL, n_bands)
        # Band boundaries: proportional widths, never degenerate.
        shares = [rng.uniform(0.5, 1.5) for _ in range(n_bands)]
        total = sum(shares)
        edges = [0]
        acc = 0.0
        for s in shares[:-1]:
            acc += s / total
            edges.append(min(w, max(edges[-1] + 1, int(round(acc * w)))))
        edges.append(w)
        grad_rows = max(1, int(h * _GRADIENT_FRACTION))
        g0, g1 = rng.sample(_MOCK_COLOR_POOL, 2)
        t = np.linspace(0.0, 1.0, w)[None, :, None]
        gradient = (np.array(g0) * (1 - t) + np.array(g1) * t).astype(np.uint8)
        arr[:grad_rows, :, :] = gradient
        for i in range(n_bands):
            arr[grad_rows:, edges[i]:edges[i + 1], :] = band_colors[i]

        buf = io.BytesIO()
        Image.fromarray(arr).save(buf, format="PNG")
        data = buf.getvalue()
        return ImageResult(
            image_ref=content_ref(data),
            data=data,
            provider_meta={"provider": "mock", "bands": str(n_bands)},
        )

    def health(self) -> ProviderStatus:
        return ProviderStatus(name="image", mode=ProviderMode.MOCK, state="reachable")


# --- wiring -----------------------------------------------------------------------------

def build_providers(
    settings: ProviderSettings,
    fixtures_path: str | Path | None = None,
    chat_transport: httpx.BaseTransport | None = None,
    image_transport: httpx.BaseTransport | None = None,
):
    """Instantiate the (chat, image) provider pair for the resolved modes."""
    if settings.resolved_chat_mode() == ProviderMode.MOCK:
        chat = MockChatProvider(settings, fixtures_path=fixtures_path)
    else:
        chat = LiveChatProvider(settings, transport=chat_transport)
    if settings.resolved_image_mode() == ProviderMode.MOCK:
        image = MockImageProvider(settings)
    else:
        image = LiveImageProvider(settings, transport=image_transport)
    return chat, image


def health_check(chat, image) -> list[ProviderStatus]:
    """Report per-provider status without mutating any state."""
    return [chat.health(), image.health()]
