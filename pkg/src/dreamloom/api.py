"""HTTP/JSON API over the Studio.

Endpoint paths are frozen (see README); error bodies carry a stable
``{code, message, retryable}`` shape for every domain failure.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import AppConfig
from .errors import BindFailure, DreamloomError
from .palette import FilterOrigin
from .service import Studio
from .story import MeaningType, MetaphorSpec, Scene, SceneKind, Story

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class CreateStoryBody(BaseModel):
    title: str


class AddSceneBody(BaseModel):
    kind: SceneKind
    position: int
    text: str = ""


class PatchSceneBody(BaseModel):
    text: str | None = None
    metaphor: MetaphorSpec | None = None


class SuggestionBody(BaseModel):
    meaning_type: MeaningType
    n: int = Field(default=5, ge=1, le=20)


class FilterBody(BaseModel):
    origin: FilterOrigin
    hex: str | None = None


class LayoutItemChange(BaseModel):
    anchor_x: float | None = None
    image_offset: tuple[float, float] | None = None
    scale: float | None = None


class LayoutBody(BaseModel):
    axis_y: float | None = None
    items: dict[str, LayoutItemChange] = Field(default_factory=dict)
    reset: bool = False


def _scene_payload(scene: Scene) -> dict:
    data = scene.model_dump(mode="json")
    data["bubble"] = scene.bubble_shape().value
    return data


def _story_payload(story: Story) -> dict:
    data = story.model_dump(mode="json")
    for scene, scene_data in zip(story.scenes, data["scenes"]):
        scene_data["bubble"] = scene.bubble_shape().value
    return data


def _error_response(exc: DreamloomError) -> JSONResponse:
    return JSONResponse(status_code=exc.http_status, content=exc.to_api_error())


def create_app(studio: Studio) -> FastAPI:
    app = FastAPI(title="dreamloom", version="0.1.0")
    origin = studio.config.cors_origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[origin] if origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(DreamloomError)
    async def on_domain_error(_: Request, exc: DreamloomError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "code": "invalid_request",
                "message": str(exc.errors()[:3]),
                "retryable": False,
            },
        )

    # -- stories ------------------------------------------------------------

    @app.post("/stories", status_code=201)
    def create_story(body: CreateStoryBody):
        return _story_payload(studio.create_story(body.title))

    @app.get("/stories")
    def list_stories():
        return [
            {
                "id": s.id,
                "title": s.title,
                "scene_count": len(s.scenes),
                "created_at": s.created_at.isoformat(),
                "updated_at": s.updated_at.isoformat(),
            }
            for s in studio.list_stories()
        ]

    @app.post("/stories/import", status_code=201)
    def import_story(body: dict):
        return _story_payload(studio.import_story(body))

    @app.get("/stories/{story_id}")
    def get_story(story_id: str):
        return _story_payload(studio.get_story(story_id))

    @app.post("/stories/{story_id}/scenes", status_code=201)
    def add_scene(story_id: str, body: AddSceneBody):
        return _scene_payload(studio.add_scene(story_id, body.kind, body.position, body.text))

    @app.put("/stories/{story_id}/layout")
    def update_layout(story_id: str, body: LayoutBody):
        story = studio.update_layout(
            story_id,
            axis_y=body.axis_y,
            items={k: v.model_dump() for k, v in body.items.items()},
            reset=body.reset,
        )
        return story.layout.model_dump(mode="json")

    @app.get("/stories/{story_id}/playback")
    def playback(story_id: str):
        return studio.playback(story_id).model_dump(mode="json")

    # -- scenes ----------------------------------------------------------------

    @app.patch("/scenes/{scene_id}")
    def patch_scene(scene_id: str, body: PatchSceneBody):
        return _scene_payload(studio.update_scene(scene_id, body.text, body.metaphor))

    @app.delete("/scenes/{scene_id}", status_code=204)
    def delete_scene(scene_id: str):
        studio.delete_scene(scene_id)
        return Response(status_code=204)

    @app.post("/scenes/{scene_id}/suggestions")
    def suggestions(scene_id: str, body: SuggestionBody):
        found = studio.request_suggestions(scene_id, body.meaning_type, body.n)
        return {"suggestions": [s.model_dump() for s in found]}

    @app.post("/scenes/{scene_id}/generations", status_code=201)
    def generate(scene_id: str):
        return studio.request_generation(scene_id).model_dump(mode="json")

    @app.post("/scenes/{scene_id}/generations/{generation_id}/accept")
    def accept(scene_id: str, generation_id: str):
        scene, depiction_error = studio.finalize_acceptance(scene_id, generation_id)
        payload = {"scene": _scene_payload(scene), "depiction_error": None}
        if isinstance(depiction_error, DreamloomError):
            payload["depiction_error"] = depiction_error.to_api_error()
        return payload

    @app.post("/scenes/{scene_id}/display/{generation_id}")
    def display(scene_id: str, generation_id: str):
        return _scene_payload(studio.switch_display(scene_id, generation_id))

    @app.get("/scenes/{scene_id}/palette")
    def get_palette(scene_id: str):
        pal = studio.get_palette(scene_id)
        return {"palette": pal.model_dump(mode="json") if pal else None}

    @app.put("/scenes/{scene_id}/filter")
    def put_filter(scene_id: str, body: FilterBody):
        return _scene_payload(studio.set_filter(scene_id, body.origin, body.hex))

    # -- assets & health ------------------------------------------------------------

    @app.get("/images/{ref}")
    def get_image(ref: str):
        data = studio.image_bytes(ref)
        media = "image/png" if data.startswith(PNG_MAGIC) else "image/jpeg"
        return Response(content=data, media_type=media)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "providers": [s.model_dump() for s in studio.health()]}

    return app


class ApiServer:
    """Uvicorn wrapper that can start on a free port and stop cleanly.

    Shutdown is graceful: uvicorn stops accepting connections and drains
    in-flight requests before the thread exits.
    """

    def __init__(self, studio: Studio, host: str | None = None, port: int | None = None):
        import uvicorn

        self.app = create_app(studio)
        self.host = host if host is not None else studio.config.bind_host
        self.port = port if port is not None else studio.config.bind_port
        self._config = uvicorn.Config(
            self.app, host=self.host, port=self.port, log_level="warning"
        )
        self.server = uvicorn.Server(self._config)
        self._thread: threading.Thread | None = None

    def start(self, wait_secs: float = 10.0) -> None:
        import socket
        import time

        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        try:
            probe.bind((self.host, self.port))
        except OSError as exc:
            raise BindFailure(f"cannot bind {self.host}:{self.port}: {exc}") from exc
        finally:
            probe.close()
        self._thread = threading.Thread(target=self.server.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + wait_secs
        while not self.server.started:
            if time.monotonic() > deadline:
                raise BindFailure(f"server did not start within {wait_secs}s")
            time.sleep(0.02)

    def stop(self, wait_secs: float = 10.0) -> None:
        self.server.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout=wait_secs)


def serve(config: AppConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    studio = Studio(config)
    app = create_app(studio)
    try:
        uvicorn.run(app, host=config.bind_host, port=config.bind_port)
    except SystemExit as exc:  # uvicorn signals bind errors via SystemExit
        raise BindFailure(f"cannot serve on {config.bind_host}:{config.bind_port}") from exc
