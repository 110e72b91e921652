"""FastAPI application: landscape upload, layout/settings, room hosting.

POST /landscapes accepts either a structure document (application/json)
or line-delimited spans (application/x-ndjson or text/plain); the
content type decides the parser. Everything downstream (layout, entity
table, clusters) is computed once at upload.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request, WebSocket
from fastapi.responses import JSONResponse

from .. import __version__
from ..ingest import aggregate_communication, parse_spans, reconstruct_structure
from ..model import LandscapeStructure, ValidationError
from .rooms import RoomHub
from .schemas import (
    HealthResponse,
    LandscapeCreated,
    MinimapSettings,
    SettingsDocument,
    ZoomSettings,
)
from .store import LandscapeStore

SPAN_CONTENT_TYPES = ("application/x-ndjson", "text/plain")


def create_app(
    store: LandscapeStore | None = None,
    heartbeat_interval: float = 5.0,
    heartbeat_timeout: float = 15.0,
) -> FastAPI:
    app = FastAPI(title="cityviz", version=__version__)
    app.state.store = store if store is not None else LandscapeStore()
    app.state.hub = RoomHub(app.state.store, heartbeat_interval, heartbeat_timeout)

    @app.exception_handler(ValidationError)
    async def _validation_error(_request: Request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/healthz", response_model=HealthResponse)
    async def healthz() -> HealthResponse:
        return HealthResponse()

    @app.post("/landscapes", response_model=LandscapeCreated, status_code=201)
    async def create_landscape(request: Request) -> LandscapeCreated:
        content_type = request.headers.get("content-type", "").split(";")[0].strip().lower()
        body = await request.body()
        diagnostics: dict[str, int] = {}
        if content_type == "application/json":
            import json

            try:
                doc = json.loads(body)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid JSON body: {exc.msg}")
            structure = LandscapeStructure.from_dict(doc)
        elif content_type in SPAN_CONTENT_TYPES:
            spans = parse_spans(body)
            structure = reconstruct_structure(spans)
            aggregate = aggregate_communication(spans, structure)
            structure.communications = aggregate.links
            diagnostics = aggregate.diagnostics()
        else:
            raise HTTPException(
                status_code=415,
                detail=(
                    "unsupported content type; send a structure document as "
                    "application/json or spans as application/x-ndjson"
                ),
            )
        scene = app.state.store.create(structure, diagnostics=diagnostics)
        return LandscapeCreated(
            landscapeId=scene.landscape_id,
            applications=len(structure.applications),
            classes=len(list(structure.iter_classes())),
            links=len(structure.communications),
            diagnostics=diagnostics,
        )

    def _scene_or_404(landscape_id: str):
        scene = app.state.store.get(landscape_id)
        if scene is None:
            raise HTTPException(status_code=404, detail=f"unknown landscape: {landscape_id}")
        return scene

    @app.get("/landscapes/{landscape_id}/layout")
    async def get_layout(landscape_id: str) -> dict:
        scene = _scene_or_404(landscape_id)
        return {"landscapeId": landscape_id, **scene.layout.to_dict()}

    @app.get("/landscapes/{landscape_id}/settings", response_model=SettingsDocument)
    async def get_settings(landscape_id: str) -> SettingsDocument:
        scene = _scene_or_404(landscape_id)
        return SettingsDocument(
            zoom=ZoomSettings.from_config(scene.zoom),
            minimap=MinimapSettings.from_config(scene.minimap),
        )

    @app.put("/landscapes/{landscape_id}/settings", response_model=SettingsDocument)
    async def put_settings(landscape_id: str, settings: SettingsDocument) -> SettingsDocument:
        _scene_or_404(landscape_id)
        scene = app.state.store.update_settings(
            landscape_id, settings.zoom.to_config(), settings.minimap.to_config()
        )
        return SettingsDocument(
            zoom=ZoomSettings.from_config(scene.zoom),
            minimap=MinimapSettings.from_config(scene.minimap),
        )

    @app.websocket("/rooms/{room_id}")
    async def room_socket(websocket: WebSocket, room_id: str) -> None:
        await app.state.hub.handle_socket(websocket, room_id)

    return app
