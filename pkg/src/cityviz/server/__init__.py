"""HTTP + WebSocket facade over the core engine."""

from .app import create_app
from .sessions import SessionView, flush_pending, handle_camera_update
from .store import LandscapeStore, Scene, build_scene

__all__ = [
    "create_app",
    "SessionView",
    "flush_pending",
    "handle_camera_update",
    "LandscapeStore",
    "Scene",
    "build_scene",
]
