"""WebSocket room hosting.

One Room owns the authoritative RoomState for its id; all messages for a
room are applied under its lock, in a single serialized order, through
the pure collab transition. This layer adds what the pure core leaves
out: connection registry, outbound sequence numbers, camera broadcast
coalescing (at most 10/s per sender, except to spectators who receive
every followed pose), heartbeats, and the per-user appearance pipeline.
"""

from __future__ import annotations

import asyncio
import time

from fastapi import WebSocket, WebSocketDisconnect

from ..collab import (
    CameraUpdate,
    Envelope,
    Highlight,
    Join,
    Leave,
    RoomState,
    SpectateStart,
    SpectateStop,
    apply_message,
    make_state_sync,
    message_to_dict,
    parse_message,
    spectators_of,
)
from ..minimap import compute_frame, marker_positions
from ..model import ValidationError
from .sessions import MIN_COMPUTE_INTERVAL, SessionView, flush_pending, handle_camera_update
from .store import LandscapeStore, Scene

CAMERA_BROADCAST_INTERVAL = 0.1  # seconds, per sender


class Room:
    def __init__(self, room_id: str, landscape_id: str):
        self.state = RoomState(room_id=room_id, landscape_id=landscape_id)
        self.connections: dict[str, WebSocket] = {}
        self.sessions: dict[str, SessionView] = {}
        self.lock = asyncio.Lock()
        self.out_seq = 0
        self.user_counter = 0
        self.last_camera_broadcast: dict[str, float] = {}
        self.last_seen: dict[str, float] = {}
        self.ticker: asyncio.Task | None = None


class RoomHub:
    def __init__(
        self,
        store: LandscapeStore,
        heartbeat_interval: float = 5.0,
        heartbeat_timeout: float = 15.0,
    ):
        self.store = store
        self.heartbeat_interval = heartbeat_interval
        self.heartbeat_timeout = heartbeat_timeout
        self.rooms: dict[str, Room] = {}
        self._lock = asyncio.Lock()

    # -- outbound helpers -------------------------------------------------

    async def _send_raw(self, room: Room, user_id: str, payload: dict) -> None:
        ws = room.connections.get(user_id)
        if ws is None:
            return
        room.out_seq += 1
        try:
            await ws.send_json({**payload, "roomId": room.state.room_id, "seq": room.out_seq})
        except Exception:
            pass  # connection raced a close; the disconnect path cleans up

    async def _send_message(self, room: Room, user_id: str, message, sender: str | None = None) -> None:
        ws = room.connections.get(user_id)
        if ws is None:
            return
        room.out_seq += 1
        doc = message_to_dict(message, room.state.room_id, room.out_seq)
        if sender is not None:
            doc["userId"] = sender  # originator of a relayed client message
        try:
            await ws.send_json(doc)
        except Exception:
            pass

    def _minimap_payload(self, room: Room, scene: Scene, user_id: str) -> dict:
        session = room.sessions[user_id]
        pose = room.state.users[user_id].pose
        cfg = scene.minimap
        anchor = pose.position if cfg.marker_mode == "camera" else pose.target
        frame = compute_frame(
            scene.layout, cfg, session.screen, focus_world=(anchor[0], anchor[2])
        )
        markers = marker_positions(room.state, user_id, cfg, frame)
        return {"frame": frame.to_dict(), "markers": [m.to_dict() for m in markers]}

    async def _push_view(self, room: Room, scene: Scene, user_id: str, delta) -> None:
        if delta is not None and not delta.is_empty():
            await self._send_raw(room, user_id, {"type": "appearance", "delta": delta.to_dict()})
        await self._send_raw(room, user_id, {"type": "minimap", **self._minimap_payload(room, scene, user_id)})

    # -- background tasks --------------------------------------------------

    async def _ticker_loop(self, room_id: str) -> None:
        try:
            while True:
                await asyncio.sleep(MIN_COMPUTE_INTERVAL)
                room = self.rooms.get(room_id)
                if room is None:
                    return
                async with room.lock:
                    scene = self.store.get(room.state.landscape_id)
                    if scene is None:
                        continue
                    for uid in list(room.sessions):
                        delta = flush_pending(room.sessions[uid], time.monotonic(), scene)
                        if delta is not None:
                            await self._push_view(room, scene, uid, delta)
        except asyncio.CancelledError:
            return

    async def _heartbeat_loop(self, room: Room, user_id: str, ws: WebSocket) -> None:
        try:
            while True:
                await asyncio.sleep(self.heartbeat_interval)
                last = room.last_seen.get(user_id, 0.0)
                if time.monotonic() - last > self.heartbeat_timeout:
                    await ws.close(code=1001)
                    return
                await ws.send_json(
                    {"type": "ping", "roomId": room.state.room_id, "seq": 0}
                )
        except asyncio.CancelledError:
            return
        except Exception:
            return

    # -- room lifecycle -----------------------------------------------------

    async def _join_room(
        self, ws: WebSocket, room_id: str, join_doc: dict
    ) -> tuple[Room, str] | None:
        async with self._lock:
            room = self.rooms.get(room_id)
            if room is None:
                landscape_id = join_doc.get("landscapeId")
                if not landscape_id or self.store.get(landscape_id) is None:
                    await ws.send_json(
                        {"type": "error", "roomId": room_id, "seq": 0,
                         "reason": "unknown landscape; create it via POST /landscapes first"}
                    )
                    await ws.close(code=1008)
                    return None
                room = Room(room_id, landscape_id)
                room.ticker = asyncio.create_task(self._ticker_loop(room_id))
                self.rooms[room_id] = room
        async with room.lock:
            room.user_counter += 1
            user_id = f"u{room.user_counter}"
            screen = join_doc.get("screen") or [1920, 1080]
            env = Envelope(room_id=room_id, seq=int(join_doc.get("seq", 0)),
                           message=Join(name=str(join_doc.get("name", user_id))))
            state, broadcasts = apply_message(room.state, user_id, env)
            room.state = state
            room.connections[user_id] = ws
            room.sessions[user_id] = SessionView(
                user_id=user_id, screen=(float(screen[0]), float(screen[1]))
            )
            room.last_seen[user_id] = time.monotonic()
            for recipient, message in broadcasts:
                await self._send_message(room, recipient, message)
            scene = self.store.get(room.state.landscape_id)
            if scene is not None:
                delta = handle_camera_update(
                    room.sessions[user_id],
                    room.state.users[user_id].pose,
                    time.monotonic(),
                    scene,
                )
                await self._push_view(room, scene, user_id, delta)
        return room, user_id

    async def _drop_user(self, room: Room, user_id: str) -> None:
        async with room.lock:
            room.connections.pop(user_id, None)
            room.sessions.pop(user_id, None)
            room.last_seen.pop(user_id, None)
            room.last_camera_broadcast.pop(user_id, None)
            if user_id in room.state.users:
                seq = room.state.last_seq.get(user_id, -1) + 1
                state, broadcasts = apply_message(
                    room.state, user_id,
                    Envelope(room.state.room_id, seq, Leave()),
                )
                room.state = state
                for recipient, message in broadcasts:
                    await self._send_message(room, recipient, message)
        async with self._lock:
            if not room.connections and self.rooms.get(room.state.room_id) is room:
                if room.ticker is not None:
                    room.ticker.cancel()
                del self.rooms[room.state.room_id]

    # -- main socket handler -------------------------------------------------

    async def handle_socket(self, ws: WebSocket, room_id: str) -> None:
        await ws.accept()
        try:
            first = await ws.receive_json()
        except (WebSocketDisconnect, ValueError):
            return
        if not isinstance(first, dict) or first.get("type") != "join":
            await ws.send_json({"type": "error", "roomId": room_id, "seq": 0,
                                "reason": "first message must be a join"})
            await ws.close(code=1002)
            return
        joined = await self._join_room(ws, room_id, first)
        if joined is None:
            return
        room, user_id = joined
        heartbeat = asyncio.create_task(self._heartbeat_loop(room, user_id, ws))
        try:
            while True:
                try:
                    raw = await ws.receive_json()
                except ValueError:
                    await self._send_raw(room, user_id, {"type": "error", "reason": "invalid JSON"})
                    continue
                room.last_seen[user_id] = time.monotonic()
                kind = raw.get("type") if isinstance(raw, dict) else None
                if kind == "pong":
                    continue
                if kind == "ping":
                    await self._send_raw(room, user_id, {"type": "pong"})
                    continue
                if kind == "sync":
                    async with room.lock:
                        scene = self.store.get(room.state.landscape_id)
                        payload = self._minimap_payload(room, scene, user_id) if scene else {}
                        sync = make_state_sync(room.state, payload.get("markers"))
                        await self._send_message(room, user_id, sync)
                        if scene:
                            await self._send_raw(room, user_id, {"type": "minimap", **payload})
                    continue
                await self._dispatch(room, user_id, raw)
        except WebSocketDisconnect:
            pass
        finally:
            heartbeat.cancel()
            await self._drop_user(room, user_id)

    async def _dispatch(self, room: Room, user_id: str, raw: dict) -> None:
        try:
            envelope = parse_message(raw)
        except ValidationError as exc:
            await self._send_raw(room, user_id, {"type": "error", "reason": str(exc)})
            return
        async with room.lock:
            state, broadcasts = apply_message(room.state, user_id, envelope)
            room.state = state
            message = envelope.message
            if isinstance(message, CameraUpdate):
                now = time.monotonic()
                throttled = (
                    now - room.last_camera_broadcast.get(user_id, float("-inf"))
                    < CAMERA_BROADCAST_INTERVAL
                )
                followers = spectators_of(room.state, user_id)
                for recipient, out in broadcasts:
                    if isinstance(out, CameraUpdate) and throttled and recipient not in followers:
                        continue  # coalesced; spectators always follow
                    await self._send_message(room, recipient, out, sender=user_id)
                if not throttled:
                    room.last_camera_broadcast[user_id] = now
                scene = self.store.get(room.state.landscape_id)
                if scene is None:
                    await self._send_raw(room, user_id, {"type": "error", "reason": "no landscape loaded"})
                    return
                delta = handle_camera_update(room.sessions[user_id], message.pose, now, scene)
                await self._push_view(room, scene, user_id, delta)
            else:
                relayed = (Highlight, SpectateStart, SpectateStop)
                for recipient, out in broadcasts:
                    relay_sender = user_id if isinstance(out, relayed) else None
                    await self._send_message(room, recipient, out, sender=relay_sender)
