"""Room-based multi-user session state machine.

All mutation goes through apply_message, a pure transition from (state,
sender, message) to (new state, broadcasts). Replaying a message log from
the initial state therefore reproduces the final state exactly, which is
how the protocol is tested. Transport concerns (sockets, throttling,
heartbeats) live in the server package.

Teleporting is client-initiated: every client already receives all poses,
so adopting another user's pose needs no dedicated wire message. Spectate
links are tracked server-side and kept acyclic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

from .model import CameraPose, ValidationError, canonical_json

#: Marker/highlight palette; colors stay unique until more than 12 users join.
PALETTE: tuple[str, ...] = (
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff",
)

DEFAULT_POSE = CameraPose((0.0, 60.0, 120.0), (0.0, 0.0, 0.0))


@dataclass(frozen=True)
class UserState:
    name: str
    color: str
    pose: CameraPose = DEFAULT_POSE
    highlights: tuple[tuple[str, str], ...] = ()  # (entityId, color), sorted
    spectating: str | None = None

    def highlight_map(self) -> dict[str, str]:
        return dict(self.highlights)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "color": self.color,
            "pose": self.pose.to_dict(),
            "highlights": {k: v for k, v in self.highlights},
            "spectating": self.spectating,
        }


@dataclass(frozen=True)
class RoomState:
    room_id: str
    landscape_id: str | None = None
    users: dict[str, UserState] = field(default_factory=dict)
    last_seq: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "roomId": self.room_id,
            "landscapeId": self.landscape_id,
            "users": {uid: self.users[uid].to_dict() for uid in sorted(self.users)},
            "lastSeq": {uid: self.last_seq[uid] for uid in sorted(self.last_seq)},
        }

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.to_dict()).encode("utf-8")


# ---------------------------------------------------------------------------
# Protocol messages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Join:
    name: str


@dataclass(frozen=True)
class Leave:
    pass


@dataclass(frozen=True)
class CameraUpdate:
    pose: CameraPose


@dataclass(frozen=True)
class Highlight:
    entity_id: str
    color: str | None = None  # None clears the highlight


@dataclass(frozen=True)
class SpectateStart:
    target_id: str


@dataclass(frozen=True)
class SpectateStop:
    pass


@dataclass(frozen=True)
class Welcome:
    self_id: str
    color: str
    snapshot: dict


@dataclass(frozen=True)
class UserJoined:
    user_id: str
    name: str
    color: str


@dataclass(frozen=True)
class UserLeft:
    user_id: str


@dataclass(frozen=True)
class StateSync:
    poses: dict
    highlights: dict
    markers: list


@dataclass(frozen=True)
class ErrorReply:
    reason: str


Message = Union[
    Join, Leave, CameraUpdate, Highlight, SpectateStart, SpectateStop,
    Welcome, UserJoined, UserLeft, StateSync, ErrorReply,
]


@dataclass(frozen=True)
class Envelope:
    """A message plus the fields every wire message carries."""

    room_id: str
    seq: int
    message: Message


_CLIENT_TYPES = {
    "join": Join,
    "leave": Leave,
    "cameraUpdate": CameraUpdate,
    "highlight": Highlight,
    "spectateStart": SpectateStart,
    "spectateStop": SpectateStop,
}


def parse_message(doc: dict) -> Envelope:
    """Validate and decode one client wire message."""
    if not isinstance(doc, dict):
        raise ValidationError("message must be a JSON object")
    for required in ("type", "roomId", "seq"):
        if required not in doc:
            raise ValidationError(f"message is missing field {required!r}")
    kind = doc["type"]
    try:
        seq = int(doc["seq"])
    except (TypeError, ValueError):
        raise ValidationError("seq must be an integer")
    if kind not in _CLIENT_TYPES:
        raise ValidationError(f"unknown message type: {kind}")
    try:
        if kind == "join":
            msg: Message = Join(name=str(doc["name"]))
        elif kind == "leave":
            msg = Leave()
        elif kind == "cameraUpdate":
            msg = CameraUpdate(pose=CameraPose.from_dict(doc["pose"]))
        elif kind == "highlight":
            msg = Highlight(entity_id=str(doc["entityId"]), color=doc.get("color"))
        elif kind == "spectateStart":
            msg = SpectateStart(target_id=str(doc["targetId"]))
        else:
            msg = SpectateStop()
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed {kind} message: {exc}") from exc
    return Envelope(room_id=str(doc["roomId"]), seq=seq, message=msg)


def message_to_dict(message: Message, room_id: str, seq: int) -> dict:
    doc: dict = {"roomId": room_id, "seq": seq}
    if isinstance(message, Join):
        doc.update(type="join", name=message.name)
    elif isinstance(message, Leave):
        doc.update(type="leave")
    elif isinstance(message, CameraUpdate):
        doc.update(type="cameraUpdate", pose=message.pose.to_dict())
    elif isinstance(message, Highlight):
        doc.update(type="highlight", entityId=message.entity_id, color=message.color)
    elif isinstance(message, SpectateStart):
        doc.update(type="spectateStart", targetId=message.target_id)
    elif isinstance(message, SpectateStop):
        doc.update(type="spectateStop")
    elif isinstance(message, Welcome):
        doc.update(type="welcome", selfId=message.self_id, color=message.color,
                   snapshot=message.snapshot)
    elif isinstance(message, UserJoined):
        doc.update(type="userJoined", userId=message.user_id, name=message.name,
                   color=message.color)
    elif isinstance(message, UserLeft):
        doc.update(type="userLeft", userId=message.user_id)
    elif isinstance(message, StateSync):
        doc.update(type="stateSync", poses=message.poses, highlights=message.highlights,
                   markers=message.markers)
    elif isinstance(message, ErrorReply):
        doc.update(type="error", reason=message.reason)
    else:
        raise ValidationError(f"cannot serialize message {message!r}")
    return doc


# ---------------------------------------------------------------------------
# Transitions
# ---------------------------------------------------------------------------

def assign_color(state: RoomState) -> str:
    """Lowest-index free palette color; reuse by join order once exhausted."""
    used = {user.color for user in state.users.values()}
    for color in PALETTE:
        if color not in used:
            return color
    return PALETTE[len(state.users) % len(PALETTE)]


def spectators_of(state: RoomState, user_id: str) -> set[str]:
    """Users following user_id, directly or through a spectate chain."""
    followers: set[str] = set()
    frontier = {user_id}
    while frontier:
        next_frontier = {
            uid
            for uid, user in state.users.items()
            if user.spectating in frontier and uid not in followers
        }
        followers |= next_frontier
        frontier = next_frontier
    return followers


def effective_pose(state: RoomState, user_id: str) -> CameraPose:
    """The pose a user is currently seeing (follows spectate links)."""
    seen = set()
    uid = user_id
    while uid not in seen:
        seen.add(uid)
        target = state.users[uid].spectating
        if target is None or target not in state.users:
            break
        uid = target
    return state.users[uid].pose


def make_state_sync(state: RoomState, markers: list | None = None) -> StateSync:
    return StateSync(
        poses={uid: effective_pose(state, uid).to_dict() for uid in sorted(state.users)},
        highlights={uid: state.users[uid].to_dict()["highlights"] for uid in sorted(state.users)},
        markers=markers or [],
    )


Broadcast = tuple[str, Message]


def apply_message(
    state: RoomState, sender: str, envelope: Envelope
) -> tuple[RoomState, list[Broadcast]]:
    """Pure room transition; returns the new state and per-recipient messages.

    Stale sequence numbers (not greater than the sender's last seen) drop
    the message without effect. Malformed or impossible requests leave the
    state unchanged and send an error reply to the sender only.
    """
    if envelope.room_id != state.room_id:
        return state, [(sender, ErrorReply(f"wrong room: {envelope.room_id}"))]
    if envelope.seq <= state.last_seq.get(sender, -1):
        return state, []
    msg = envelope.message

    def advance(new_state: RoomState) -> RoomState:
        seqs = dict(new_state.last_seq)
        seqs[sender] = envelope.seq
        return replace(new_state, last_seq=seqs)

    def reject(reason: str) -> tuple[RoomState, list[Broadcast]]:
        # Rejections leave the room state untouched, including seq tracking.
        return state, [(sender, ErrorReply(reason))]

    others = [uid for uid in sorted(state.users) if uid != sender]

    if isinstance(msg, Join):
        if sender in state.users:
            return reject(f"user {sender} already joined")
        color = assign_color(state)
        users = dict(state.users)
        users[sender] = UserState(name=msg.name, color=color)
        new_state = advance(replace(state, users=users))
        broadcasts: list[Broadcast] = [
            (sender, Welcome(self_id=sender, color=color, snapshot=new_state.to_dict()))
        ]
        broadcasts += [(uid, UserJoined(sender, msg.name, color)) for uid in others]
        return new_state, broadcasts

    if sender not in state.users:
        return reject(f"unknown sender: {sender}")

    if isinstance(msg, Leave):
        users = {}
        for uid, user in state.users.items():
            if uid == sender:
                continue
            if user.spectating == sender:
                user = replace(user, spectating=None)
            users[uid] = user
        seqs = {uid: s for uid, s in state.last_seq.items() if uid != sender}
        new_state = replace(state, users=users, last_seq=seqs)
        return new_state, [(uid, UserLeft(sender)) for uid in sorted(users)]

    if isinstance(msg, CameraUpdate):
        users = dict(state.users)
        users[sender] = replace(users[sender], pose=msg.pose)
        new_state = advance(replace(state, users=users))
        return new_state, [(uid, CameraUpdate(msg.pose)) for uid in others]

    if isinstance(msg, Highlight):
        user = state.users[sender]
        highlights = user.highlight_map()
        if msg.color is None:
            highlights.pop(msg.entity_id, None)
        else:
            highlights[msg.entity_id] = msg.color
        users = dict(state.users)
        users[sender] = replace(user, highlights=tuple(sorted(highlights.items())))
        new_state = advance(replace(state, users=users))
        return new_state, [(uid, msg) for uid in others]

    if isinstance(msg, SpectateStart):
        if msg.target_id == sender:
            return reject("cannot spectate yourself")
        if msg.target_id not in state.users:
            return reject(f"cannot spectate unknown user: {msg.target_id}")
        # Walking the chain from the target must not lead back to the sender.
        uid: str | None = msg.target_id
        while uid is not None:
            if uid == sender:
                return reject("spectate link would create a cycle")
            uid = state.users[uid].spectating
        users = dict(state.users)
        users[sender] = replace(users[sender], spectating=msg.target_id)
        new_state = advance(replace(state, users=users))
        return new_state, [(uid2, msg) for uid2 in others]

    if isinstance(msg, SpectateStop):
        users = dict(state.users)
        users[sender] = replace(users[sender], spectating=None)
        new_state = advance(replace(state, users=users))
        return new_state, [(uid, msg) for uid in others]

    return reject(f"unsupported message: {type(msg).__name__}")
