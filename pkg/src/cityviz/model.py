"""Shared domain model: the landscape hierarchy and camera poses.

A landscape is a forest of applications, each holding a tree of packages
with classes and methods, plus aggregated class-to-class communication.
All other subsystems (layout, semantic zoom, mini-map, server) consume
this model and never mutate it after validation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator


class ValidationError(ValueError):
    """An input violates one of the documented model invariants."""


#: Synthetic package that hosts classes whose fqn has no package prefix.
DEFAULT_PACKAGE = "(default)"


def canonical_json(doc) -> str:
    """Serialize a plain dict/list document to a canonical JSON string.

    Sorted keys and tight separators make equal documents byte-equal,
    which the determinism contracts rely on.
    """
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# ---------------------------------------------------------------------------
# Entity identifiers
#
# Every visual entity has one stable string id used across layout, semantic
# zoom, the wire protocol and the SVG exporter:
#   application  app:<name>
#   package      pkg:<appName>:<dot.joined.path>
#   class        cls:<classFqn>            (fqns are unique landscape-wide)
#   link         lnk:<sourceEntityId>-><targetEntityId>
# ---------------------------------------------------------------------------

def app_entity_id(app_name: str) -> str:
    return f"app:{app_name}"


def package_entity_id(app_name: str, path: tuple[str, ...]) -> str:
    return f"pkg:{app_name}:{'.'.join(path)}"


def class_entity_id(fqn: str) -> str:
    return f"cls:{fqn}"


def link_entity_id(source_id: str, target_id: str) -> str:
    return f"lnk:{source_id}->{target_id}"


@dataclass(frozen=True)
class CameraPose:
    """Orbit camera: a position looking at (and rotating around) a target."""

    position: tuple[float, float, float]
    target: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "target", tuple(float(c) for c in self.target))
        if self.position == self.target:
            raise ValidationError("camera position must differ from its target")

    def to_dict(self) -> dict:
        return {"position": list(self.position), "target": list(self.target)}

    @classmethod
    def from_dict(cls, doc: dict) -> "CameraPose":
        return cls(tuple(doc["position"]), tuple(doc["target"]))


def pose_distance(a: CameraPose, b: CameraPose) -> float:
    """Euclidean displacement between two camera positions."""
    return math.dist(a.position, b.position)


# ---------------------------------------------------------------------------
# Landscape structure
# ---------------------------------------------------------------------------

@dataclass
class Method:
    name: str
    loc: int = 1


@dataclass
class Class:
    name: str
    fqn: str
    instance_count: int = 0
    methods: list[Method] = field(default_factory=list)


@dataclass
class Package:
    name: str
    sub_packages: list["Package"] = field(default_factory=list)
    classes: list[Class] = field(default_factory=list)


@dataclass
class Application:
    name: str
    root_packages: list[Package] = field(default_factory=list)


@dataclass
class CommunicationLink:
    """Accumulated calls from one class to another; direction matters."""

    source_fqn: str
    target_fqn: str
    request_count: int = 1


@dataclass
class LandscapeStructure:
    applications: list[Application] = field(default_factory=list)
    communications: list[CommunicationLink] = field(default_factory=list)

    # -- traversal -----------------------------------------------------

    def walk_packages(self) -> Iterator[tuple[Application, tuple[str, ...], Package]]:
        """Yield (application, path, package) depth-first, path includes the package."""
        for app in self.applications:
            stack = [((pkg.name,), pkg) for pkg in reversed(app.root_packages)]
            while stack:
                path, pkg = stack.pop()
                yield app, path, pkg
                for sub in reversed(pkg.sub_packages):
                    stack.append((path + (sub.name,), sub))

    def iter_classes(self) -> Iterator[tuple[Application, tuple[str, ...], Class]]:
        for app, path, pkg in self.walk_packages():
            for cls in pkg.classes:
                yield app, path, cls

    def class_index(self) -> dict[str, tuple[Application, tuple[str, ...], Class]]:
        return {cls.fqn: (app, path, cls) for app, path, cls in self.iter_classes()}

    def package_chain_index(self) -> dict[str, tuple[str, ...]]:
        """Map class fqn -> enclosing package entity ids, outermost first."""
        chains: dict[str, tuple[str, ...]] = {}
        for app, path, cls in self.iter_classes():
            chain = tuple(
                package_entity_id(app.name, path[: depth + 1])
                for depth in range(len(path))
            )
            chains[cls.fqn] = chain
        return chains

    # -- validation ----------------------------------------------------

    def validate(self) -> "LandscapeStructure":
        seen_fqns: set[str] = set()
        seen_pkg_objects: set[int] = set()
        for app in self.applications:
            class_count = 0
            for _, path, pkg in _walk_single(app):
                if id(pkg) in seen_pkg_objects:
                    raise ValidationError(
                        f"package tree contains a cycle at {'.'.join(path)}"
                    )
                seen_pkg_objects.add(id(pkg))
                for cls in pkg.classes:
                    class_count += 1
                    if cls.fqn in seen_fqns:
                        raise ValidationError(f"duplicate class fqn: {cls.fqn}")
                    seen_fqns.add(cls.fqn)
                    if cls.instance_count < 0:
                        raise ValidationError(f"negative instanceCount on {cls.fqn}")
                    for m in cls.methods:
                        if m.loc < 0:
                            raise ValidationError(f"negative loc on {cls.fqn}.{m.name}")
            if class_count == 0:
                raise ValidationError(f"application {app.name!r} contains no classes")
        for link in self.communications:
            if link.request_count < 1:
                raise ValidationError(
                    f"link {link.source_fqn}->{link.target_fqn} has requestCount < 1"
                )
            for endpoint in (link.source_fqn, link.target_fqn):
                if endpoint not in seen_fqns:
                    raise ValidationError(f"link endpoint is not a known class: {endpoint}")
        return self

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "applications": [_app_to_dict(app) for app in self.applications],
            "communications": [
                {
                    "sourceClassFqn": l.source_fqn,
                    "targetClassFqn": l.target_fqn,
                    "requestCount": l.request_count,
                }
                for l in self.communications
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LandscapeStructure":
        try:
            apps = [_app_from_dict(a) for a in doc["applications"]]
            comms = [
                CommunicationLink(
                    source_fqn=l["sourceClassFqn"],
                    target_fqn=l["targetClassFqn"],
                    request_count=int(l.get("requestCount", 1)),
                )
                for l in doc.get("communications", [])
            ]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed structure document: {exc}") from exc
        return cls(applications=apps, communications=comms).validate()

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.to_dict()).encode("utf-8")


def _walk_single(app: Application):
    stack = [((pkg.name,), pkg) for pkg in reversed(app.root_packages)]
    while stack:
        path, pkg = stack.pop()
        yield app, path, pkg
        for sub in reversed(pkg.sub_packages):
            stack.append((path + (sub.name,), sub))


def _app_to_dict(app: Application) -> dict:
    return {"name": app.name, "rootPackages": [_pkg_to_dict(p) for p in app.root_packages]}


def _pkg_to_dict(pkg: Package) -> dict:
    return {
        "name": pkg.name,
        "subPackages": [_pkg_to_dict(p) for p in pkg.sub_packages],
        "classes": [
            {
                "name": c.name,
                "fqn": c.fqn,
                "instanceCount": c.instance_count,
                "methods": [{"name": m.name, "loc": m.loc} for m in c.methods],
            }
            for c in pkg.classes
        ],
    }


def _app_from_dict(doc: dict) -> Application:
    return Application(
        name=doc["name"],
        root_packages=[_pkg_from_dict(p) for p in doc.get("rootPackages", [])],
    )


def _pkg_from_dict(doc: dict) -> Package:
    return Package(
        name=doc["name"],
        sub_packages=[_pkg_from_dict(p) for p in doc.get("subPackages", [])],
        classes=[
            Class(
                name=c["name"],
                fqn=c["fqn"],
                instance_count=int(c.get("instanceCount", 0)),
                methods=[Method(m["name"], int(m.get("loc", 1))) for m in c.get("methods", [])],
            )
            for c in doc.get("classes", [])
        ],
    )
