"""Trace ingestion: spans in, landscape structure and communication out.

Spans arrive as JSON Lines records. The fully qualified method name of a
span is split as  <package...>.<Class>.<method>  which is enough to
rebuild the package/class hierarchy of each service. Parent/child span
pairs whose classes differ accumulate into directed communication links.

A deterministic synthetic generator and its inverse (spans from a
structure) support testing at any scale without live agents.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import IO, Iterable

from .model import (
    DEFAULT_PACKAGE,
    Application,
    Class,
    CommunicationLink,
    LandscapeStructure,
    Method,
    Package,
    ValidationError,
    canonical_json,
)


class SpanParseError(ValidationError):
    """A malformed span record; carries the 1-based input line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Span:
    trace_id: str
    span_id: str
    parent_span_id: str | None
    start_nanos: int
    end_nanos: int
    service_name: str
    fqn: str

    def to_dict(self) -> dict:
        return {
            "traceId": self.trace_id,
            "spanId": self.span_id,
            "parentSpanId": self.parent_span_id,
            "startNanos": self.start_nanos,
            "endNanos": self.end_nanos,
            "serviceName": self.service_name,
            "fqn": self.fqn,
        }


_REQUIRED_FIELDS = ("traceId", "spanId", "startNanos", "endNanos", "serviceName", "fqn")


def split_fqn(fqn: str) -> tuple[tuple[str, ...], str, str]:
    """Split a dotted fqn into (package path, class name, method name).

    A two-segment fqn has an empty package path; the class then lands in
    the synthetic default package during reconstruction.
    """
    segments = fqn.split(".")
    if len(segments) < 2 or any(not s for s in segments):
        raise ValidationError(f"fqn must contain class and method: {fqn!r}")
    return tuple(segments[:-2]), segments[-2], segments[-1]


def parse_spans(source: bytes | str | IO | Iterable[str]) -> list[Span]:
    """Parse line-delimited span records, preserving input order.

    Blank lines are ignored. Any malformed record raises SpanParseError
    naming the offending line.
    """
    if isinstance(source, bytes):
        lines = source.decode("utf-8").splitlines()
    elif isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [line.decode("utf-8") if isinstance(line, bytes) else line for line in source]

    spans: list[Span] = []
    seen: set[tuple[str, str]] = set()
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SpanParseError(number, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise SpanParseError(number, "record is not a JSON object")
        missing = [f for f in _REQUIRED_FIELDS if f not in record]
        if missing:
            raise SpanParseError(number, f"missing fields: {', '.join(missing)}")
        try:
            start = int(record["startNanos"])
            end = int(record["endNanos"])
        except (TypeError, ValueError):
            raise SpanParseError(number, "startNanos/endNanos must be integers")
        if end < start:
            raise SpanParseError(number, "endNanos must be >= startNanos")
        fqn = record["fqn"]
        try:
            split_fqn(fqn)
        except ValidationError as exc:
            raise SpanParseError(number, str(exc)) from exc
        key = (str(record["traceId"]), str(record["spanId"]))
        if key in seen:
            raise SpanParseError(number, f"duplicate spanId {key[1]!r} in trace {key[0]!r}")
        seen.add(key)
        parent = record.get("parentSpanId")
        spans.append(
            Span(
                trace_id=str(record["traceId"]),
                span_id=str(record["spanId"]),
                parent_span_id=None if parent is None else str(parent),
                start_nanos=start,
                end_nanos=end,
                service_name=str(record["serviceName"]),
                fqn=str(fqn),
            )
        )
    return spans


def _collision_fqns(spans: list[Span]) -> set[str]:
    """Class fqns observed in more than one service.

    Those get the service name prepended as an extra root package segment
    so that class fqns stay unique landscape-wide. The rule applies to all
    services of a colliding fqn, which keeps the result independent of
    span order.
    """
    services_by_class: dict[str, set[str]] = {}
    for span in spans:
        path, cls_name, _ = split_fqn(span.fqn)
        class_fqn = ".".join(path + (cls_name,))
        services_by_class.setdefault(class_fqn, set()).add(span.service_name)
    return {fqn for fqn, services in services_by_class.items() if len(services) > 1}


def _effective_split(span: Span, collisions: set[str]) -> tuple[tuple[str, ...], str, str]:
    path, cls_name, method = split_fqn(span.fqn)
    if ".".join(path + (cls_name,)) in collisions:
        path = (span.service_name,) + path
    if not path:
        path = (DEFAULT_PACKAGE,)
    return path, cls_name, method


def reconstruct_structure(spans: list[Span]) -> LandscapeStructure:
    """Rebuild the application/package/class hierarchy from spans.

    One application per distinct service name. A class's instance count is
    approximated by the number of distinct traces it appears in; method
    lines of code default to 1 (refine via merge_structure).
    """
    if not spans:
        raise ValidationError("cannot reconstruct a structure from zero spans")
    collisions = _collision_fqns(spans)

    # service -> package path -> {class name -> (method names, trace ids)}
    services: dict[str, dict[tuple[str, ...], dict[str, tuple[set[str], set[str]]]]] = {}
    for span in spans:
        path, cls_name, method = _effective_split(span, collisions)
        packages = services.setdefault(span.service_name, {})
        methods, traces = packages.setdefault(path, {}).setdefault(cls_name, (set(), set()))
        methods.add(method)
        traces.add(span.trace_id)

    applications = []
    for service in sorted(services):
        tree: dict = {}
        for path, classes in sorted(services[service].items()):
            node = tree
            for segment in path:
                node = node.setdefault(segment, {})
            node.setdefault("_classes", {}).update(classes)
        applications.append(
            Application(name=service, root_packages=_build_packages(tree, ()))
        )
    return LandscapeStructure(applications=applications).validate()


def _build_packages(tree: dict, path: tuple[str, ...]) -> list[Package]:
    packages = []
    for name in sorted(k for k in tree if k != "_classes"):
        sub_tree = tree[name]
        sub_path = path + (name,)
        classes = []
        for cls_name in sorted(sub_tree.get("_classes", {})):
            methods, traces = sub_tree["_classes"][cls_name]
            fqn = ".".join(sub_path + (cls_name,)) if sub_path != (DEFAULT_PACKAGE,) else cls_name
            classes.append(
                Class(
                    name=cls_name,
                    fqn=fqn,
                    instance_count=len(traces),
                    methods=[Method(m, loc=1) for m in sorted(methods)],
                )
            )
        packages.append(
            Package(
                name=name,
                sub_packages=_build_packages(sub_tree, sub_path),
                classes=classes,
            )
        )
    return packages


@dataclass
class CommunicationAggregate:
    """Aggregated links plus a diagnostics summary of skipped span pairs."""

    links: list[CommunicationLink] = field(default_factory=list)
    unknown_parent: int = 0
    unresolved_class: int = 0

    def diagnostics(self) -> dict[str, int]:
        return {
            "unknownParent": self.unknown_parent,
            "unresolvedClass": self.unresolved_class,
        }


def aggregate_communication(
    spans: list[Span], structure: LandscapeStructure
) -> CommunicationAggregate:
    """Accumulate parent->child span pairs into class-to-class links.

    Pairs within the same class contribute nothing; pairs whose parent
    span id is unknown, or whose class cannot be resolved against the
    structure, are skipped and counted in the diagnostics summary.
    """
    known = set(structure.class_index())
    by_id = {(s.trace_id, s.span_id): s for s in spans}
    result = CommunicationAggregate()

    def class_of(span: Span) -> str | None:
        path, cls_name, _ = split_fqn(span.fqn)
        plain = ".".join(path + (cls_name,)) if path else cls_name
        if plain in known:
            return plain
        namespaced = ".".join((span.service_name,) + path + (cls_name,))
        if namespaced in known:
            return namespaced
        return None

    counts: dict[tuple[str, str], int] = {}
    for span in spans:
        if span.parent_span_id is None:
            continue
        parent = by_id.get((span.trace_id, span.parent_span_id))
        if parent is None:
            result.unknown_parent += 1
            continue
        source = class_of(parent)
        target = class_of(span)
        if source is None or target is None:
            result.unresolved_class += 1
            continue
        if source == target:
            continue
        counts[(source, target)] = counts.get((source, target), 0) + 1

    result.links = [
        CommunicationLink(source_fqn=s, target_fqn=t, request_count=n)
        for (s, t), n in sorted(counts.items())
    ]
    return result


# ---------------------------------------------------------------------------
# Synthetic landscapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticParams:
    apps: int = 6
    packages_per_app: int = 2
    depth: int = 2
    classes_per_package: int = 3
    methods_per_class: int = 3
    link_density: float = 0.05

    def validate(self) -> "SyntheticParams":
        for name in ("apps", "packages_per_app", "depth", "classes_per_package", "methods_per_class"):
            if getattr(self, name) < 1:
                raise ValidationError(f"synthetic parameter {name} must be >= 1")
        if not 0.0 <= self.link_density <= 1.0:
            raise ValidationError("link_density must be within [0, 1]")
        return self


def generate_synthetic(seed: int, params: SyntheticParams) -> LandscapeStructure:
    """Generate a deterministic landscape for a seed.

    Shape: each application svcNN owns a root package named after itself,
    holding `packages_per_app` module subtrees; each module is a chain of
    `depth` packages and every chain package carries
    `classes_per_package` classes with `methods_per_class` methods.
    `link_density` of all ordered cross-class pairs become links with a
    pseudorandom request count in [1, 1000].
    """
    params.validate()
    rng = random.Random(seed)
    applications = []
    fqns: list[str] = []
    for a in range(params.apps):
        app_name = f"svc{a:02d}"
        root = Package(name=app_name)
        for j in range(params.packages_per_app):
            parent = root
            path = [app_name]
            for k in range(params.depth):
                pkg = Package(name=f"mod{j}" if k == 0 else f"sub{k}")
                parent.sub_packages.append(pkg)
                parent = pkg
                path.append(pkg.name)
                for c in range(params.classes_per_package):
                    cls_name = f"Cls{c}"
                    fqn = ".".join(path + [cls_name])
                    methods = [
                        Method(f"op{m}", loc=rng.randint(1, 200))
                        for m in range(params.methods_per_class)
                    ]
                    parent.classes.append(
                        Class(
                            name=cls_name,
                            fqn=fqn,
                            instance_count=rng.randint(0, 50),
                            methods=methods,
                        )
                    )
                    fqns.append(fqn)
        applications.append(Application(name=app_name, root_packages=[root]))

    n = len(fqns)
    total_pairs = n * (n - 1)
    link_count = round(params.link_density * total_pairs)
    links = []
    if link_count:
        for idx in sorted(rng.sample(range(total_pairs), link_count)):
            a, r = divmod(idx, n - 1)
            b = r if r < a else r + 1
            links.append(
                CommunicationLink(
                    source_fqn=fqns[a],
                    target_fqn=fqns[b],
                    request_count=rng.randint(1, 1000),
                )
            )
        links.sort(key=lambda l: (l.source_fqn, l.target_fqn))
    return LandscapeStructure(applications=applications, communications=links).validate()


def spans_from_structure(structure: LandscapeStructure) -> list[Span]:
    """Emit a deterministic span log that reconstructs to `structure`.

    Every class gets one trace covering all of its methods (parent and
    children share the class, so no link arises), and every communication
    link gets one trace whose parent span fans out into requestCount
    child spans on the target class.
    """
    spans: list[Span] = []
    counter = 0

    def next_id(prefix: str) -> str:
        nonlocal counter
        counter += 1
        return f"{prefix}{counter}"

    app_of: dict[str, str] = {}
    first_method: dict[str, str] = {}
    for app, path, cls in structure.iter_classes():
        app_of[cls.fqn] = app.name
        method_names = [m.name for m in cls.methods] or ["run"]
        first_method[cls.fqn] = method_names[0]
        trace = next_id("t")
        root_id = next_id("s")
        t0 = len(spans) * 10
        spans.append(
            Span(trace, root_id, None, t0, t0 + 9, app.name, f"{cls.fqn}.{method_names[0]}")
        )
        for m in method_names[1:]:
            spans.append(
                Span(trace, next_id("s"), root_id, t0 + 1, t0 + 8, app.name, f"{cls.fqn}.{m}")
            )

    for link in structure.communications:
        trace = next_id("t")
        parent_id = next_id("s")
        t0 = len(spans) * 10
        spans.append(
            Span(
                trace, parent_id, None, t0, t0 + 9,
                app_of[link.source_fqn],
                f"{link.source_fqn}.{first_method[link.source_fqn]}",
            )
        )
        for _ in range(link.request_count):
            spans.append(
                Span(
                    trace, next_id("s"), parent_id, t0 + 1, t0 + 8,
                    app_of[link.target_fqn],
                    f"{link.target_fqn}.{first_method[link.target_fqn]}",
                )
            )
    return spans


def spans_to_jsonl(spans: list[Span]) -> str:
    return "\n".join(canonical_json(s.to_dict()) for s in spans) + "\n"


def merge_structure(base: LandscapeStructure, overrides: LandscapeStructure) -> LandscapeStructure:
    """Overlay metric data (loc, instance counts) from a structure file.

    Classes are matched by fqn, methods by name; hierarchy always comes
    from `base`. Used to refine trace-derived defaults with measured data.
    """
    override_classes = {fqn: cls for fqn, (_, _, cls) in overrides.class_index().items()}
    for _, _, cls in base.iter_classes():
        src = override_classes.get(cls.fqn)
        if src is None:
            continue
        cls.instance_count = src.instance_count
        loc_by_name = {m.name: m.loc for m in src.methods}
        for method in cls.methods:
            if method.name in loc_by_name:
                method.loc = loc_by_name[method.name]
    return base.validate()
