"""Lasso/rectangle selections over the 2-D layout, wordclouds, data tables.

Membership is computed server-side (the UI never decides): even-odd rule for
polygons, inclusive boundaries everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from distillery.errors import EmptySelectionError, GeometryError, UnknownPaperError
from distillery.projection import ProjectionLayout
from distillery.records import PaperId, PaperRecord
from distillery.textpipe import CleaningConfig, clean_text

_EPS = 1e-9

Point = tuple[float, float]


@dataclass
class Selection:
    selection_id: str
    geometry: dict[str, Any]
    resolved_ids: list[PaperId]
    layout_version: int = 0


def _as_point(raw: Any) -> Point:
    try:
        x, y = float(raw[0]), float(raw[1])
    except (TypeError, ValueError, IndexError) as exc:
        raise GeometryError(f"not a 2-D point: {raw!r}") from exc
    return (x, y)


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    (px, py), (ax, ay), (bx, by) = p, a, b
    if px < min(ax, bx) - _EPS or px > max(ax, bx) + _EPS:
        return False
    if py < min(ay, by) - _EPS or py > max(ay, by) + _EPS:
        return False
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    scale = max(1.0, abs(bx - ax) + abs(by - ay))
    return abs(cross) <= _EPS * scale


def point_in_polygon(p: Point, vertices: Sequence[Point]) -> bool:
    """Even-odd rule, boundary inclusive."""
    n = len(vertices)
    for i in range(n):
        if _on_segment(p, vertices[i], vertices[(i + 1) % n]):
            return True
    px, py = p
    inside = False
    j = n - 1
    for i in range(n):
        xi, yi = vertices[i]
        xj, yj = vertices[j]
        if (yi > py) != (yj > py):
            x_cross = (xj - xi) * (py - yi) / (yj - yi) + xi
            if px < x_cross:
                inside = not inside
        j = i
    return inside


def _orient(a: Point, b: Point, c: Point) -> int:
    value = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if value > _EPS:
        return 1
    if value < -_EPS:
        return -1
    return 0


def _segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return any(o == 0 and _on_segment(q, s, t) for o, q, s, t in (
        (o1, c, a, b), (o2, d, a, b), (o3, a, c, d), (o4, b, c, d)))


def validate_polygon(vertices: Sequence[Point]) -> list[Point]:
    """Reject degenerate (< 3 distinct vertices) and self-intersecting rings."""
    cleaned: list[Point] = []
    for v in vertices:
        p = _as_point(v)
        if not cleaned or p != cleaned[-1]:
            cleaned.append(p)
    if len(cleaned) > 1 and cleaned[0] == cleaned[-1]:
        cleaned.pop()
    if len(cleaned) < 3:
        raise GeometryError("a lasso polygon needs at least 3 distinct vertices")
    n = len(cleaned)
    for i in range(n):
        a, b = cleaned[i], cleaned[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share an endpoint by construction
            c, d = cleaned[j], cleaned[(j + 1) % n]
            if _segments_cross(a, b, c, d):
                raise GeometryError("self-intersecting polygon")
    return cleaned


def resolve_geometry(layout: ProjectionLayout, geometry: dict[str, Any]) -> list[PaperId]:
    """Resolve a geometry dict against layout coordinates.

    Shapes: {"type": "lasso", "vertices": [[x, y], ...]},
    {"type": "rectangle", "corners": [[x1, y1], [x2, y2]]},
    {"type": "ids", "ids": ["doi:...", ...]}.
    """
    kind = geometry.get("type")
    if kind == "ids":
        known = {str(pid): pid for pid in layout.ids}
        out = []
        for raw in geometry.get("ids", []):
            pid = known.get(str(raw))
            if pid is None:
                raise UnknownPaperError(f"{raw} is not in the current layout")
            out.append(pid)
        return sorted(set(out))
    if kind == "rectangle":
        corners = geometry.get("corners", [])
        if len(corners) != 2:
            raise GeometryError("a rectangle needs exactly two corners")
        (x1, y1), (x2, y2) = _as_point(corners[0]), _as_point(corners[1])
        lo_x, hi_x = min(x1, x2), max(x1, x2)
        lo_y, hi_y = min(y1, y2), max(y1, y2)
        return sorted(
            pid for pid, (x, y) in zip(layout.ids, layout.coords)
            if lo_x - _EPS <= x <= hi_x + _EPS and lo_y - _EPS <= y <= hi_y + _EPS)
    if kind == "lasso":
        vertices = validate_polygon(geometry.get("vertices", []))
        return sorted(
            pid for pid, (x, y) in zip(layout.ids, layout.coords)
            if point_in_polygon((float(x), float(y)), vertices))
    raise GeometryError(f"unknown geometry type {kind!r}")


# --- panels -----------------------------------------------------------------


def wordcloud(records: Iterable[PaperRecord], cleaning: CleaningConfig,
              top_n: int = 50) -> list[tuple[str, int]]:
    """Token counts over cleaned title+abstract text, descending; ties break
    lexicographically."""
    records = list(records)
    if not records:
        raise EmptySelectionError("wordcloud needs a nonempty selection")
    counts: dict[str, int] = {}
    for record in records:
        for token in clean_text(record.embedding_text(), cleaning):
            counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[: max(0, top_n)]


TABLE_COLUMNS = ("id", "title", "abstract", "year", "authors", "hop",
                 "is_core", "citation_count", "reference_count")


def data_table(records: Iterable[PaperRecord]) -> list[dict[str, Any]]:
    """One row per paper covering every known record field; id lists are
    collapsed to counts."""
    return [{
        "id": str(r.id),
        "title": r.title,
        "abstract": r.abstract,
        "year": r.year,
        "authors": list(r.authors),
        "hop": r.hop,
        "is_core": r.is_core,
        "citation_count": len(r.citation_ids),
        "reference_count": len(r.reference_ids),
    } for r in records]
