"""Point-in-convex-polygon tests and ROI membership filtering."""

from __future__ import annotations

from .model import Detection, DetectionLog, RoiGroup

Point = tuple[float, float]
Polygon = tuple[tuple[float, float], ...]


def bbox_anchor(bbox: tuple[float, float, float, float]) -> Point:
    x1, _, x2, y2 = bbox
    return ((x1 + x2) / 2.0, y2)


def anchor_point(det: Detection) -> Point:
    """Bottom-center of the bbox, the point tested against ground-region ROIs."""
    return bbox_anchor(det.bbox)


def polygon_convexity_defect(poly: Polygon) -> int | None:
    """Index of the first vertex breaking convexity, or None if convex.

    Consecutive-edge cross products must share one sign (zeros allowed).
    Degenerate polygons (zero area) report vertex 0.
    """
    n = len(poly)
    sign = 0
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        cx, cy = poly[(i + 2) % n]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if cross != 0:
            s = 1 if cross > 0 else -1
            if sign == 0:
                sign = s
            elif s != sign:
                return (i + 1) % n
    if sign == 0:
        return 0  # all vertices collinear
    return None


def point_in_convex_polygon(pt: Point, poly: Polygon) -> bool:
    """Boundary-inclusive membership test, O(len(poly)).

    The point is inside iff it lies on the same side of every edge
    (cross products all >= 0 or all <= 0). Cross products within a
    relative epsilon of zero count as on-boundary, so vertices and edge
    midpoints of float polygons always test inside.
    """
    px, py = pt
    n = len(poly)
    pos = neg = False
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        t1 = (bx - ax) * (py - ay)
        t2 = (by - ay) * (px - ax)
        cross = t1 - t2
        tol = 1e-9 * (abs(t1) + abs(t2) + 1.0)
        if cross > tol:
            pos = True
        elif cross < -tol:
            neg = True
        if pos and neg:
            return False
    return True


def in_group(pt: Point, group: RoiGroup) -> bool:
    """Membership in the union of a group's polygons."""
    return any(point_in_convex_polygon(pt, poly) for poly in group.polygons)


def filter_to_roi(log: DetectionLog, group: RoiGroup) -> DetectionLog:
    """Restrict a log to detections matching the target label whose anchor lies in the group.

    Order is preserved; the output is a sub-sequence of the input.
    """
    kept = tuple(
        d
        for d in log.detections
        if d.label == group.target_label and in_group(anchor_point(d), group)
    )
    return DetectionLog(meta=log.meta, detections=kept)
