"""Great-circle primitives and spherical convex hulls.

Everything here works on unit vectors; longitude wraparound exists only at
the GeoPoint boundary. Hulls are built by gnomonic projection onto the
tangent plane at the point cloud's spherical centroid: the projection maps
great circles to straight lines, so a planar convex hull of the projected
points is exactly the spherical convex hull, provided every point lies in
the open hemisphere around the projection center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .errors import EmptyInput, HemisphereViolation, ValidationError

# Angular slack (radians) for containment boundary decisions. Well below
# city-to-city spacing (~1e-4 rad), so tolerances cannot flip any outcome
# at country-level granularity.
ANGLE_TOL = 1e-7

# Unit-norm slack for UnitVec3 and chord-distance slack for input dedup.
NORM_TOL = 1e-9
DEDUP_TOL = 1e-9

# Default spacing of hull-edge samples, degrees of arc (~5.5 km).
DEFAULT_BOUNDARY_STEP_DEG = 0.05


def _normalize_lon(lon: float) -> float:
    """Map any longitude into (-180, +180]."""
    wrapped = ((lon - 180.0) % -360.0) + 180.0
    # -180.0 folds onto +180.0 so the interval stays half-open
    return 180.0 if wrapped == -180.0 else wrapped


@dataclass(frozen=True)
class GeoPoint:
    """A position on the sphere in degrees. lat in [-90, 90], lon in (-180, 180]."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise ValidationError(f"latitude {self.lat} outside [-90, 90]")
        object.__setattr__(self, "lon", _normalize_lon(float(self.lon)))
        object.__setattr__(self, "lat", float(self.lat))


@dataclass(frozen=True)
class UnitVec3:
    """A point on the unit sphere as a cartesian 3-vector."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > 2.0 * NORM_TOL:
            raise ValidationError(f"vector ({self.x}, {self.y}, {self.z}) is not unit length")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _norm(a):
    return math.sqrt(_dot(a, a))


def _normalized(a):
    n = _norm(a)
    if n == 0.0:
        raise ValidationError("cannot normalize the zero vector")
    return (a[0] / n, a[1] / n, a[2] / n)


def _angle(a, b):
    # atan2 form stays accurate for both tiny and near-pi separations
    return math.atan2(_norm(_cross(a, b)), _dot(a, b))


def geo_to_unit(p: GeoPoint) -> UnitVec3:
    """Standard spherical embedding: (lat 0, lon 0) -> (1, 0, 0), north pole -> (0, 0, 1)."""
    lat = math.radians(p.lat)
    lon = math.radians(p.lon)
    cos_lat = math.cos(lat)
    return UnitVec3(cos_lat * math.cos(lon), cos_lat * math.sin(lon), math.sin(lat))


def unit_to_geo(v: UnitVec3) -> GeoPoint:
    lat = math.degrees(math.asin(max(-1.0, min(1.0, v.z))))
    lon = math.degrees(math.atan2(v.y, v.x)) if (v.x != 0.0 or v.y != 0.0) else 0.0
    return GeoPoint(lat, lon)


def angle_between(a: UnitVec3, b: UnitVec3) -> float:
    """Angular separation in radians."""
    return _angle(a.as_tuple(), b.as_tuple())


def _slerp(a, b, t, ang=None):
    ang = _angle(a, b) if ang is None else ang
    if ang < 1e-15:
        return a
    s = math.sin(ang)
    ca = math.sin((1.0 - t) * ang) / s
    cb = math.sin(t * ang) / s
    return (ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2])


def _tangent_basis(center):
    """Orthonormal (e1, e2) spanning the plane tangent at center, with e1 x e2 = center.

    That orientation makes counterclockwise in the projected plane equal
    counterclockwise on the sphere as seen from outside.
    """
    ax = min(range(3), key=lambda i: abs(center[i]))
    axis = tuple(1.0 if i == ax else 0.0 for i in range(3))
    e1 = _normalized(_cross(center, axis))
    e2 = _cross(center, e1)
    return e1, e2


def _gnomonic(center, e1, e2, v):
    d = _dot(center, v)
    return (_dot(e1, v) / d, _dot(e2, v) / d)


def _planar_hull(points_2d):
    """Monotone chain; returns indices of hull vertices in counterclockwise order.

    Strictly convex: collinear middle points are dropped.
    """
    order = sorted(range(len(points_2d)), key=lambda i: points_2d[i])

    def cross(o, a, b):
        (ox, oy), (ax, ay), (bx, by) = points_2d[o], points_2d[a], points_2d[b]
        return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)

    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= 0.0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= 0.0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class SphericalHull:
    """Convex region on the sphere.

    vertices form a ring, counterclockwise as seen from outside the sphere;
    degenerate point sets collapse to a single-vertex "point" hull or a
    two-vertex "arc" hull whose containment accepts only points on the arc.
    """

    vertices: tuple[UnitVec3, ...]
    centroid: UnitVec3
    degenerate_kind: str  # "polygon" | "arc" | "point"

    @cached_property
    def _vertex_tuples(self):
        return tuple(v.as_tuple() for v in self.vertices)

    @cached_property
    def _edge_normals(self):
        """Normalized a x b per directed edge; interior satisfies dot(n, p) >= 0."""
        vts = self._vertex_tuples
        n = len(vts)
        return tuple(_normalized(_cross(vts[i], vts[(i + 1) % n])) for i in range(n))


def _dedup(vectors):
    kept: list[tuple[float, float, float]] = []
    for v in vectors:
        for k in kept:
            dx, dy, dz = v[0] - k[0], v[1] - k[1], v[2] - k[2]
            if dx * dx + dy * dy + dz * dz <= DEDUP_TOL * DEDUP_TOL:
                break
        else:
            kept.append(v)
    return kept


def _widest_pair(vectors):
    best = (vectors[0], vectors[0])
    best_dot = 2.0
    for i, a in enumerate(vectors):
        for b in vectors[i + 1 :]:
            d = _dot(a, b)
            if d < best_dot:
                best_dot = d
                best = (a, b)
    return best, best_dot


def spherical_convex_hull(points: Sequence[GeoPoint]) -> SphericalHull:
    """Minimal convex spherical polygon containing all points.

    Raises EmptyInput when points is empty and HemisphereViolation when the
    deduplicated set does not fit in the open hemisphere around its
    normalized vector mean (witnessed by the widest-separated pair).
    """
    if not points:
        raise EmptyInput("cannot build a hull from zero points")
    vecs = _dedup([geo_to_unit(p).as_tuple() for p in points])

    if len(vecs) == 1:
        v = UnitVec3(*vecs[0])
        return SphericalHull(vertices=(v,), centroid=v, degenerate_kind="point")

    mean = (
        sum(v[0] for v in vecs) / len(vecs),
        sum(v[1] for v in vecs) / len(vecs),
        sum(v[2] for v in vecs) / len(vecs),
    )
    if _norm(mean) < 1e-9 or min(_dot(mean, v) for v in vecs) <= 1e-9 * _norm(mean):
        (a, b), _ = _widest_pair(vecs)
        witness = (unit_to_geo(UnitVec3(*a)), unit_to_geo(UnitVec3(*b)))
        raise HemisphereViolation(witness, math.degrees(_angle(a, b)))
    center = _normalized(mean)

    if len(vecs) == 2:
        ring = (UnitVec3(*vecs[0]), UnitVec3(*vecs[1]))
        return SphericalHull(vertices=ring, centroid=UnitVec3(*center), degenerate_kind="arc")

    e1, e2 = _tangent_basis(center)
    plane = [_gnomonic(center, e1, e2, v) for v in vecs]
    idx = _planar_hull(plane)
    if len(idx) == 2:
        ring = tuple(UnitVec3(*vecs[i]) for i in idx)
        return SphericalHull(vertices=ring, centroid=UnitVec3(*center), degenerate_kind="arc")
    ring = tuple(UnitVec3(*vecs[i]) for i in idx)
    return SphericalHull(vertices=ring, centroid=UnitVec3(*center), degenerate_kind="polygon")


def _on_arc(p, a, b, tol=ANGLE_TOL):
    """True when p lies within tol of the minor great-circle arc from a to b."""
    n = _cross(a, b)
    nn = _norm(n)
    if nn < 1e-15:
        # a and b coincide; the arc degenerates to a point
        return _angle(p, a) <= tol
    n = (n[0] / nn, n[1] / nn, n[2] / nn)
    if abs(_dot(n, p)) > tol:
        return False
    # inside the lune between the half-planes at a and b
    if _dot(_cross(n, a), p) >= -tol and _dot(_cross(b, n), p) >= -tol:
        return True
    return _angle(p, a) <= tol or _angle(p, b) <= tol


def _hull_contains_vec(h: SphericalHull, p) -> bool:
    vts = h._vertex_tuples
    if h.degenerate_kind == "point":
        return _angle(p, vts[0]) <= ANGLE_TOL
    if h.degenerate_kind == "arc":
        return _on_arc(p, vts[0], vts[1])
    return all(_dot(n, p) >= -ANGLE_TOL for n in h._edge_normals)


def hull_contains(h: SphericalHull, p: GeoPoint) -> bool:
    """True iff p is inside or on the boundary of h (tolerance ANGLE_TOL radians)."""
    return _hull_contains_vec(h, geo_to_unit(p).as_tuple())


def hull_boundary_samples(h: SphericalHull, step: float = DEFAULT_BOUNDARY_STEP_DEG) -> list[GeoPoint]:
    """Points along every hull edge at angular spacing <= step (degrees), vertices included."""
    if step <= 0.0:
        raise ValidationError(f"sampling step must be positive, got {step}")
    step_rad = math.radians(step)
    vts = h._vertex_tuples

    if h.degenerate_kind == "point":
        return [unit_to_geo(h.vertices[0])]
    if h.degenerate_kind == "arc":
        a, b = vts
        ang = _angle(a, b)
        segs = max(1, math.ceil(ang / step_rad - 1e-9))
        return [unit_to_geo(UnitVec3(*_normalized(_slerp(a, b, i / segs, ang)))) for i in range(segs + 1)]

    out: list[GeoPoint] = []
    n = len(vts)
    for i in range(n):
        a, b = vts[i], vts[(i + 1) % n]
        ang = _angle(a, b)
        segs = max(1, math.ceil(ang / step_rad - 1e-9))
        # endpoint omitted: it opens the next edge
        for k in range(segs):
            out.append(unit_to_geo(UnitVec3(*_normalized(_slerp(a, b, k / segs, ang)))))
    return out


@dataclass(frozen=True)
class GeoPolygon:
    """A polygon on the sphere: one outer ring plus optional hole rings.

    Rings are closed implicitly; the first point is not repeated at the end.
    """

    rings: tuple[tuple[GeoPoint, ...], ...]

    def __post_init__(self):
        if not self.rings:
            raise ValidationError("polygon needs at least one ring")
        for ring in self.rings:
            if len({(p.lat, p.lon) for p in ring}) < 3:
                raise ValidationError("each ring needs at least 3 distinct points")

    @cached_property
    def _ring_vecs(self):
        return tuple(tuple(geo_to_unit(p).as_tuple() for p in ring) for ring in self.rings)

    @cached_property
    def _frame(self):
        """Projection center/basis, projected rings, edge normals, and a bounding cap."""
        outer = self._ring_vecs[0]
        mean = (
            sum(v[0] for v in outer) / len(outer),
            sum(v[1] for v in outer) / len(outer),
            sum(v[2] for v in outer) / len(outer),
        )
        center = _normalized(mean)
        for ring in self._ring_vecs:
            for v in ring:
                if _dot(center, v) <= 1e-9:
                    raise ValidationError("polygon ring spans a hemisphere or more")
        e1, e2 = _tangent_basis(center)
        rings_2d = tuple(
            tuple(_gnomonic(center, e1, e2, v) for v in ring) for ring in self._ring_vecs
        )
        edges = []
        for ring in self._ring_vecs:
            n = len(ring)
            for i in range(n):
                a, b = ring[i], ring[(i + 1) % n]
                c = _cross(a, b)
                nn = _norm(c)
                if nn > 1e-15:
                    edges.append((a, b, (c[0] / nn, c[1] / nn, c[2] / nn)))
        # Bounding cap over the ring vertices, slackened because a long edge
        # can bulge past its endpoints' distance to the center.
        cap_ang = max(_angle(center, v) for ring in self._ring_vecs for v in ring)
        cap_cos = math.cos(min(math.pi, cap_ang + 0.05))
        return center, e1, e2, rings_2d, tuple(edges), cap_cos


def _even_odd(rings_2d, x, y):
    inside = False
    for ring in rings_2d:
        n = len(ring)
        x1, y1 = ring[-1]
        for i in range(n):
            x2, y2 = ring[i]
            if (y1 > y) != (y2 > y):
                xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if x < xi:
                    inside = not inside
            x1, y1 = x2, y2
    return inside


def _polygon_contains_vec(poly: GeoPolygon, p) -> bool:
    center, e1, e2, rings_2d, edges, cap_cos = poly._frame
    d = _dot(center, p)
    # cheap rejection outside the slackened bounding cap
    if d < cap_cos:
        return False
    if d <= 1e-9:
        return False
    x, y = _dot(e1, p) / d, _dot(e2, p) / d
    if _even_odd(rings_2d, x, y):
        return True
    # points on any border edge (outer or hole) count as inside
    for a, b, n in edges:
        if abs(_dot(n, p)) <= ANGLE_TOL:
            if _dot(_cross(n, a), p) >= -ANGLE_TOL and _dot(_cross(b, n), p) >= -ANGLE_TOL:
                return True
            if _angle(p, a) <= ANGLE_TOL or _angle(p, b) <= ANGLE_TOL:
                return True
    return False


def polygon_contains(poly: GeoPolygon, p: GeoPoint) -> bool:
    """Spherical point-in-polygon with holes; border points count as inside."""
    return _polygon_contains_vec(poly, geo_to_unit(p).as_tuple())
