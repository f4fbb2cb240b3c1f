"""Geographically-normal country sets per (source, destination) pair.

A country is normal for a pair when any of its top cities falls inside the
pair's convex hull, or when any point sampled along the hull's edges falls
inside the country's borders (partial containment). A pair whose combined
point set spans more than a hemisphere is unclassifiable: "between" has no
meaning there, and callers must keep such paths out of normality statistics
rather than guessing.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .errors import HemisphereViolation, UnknownCountry
from .sphere import (
    DEFAULT_BOUNDARY_STEP_DEG,
    geo_to_unit,
    _hull_contains_vec,
    _polygon_contains_vec,
    hull_boundary_samples,
    spherical_convex_hull,
)
from .world import DEFAULT_CITY_LIMIT, WorldModel, country_points


@dataclass(frozen=True)
class NormalSet:
    """The geographically normal countries for an ordered (src, dst) pair.

    src and dst are always members. When unclassifiable is set the hull could
    not be built and countries holds only the endpoints.
    """

    src: str
    dst: str
    mode: str
    countries: frozenset[str]
    unclassifiable: bool = False


@dataclass(frozen=True)
class PathVerdict:
    normal: bool
    benefactors: frozenset[str]


def normal_set(
    w: WorldModel,
    src: str,
    dst: str,
    mode: str = "population",
    *,
    boundary_step: float = DEFAULT_BOUNDARY_STEP_DEG,
    city_limit: int = DEFAULT_CITY_LIMIT,
) -> NormalSet:
    """Compute the normal set for one country pair.

    Symmetric in src and dst. A country that is both source and destination
    is alone in its own normal set; no hull is built for it.
    """
    for iso2 in (src, dst):
        if iso2 not in w.countries:
            raise UnknownCountry(iso2, suggestions=_suggest(w, iso2))
    if src == dst:
        return NormalSet(src=src, dst=dst, mode=mode, countries=frozenset({src}))

    points = country_points(w, src, mode, city_limit) + country_points(w, dst, mode, city_limit)
    try:
        hull = spherical_convex_hull(points)
    except HemisphereViolation:
        return NormalSet(src=src, dst=dst, mode=mode, countries=frozenset({src, dst}), unclassifiable=True)

    members = {src, dst}
    for iso2, rec in w.countries.items():
        if iso2 in members:
            continue
        if any(_hull_contains_vec(hull, geo_to_unit(c.location).as_tuple()) for c in rec.top_cities(city_limit)):
            members.add(iso2)

    sample_vecs = [geo_to_unit(p).as_tuple() for p in hull_boundary_samples(hull, boundary_step)]
    for iso2, cb in w.borders.items():
        if iso2 in members:
            continue
        if any(_polygon_contains_vec(poly, v) for poly in cb.polygons for v in sample_vecs):
            members.add(iso2)

    return NormalSet(src=src, dst=dst, mode=mode, countries=frozenset(members))


def _suggest(w: WorldModel, iso2: str):
    import difflib

    known = sorted(set(w.countries) | set(w.borders))
    return difflib.get_close_matches(iso2, known, n=3, cutoff=0.5)


def classify(ns: NormalSet, path_countries) -> PathVerdict:
    """Label a country sequence against a normal set.

    Benefactors are the countries on the path that are neither normal nor an
    endpoint; the path is normal exactly when there are none. Unclassifiable
    pairs yield a non-normal verdict whose benefactors are every non-endpoint
    country seen.
    """
    endpoints = {ns.src, ns.dst}
    if ns.unclassifiable:
        return PathVerdict(normal=False, benefactors=frozenset(path_countries) - endpoints)
    benefactors = frozenset(path_countries) - ns.countries - endpoints
    return PathVerdict(normal=not benefactors, benefactors=benefactors)


@dataclass
class PairCache:
    """Memoizes normal sets keyed by the unordered pair and mode.

    Reads are lock-free; insertion is serialized. Concurrent duplicate builds
    of one pair are allowed and produce identical values, so last-write-wins
    is safe.
    """

    boundary_step: float = DEFAULT_BOUNDARY_STEP_DEG
    city_limit: int = DEFAULT_CITY_LIMIT
    hits: int = 0
    misses: int = 0
    _entries: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def get_or_build(self, w: WorldModel, src: str, dst: str, mode: str) -> NormalSet:
        key = (frozenset((src, dst)), mode)
        found = self._entries.get(key)
        if found is not None:
            with self._lock:
                self.hits += 1
            return found
        ns = normal_set(w, src, dst, mode, boundary_step=self.boundary_step, city_limit=self.city_limit)
        with self._lock:
            self.misses += 1
            self._entries[key] = ns
        return ns


def pair_cache_get_or_build(cache: PairCache, w: WorldModel, src: str, dst: str, mode: str) -> NormalSet:
    return cache.get_or_build(w, src, dst, mode)
