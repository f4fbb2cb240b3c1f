"""Traceroute records to compressed (country, ASN) tuple paths and verdicts.

Hops whose physical country or origin AS is unknown are dropped and counted,
which makes every verdict a lower bound on the countries a path exposes
traffic to. Consecutive duplicate (country, ASN) tuples compress to one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterable, Iterator

from .enrichment import Enrichment
from .errors import ParseError
from .normality import NormalSet, PairCache, PathVerdict, classify
from .world import WorldModel

SKIP_REASONS = ("unresolved_source", "unresolved_destination", "empty_path", "unclassifiable_pair")


@dataclass(frozen=True)
class Hop:
    ttl: int
    ip: str | None  # None when the router never answered


@dataclass(frozen=True)
class TracerouteRecord:
    src_ip: str
    dst_ip: str
    timestamp: float
    hops: tuple[Hop, ...]


@dataclass(frozen=True)
class Skip:
    """A record the pipeline set aside instead of classifying."""

    reason: str

    def __post_init__(self):
        if self.reason not in SKIP_REASONS:
            raise ValueError(f"unknown skip reason {self.reason!r}")


@dataclass(frozen=True)
class TupleHop:
    phys_country: str
    asn: int
    legal_country: str | None


@dataclass(frozen=True)
class TuplePath:
    src_country: str
    dst_country: str
    hops: tuple[TupleHop, ...]
    dropped_hops: int


@dataclass(frozen=True)
class PathClassification:
    physical: PathVerdict
    legal: PathVerdict
    union: PathVerdict
    union_added_countries: int
    tuple_len: int
    as_count: int


def parse_traceroute_line(line: str, source: str = "<line>", line_no: int = 1) -> TracerouteRecord:
    """One JSON object per line: src_ip, dst_ip, timestamp, hops [{ttl, ip|null}]."""
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(source, line_no, f"invalid JSON at column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(source, line_no, "expected a JSON object")
    for key in ("src_ip", "dst_ip", "timestamp", "hops"):
        if key not in doc:
            raise ParseError(source, line_no, f"missing field {key!r}")
    hops = []
    last_ttl = None
    for i, h in enumerate(doc["hops"]):
        if not isinstance(h, dict) or "ttl" not in h:
            raise ParseError(source, line_no, f"hop {i}: expected an object with a ttl")
        ttl = h["ttl"]
        if not isinstance(ttl, int):
            raise ParseError(source, line_no, f"hop {i}: non-integer ttl {ttl!r}")
        if last_ttl is not None and ttl <= last_ttl:
            raise ParseError(source, line_no, f"hop {i}: ttl {ttl} not strictly increasing")
        last_ttl = ttl
        ip = h.get("ip")
        if ip is not None and not isinstance(ip, str):
            raise ParseError(source, line_no, f"hop {i}: ip must be a string or null")
        hops.append(Hop(ttl=ttl, ip=ip))
    try:
        timestamp = float(doc["timestamp"])
    except (TypeError, ValueError):
        raise ParseError(source, line_no, f"non-numeric timestamp {doc['timestamp']!r}") from None
    return TracerouteRecord(src_ip=str(doc["src_ip"]), dst_ip=str(doc["dst_ip"]), timestamp=timestamp, hops=tuple(hops))


def read_traceroutes(path) -> Iterator[TracerouteRecord]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise ParseError(str(path), 0, f"cannot open: {e.strerror}") from e
    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield parse_traceroute_line(line, source=str(path), line_no=line_no)


def to_tuple_path(rec: TracerouteRecord, enrichment: Enrichment) -> TuplePath | Skip:
    """Resolve, drop, and compress one traceroute.

    dropped_hops counts responsive hops that lacked a known country or AS;
    unresponsive hops are simply absent. Endpoint countries come from the
    geolocation of src_ip and dst_ip, never from first or last hop.
    """
    if not rec.hops:
        return Skip("empty_path")
    src_country = enrichment.geo.lookup(rec.src_ip)
    if src_country is None:
        return Skip("unresolved_source")
    dst_country = enrichment.geo.lookup(rec.dst_ip)
    if dst_country is None:
        return Skip("unresolved_destination")

    resolved: list[TupleHop] = []
    dropped = 0
    for hop in rec.hops:
        if hop.ip is None:
            continue
        res = enrichment.resolve(hop.ip, rec.timestamp)
        if res.phys_country is None or res.asn is None:
            dropped += 1
            continue
        resolved.append(TupleHop(phys_country=res.phys_country, asn=res.asn, legal_country=res.legal_country))

    compressed = tuple(next(group) for _, group in groupby(resolved, key=lambda h: (h.phys_country, h.asn)))
    return TuplePath(src_country=src_country, dst_country=dst_country, hops=compressed, dropped_hops=dropped)


def classify_path(tp: TuplePath, cache: PairCache, w: WorldModel, mode: str = "population") -> PathClassification:
    """Physical, legal, and union verdicts for one tuple path.

    All three use the same normal set and the physical endpoints; the legal
    sequence keeps only hops whose registration country is known.
    """
    ns = cache.get_or_build(w, tp.src_country, tp.dst_country, mode)
    return classify_path_with(tp, ns)


def classify_path_with(tp: TuplePath, ns: NormalSet) -> PathClassification:
    phys = [h.phys_country for h in tp.hops]
    legal = [h.legal_country for h in tp.hops if h.legal_country is not None]
    physical_v = classify(ns, phys)
    legal_v = classify(ns, legal)
    union_v = classify(ns, phys + legal)
    added = (set(legal) - set(phys)) - {tp.src_country, tp.dst_country}
    return PathClassification(
        physical=physical_v,
        legal=legal_v,
        union=union_v,
        union_added_countries=len(added),
        tuple_len=len(tp.hops),
        as_count=len({h.asn for h in tp.hops}),
    )


@dataclass
class SkipLog:
    """Counts of records set aside, by reason, plus informational notes."""

    counts: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def add(self, reason: str):
        self.counts[reason] = self.counts.get(reason, 0) + 1

    def note(self, key: str):
        self.notes[key] = self.notes.get(key, 0) + 1

    def merge(self, other: "SkipLog") -> "SkipLog":
        for k, v in other.counts.items():
            self.counts[k] = self.counts.get(k, 0) + v
        for k, v in other.notes.items():
            self.notes[k] = self.notes.get(k, 0) + v
        return self

    def total(self) -> int:
        return sum(self.counts.values())


def process_stream(
    records: Iterable[TracerouteRecord],
    enrichment: Enrichment,
    cache: PairCache,
    w: WorldModel,
    *,
    mode: str = "population",
    unclassifiable_policy: str = "exclude",
    skip_log: SkipLog,
) -> Iterator[tuple[TuplePath, PathClassification]]:
    """Apply to_tuple_path then classify_path, tallying skips as they happen.

    Per-record outputs are independent, so callers may shard the input across
    workers; downstream aggregation must accept any delivery order.
    """
    if unclassifiable_policy not in ("exclude", "count_non_normal"):
        raise ValueError(f"unknown unclassifiable policy {unclassifiable_policy!r}")
    for rec in records:
        tp = to_tuple_path(rec, enrichment)
        if isinstance(tp, Skip):
            skip_log.add(tp.reason)
            continue
        ns = cache.get_or_build(w, tp.src_country, tp.dst_country, mode)
        if ns.unclassifiable:
            if unclassifiable_policy == "exclude":
                skip_log.add("unclassifiable_pair")
                continue
            skip_log.note("unclassifiable_pair_counted_non_normal")
        yield tp, classify_path_with(tp, ns)
