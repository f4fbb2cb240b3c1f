"""IP-to-country and IP-to-origin-AS resolution via longest-prefix match.

Tables are immutable after load. Private, loopback, link-local, multicast,
reserved, and unspecified addresses never resolve, whatever the tables say:
router interfaces in those ranges carry no geographic meaning.

Input formats (UTF-8, header row required):
  geo table    csv: cidr,iso2
  origin table csv: cidr,asn
  AS registry  csv: asn,iso2
"""

from __future__ import annotations

import csv
import ipaddress
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ConflictError, ParseError


def _is_special(ip) -> bool:
    return (
        ip.is_private
        or ip.is_loopback
        or ip.is_link_local
        or ip.is_multicast
        or ip.is_reserved
        or ip.is_unspecified
    )


class PrefixTable:
    """Longest-prefix-match lookup from CIDR prefixes to opaque values.

    IPv4 and IPv6 prefixes coexist; a lookup only consults its own family.
    Lookup cost is one dict probe per populated prefix length.
    """

    def __init__(self):
        # version -> prefix length -> {shifted network int: value}
        self._buckets: dict[int, dict[int, dict[int, object]]] = {4: {}, 6: {}}
        self._lengths: dict[int, list[int]] = {4: [], 6: []}
        self._count = 0

    @classmethod
    def from_rows(cls, rows, on_conflict: str = "error") -> "PrefixTable":
        """Build from (cidr, value) pairs.

        on_conflict: 'error' raises ConflictError when one prefix maps to two
        values; 'first_wins' keeps the earliest row (multi-origin tolerance).
        """
        table = cls()
        for cidr, value in rows:
            table._insert(str(cidr), value, on_conflict)
        return table

    def _insert(self, cidr, value, on_conflict):
        net = ipaddress.ip_network(cidr)  # strict: host bits set is a data bug
        version = net.version
        plen = net.prefixlen
        bucket = self._buckets[version].setdefault(plen, {})
        key = int(net.network_address) >> (net.max_prefixlen - plen) if plen else 0
        if key in bucket:
            if bucket[key] != value:
                if on_conflict == "first_wins":
                    return
                raise ConflictError(f"prefix {net} maps to both {bucket[key]!r} and {value!r}")
            return
        bucket[key] = value
        self._count += 1
        if plen not in self._lengths[version]:
            self._lengths[version].append(plen)
            self._lengths[version].sort(reverse=True)

    def lookup(self, ip):
        """Value of the longest prefix containing ip, or None."""
        addr = ipaddress.ip_address(ip) if isinstance(ip, str) else ip
        ip_int = int(addr)
        maxlen = addr.max_prefixlen
        buckets = self._buckets[addr.version]
        for plen in self._lengths[addr.version]:
            key = ip_int >> (maxlen - plen) if plen else 0
            found = buckets[plen].get(key)
            if found is not None:
                return found
        return None

    def __len__(self):
        return self._count


def lpm_lookup(table: PrefixTable, ip):
    return table.lookup(ip)


@dataclass(frozen=True)
class ASRegistry:
    """AS number -> iso2 of legal registration."""

    mapping: Mapping[int, str]

    def legal_country(self, asn):
        return self.mapping.get(asn)


@dataclass(frozen=True)
class HopResolution:
    ip: str
    phys_country: str | None
    asn: int | None
    legal_country: str | None


def resolve_hop(geo: PrefixTable, origin: PrefixTable, registry: ASRegistry, ip) -> HopResolution:
    """Resolve one hop address; unknowns are values, never guessed."""
    addr = ipaddress.ip_address(ip) if isinstance(ip, str) else ip
    if _is_special(addr):
        return HopResolution(ip=str(addr), phys_country=None, asn=None, legal_country=None)
    phys = geo.lookup(addr)
    asn = origin.lookup(addr)
    legal = registry.legal_country(asn) if asn is not None else None
    return HopResolution(ip=str(addr), phys_country=phys, asn=asn, legal_country=legal)


def _read_rows(path, expected_header):
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as e:
        raise ParseError(str(path), 0, f"cannot open: {e.strerror}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(str(path), 1, "missing header row") from None
        if [h.strip().lower() for h in header] != list(expected_header):
            raise ParseError(str(path), 1, f"expected header {','.join(expected_header)!r}, got {','.join(header)!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected_header):
                raise ParseError(str(path), line_no, f"expected {len(expected_header)} fields, got {len(row)}")
            yield line_no, [c.strip() for c in row]


def _parse_cidr(text, path, line_no):
    try:
        return ipaddress.ip_network(text)
    except ValueError as e:
        raise ParseError(str(path), line_no, f"bad prefix {text!r}: {e}") from None


def load_geo_table(path) -> PrefixTable:
    table = PrefixTable()
    for line_no, (cidr, iso2) in _read_rows(path, ("cidr", "iso2")):
        net = _parse_cidr(cidr, path, line_no)
        if len(iso2) != 2 or not iso2.isalpha() or not iso2.isupper():
            raise ParseError(str(path), line_no, f"bad iso2 code {iso2!r}")
        table._insert(str(net), iso2, "error")
    return table


def load_origin_table(path, on_conflict: str = "error") -> PrefixTable:
    table = PrefixTable()
    for line_no, (cidr, asn) in _read_rows(path, ("cidr", "asn")):
        net = _parse_cidr(cidr, path, line_no)
        try:
            asn_i = int(asn)
        except ValueError:
            raise ParseError(str(path), line_no, f"non-integer asn {asn!r}") from None
        if asn_i <= 0:
            raise ParseError(str(path), line_no, f"asn must be positive, got {asn_i}")
        table._insert(str(net), asn_i, on_conflict)
    return table


def load_as_registry(path) -> ASRegistry:
    mapping: dict[int, str] = {}
    for line_no, (asn, iso2) in _read_rows(path, ("asn", "iso2")):
        try:
            asn_i = int(asn)
        except ValueError:
            raise ParseError(str(path), line_no, f"non-integer asn {asn!r}") from None
        if asn_i <= 0:
            raise ParseError(str(path), line_no, f"asn must be positive, got {asn_i}")
        if len(iso2) != 2 or not iso2.isalpha() or not iso2.isupper():
            raise ParseError(str(path), line_no, f"bad iso2 code {iso2!r}")
        if asn_i in mapping and mapping[asn_i] != iso2:
            raise ConflictError(f"{path}: AS{asn_i} registered to both {mapping[asn_i]} and {iso2}")
        mapping[asn_i] = iso2
    return ASRegistry(mapping=mapping)


@dataclass(frozen=True)
class Enrichment:
    """The three lookup tables a pipeline run needs, bundled.

    dated_origins optionally supplies per-day origin snapshots as
    (start_ts, end_ts, table) triples with end exclusive; records falling in
    a range resolve against that snapshot, everything else against origin.
    """

    geo: PrefixTable
    origin: PrefixTable
    registry: ASRegistry
    dated_origins: tuple[tuple[float, float, PrefixTable], ...] = ()

    def origin_for(self, timestamp) -> PrefixTable:
        for start, end, table in self.dated_origins:
            if start <= timestamp < end:
                return table
        return self.origin

    def resolve(self, ip, timestamp=None) -> HopResolution:
        origin = self.origin if timestamp is None else self.origin_for(timestamp)
        return resolve_hop(self.geo, origin, self.registry, ip)
