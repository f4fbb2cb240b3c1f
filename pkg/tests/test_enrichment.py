import ipaddress
import random

import pytest
from hypothesis import given, strategies as st

from geonorm.enrichment import (
    ASRegistry,
    Enrichment,
    PrefixTable,
    load_as_registry,
    load_geo_table,
    load_origin_table,
    lpm_lookup,
    resolve_hop,
)
from geonorm.errors import ConflictError, ParseError


def table(*rows, on_conflict="error"):
    return PrefixTable.from_rows(rows, on_conflict=on_conflict)


class TestLpm:
    def test_longest_match_wins(self):
        t = table(("1.2.0.0/16", "US"), ("1.2.3.0/24", "GB"))
        assert lpm_lookup(t, "1.2.3.4") == "GB"
        assert lpm_lookup(t, "1.2.9.9") == "US"

    def test_empty_table(self):
        assert lpm_lookup(PrefixTable(), "8.8.8.8") is None

    def test_miss_outside_all_prefixes(self):
        t = table(("1.2.0.0/16", "US"))
        assert lpm_lookup(t, "2.0.0.1") is None

    def test_default_route(self):
        t = table(("0.0.0.0/0", "XX"), ("9.0.0.0/8", "YY"))
        assert lpm_lookup(t, "9.1.1.1") == "YY"
        assert lpm_lookup(t, "100.1.1.1") == "XX"

    def test_duplicate_same_value_tolerated(self):
        t = table(("1.2.0.0/16", "US"), ("1.2.0.0/16", "US"))
        assert len(t) == 1

    def test_conflicting_duplicate_raises(self):
        with pytest.raises(ConflictError, match="1.2.0.0/16"):
            table(("1.2.0.0/16", "US"), ("1.2.0.0/16", "DE"))

    def test_first_wins_mode(self):
        t = table(("1.2.0.0/16", 100), ("1.2.0.0/16", 200), on_conflict="first_wins")
        assert lpm_lookup(t, "1.2.0.1") == 100

    def test_host_bits_rejected(self):
        with pytest.raises(ValueError):
            table(("1.2.3.4/16", "US"))

    def test_ipv6_supported(self):
        t = table(("2001:db8::/32", "DE"), ("2001:db8:1::/48", "FR"))
        assert lpm_lookup(t, "2001:db8:1::5") == "FR"
        assert lpm_lookup(t, "2001:db8:2::5") == "DE"
        assert lpm_lookup(t, "2001:dead::1") is None

    def test_insertion_order_irrelevant(self):
        rows = [("1.0.0.0/8", "A"), ("1.2.0.0/16", "B"), ("1.2.3.0/24", "C"), ("9.9.0.0/16", "D")]
        probes = ["1.2.3.4", "1.2.4.4", "1.9.9.9", "9.9.1.1", "4.4.4.4"]
        rng = random.Random(5)
        baseline = None
        for _ in range(10):
            rng.shuffle(rows)
            t = table(*rows)
            answers = [lpm_lookup(t, ip) for ip in probes]
            baseline = baseline or answers
            assert answers == baseline


@st.composite
def prefix_set(draw):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    n = draw(st.integers(1, 60))
    rows = {}
    for _ in range(n):
        plen = rng.randint(4, 28)
        base = rng.getrandbits(32) & (0xFFFFFFFF << (32 - plen))
        net = f"{ipaddress.IPv4Address(base)}/{plen}"
        rows.setdefault(net, f"V{len(rows)}")
    return list(rows.items())


def brute_force_lpm(rows, ip):
    addr = ipaddress.ip_address(ip)
    best, best_len = None, -1
    for cidr, value in rows:
        net = ipaddress.ip_network(cidr)
        if addr in net and net.prefixlen > best_len:
            best, best_len = value, net.prefixlen
    return best


class TestLpmOracle:
    @given(prefix_set(), st.integers(0, 2**32 - 1))
    def test_matches_brute_force(self, rows, probe):
        t = PrefixTable.from_rows(rows)
        ip = str(ipaddress.IPv4Address(probe))
        assert lpm_lookup(t, ip) == brute_force_lpm(rows, ip)

    @given(prefix_set())
    def test_hit_property(self, rows):
        # any hit must be a containing prefix with no longer containing entry
        t = PrefixTable.from_rows(rows)
        rng = random.Random(42)
        for _ in range(20):
            ip = ipaddress.IPv4Address(rng.getrandbits(32))
            got = lpm_lookup(t, str(ip))
            containing = [ipaddress.ip_network(c) for c, _ in rows if ip in ipaddress.ip_network(c)]
            if got is None:
                assert not containing
            else:
                longest = max(n.prefixlen for n in containing)
                assert got == dict(rows)[str(next(n for n in containing if n.prefixlen == longest))]


GEO = table(("20.0.0.0/8", "AA"), ("30.0.0.0/8", "DE"))
ORIGIN = table(("20.1.0.0/16", 100), ("30.0.0.0/8", 300))
REGISTRY = ASRegistry(mapping={100: "US", 300: "BG"})


class TestResolveHop:
    def test_full_resolution(self):
        res = resolve_hop(GEO, ORIGIN, REGISTRY, "20.1.0.9")
        assert (res.phys_country, res.asn, res.legal_country) == ("AA", 100, "US")

    def test_origin_miss_propagates_unknown_legal(self):
        res = resolve_hop(GEO, ORIGIN, REGISTRY, "20.2.0.9")
        assert (res.phys_country, res.asn, res.legal_country) == ("AA", None, None)

    def test_registry_miss_keeps_asn(self):
        origin = table(("20.0.0.0/8", 999))
        res = resolve_hop(GEO, origin, REGISTRY, "20.1.2.3")
        assert (res.phys_country, res.asn, res.legal_country) == ("AA", 999, None)

    @pytest.mark.parametrize(
        "ip",
        ["10.0.0.1", "172.16.5.5", "192.168.1.1", "127.0.0.1", "169.254.9.9", "224.0.0.5", "240.1.1.1", "0.0.0.0"],
    )
    def test_special_ranges_fully_unknown(self, ip):
        # even when the tables would claim to know them
        geo = table(("0.0.0.0/0", "XX"))
        origin = table(("0.0.0.0/0", 1))
        res = resolve_hop(geo, origin, ASRegistry(mapping={1: "XX"}), ip)
        assert res.phys_country is None and res.asn is None and res.legal_country is None

    def test_legal_unknown_whenever_asn_unknown(self):
        res = resolve_hop(GEO, PrefixTable(), REGISTRY, "20.1.0.9")
        assert res.asn is None and res.legal_country is None


class TestLoaders:
    def test_three_row_geo_csv(self, tmp_path):
        path = tmp_path / "geo.csv"
        path.write_text("cidr,iso2\n1.0.0.0/8,US\n2.0.0.0/8,DE\n3.3.0.0/16,FR\n")
        t = load_geo_table(path)
        assert lpm_lookup(t, "1.1.1.1") == "US"
        assert lpm_lookup(t, "2.1.1.1") == "DE"
        assert lpm_lookup(t, "3.3.1.1") == "FR"

    def test_duplicate_prefix_conflict_names_prefix(self, tmp_path):
        path = tmp_path / "geo.csv"
        path.write_text("cidr,iso2\n1.0.0.0/8,US\n1.0.0.0/8,DE\n")
        with pytest.raises(ConflictError, match="1.0.0.0/8"):
            load_geo_table(path)

    def test_origin_moas_error_vs_first_wins(self, tmp_path):
        path = tmp_path / "origin.csv"
        path.write_text("cidr,asn\n1.0.0.0/8,100\n1.0.0.0/8,200\n")
        with pytest.raises(ConflictError):
            load_origin_table(path)
        t = load_origin_table(path, on_conflict="first_wins")
        assert lpm_lookup(t, "1.1.1.1") == 100

    def test_bulgarian_legal_registration_shape(self, tmp_path):
        # one /24 originated by an AS registered elsewhere
        (tmp_path / "origin.csv").write_text("cidr,asn\n5.5.5.0/24,7777\n")
        (tmp_path / "asreg.csv").write_text("asn,iso2\n7777,BG\n")
        origin = load_origin_table(tmp_path / "origin.csv")
        registry = load_as_registry(tmp_path / "asreg.csv")
        geo = table(("5.5.5.0/24", "DE"))
        res = resolve_hop(geo, origin, registry, "5.5.5.5")
        assert res.phys_country == "DE"
        assert res.legal_country == "BG"

    def test_bad_prefix_names_line(self, tmp_path):
        path = tmp_path / "geo.csv"
        path.write_text("cidr,iso2\n1.0.0.0/8,US\nnot-a-prefix,DE\n")
        with pytest.raises(ParseError) as exc:
            load_geo_table(path)
        assert exc.value.line_no == 3

    def test_nonpositive_asn_rejected(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text("asn,iso2\n0,US\n")
        with pytest.raises(ParseError):
            load_as_registry(path)

    def test_registry_conflict(self, tmp_path):
        path = tmp_path / "reg.csv"
        path.write_text("asn,iso2\n10,US\n10,DE\n")
        with pytest.raises(ConflictError):
            load_as_registry(path)


class TestEnrichmentBundle:
    def test_dated_origin_snapshot_selected_by_timestamp(self):
        day1 = table(("20.1.0.0/16", 111))
        day2 = table(("20.1.0.0/16", 222))
        enr = Enrichment(
            geo=GEO,
            origin=table(("20.1.0.0/16", 999)),
            registry=ASRegistry(mapping={111: "US", 222: "DE", 999: "FR"}),
            dated_origins=((0, 100, day1), (100, 200, day2)),
        )
        assert enr.resolve("20.1.0.9", timestamp=50).asn == 111
        assert enr.resolve("20.1.0.9", timestamp=150).asn == 222
        assert enr.resolve("20.1.0.9", timestamp=5000).asn == 999
        assert enr.resolve("20.1.0.9").asn == 999
