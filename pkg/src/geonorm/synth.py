"""Deterministic synthetic traceroute corpora over the bundled test world.

The test world is four countries in a west-to-east lane (AA, AB, AC, AD)
plus two off-lane countries (BE north, BF south). Lane-following paths come
out geographically normal; detours through the off-lane countries do not.
Two ASes are legally registered away from their infrastructure (AS209 in
BE, AS509 in BF), which makes legal and union verdicts diverge from the
physical ones. Everything is driven by a seeded RNG, so a (seed, count)
pair always produces byte-identical output.
"""

from __future__ import annotations

import json
import random

LANE = ("AA", "AB", "AC", "AD")
OFF_LANE = ("BE", "BF")

# country -> first octet of its /8
NET = {"AA": 20, "AB": 30, "AC": 40, "AD": 50, "BE": 60, "BF": 70}

# country -> [(asn, second octet of its originated /16)]
ASNS = {
    "AA": [(101, 1), (102, 2)],
    "AB": [(201, 1), (202, 2), (209, 9)],  # AS209 legally in BE
    "AC": [(301, 1), (302, 2)],
    "AD": [(401, 1)],
    "BE": [(501, 1), (509, 9)],  # AS509 legally in BF
    "BF": [(601, 1)],
}


def _ip(rng: random.Random, country: str, subnet: int) -> str:
    return f"{NET[country]}.{subnet}.{rng.randint(0, 255)}.{rng.randint(1, 254)}"


def _asn_hop(rng: random.Random, country: str) -> str:
    _, subnet = rng.choice(ASNS[country])
    return _ip(rng, country, subnet)


def _country_chain(rng: random.Random, src: str, dst: str) -> list[str]:
    if src in LANE and dst in LANE:
        i, j = LANE.index(src), LANE.index(dst)
        chain = list(LANE[i : j + 1]) if i <= j else list(reversed(LANE[j : i + 1]))
    elif src in OFF_LANE and dst in OFF_LANE:
        chain = [src, "AB", dst] if src != dst else [src]
    elif src in OFF_LANE:
        chain = [src, "AB"] + _country_chain(rng, "AB", dst)[1:]
    else:
        chain = _country_chain(rng, src, "AB") + [dst]
    if len(chain) > 2 and rng.random() < 0.35:
        chain.insert(rng.randint(1, len(chain) - 1), rng.choice(OFF_LANE))
    return chain


def generate_records(count: int, seed: int = 0):
    """Yield traceroute record dicts ready for NDJSON serialization."""
    rng = random.Random(seed)
    countries = LANE + OFF_LANE
    for i in range(count):
        roll = rng.random()
        if roll < 0.12:
            src = dst = rng.choice(countries)
        else:
            src, dst = rng.sample(countries, 2)
        src_ip = _asn_hop(rng, src)
        dst_ip = _asn_hop(rng, dst)

        fate = rng.random()
        if fate < 0.02:
            dst_ip = f"99.{rng.randint(0, 255)}.{rng.randint(0, 255)}.{rng.randint(1, 254)}"
        elif fate < 0.03:
            src_ip = f"99.{rng.randint(0, 255)}.{rng.randint(0, 255)}.{rng.randint(1, 254)}"
        elif fate < 0.04:
            yield {"src_ip": src_ip, "dst_ip": dst_ip, "timestamp": 1514764800 + i, "hops": []}
            continue

        hop_ips: list[str | None] = []
        for country in _country_chain(rng, src, dst):
            for _ in range(rng.randint(1, 2)):
                hop_ips.append(_asn_hop(rng, country))
        # clutter that the pipeline must shrug off
        if rng.random() < 0.10:
            hop_ips.insert(rng.randint(0, len(hop_ips)), None)
        if rng.random() < 0.10:
            hop_ips.insert(rng.randint(0, len(hop_ips)), f"99.1.{rng.randint(0, 255)}.{rng.randint(1, 254)}")
        if rng.random() < 0.08:
            hop_ips.insert(rng.randint(0, len(hop_ips)), f"10.0.{rng.randint(0, 255)}.{rng.randint(1, 254)}")
        if rng.random() < 0.07:
            # geolocates through the /8 but no origin AS is known
            hop_ips.insert(rng.randint(0, len(hop_ips)), _ip(rng, rng.choice(countries), 5))

        yield {
            "src_ip": src_ip,
            "dst_ip": dst_ip,
            "timestamp": 1514764800 + i,
            "hops": [{"ttl": t + 1, "ip": ip} for t, ip in enumerate(hop_ips)],
        }


def write_corpus(path, count: int, seed: int = 0) -> int:
    written = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in generate_records(count, seed):
            fh.write(json.dumps(rec) + "\n")
            written += 1
    return written
