#!/usr/bin/env python3
"""Compare population-biased and border-based normal sets for country pairs.

Runs both hull constructions for every ordered-independent pair in the world
model and prints the countries that only the border hull admits. On the
bundled data the CN-MN pair shows the motivating contrast: the border hull
drags in India and Vietnam, the population hull does not.

Usage:
    python scripts/compare_hull_modes.py \
        --cities data/world/cities.csv \
        --borders data/world/borders.geojson \
        --regions data/world/regions.csv [--pair CN MN]
"""

import argparse
from itertools import combinations

from geonorm.normality import normal_set
from geonorm.world import load_world


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--cities", required=True)
    parser.add_argument("--borders", required=True)
    parser.add_argument("--regions", required=True)
    parser.add_argument("--boundary-step", type=float, default=0.05)
    parser.add_argument("--pair", nargs=2, metavar=("SRC", "DST"), help="restrict to one pair")
    args = parser.parse_args()

    w = load_world(args.cities, args.borders, args.regions)
    pairs = [tuple(args.pair)] if args.pair else list(combinations(sorted(w.countries), 2))

    for src, dst in pairs:
        population = normal_set(w, src, dst, "population", boundary_step=args.boundary_step)
        border = normal_set(w, src, dst, "border", boundary_step=args.boundary_step)
        if population.unclassifiable or border.unclassifiable:
            print(f"{src}-{dst}: unclassifiable (spans more than a hemisphere)")
            continue
        extra = sorted(border.countries - population.countries)
        lost = sorted(population.countries - border.countries)
        print(f"{src}-{dst}:")
        print(f"  population ({len(population.countries)}): {', '.join(sorted(population.countries))}")
        print(f"  border     ({len(border.countries)}): {', '.join(sorted(border.countries))}")
        if extra:
            print(f"  border-only additions: {', '.join(extra)}")
        if lost:
            # possible when a city sits outside its own country's polygons
            print(f"  population-only: {', '.join(lost)}")


if __name__ == "__main__":
    main()
