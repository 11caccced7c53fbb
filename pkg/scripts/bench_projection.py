#!/usr/bin/env python3
"""Projection timing across pattern/target sizes on the sample ontologies.

The matcher is exponential in the worst case; annotation-sized graphs stay
far below anything noticeable. This prints where the curve actually starts
to bend.
"""

import random
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import semiograph
from semiograph import workspace as w
from semiograph.operations import project
from strategies import random_graph, random_pattern_for


def main() -> None:
    ws = w.load_workspace(semiograph.sample_workspace("memomines"))
    rng = random.Random(2)
    print(f"{'target':>8} {'pattern':>8} {'median ms':>10} {'worst ms':>10} {'morphisms':>10}")
    for t_size in (8, 16, 24, 32):
        for p_size in (2, 4, 6):
            times, counts = [], []
            for _ in range(30):
                target = random_graph(rng, ws.ontology, max_nodes=t_size, max_edges=t_size + 4,
                                      min_nodes=max(1, t_size // 2))
                pattern = random_pattern_for(rng, ws.ontology, target, max_nodes=p_size)
                started = time.perf_counter()
                morphisms = project(ws.ontology, pattern, target)
                times.append((time.perf_counter() - started) * 1000)
                counts.append(len(morphisms))
            print(f"{t_size:>8} {p_size:>8} {statistics.median(times):>10.2f} "
                  f"{max(times):>10.2f} {max(counts):>10}")


if __name__ == "__main__":
    main()
