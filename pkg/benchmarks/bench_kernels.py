"""Compare the compiled and pure-Python kernels on random nets.

    python benchmarks/bench_kernels.py --nets 300 --max-nodes 12 --repeat 3
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

from netrewrite import _pykernels, kernels
from netrewrite.net import Net, connected_node_sets

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from netgen import random_net  # noqa: E402

try:
    from netrewrite import _kernels
except ImportError:
    _kernels = None

NAMES = ("traversal_code", "canonical_components", "connected_subsets")


def use(impl) -> None:
    for name in NAMES:
        setattr(kernels, name, getattr(impl, name))


def workload(nets: list[Net]) -> dict[str, float]:
    t0 = time.perf_counter()
    for n in nets:
        # fresh objects so cached certificates are not reused
        Net(n.nodes, n.links, n.frontier).cert()
    t1 = time.perf_counter()
    for n in nets:
        connected_node_sets(n)
    t2 = time.perf_counter()
    return {"cert": t1 - t0, "subsets": t2 - t1}


def grid_adjacency(w: int, h: int) -> list[int]:
    adj = []
    for y in range(h):
        for x in range(w):
            m = 0
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if 0 <= x + dx < w and 0 <= y + dy < h:
                    m |= 1 << ((y + dy) * w + x + dx)
            adj.append(m)
    return adj


def raw_subsets(impl, adjacency: list[int], repeat: int) -> tuple[float, int]:
    best, count = float("inf"), 0
    for _ in range(repeat):
        t0 = time.perf_counter()
        count = len(impl.connected_subsets(adjacency, 10**7))
        best = min(best, time.perf_counter() - t0)
    return best, count


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nets", type=int, default=300)
    ap.add_argument("--max-nodes", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    nets = [random_net(rng, args.max_nodes, "abcd", 2) for _ in range(args.nets)]
    backends = [("python", _pykernels)] + ([("cython", _kernels)] if _kernels else [])
    best: dict[str, dict[str, float]] = {}
    for name, impl in backends:
        use(impl)
        runs = [workload(nets) for _ in range(args.repeat)]
        best[name] = {k: min(r[k] for r in runs) for k in runs[0]}

    print(f"{args.nets} nets, up to {args.max_nodes} nodes, best of {args.repeat}")
    print(f"{'backend':<8} {'cert s':>9} {'subsets s':>10}")
    for name, t in best.items():
        print(f"{name:<8} {t['cert']:>9.3f} {t['subsets']:>10.3f}")
    if "cython" in best:
        for k in ("cert", "subsets"):
            print(f"speedup {k}: {best['python'][k] / best['cython'][k]:.1f}x")
    else:
        print("compiled extension not built; only the Python backend was timed")

    # the enumeration alone, on a grid dense enough to dominate conversion costs
    adjacency = grid_adjacency(5, 4)
    print("\nraw connected_subsets on a 5x4 grid")
    raw = {name: raw_subsets(impl, adjacency, args.repeat) for name, impl in backends}
    for name, (t, count) in raw.items():
        print(f"{name:<8} {t:>9.4f} s  ({count} sets)")
    if "cython" in raw:
        print(f"speedup: {raw['python'][0] / raw['cython'][0]:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
