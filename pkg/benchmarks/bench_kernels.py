"""Compare the compiled and numpy kernel backends.

Times AROW training of one edge learner and batched Viterbi decoding on
synthetic inputs, for every backend that is importable.

    python benchmarks/bench_kernels.py --m 20000 --K 10000 --queries 2000
"""
import argparse
import json
import time

import numpy as np

from wltls.kernels import backends
from wltls.learner import epoch_orders
from wltls.synthetic import SyntheticSpec, make_dataset
from wltls.trellis import build_graph


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_arow(module, data, epochs, repeat):
    y = np.where(data.y % 2 == 0, 1, -1).astype(np.int8)
    order = epoch_orders(data.m, epochs, seed=0, edge_id=0)

    def run():
        mean, var = np.zeros(data.d), np.ones(data.d)
        module.arow_train_edge(data.indptr, data.indices, data.values, y, order, 1.0, mean, var)

    return best_of(run, repeat)


def bench_viterbi(module, graph, W, repeat):
    args = (graph.tails, graph.heads, graph.rank_offset, graph.n_vertices)
    return best_of(lambda: module.viterbi_batch(W, *args), repeat)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=6000, help="training samples")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--K", type=int, default=10_000, help="classes for the decode benchmark")
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    data = make_dataset(args.m, SyntheticSpec(), seed=args.seed, sample_seed=args.seed + 1)
    graph = build_graph(args.K, args.b)
    W = np.random.default_rng(args.seed).normal(size=(args.queries, graph.n_edges))

    results = {}
    for name, module in backends().items():
        arow_s = bench_arow(module, data, args.epochs, args.repeat)
        vit_s = bench_viterbi(module, graph, W, args.repeat)
        single_s = bench_viterbi(module, graph, W[:1].copy(), max(args.repeat, 50))
        results[name] = {
            "arow_edge_s": arow_s,
            "arow_us_per_update_pass": 1e6 * arow_s / (args.m * args.epochs),
            "viterbi_batch_us_per_query": 1e6 * vit_s / args.queries,
            "viterbi_single_us": 1e6 * single_s,
        }
        print(json.dumps({"backend": name, **{k: round(v, 3) for k, v in results[name].items()}}))
    if "cython" in results:
        py, cy = results["python"], results["cython"]
        print(json.dumps({
            "speedup_arow": round(py["arow_edge_s"] / cy["arow_edge_s"], 1),
            "speedup_viterbi_batch": round(py["viterbi_batch_us_per_query"]
                                           / cy["viterbi_batch_us_per_query"], 1),
            "speedup_viterbi_single": round(py["viterbi_single_us"] / cy["viterbi_single_us"], 1),
        }))


if __name__ == "__main__":
    main()
