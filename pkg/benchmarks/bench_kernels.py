"""Benchmark the compiled relation-attention kernels against the numpy path.

Times the four hot kernels at several sequence lengths, then one full
encoder forward+backward under each backend. The backend toggle works by
clearing graph2text.kernels._compiled, which the dispatcher consults per
call.

Usage: python benchmarks/bench_kernels.py [--repeats 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from graph2text import kernels
from graph2text.model import Model, ModelConfig
import graph2text.tensor as T


def _time(fn, repeats: int) -> float:
    fn()  # warmup
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(repeats: int) -> None:
    if kernels._compiled is None:
        print("compiled kernels unavailable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'case':<34}{'pure (ms)':>12}{'cython (ms)':>13}{'speedup':>9}")
    for n in (10, 25, 50, 100):
        heads, dk = 8, 64
        q = rng.normal(size=(heads, n, dk))
        k = rng.normal(size=(heads, n, dk))
        v = rng.normal(size=(heads, n, dk))
        a = rng.random(size=(heads, n, n))
        g4 = rng.normal(size=(heads, n, n, dk))
        e = rng.normal(size=(heads, n, n))
        c = rng.normal(size=(heads, n, dk))
        cases = [
            (f"scores fwd      N={n}", lambda: kernels._kernels_py.rel_attn_scores(q, k, g4),
             lambda: kernels._compiled.rel_attn_scores(q, k, g4)),
            (f"scores bwd      N={n}", lambda: kernels._kernels_py.rel_attn_scores_backward(e, q, k, g4),
             lambda: kernels._compiled.rel_attn_scores_backward(e, q, k, g4)),
            (f"context fwd     N={n}", lambda: kernels._kernels_py.rel_attn_context(a, v, g4),
             lambda: kernels._compiled.rel_attn_context(a, v, g4)),
            (f"context bwd     N={n}", lambda: kernels._kernels_py.rel_attn_context_backward(c, a, v, g4),
             lambda: kernels._compiled.rel_attn_context_backward(c, a, v, g4)),
        ]
        for name, pure, compiled in cases:
            t_pure = _time(pure, repeats) * 1000
            t_comp = _time(compiled, repeats) * 1000
            print(f"{name:<34}{t_pure:>12.3f}{t_comp:>13.3f}{t_pure / t_comp:>9.2f}x")


def bench_encoder(repeats: int) -> None:
    cfg = ModelConfig(
        sentence_vocab=100,
        graph_vocab=100,
        label_vocab=8,
        feature_vocab=200,
        d_h=256,
        heads=8,
        layers=2,
        d_ff=512,
        dropout=0.0,
        dtype="float64",
    )
    model = Model(cfg, seed=0)
    rng = np.random.default_rng(1)
    n = 40
    tokens = rng.integers(2, 100, size=n)
    feats = rng.integers(0, 200, size=(n, n))

    def run():
        model.zero_grad()
        out, _ = model.encode(tokens, feats)
        T.tsum(T.mul(out, out)).backward()

    saved = kernels._compiled
    results = {}
    for label, compiled in (("pure", None), ("cython", saved)):
        if compiled is None and label == "cython":
            continue
        kernels._compiled = compiled
        results[label] = _time(run, repeats) * 1000
    kernels._compiled = saved
    print()
    print(f"encoder fwd+bwd (L=2, N={n}, d=256):")
    for label, ms in results.items():
        print(f"  {label:<8}{ms:>10.2f} ms")
    if "cython" in results and "pure" in results:
        print(f"  speedup {results['pure'] / results['cython']:>8.2f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    print(f"selected backend: {kernels.BACKEND}")
    bench_kernels(args.repeats)
    bench_encoder(max(3, args.repeats // 4))


if __name__ == "__main__":
    main()
