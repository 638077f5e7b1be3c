"""Compare the compiled runtime kernel with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--count 20000]

Each operation runs count times per repeat; the best repeat is reported.
"""
import argparse
import time

from cascade.runtime import kernel
from cascade.runtime.heap import Heap
from cascade.words import tag


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def measure(kind, count, repeat):
    heap = Heap(space_bytes=64 << 20, kernel=kernel.load(kind))
    heap.sink_to_buffer()
    heap.activate()
    k = heap.kernel
    cls = heap.make_class(16, 2)

    def allocate():
        for _ in range(count):
            heap.allocate(16, 2)
        heap.collect()

    def basic_new():
        for _ in range(count):
            heap.basic_new(cls)
        heap.collect()

    def collect_live():
        with heap.rooted(*[heap.allocate(16, 4) for _ in range(200)]):
            for _ in range(count // 100):
                heap.collect()

    def print_oop():
        for i in range(count):
            k.print_oop(tag(i))
        heap.drain_sink()

    def hash_mix():
        for i in range(count):
            k.hash_mix(i, count - i)

    ops = {"allocate": allocate, "basic_new": basic_new, "collect": collect_live,
           "print_oop": print_oop, "hash_mix": hash_mix}
    return {name: _best(fn, repeat) for name, fn in ops.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--count", type=int, default=20000)
    args = ap.parse_args()
    try:
        kernel.load("compiled")
    except ImportError:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    compiled = measure("compiled", args.count, args.repeat)
    python = measure("python", args.count, args.repeat)
    print(f"{'operation':<10} {'compiled_ms':>12} {'python_ms':>10} {'speedup':>8}")
    for name in compiled:
        c, p = compiled[name] * 1e3, python[name] * 1e3
        print(f"{name:<10} {c:12.3f} {p:10.3f} {p / c:8.1f}x")


if __name__ == "__main__":
    main()
