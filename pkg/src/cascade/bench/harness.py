"""Timing harness for the object-creation and file-plugin experiments."""
from __future__ import annotations

import csv
import ctypes
import gc
import io
import json
import os
import shutil
import statistics
import tempfile
import time
from dataclasses import asdict, dataclass
from importlib import resources

from ..errors import CascadeError, PrimitiveFailed, UserError
from ..frontend import load_slang_file

CSV_HEADER = "config,point,mean_ms,stddev_ms,relative"

BASICNEW_CONFIGS = ("unmodified", "waterfall-plain", "waterfall-instrumented",
                    "reflective-unsafe", "reflective-safe")
FILEPLUGIN_CONFIGS = ("direct", "compiled")
EXPERIMENTS = {"basicnew": BASICNEW_CONFIGS, "fileplugin": FILEPLUGIN_CONFIGS}
BASELINE = {"basicnew": "unmodified", "fileplugin": "direct"}

# selector installed for each compiled or reflective configuration
_BASICNEW_SELECTORS = {
    "waterfall-plain": ("basicNewPlain", "lazy"),
    "waterfall-instrumented": ("basicNewInstrumented", "lazy"),
    "reflective-unsafe": ("reflectiveBasicNew", "reflective"),
    "reflective-safe": ("guardedBasicNew", "reflective"),
}


@dataclass
class BenchConfig:
    experiment: str = "basicnew"
    points: tuple = (1000,)
    runs: int = 50
    configs: tuple = ()
    n: int = 1                       # interleaved repetitions averaged into one run's sample
    filesystem: str = "host"         # fileplugin only: host or memory
    root: str | None = None          # fileplugin host root; a temp dir when None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise UserError(f"unknown experiment {self.experiment!r}")
        self.points = tuple(int(p) for p in self.points)
        self.configs = tuple(self.configs) or EXPERIMENTS[self.experiment]
        self.validate()

    def validate(self):
        if self.runs < 2:
            raise UserError("runs must be at least 2")
        if self.n < 1:
            raise UserError("n must be at least 1")
        if not self.points:
            raise UserError("at least one point is required")
        # an empty directory sweep still yields a row; zero objects measure nothing
        lowest = 0 if self.experiment == "fileplugin" else 1
        if any(p < lowest for p in self.points):
            raise UserError(f"points must be >= {lowest} for {self.experiment}")
        unknown = set(self.configs) - set(EXPERIMENTS[self.experiment])
        if unknown:
            raise UserError(f"unknown configs for {self.experiment}: {sorted(unknown)}")
        if self.filesystem not in ("host", "memory"):
            raise UserError("filesystem must be host or memory")


@dataclass
class BenchRow:
    config: str
    point: int
    mean_ms: float
    stddev_ms: float
    relative: float
    first_call_ms: float | None = None
    note: str = ""


def rows_to_csv(rows) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    w = csv.writer(out, lineterminator="\n")
    for r in rows:
        w.writerow([r.config, r.point, f"{r.mean_ms:.6f}", f"{r.stddev_ms:.6f}",
                    f"{r.relative:.4f}" if r.relative == r.relative else "nan"])
    # extra fields ride in comment lines so the header stays fixed
    seen = set()
    for r in rows:
        if r.first_call_ms is not None and r.config not in seen:
            seen.add(r.config)
            out.write(f"# first_call_ms {r.config}: {r.first_call_ms:.6f}\n")
    for r in rows:
        if r.note:
            out.write(f"# {r.config} {r.point}: {r.note}\n")
    return out.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2)


def _corpus(name):
    return str(resources.files("cascade") / "corpus" / name)


def _summarize(cfg, samples, first_calls, notes, baseline):
    rows = []
    for point in cfg.points:
        base = samples.get((baseline, point))
        base_mean = statistics.fmean(base) if base else float("nan")
        for name in cfg.configs:
            times = samples.get((name, point), [])
            note = notes.get((name, point), "")
            if len(times) < 2:
                rows.append(BenchRow(name, point, float("nan"), float("nan"), float("nan"),
                                     first_calls.get(name), note or "no samples"))
                continue
            mean = statistics.fmean(times)
            rel = mean / base_mean if base_mean and base_mean == base_mean else float("nan")
            rows.append(BenchRow(name, point, mean, statistics.stdev(times), rel,
                                 first_calls.get(name), note))
    return rows


def _timed(fn, count):
    t0 = time.perf_counter_ns()
    for _ in range(count):
        fn()
    return (time.perf_counter_ns() - t0) / 1e6


# -- object creation ----------------------------------------------------------------------

def basicnew_vm(torture=False):
    """VM with the benchmark primitives installed and a class to instantiate."""
    from ..runtime.vm import VM
    from ..plugins.files import MemoryFileSystem
    vm = VM(filesystem=MemoryFileSystem(), torture=torture)
    vm.heap.sink_to_buffer()
    for src in load_slang_file(_corpus("bench.slang")):
        vm.define(src)
    for selector, mode in _BASICNEW_SELECTORS.values():
        vm.install(selector, mode=mode)
    return vm, vm.heap.make_class(16, 2)


def bench_basicnew(cfg: BenchConfig, progress=None):
    vm, cls = basicnew_vm()
    heap = vm.heap
    call = vm.call_primitive
    runners = {"unmodified": lambda: heap.basic_new(cls)}
    for name, (selector, _) in _BASICNEW_SELECTORS.items():
        runners[name] = (lambda s: lambda: call(s, cls))(selector)

    first_calls, samples, notes = {}, {}, {}
    for name in cfg.configs:
        t0 = time.perf_counter_ns()
        try:
            runners[name]()
        except CascadeError as exc:
            notes[(name, cfg.points[0])] = f"error: {exc}"
        first_calls[name] = (time.perf_counter_ns() - t0) / 1e6
    live = [c for c in cfg.configs if not any(k[0] == c for k in notes)]

    gc_was_enabled = gc.isenabled()
    try:
        for point in cfg.points:
            for run in range(cfg.runs + 1):
                # rotate the order so no configuration always runs first
                k = run % len(live) if live else 0
                order = live[k:] + live[:k]
                totals = dict.fromkeys(order, 0.0)
                for _ in range(cfg.n):
                    for name in order:
                        if (name, point) in notes:
                            continue
                        heap.collect()
                        heap.drain_sink()
                        gc.collect()
                        gc.disable()
                        try:
                            totals[name] += _timed(runners[name], point)
                        except CascadeError as exc:
                            notes[(name, point)] = f"error: {exc}"
                        finally:
                            if gc_was_enabled:
                                gc.enable()
                if run:                       # run 0 is the warm-up
                    for name, total in totals.items():
                        if (name, point) not in notes:
                            samples.setdefault((name, point), []).append(total / cfg.n)
                if progress:
                    progress(point, run)
    finally:
        heap.drain_sink()
    return _summarize(cfg, samples, first_calls, notes, "unmodified")


def check_ordering(rows, point=1000):
    """Violations of the expected slowdown ordering and ratio bounds at point."""
    m = {r.config: r.mean_ms for r in rows if r.point == point}
    problems = []
    chain = [("unmodified", "<", "waterfall-plain"),
             ("waterfall-plain", "<=", "waterfall-instrumented"),
             ("waterfall-instrumented", "<", "reflective-unsafe"),
             ("reflective-unsafe", "<", "reflective-safe")]
    for a, op, b in chain:
        if a in m and b in m:
            ok = m[a] < m[b] if op == "<" else m[a] <= m[b]
            if not ok:
                problems.append(f"{a} {m[a]:.4f} !{op} {b} {m[b]:.4f}")
    if "waterfall-plain" in m and "waterfall-instrumented" in m:
        r = m["waterfall-instrumented"] / m["waterfall-plain"]
        if r > 1.5:
            problems.append(f"instrumented/plain {r:.3f} > 1.5")
    if "waterfall-instrumented" in m and "reflective-safe" in m:
        r = m["reflective-safe"] / m["waterfall-instrumented"]
        if r < 2:
            problems.append(f"reflective-safe/instrumented {r:.3f} < 2")
    return problems


# -- file plugin --------------------------------------------------------------------------

def fileplugin_vm(filesystem):
    from ..plugins import load_file_plugin, nativize_plugin
    from ..runtime.vm import VM
    vm = VM(filesystem=filesystem)
    plugin = load_file_plugin()
    nativize_plugin(plugin, vm)
    return vm, plugin


def _direct_create_directory(vm):
    """The VM function called through its native address, as compiled code would."""
    proto = ctypes.CFUNCTYPE(ctypes.c_uint64, ctypes.c_uint64)
    return proto(vm.symbols.resolve("createDirectory"))


def bench_fileplugin(cfg: BenchConfig, progress=None):
    from ..plugins.files import HostFileSystem, MemoryFileSystem
    owns_root = cfg.filesystem == "host" and cfg.root is None
    root = tempfile.mkdtemp(prefix="cascade-bench-") if owns_root else cfg.root
    vm, plugin = fileplugin_vm(MemoryFileSystem())
    heap = vm.heap
    direct = _direct_create_directory(vm)
    nil = heap.nil

    def compiled(path):
        try:
            return vm.call_primitive("primitiveCreateDirectory", nil, (path,)) != 0
        except PrimitiveFailed:
            return False

    runners = {"direct": lambda path: direct(path) != 0, "compiled": compiled}
    first_calls, samples, notes = {}, {}, {}
    failures: dict = {}
    serial = 0

    def fresh_fs():
        nonlocal serial
        serial += 1
        if cfg.filesystem == "memory":
            return MemoryFileSystem(), None
        run_dir = os.path.join(root, f"r{serial}")
        try:
            os.mkdir(run_dir)
        except OSError as exc:
            return HostFileSystem(run_dir), f"io-error: {exc.strerror}"
        return HostFileSystem(run_dir), None

    def run_once(name, point):
        fs, err = fresh_fs()
        vm.filesystem = fs
        heap.collect()
        # no allocation happens while timing, so these addresses stay put
        paths = [heap.new_bytes(f"d{i}".encode()) for i in range(point)]
        fn = runners[name]
        bad = 0
        gc.collect()
        gc.disable()
        t0 = time.perf_counter_ns()
        for p in paths:
            if not fn(p):
                bad += 1
        ms = (time.perf_counter_ns() - t0) / 1e6
        gc.enable()
        if isinstance(fs, HostFileSystem):
            shutil.rmtree(fs.root, ignore_errors=True)
        return ms, bad, err

    try:
        for name in cfg.configs:
            fs, _ = fresh_fs()
            vm.filesystem = fs
            path = heap.new_bytes(b"first")
            t0 = time.perf_counter_ns()
            runners[name](path)
            first_calls[name] = (time.perf_counter_ns() - t0) / 1e6
            if isinstance(fs, HostFileSystem):
                shutil.rmtree(fs.root, ignore_errors=True)
        live = list(cfg.configs)
        for point in cfg.points:
            for run in range(cfg.runs + 1):
                order = live[run % len(live):] + live[:run % len(live)]
                totals = dict.fromkeys(order, 0.0)
                for _ in range(cfg.n):
                    for name in order:
                        ms, bad, err = run_once(name, point)
                        totals[name] += ms
                        if err:
                            notes[(name, point)] = err
                        if bad:
                            failures[(name, point)] = failures.get((name, point), 0) + bad
                if run:
                    for name, total in totals.items():
                        samples.setdefault((name, point), []).append(total / cfg.n)
                if progress:
                    progress(point, run)
    finally:
        if owns_root:
            shutil.rmtree(root, ignore_errors=True)
    for key, count in failures.items():
        if key not in notes:
            notes[key] = f"io-error: {count} failed creates"
    return _summarize(cfg, samples, first_calls, notes, "direct")


def run_bench(cfg: BenchConfig, progress=None):
    if cfg.experiment == "basicnew":
        return bench_basicnew(cfg, progress)
    return bench_fileplugin(cfg, progress)


__all__ = ["BASICNEW_CONFIGS", "BenchConfig", "BenchRow", "CSV_HEADER", "FILEPLUGIN_CONFIGS",
           "basicnew_vm", "bench_basicnew", "bench_fileplugin", "check_ordering",
           "fileplugin_vm", "rows_to_csv", "rows_to_json", "run_bench"]
