"""Semispace heap and copying collector, checked against a reachability oracle."""
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from cascade.errors import OutOfMemory
from cascade.runtime import kernel
from cascade.runtime.heap import Heap
from cascade.runtime.layout import HEADER_BYTES
from cascade.words import tag, untag

GC_SETTINGS = settings(max_examples=60, deadline=None,
                       suppress_health_check=[HealthCheck.function_scoped_fixture])


def small_heap(kind, space=64 * 1024, torture=False):
    return Heap(space_bytes=space, torture=torture, kernel=kernel.load(kind), sink_bytes=4096)


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 40))
    sizes = [draw(st.integers(1, 5)) for _ in range(n)]
    # slot 0 holds the object's id; other slots reference objects or hold small ints
    edges = {i: [draw(st.one_of(st.integers(0, n - 1), st.none())) for _ in range(sizes[i] - 1)]
             for i in range(n)}
    roots = draw(st.lists(st.integers(0, n - 1), max_size=5))
    pinned = draw(st.lists(st.integers(0, n - 1), max_size=3))
    return sizes, edges, roots, pinned


def reachable(edges, starts):
    seen, stack = set(), list(starts)
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        stack.extend(j for j in edges[i] if j is not None)
    return seen


def build(heap, sizes, edges):
    oops = [heap.allocate(16, n) for n in sizes]
    for i, oop in enumerate(oops):
        heap.set_slot(oop, 0, tag(i))
        for k, j in enumerate(edges[i], start=1):
            heap.set_slot(oop, k, oops[j] if j is not None else tag(-k))
    return oops


def walk(heap, starts):
    """Ids and edges as seen in the heap after collection."""
    seen, stack, found = set(), list(starts), {}
    while stack:
        oop = stack.pop()
        if oop in seen:
            continue
        seen.add(oop)
        i = untag(heap.slot(oop, 0))
        out = []
        for k in range(1, heap.slot_count(oop)):
            w = heap.slot(oop, k)
            if heap.is_heap_ref(w):
                out.append(untag(heap.slot(w, 0)))
                stack.append(w)
            else:
                assert w == tag(-k)
                out.append(None)
        found[i] = out
    return found


@GC_SETTINGS
@given(graphs())
def test_collect_keeps_exactly_the_reachable_graph(kernel_kind, g):
    sizes, edges, roots, pinned = g
    heap = small_heap(kernel_kind)
    oops = build(heap, sizes, edges)
    for r in roots:
        heap.push_root(oops[r])
    heap.write_pinned(oops[pinned[0]] if pinned else heap.nil, [oops[p] for p in pinned[1:]])
    stats = heap.collect()

    live = reachable(edges, roots + pinned)
    starts = heap.roots() + ([heap.pinned_receiver] if pinned else []) + heap.pinned_args()
    after = walk(heap, starts)
    assert set(after) == live
    assert all(after[i] == edges[i] for i in live)
    assert stats.live_bytes == sum(HEADER_BYTES + 8 * sizes[i] for i in live)
    assert stats.forwarded_count == len(live)
    assert sorted(untag(heap.slot(o, 0)) for o in heap.objects()) == sorted(live)
    assert not any(heap.is_forwarded(o) for o in heap.objects())


def test_torture_collects_before_every_allocation(kernel_kind):
    heap = small_heap(kernel_kind, torture=True)
    before = heap.collections
    for _ in range(25):
        heap.allocate(16, 2)
    assert heap.collections - before == 25


def test_unrooted_object_moves_and_rooted_one_follows(kernel_kind):
    heap = small_heap(kernel_kind)
    keep = heap.allocate(16, 1)
    heap.set_slot(keep, 0, tag(99))
    with heap.rooted(keep) as current:
        heap.collect()
        moved = current(0)
    assert moved != keep
    assert heap.slot(moved, 0) == tag(99)


def test_out_of_memory_sets_and_clears_flag(kernel_kind):
    heap = small_heap(kernel_kind, space=4096)
    with pytest.raises(OutOfMemory):
        while True:
            heap.push_root(heap.allocate(16, 8))
    assert not heap.take_oom()


def test_bytes_payload_is_not_scanned(kernel_kind):
    heap = small_heap(kernel_kind)
    target = heap.allocate(16, 1)
    fake = target.to_bytes(8, "little") * 3
    b = heap.new_bytes(fake)
    with heap.rooted(b) as current:
        heap.collect()
        assert heap.bytes_of(current(0)) == fake


def test_static_objects_never_move(kernel_kind):
    heap = small_heap(kernel_kind)
    cls = heap.make_class(16, 3)
    obj = heap.basic_new(cls)
    heap.push_root(obj)
    heap.set_slot(obj, 0, cls)
    heap.collect()
    moved = heap.root(0)
    assert heap.slot(moved, 0) == cls
    assert heap.class_id(moved) == 16 and heap.slot_count(moved) == 3
    assert heap.global_value("nilObject") == heap.nil


def test_globals_are_roots(kernel_kind):
    heap = small_heap(kernel_kind)
    obj = heap.allocate(16, 1)
    heap.set_slot(obj, 0, tag(5))
    heap.define_global("box", obj)
    heap.collect()
    assert heap.slot(heap.global_value("box"), 0) == tag(5)


def test_print_sink_buffers_hex_lines(kernel_kind):
    heap = small_heap(kernel_kind)
    heap.activate()
    heap.kernel.print_oop(0x1234)
    heap.kernel.write_byte(ord("z"))
    assert heap.drain_sink() == b"1234\nz"
    assert heap.sink_contents() == b""


def test_kernels_agree_on_hash_mix():
    try:
        c = kernel.load("compiled")
    except ImportError:
        pytest.skip("compiled kernel not built")
    p = kernel.load("python")
    for a, b in [(0, 0), (1, 2), (2**64 - 1, 12345), (0xDEADBEEF, 2**63)]:
        assert c.hash_mix(a, b) == p.hash_mix(a, b)
