import pytest
from hypothesis import given, settings, strategies as st

from cascade.errors import PrimitiveFailed, UnknownSelector, UserError
from cascade.plugins import (HostFileSystem, MemoryFileSystem, Mode, load_bundle, load_file_plugin,
                             mark_dirty, nativize_plugin, parse_manifest)
from cascade.runtime.vm import VM
from cascade.words import tag, untag
from conftest import make_vm


def write_bundle(tmp_path, manifest, files):
    (tmp_path / "manifest").write_text(manifest)
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    return str(tmp_path)


def test_manifest_parsing():
    assert parse_manifest("# c\nname = Demo\n\nmode=eager\n") == {"name": "Demo", "mode": "eager"}
    with pytest.raises(UserError):
        parse_manifest("name Demo\n")


def test_bundle_with_single_method_files(tmp_path):
    path = write_bundle(tmp_path, "name=Math\nclass=MathPlugin\nmode=eager\n",
                        {"a.slang": "double: x\n\t^ x + x\n", "b.slang": "Math>>triple: x\n\t^ x * 3\n",
                         "notes.txt": "ignored"})
    p = load_bundle(path)
    assert p.name == "Math" and p.mode is Mode.EAGER
    assert sorted(p.methods) == ["double:", "triple:"]
    report = nativize_plugin(p, make_vm())
    assert report.ok and sorted(report.compiled) == ["double:", "triple:"]
    assert untag(p.call("triple:", None, [tag(5)])) == 15
    assert p.vm.slot("triple:").compile_count == 1


def test_bad_manifest_mode(tmp_path):
    path = write_bundle(tmp_path, "mode=sometimes\n", {"a.slang": "f\n\t^ 1\n"})
    with pytest.raises(UserError):
        load_bundle(path)


def test_broken_method_does_not_block_siblings(tmp_path):
    path = write_bundle(tmp_path, "name=Mixed\nmode=eager\n",
                        {"good.slang": "good\n\t^ 1\n", "bad.slang": "bad\n\t^ (1 +\n"})
    p = load_bundle(path)
    report = nativize_plugin(p, make_vm())
    assert not report.ok and set(report.errors) == {"bad"}
    assert untag(p.call("good")) == 1
    with pytest.raises(UnknownSelector):
        p.call("bad")


def test_mark_dirty_rejects_foreign_selector():
    p = load_file_plugin()
    with pytest.raises(UnknownSelector):
        mark_dirty(p, "notMine")


def test_hot_swap_recompiles_only_the_edited_primitive():
    from cascade.bench.cli import swap_demo
    before, after, unchanged = swap_demo()
    assert (before, after, unchanged) == (42, 40, True)


def test_lazy_plugin_compiles_on_first_call_and_logs_it():
    p = load_file_plugin()
    vm = make_vm()
    nativize_plugin(p, vm)
    assert p.total_compilations == 0
    path = vm.heap.new_bytes(b"d")
    assert p.call("primitiveCreateDirectory", None, [path]) == vm.heap.true
    assert [r.selector for r in p.install_log] == ["primitiveCreateDirectory"]
    with pytest.raises(PrimitiveFailed):
        p.call("primitiveCreateDirectory", None, [path])


def test_file_write_then_read_round_trip():
    vm = make_vm()
    p = load_file_plugin()
    nativize_plugin(p, vm)
    with vm.heap.rooted(vm.heap.new_bytes(b"note.txt"), vm.heap.new_bytes(b"hello")) as cur:
        assert p.call("primitiveFileWrite", None, [cur(0), cur(1)]) == vm.heap.true
        data = p.call("primitiveFileRead", None, [cur(0)])
    assert vm.heap.bytes_of(data) == b"hello"


def test_non_bytes_path_fails():
    vm = make_vm()
    p = load_file_plugin()
    nativize_plugin(p, vm)
    with pytest.raises(PrimitiveFailed):
        p.call("primitiveCreateDirectory", None, [tag(3)])


def test_host_filesystem_create_directory(tmp_path):
    vm = VM(filesystem=HostFileSystem(str(tmp_path)), space_bytes=1 << 20)
    p = load_file_plugin()
    nativize_plugin(p, vm)
    p.call("primitiveCreateDirectory", None, [vm.heap.new_bytes(b"made")])
    assert (tmp_path / "made").is_dir()
    with pytest.raises(PrimitiveFailed):
        p.call("primitiveCreateDirectory", None, [vm.heap.new_bytes(b"missing/child")])


segment = st.sampled_from(["a", "b", "c", "..", ".", ""])
paths = st.lists(segment, min_size=1, max_size=3).map("/".join)


def create_pattern(path_list, compiled):
    vm = make_vm()
    p = load_file_plugin()
    nativize_plugin(p, vm)
    out = []
    for text in path_list:
        oop = vm.heap.new_bytes(text.encode())
        if compiled:
            try:
                out.append(p.call("primitiveCreateDirectory", None, [oop]) == vm.heap.true)
            except PrimitiveFailed:
                out.append(False)
        else:
            out.append(vm.vm_create_directory(oop) == 1)
    return out


@settings(max_examples=60, deadline=None)
@given(st.lists(paths, min_size=1, max_size=25))
def test_compiled_and_direct_paths_agree_on_memory_fs(path_list):
    assert create_pattern(path_list, True) == create_pattern(path_list, False)


def test_memory_fs_semantics():
    fs = MemoryFileSystem()
    assert fs.create_directory("a") and not fs.create_directory("a")
    assert not fs.create_directory("x/y")
    assert fs.create_directory("a/b") and not fs.create_directory("")
    assert fs.write_file("a/f", b"1") and fs.read_file("a/f") == b"1"
    assert not fs.write_file("a", b"dir")
