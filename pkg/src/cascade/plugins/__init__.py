"""Plugins of primitives, dirty-marking, and the file plugin."""
from importlib import resources

from .files import HostFileSystem, MemoryFileSystem
from .plugin import (InstallRecord, InstallReport, Mode, Plugin, load_bundle, mark_dirty,
                     nativize_plugin, parse_manifest)


def file_plugin_path():
    return str(resources.files("cascade") / "corpus" / "fileplugin")


def load_file_plugin(mode=None) -> Plugin:
    p = load_bundle(file_plugin_path())
    if mode is not None:
        p.mode = Mode(mode)
    return p


def file_plugin_create_directory(p: Plugin, path_oop):
    """Call the plugin's createDirectory primitive; true Oop or PrimitiveFailed."""
    return p.call("primitiveCreateDirectory", None, [path_oop])


__all__ = ["HostFileSystem", "InstallRecord", "InstallReport", "MemoryFileSystem", "Mode",
           "Plugin", "file_plugin_create_directory", "file_plugin_path", "load_bundle",
           "load_file_plugin", "mark_dirty", "nativize_plugin", "parse_manifest"]
