"""Host file operations behind one seam, plus the file plugin's Slang source."""
from __future__ import annotations

import os
import posixpath


class HostFileSystem:
    """Real filesystem; relative paths resolve under root when one is given."""

    def __init__(self, root=None):
        self.root = root

    def _path(self, path):
        return os.path.join(self.root, path) if self.root else path

    def create_directory(self, path) -> bool:
        try:
            os.mkdir(self._path(path))
        except OSError:
            return False
        return True

    def write_file(self, path, data: bytes) -> bool:
        try:
            with open(self._path(path), "wb") as fh:
                fh.write(data)
        except OSError:
            return False
        return True

    def read_file(self, path):
        try:
            with open(self._path(path), "rb") as fh:
                return fh.read()
        except OSError:
            return None


class MemoryFileSystem:
    """In-memory tree with mkdir semantics: parent must exist, target must not."""

    def __init__(self):
        self.dirs = {"/"}
        self.files: dict[str, bytes] = {}

    @staticmethod
    def _norm(path):
        if not path:
            return None
        return posixpath.normpath("/" + path)

    def _exists(self, p):
        return p in self.dirs or p in self.files

    def create_directory(self, path) -> bool:
        p = self._norm(path)
        if p is None or p == "/" or self._exists(p):
            return False
        if posixpath.dirname(p) not in self.dirs:
            return False
        self.dirs.add(p)
        return True

    def write_file(self, path, data: bytes) -> bool:
        p = self._norm(path)
        if p is None or p in self.dirs or posixpath.dirname(p) not in self.dirs:
            return False
        self.files[p] = bytes(data)
        return True

    def read_file(self, path):
        p = self._norm(path)
        return self.files.get(p) if p is not None else None
