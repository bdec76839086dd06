"""All-or-nothing output writing.

Files are first written to a scratch directory and moved into place only
when the whole batch succeeded, so failed runs leave no partial outputs.
"""

import os
import shutil
import tempfile
from pathlib import Path


def _existing_ancestor(path):
    path = Path(path).absolute()
    while not path.exists():
        path = path.parent
    return path


class StagedOutput:
    """Context manager collecting files under `root`.

    ``stage.write_bytes("a/b.pgm", data)`` lands at ``root/a/b.pgm`` once
    the ``with`` block exits cleanly. On an exception nothing is written.
    """

    def __init__(self, root="."):
        self.root = Path(root)
        self._tmp = None
        self._files = []

    def __enter__(self):
        base = _existing_ancestor(self.root)
        if not base.is_dir():
            raise NotADirectoryError(f"output location is not a directory: {base}")
        self._tmp = Path(tempfile.mkdtemp(prefix=".staging-", dir=base))
        return self

    def _scratch(self, rel):
        target = self.root / rel
        scratch = self._tmp / f"{len(self._files):06d}"
        self._files.append((scratch, target))
        return scratch

    def write_bytes(self, rel, data):
        self._scratch(rel).write_bytes(data)

    def write_text(self, rel, text):
        self._scratch(rel).write_text(text, encoding="ascii", newline="\n")

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for scratch, target in self._files:
                    target.parent.mkdir(parents=True, exist_ok=True)
                    try:
                        os.replace(scratch, target)
                    except OSError:
                        shutil.move(str(scratch), str(target))
        finally:
            shutil.rmtree(self._tmp, ignore_errors=True)
        return False
