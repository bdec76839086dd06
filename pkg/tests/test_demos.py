import py_compile
from pathlib import Path

import pytest

DEMOS = sorted((Path(__file__).parent.parent / "demos").glob("*.py"))


@pytest.mark.parametrize("path", DEMOS, ids=[p.name for p in DEMOS])
def test_demo_compiles(path):
    py_compile.compile(str(path), doraise=True)


def test_fast_demo_runs():
    import runpy
    runpy.run_path(str(Path(DEMOS[0])), run_name="__main__")
