import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sirpca import formats
from sirpca.bench import Cell, PhaseGrid, SweepGrid
from sirpca.errors import FormatError
from sirpca.staging import StagedOutput


class TestMatrix:
    @settings(max_examples=50)
    @given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
                  elements=st.floats(allow_nan=False, allow_infinity=False)))
    def test_round_trip_exact(self, A):
        np.testing.assert_array_equal(formats.parse_matrix(formats.matrix_text(A)), A)

    def test_layout(self):
        assert formats.matrix_text(np.array([[1.0, 0.1], [-2.5, 1e-300]])) == "2 2\n1.0 0.1\n-2.5 1e-300\n"

    @pytest.mark.parametrize("text,line", [
        ("", 1), ("2\n", 1), ("a b\n", 1), ("2 2\n1 2\n", 3),
        ("2 2\n1 2\n3\n", 3), ("1 1\n1\n2\n", 3), ("1 2\n1 x\n", 2), ("1 1\nnan\n", 2),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(FormatError) as exc:
            formats.parse_matrix(text, "m.mtx")
        assert exc.value.line == line
        assert f"m.mtx:{line}:" in str(exc.value)


class TestConfig:
    def test_parse(self):
        text = "# run\nkappa = 0.2\n\nranks=10,35\n"
        assert formats.parse_config(text, {"kappa", "ranks"}) == {"kappa": "0.2", "ranks": "10,35"}

    @pytest.mark.parametrize("text", ["kappa\n", "=3\n", "bogus=1\n", "kappa=1\nkappa=2\n"])
    def test_invalid(self, text):
        with pytest.raises(FormatError):
            formats.parse_config(text, {"kappa"})

    def test_text(self):
        assert formats.config_text({"a": 0.1, "b": True, "c": [1, 2], "d": None}) == "a=0.1\nb=true\nc=1,2\nd=\n"


class TestCsv:
    def grid(self):
        g = PhaseGrid([10, 35], [0.05], 2, "pcp", "bernoulli", "none")
        g.cells[(10, 0.05)] = Cell(10, 0.05, [1e-6, 2e-6])
        g.cells[(35, 0.05)] = Cell(35, 0.05, [5e-3, None])
        return g

    def test_phase_csv(self):
        text = formats.phase_csv(self.grid())
        assert text.splitlines() == [
            "r,rho,trial,rel_error,success,errored",
            "10,0.05,0,1e-06,true,false",
            "10,0.05,1,2e-06,true,false",
            "35,0.05,0,0.005,false,false",
            "35,0.05,1,inf,false,true",
            "10,0.05,all,2e-06,true,false",
            "35,0.05,all,inf,false,true",
        ]
        parsed = formats.parse_phase_csv(text)
        assert parsed[(35, 0.05, 1)] == (math.inf, False, True)
        assert parsed[(10, 0.05, "all")] == (2e-6, True, False)

    def test_sweep_csv(self):
        sw = SweepGrid([0.1], [0.05, 0.2], np.array([[0.5, 1e-7]]), np.zeros((1, 2), bool), "exact")
        assert formats.sweep_csv(sw) == "kappa,lambda,rel_error\n0.1,0.05,0.5\n0.1,0.2,1e-07\n"


class TestStaging:
    def test_commit(self, tmp_path):
        with StagedOutput(tmp_path / "new" / "dir") as s:
            s.write_text("a.txt", "x")
            s.write_bytes("sub/b.bin", b"y")
        assert (tmp_path / "new" / "dir" / "a.txt").read_text() == "x"
        assert (tmp_path / "new" / "dir" / "sub" / "b.bin").read_bytes() == b"y"

    def test_nothing_on_error(self, tmp_path):
        with pytest.raises(RuntimeError):
            with StagedOutput(tmp_path / "out") as s:
                s.write_text("a.txt", "x")
                raise RuntimeError
        assert not (tmp_path / "out").exists()
        assert list(tmp_path.iterdir()) == []
