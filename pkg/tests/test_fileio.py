"""Field-slice dump format."""

import numpy as np
import pytest

from patchsim import FieldState
from patchsim.errors import ConfigError
from patchsim.fileio import dump_field_slice, load_field_slice
from patchsim.grid import GridSpec, cfl_limit


@pytest.fixture
def fields():
    d = 1e-3
    spec = GridSpec(d, d, d, 8, 9, 10, 0.9 * cfl_limit(d, d, d))
    f = FieldState.zeros(spec)
    rng = np.random.default_rng(4)
    f.ez[...] = rng.normal(size=f.ez.shape)
    f.step = 123
    f.time = 123 * spec.dt
    return f


class TestFieldSlice:
    def test_round_trip(self, fields, tmp_path):
        path = tmp_path / "slice.bin"
        dump_field_slice(fields, "ez", "z", 5, path)
        data, meta = load_field_slice(path)
        assert np.array_equal(data, fields.ez[:, :, 5])
        assert meta["component"] == "ez"
        assert meta["axis"] == "z"
        assert meta["index"] == 5
        assert meta["step"] == 123
        assert meta["time"] == pytest.approx(fields.time, rel=1e-15)

    def test_header_is_text(self, fields, tmp_path):
        path = tmp_path / "slice.bin"
        dump_field_slice(fields, "ez", "y", 2, path)
        first = path.read_bytes().split(b"\n", 1)[0]
        assert first == b"patchsim-field-slice 1"

    def test_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "alien.bin"
        path.write_bytes(b"something else\n")
        with pytest.raises(ConfigError):
            load_field_slice(path)

    def test_float64_payload(self, fields, tmp_path):
        path = tmp_path / "slice.bin"
        dump_field_slice(fields, "ez", "x", 3, path)
        raw = path.read_bytes()
        header_len = len(raw) - fields.ez[3].size * 8
        payload = np.frombuffer(raw[header_len:], dtype="<f8")
        assert payload.size == fields.ez[3].size
