"""Field-slice dumps: a small text header followed by raw float64 data.

Format (version 1):

    patchsim-field-slice 1
    component=<ex|ey|ez|hx|hy|hz> axis=<x|y|z> index=<int> step=<int> time=<float>
    shape=<rows> <cols>

then rows*cols little-endian float64 values, row-major.  The slice plane is
``axis = index`` in the component's own array indexing.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import FieldState

_AXES = {"x": 0, "y": 1, "z": 2}


def dump_field_slice(fields: FieldState, component: str, axis: str, index: int, path) -> None:
    arr = getattr(fields, component)
    plane = np.take(arr, index, axis=_AXES[axis]).astype("<f8")
    header = (
        "patchsim-field-slice 1\n"
        f"component={component} axis={axis} index={index} "
        f"step={fields.step} time={fields.time!r}\n"
        f"shape={plane.shape[0]} {plane.shape[1]}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(plane.tobytes())


def load_field_slice(path) -> tuple[np.ndarray, dict]:
    with open(path, "rb") as fh:
        magic = fh.readline().decode("ascii").strip()
        if magic != "patchsim-field-slice 1":
            raise ConfigError(f"not a field-slice file: {magic!r}")
        meta = {}
        for part in fh.readline().decode("ascii").split():
            key, val = part.split("=", 1)
            meta[key] = val
        shape_line = fh.readline().decode("ascii").split("=", 1)[1].split()
        rows, cols = int(shape_line[0]), int(shape_line[1])
        data = np.frombuffer(fh.read(rows * cols * 8), dtype="<f8").reshape(rows, cols)
    meta["step"] = int(meta["step"])
    meta["time"] = float(meta["time"])
    meta["index"] = int(meta["index"])
    return data, meta
