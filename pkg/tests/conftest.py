"""Shared fixtures: one cached micro-patch simulation reused across tests."""

import pytest

from patchsim.config import RunConfig
from patchsim.fixtures import build_micro_patch
from patchsim.harness import cmd_simulate

# Small but real end-to-end configuration: ~20 s of solver time, reused by
# every test that needs genuine simulation output.
MICRO_KWARGS = dict(
    design_ref="micro_patch",
    preset="explicit",
    dxy=2.0e-3,
    f_min=2.0e9,
    f_max=6.5e9,
    f_step=2.5e7,
    farfield=True,
    max_steps=30000,
)


def micro_config(**overrides) -> RunConfig:
    kwargs = dict(MICRO_KWARGS)
    kwargs.update(overrides)
    return RunConfig(design=build_micro_patch(), **kwargs)


@pytest.fixture(scope="session")
def micro_run(tmp_path_factory):
    """(config, out_dir, summary, cache_dir) for the shared micro solve."""
    root = tmp_path_factory.mktemp("micro")
    cfg = micro_config()
    cache = root / "cache"
    out = root / "out"
    summary = cmd_simulate(cfg, out, cache_dir=cache, log=lambda *a: None)
    return cfg, out, summary, cache
