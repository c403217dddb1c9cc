"""patchsim: FDTD solver and analysis toolchain for microstrip patch antennas."""

from .cavity import PatchModel, design_patch, effective_permittivity, length_extension, resonant_frequency
from .cpml import CpmlParams
from .engine import (
    LumpedPort,
    PortRecord,
    RunResult,
    SimConfig,
    Stepper,
    apply_lumped_port,
    build_stepper,
    run,
    step,
    total_energy,
)
from .errors import (
    BandCoverageError,
    BudgetError,
    ConfigError,
    CoverageError,
    DivergenceError,
    GeometryError,
    MissingFrequencyError,
    NoBandwidthError,
    PatchSimError,
    PortPlacementError,
    PowerAccountingError,
    TruncationError,
)
from .farfield import (
    FarFieldPattern,
    HuygensRecorder,
    HuygensSurface,
    gain,
    hertzian_dipole_fields,
    ntff,
    pattern_cut,
    poynting_power,
)
from .fixtures import (
    ModifiedUParams,
    SimpleUParams,
    build_matched_line,
    build_micro_patch,
    build_modified_u_patch,
    build_open_stub,
    build_plain_patch,
    build_simple_u_patch,
)
from .geometry import (
    AntennaDesign,
    BitGrid2D,
    Material,
    PatchLayout,
    PortSpec,
    Rect2D,
    SubstrateStack,
    conductor_mask,
    layout_area,
    write_pgm,
)
from .grid import (
    FieldState,
    GridLimits,
    GridSpec,
    MaterialGrid,
    assign_materials,
    auto_grid,
    cfl_timestep,
)
from .source import SourceWaveform
from .spectra import (
    FrequencyResponse,
    Spectrum,
    TimeSignal,
    accepted_power,
    bandwidth,
    dft,
    find_resonances,
    return_loss_db,
    s11,
    write_touchstone,
)

__version__ = "0.1.0"
