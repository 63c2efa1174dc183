"""Radical-pair chemical compass simulator.

Computes the Loschmidt echo of interacting nuclear-spin baths
(transverse-field Ising rings), the singlet product yield of the
radical-pair reaction, and its sensitivity to the magnetic-field
direction, with a dense small-chain oracle validating every closed
form.
"""

__version__ = "0.1.0"

from .model import (
    DerivedCouplings,
    EnvironmentParams,
    FieldConfig,
    ReactionParams,
    ThermalParams,
    derive_couplings,
)
from .fermion_echo import (
    EchoSeries,
    FermionEchoContext,
    ModeBlock,
    ModeGrid,
    build_mode_block,
    build_mode_grid,
    decoherence_factor,
    dispersion,
    echo_pure,
    echo_series,
    echo_thermal,
    gaussian_rate,
)
from .ed_oracle import (
    EDEchoContext,
    SpinHamiltonian,
    build_spin_hamiltonian,
    echo_ed,
    ground_state,
    thermal_state,
)
from .yield_engine import (
    GaussianYield,
    QuadratureConfig,
    QuadratureError,
    SensitivityResult,
    SmallKsYield,
    YieldResult,
    le_n2,
    product_yield,
    sensitivity,
    singlet_population,
    yield_gaussian,
    yield_small_ks,
)
from .sweep import (
    SweepConfigError,
    SweepSpec,
    SweepTable,
    preset_fig2,
    preset_fig3,
    run_sweep,
    write_csv,
)

__all__ = [
    "DerivedCouplings",
    "EnvironmentParams",
    "FieldConfig",
    "ReactionParams",
    "ThermalParams",
    "derive_couplings",
    "EchoSeries",
    "FermionEchoContext",
    "ModeBlock",
    "ModeGrid",
    "build_mode_block",
    "build_mode_grid",
    "decoherence_factor",
    "dispersion",
    "echo_pure",
    "echo_series",
    "echo_thermal",
    "gaussian_rate",
    "EDEchoContext",
    "SpinHamiltonian",
    "build_spin_hamiltonian",
    "echo_ed",
    "ground_state",
    "thermal_state",
    "GaussianYield",
    "QuadratureConfig",
    "QuadratureError",
    "SensitivityResult",
    "SmallKsYield",
    "YieldResult",
    "le_n2",
    "product_yield",
    "sensitivity",
    "singlet_population",
    "yield_gaussian",
    "yield_small_ks",
    "SweepConfigError",
    "SweepSpec",
    "SweepTable",
    "preset_fig2",
    "preset_fig3",
    "run_sweep",
    "write_csv",
]
