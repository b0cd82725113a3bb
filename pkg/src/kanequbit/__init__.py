"""Single-qubit dynamics under a polarized drive and averaged dephasing noise."""

__version__ = "0.1.0"

from .qubit import (  # noqa: E402
    BlochVector,
    UnphysicalStateError,
    ValidationReport,
    bloch_to_density,
    density_to_bloch,
    validate_density,
)
from .dynamics import (  # noqa: E402
    FixedPointSet,
    ModelParams,
    Trajectory,
    bloch_rhs,
    density_rhs_oracle,
    expm,
    fixed_point,
    generator,
    integrate,
    propagate_exact,
    rk4_step,
)
from .observables import (  # noqa: E402
    DecaySummary,
    ObservableSeries,
    bloch_norm,
    decay_summary,
    entropy,
    fidelity,
    purity,
    series,
)
from .experiments import (  # noqa: E402
    CALIBRATED_GAMMA_D,
    ScenarioSpec,
    SweepResult,
    figure_scenario,
    run_scenario,
    saturation_check,
    sweep,
)
