"""DVL missing-beam reconstruction.

Thin wrapper over the compiled core: beam geometry, the sensor error
model, regression metrics and the config-driven simulate/train/eval
pipeline.
"""

from beamfill._core import (
    BeamGeometry,
    Error,
    ErrorParams,
    ExperimentConfig,
    average_predict,
    build_geometry,
    corrupt_series,
    improvement_percent,
    load_config,
    mae,
    project_to_beams,
    r_squared,
    rmse,
    run_eval,
    run_simulate,
    run_train,
    serialize_config,
    solve_velocity,
    synth_trajectory,
    vaf,
    validate_config,
)

__all__ = [
    "BeamGeometry",
    "Error",
    "ErrorParams",
    "ExperimentConfig",
    "average_predict",
    "build_geometry",
    "corrupt_series",
    "improvement_percent",
    "load_config",
    "mae",
    "project_to_beams",
    "r_squared",
    "rmse",
    "run_eval",
    "run_simulate",
    "run_train",
    "serialize_config",
    "solve_velocity",
    "synth_trajectory",
    "vaf",
    "validate_config",
]
