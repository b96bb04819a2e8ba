from igeflow.runner.experiment import (
    ExperimentPipeline,
    config_hash,
    run_experiment,
    run_many,
)

__all__ = ["ExperimentPipeline", "config_hash", "run_experiment", "run_many"]
