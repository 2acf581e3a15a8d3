# app/ml/run_tracker.py
import logging
import os
from datetime import datetime, timezone
from typing import Dict

import mlflow

from app.core.montecarlo import ValidationReport
from app.schemas.scenario_file import scenario_items
from app.schemas.scenario_schema import ScenarioConfig

logger = logging.getLogger(__name__)

DEFAULT_EXPERIMENT = "coxsat_validation"


def _metric_key(metric_id: str, index: int) -> str:
    # mlflow metric names allow alphanumerics, '_', '-', '.', ' ', '/'
    return f"z/{metric_id.replace(':', '.')}/{index:03d}"


def track_validation(
    report: ValidationReport,
    base: ScenarioConfig,
    grid_name: str,
    n_trials: int,
    seed: int,
) -> Dict[str, object]:
    """
    Log a validation run to MLflow:
    - params: base scenario, grid, trials, seed
    - metrics: every z-score plus the flag count
    - artifact: the report CSV
    """
    mlflow.set_experiment(os.getenv("COXSAT_MLFLOW_EXPERIMENT", DEFAULT_EXPERIMENT))
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")

    with mlflow.start_run(run_name=f"validate_{grid_name}_{timestamp}") as run:
        for key, value in scenario_items(base):
            mlflow.log_param(key, value)
        mlflow.log_param("grid", grid_name)
        mlflow.log_param("n_trials", n_trials)
        mlflow.log_param("seed", seed)

        for index, row in enumerate(report.rows):
            if row.z_score != float("inf"):
                mlflow.log_metric(_metric_key(row.metric_id, index), row.z_score)
        mlflow.log_metric("comparisons", len(report.rows))
        mlflow.log_metric("flagged", len(report.flagged))
        mlflow.log_text(report.to_frame().to_csv(index=False, lineterminator="\n"), "validation_report.csv")
        run_id = run.info.run_id

    logger.info("validation run tracked as mlflow run %s", run_id)
    return {"mlflow_run_id": run_id, "flagged": len(report.flagged), "comparisons": len(report.rows)}
