"""Self-describing JSON documents for trained models.

A document stores the training data, hyperparameters, standardization constants
and fit settings. Loading re-runs the factorization with exactly those numbers,
so a reloaded model predicts bit-for-bit like the one that was saved.
"""

import json
import logging
from pathlib import Path
from typing import Any

from injury_surrogate.campaign.records import DesignBox
from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import Metric
from injury_surrogate.errors import DataError
from injury_surrogate.gp.fitting import FitConfig
from injury_surrogate.gp.kernels import KernelParams
from injury_surrogate.gp.model import GpModel
from injury_surrogate.gp.model import condition

logger = logging.getLogger(__name__)

MODEL_SCHEMA_VERSION = 1
MODEL_KIND = "injury-surrogate-gp"


def model_to_document(model: GpModel) -> dict[str, Any]:
    return {
        "kind": MODEL_KIND,
        "schema_version": MODEL_SCHEMA_VERSION,
        "metric": model.metric.value if model.metric else None,
        "box": model.box.to_dict(),
        "kernel": model.params.to_dict(),
        "standardization": {"mean": model.output_mean, "scale": model.output_scale},
        "jitter": model.jitter,
        "fit_config": model.fit_config.to_dict() if model.fit_config else None,
        "training": [
            {
                "case": case_id,
                "torso_angle_deg": point.torso_angle,
                "dring_z": point.dring_z,
                "value": float(value),
            }
            for case_id, point, value in zip(
                model.case_ids, model.train_inputs, model.train_outputs, strict=True
            )
        ],
    }


def model_from_document(document: dict[str, Any]) -> GpModel:
    """Rebuild a model from :func:`model_to_document` output.

    Raises:
        DataError: If the document is not a model document or is incomplete
    """
    if document.get("kind") != MODEL_KIND:
        msg = f"Not a model document (kind={document.get('kind')!r})"
        raise DataError(msg)
    if document.get("schema_version") != MODEL_SCHEMA_VERSION:
        msg = f"Unsupported model schema_version {document.get('schema_version')!r}"
        raise DataError(msg)
    try:
        training = document["training"]
        fit_config = document.get("fit_config")
        model = condition(
            [InputPoint(row["torso_angle_deg"], row["dring_z"]) for row in training],
            [row["value"] for row in training],
            KernelParams.from_dict(document["kernel"]),
            DesignBox.from_dict(document["box"]),
            standardization=(
                document["standardization"]["mean"],
                document["standardization"]["scale"],
            ),
            case_ids=[row["case"] for row in training],
            metric=Metric(document["metric"]) if document.get("metric") else None,
            fit_config=FitConfig.from_dict(fit_config) if fit_config else None,
        )
    except (KeyError, TypeError) as e:
        msg = f"Incomplete model document: {e!r}"
        raise DataError(msg) from e
    if model.jitter != document.get("jitter", model.jitter):
        logger.warning(
            f"Reloaded model needed jitter {model.jitter:g}, saved model used "
            f"{document['jitter']:g}"
        )
    return model


def save_model(model: GpModel, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(model_to_document(model), indent=2) + "\n", encoding="utf-8"
    )
    logger.info(f"Saved {model.metric or 'model'} ({len(model)} runs) to {path}")
    return path


def load_model(path: Path | str) -> GpModel:
    """Load a model file written by :func:`save_model`.

    Raises:
        FileNotFoundError: If ``path`` does not exist
        DataError: If the file is not a valid model document
    """
    path = Path(path)
    if not path.is_file():
        msg = f"Model file not found: {path}"
        raise FileNotFoundError(msg)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        msg = f"{path} is not valid JSON: {e}"
        raise DataError(msg) from e
    return model_from_document(document)
