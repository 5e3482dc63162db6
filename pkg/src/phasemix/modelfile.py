"""Model files: a small JSON schema for mixture models.

Matrices are row-major nested lists; speed and scaled_weight accept a
scalar (broadcast over states) or a per-state list. schema_version is
mandatory so future layout changes stay detectable. Unknown keys are
rejected rather than ignored, naming the offender.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ModelValidationError
from .mixture import MixtureModel, build_mixture

__all__ = ["ModelLabels", "load_model", "loads_model", "dump_model", "write_model"]

SCHEMA_VERSION = 1

_REQUIRED = ("schema_version", "transient_rates", "initial")
_OPTIONAL = ("exit_rates", "speed", "scaled_weight", "state_labels",
             "absorbing_labels", "require_absorbing")


@dataclass(frozen=True)
class ModelLabels:
    """Display names for transient states and absorbing causes."""

    states: tuple[str, ...]
    absorbing: tuple[str, ...]

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError as exc:
            raise ModelValidationError(
                f"unknown state label {name!r}; known: {list(self.states)}"
            ) from exc


def _default_labels(model: MixtureModel) -> ModelLabels:
    return ModelLabels(
        states=tuple(f"state_{k + 1}" for k in range(model.n_transient)),
        absorbing=tuple(f"absorbing_{k + 1}" for k in range(model.n_absorbing)),
    )


def loads_model(text: str) -> tuple[MixtureModel, ModelLabels]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"model file is not valid JSON: {exc}") from exc
    return _from_dict(raw)


def load_model(path) -> tuple[MixtureModel, ModelLabels]:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read())


def _from_dict(raw) -> tuple[MixtureModel, ModelLabels]:
    if not isinstance(raw, dict):
        raise ModelValidationError("model file must be a JSON object")
    unknown = [k for k in raw if k not in _REQUIRED + _OPTIONAL]
    if unknown:
        raise ModelValidationError(
            f"unknown model file keys {unknown}; allowed: "
            f"{sorted(_REQUIRED + _OPTIONAL)}"
        )
    for key in _REQUIRED:
        if key not in raw:
            raise ModelValidationError(f"model file is missing required key {key!r}")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ModelValidationError(
            f"unsupported schema_version {raw['schema_version']!r}, "
            f"this build reads version {SCHEMA_VERSION}"
        )
    try:
        T = np.array(raw["transient_rates"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelValidationError(f"transient_rates is not numeric: {exc}") from exc
    D = None
    if "exit_rates" in raw:
        try:
            D = np.array(raw["exit_rates"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ModelValidationError(f"exit_rates is not numeric: {exc}") from exc
    model = build_mixture(
        T, D,
        speed=raw.get("speed", 1.0),
        initial=np.array(raw["initial"], dtype=float),
        scaled_weight=raw.get("scaled_weight", 0.0),
        require_absorbing=bool(raw.get("require_absorbing", True)),
    )
    labels = _default_labels(model)
    if "state_labels" in raw:
        names = tuple(str(s) for s in raw["state_labels"])
        if len(names) != model.n_transient:
            raise ModelValidationError(
                f"state_labels has {len(names)} entries, model has "
                f"{model.n_transient} transient states"
            )
        labels = ModelLabels(states=names, absorbing=labels.absorbing)
    if "absorbing_labels" in raw:
        names = tuple(str(s) for s in raw["absorbing_labels"])
        if len(names) != model.n_absorbing:
            raise ModelValidationError(
                f"absorbing_labels has {len(names)} entries, model has "
                f"{model.n_absorbing} absorbing states"
            )
        labels = ModelLabels(states=labels.states, absorbing=names)
    return model, labels


def dump_model(model: MixtureModel, labels: ModelLabels | None = None) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "transient_rates": model.gen.sub_generator.tolist(),
        "exit_rates": model.gen.exit_rates.tolist(),
        "speed": model.speed.tolist(),
        "initial": model.initial.tolist(),
        "scaled_weight": model.scaled_weight.tolist(),
    }
    if not model.gen.absorption_certain:
        out["require_absorbing"] = False
    if labels is not None:
        out["state_labels"] = list(labels.states)
        out["absorbing_labels"] = list(labels.absorbing)
    return out


def write_model(path, model: MixtureModel, labels: ModelLabels | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dump_model(model, labels), fh, indent=2)
        fh.write("\n")
