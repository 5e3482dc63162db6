"""Worked marital-status example models.

A four-state marital history (never married, married, separated,
widowed) with death absorbing, plus a competing-risks variant where
widowhood is itself treated as an absorbing endpoint (its re-marriage
rate removed). The heterogeneous versions slow one subpopulation down
to a quarter of the base rates with a fifty-fifty prior in every state;
the homogeneous versions keep everyone at base speed.
"""

from __future__ import annotations

import numpy as np

from .mixture import MixtureModel, build_mixture
from .modelfile import ModelLabels

__all__ = [
    "STATE_NEVER_MARRIED",
    "STATE_MARRIED",
    "STATE_SEPARATED",
    "STATE_WIDOWED",
    "CAUSE_WIDOWED",
    "CAUSE_DEAD",
    "marriage_model",
    "marriage_competing_model",
]

STATE_NEVER_MARRIED = 0
STATE_MARRIED = 1
STATE_SEPARATED = 2
STATE_WIDOWED = 3

# Cause ids of the competing variant.
CAUSE_WIDOWED = 0
CAUSE_DEAD = 1

_SLOW_SPEED = 0.25
_SLOW_PRIOR = 0.5


def marriage_model(heterogeneous: bool = True) -> tuple[MixtureModel, ModelLabels]:
    """Four transient marital states with death as the single endpoint."""
    T = np.array([
        [-0.95, 0.95, 0.00, 0.00],
        [0.00, -0.37, 0.25, 0.05],
        [0.00, 0.00, -0.60, 0.10],
        [0.00, 0.85, 0.00, -0.85],
    ])
    D = np.array([[0.00], [0.07], [0.50], [0.00]])
    initial = np.array([0.5, 0.3, 0.1, 0.1])
    speed = _SLOW_SPEED if heterogeneous else 1.0
    weight = _SLOW_PRIOR if heterogeneous else 0.0
    model = build_mixture(T, D, speed=speed, initial=initial, scaled_weight=weight)
    labels = ModelLabels(
        states=("never_married", "married", "separated", "widowed"),
        absorbing=("dead",),
    )
    return model, labels


def marriage_competing_model(heterogeneous: bool = True) -> tuple[MixtureModel, ModelLabels]:
    """Competing-risks variant: widowhood absorbs (no re-marriage) and
    competes with death.

    The initial distribution keeps only the never married, married, and
    separated mass of the single-endpoint model; the widowed share is
    already absorbed at time zero, so the model is defective by 0.1.
    """
    T = np.array([
        [-0.95, 0.95, 0.00],
        [0.00, -0.37, 0.25],
        [0.00, 0.00, -0.60],
    ])
    D = np.array([
        [0.00, 0.00],
        [0.05, 0.07],
        [0.10, 0.50],
    ])
    initial = np.array([0.5, 0.3, 0.1])
    speed = _SLOW_SPEED if heterogeneous else 1.0
    weight = _SLOW_PRIOR if heterogeneous else 0.0
    model = build_mixture(T, D, speed=speed, initial=initial, scaled_weight=weight)
    labels = ModelLabels(
        states=("never_married", "married", "separated"),
        absorbing=("widowed", "dead"),
    )
    return model, labels
