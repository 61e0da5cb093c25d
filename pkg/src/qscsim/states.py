"""Two-level input states and Born-rule arithmetic.

The discrimination protocol works on a single qubit-like degree of freedom
with orthonormal basis branches B1 and B2.  The two canonical inputs are the
definite branch-1 state (weight ``p1 = 1``) and an equal-weight superposition
(``p1 = 0.5``); general branch-1 weight is exposed so sweeps can explore the
whole family.  Amplitudes are restricted to real nonnegative values at
construction: nothing downstream is phase-sensitive, so phases would only add
untestable degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

#: Branch-2 weight below which a state counts as definite (and normalization slack).
DEFINITE_WEIGHT_TOL = 1e-12
NORM_TOL = 1e-12


class InputKind(Enum):
    DEFINITE = "definite"
    SUPERPOSITION = "superposition"


class Branch(Enum):
    """Collapse outcome: B1 is the branch the definite input occupies."""

    B1 = "b1"
    B2 = "b2"


@dataclass(frozen=True)
class InputState:
    """Normalized two-level state with real nonnegative amplitudes.

    ``kind`` is redundant with the amplitudes (definite iff the branch-2
    weight is below ``DEFINITE_WEIGHT_TOL``) and is validated against them.
    Instances are immutable and safe to share between trial workers.
    """

    a1: float
    a2: float
    kind: InputKind

    def __post_init__(self) -> None:
        if self.a1 < 0.0 or self.a2 < 0.0:
            raise ValueError("amplitudes must be real and nonnegative")
        norm = self.a1 * self.a1 + self.a2 * self.a2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |a1|^2 + |a2|^2 = {norm!r}")
        definite = self.a2 * self.a2 < DEFINITE_WEIGHT_TOL
        if definite != (self.kind is InputKind.DEFINITE):
            raise ValueError(
                f"kind {self.kind.value} inconsistent with branch-2 weight {self.a2 * self.a2!r}"
            )


def make_input_state(kind: InputKind, p1: float) -> InputState:
    """Build the input state with branch-1 weight ``p1``.

    ``kind`` declares the caller's intent: DEFINITE requires ``p1 = 1``
    exactly, while a SUPERPOSITION whose ``p1`` is within
    ``DEFINITE_WEIGHT_TOL`` of 1 is constructed as definite (the stored kind
    follows the amplitudes, not the request).

    Raises:
        ValueError: ``p1`` outside [0, 1], or DEFINITE with ``p1 != 1``.
    """
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 must be in [0, 1], got {p1!r}")
    if kind is InputKind.DEFINITE and p1 != 1.0:
        raise ValueError(f"definite input requires p1 = 1, got {p1!r}")
    p2 = 1.0 - p1
    stored = InputKind.DEFINITE if p2 < DEFINITE_WEIGHT_TOL else InputKind.SUPERPOSITION
    return InputState(a1=math.sqrt(p1), a2=math.sqrt(p2), kind=stored)


def born_probability(state: InputState) -> float:
    """Probability that a collapse of ``state`` lands on branch B1."""
    return state.a1 * state.a1


def state_fidelity(a: InputState, b: InputState) -> float:
    """Squared overlap of two states; 0 for orthogonal, 1 for identical."""
    ip = a.a1 * b.a1 + a.a2 * b.a2
    return ip * ip
