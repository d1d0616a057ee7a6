"""Two-stage game over several fields: value bounds via convex surrogates.

Stage one splits each player's total budget over ``n`` weighted fields;
stage two plays the single-field game on every field, so the stage-one
payoff is ``H(B_i, R_i) = sum_i phi_i(B_i / R_i)`` where ``phi_i`` is the
single-field value curve scaled by the field's worth.

``H`` is concave in Blue's split but not convex in Red's, so a Nash
equilibrium need not exist. Two bounds bracket the value:

* upper bound: Red splits proportionally to ``phi_i'(B/R)``; a first-order
  argument caps any Blue reply at ``sum_i phi_i(B/R)``.
* lower bound: replace each ``phi_i`` by ``phi_i^dag``, built so that
  ``x -> phi_i^dag(1/x)`` is the lower convex envelope of ``x -> phi_i(1/x)``.
  The surrogate game is concave-convex, solvable in closed form, and only
  pessimistic for Blue; its value ``sum_i phi_i_dag(B/R)`` is a lower bound.

The envelope switches shape at the detection probability ``2 - sqrt(2)``:
below it the flattened region is described by three breakpoints
``alpha <= beta <= gamma``; above it a single chord does the job. When
every field satisfies one of the coincidence conditions the two bounds
meet and the game value is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BoundsResult",
    "Field",
    "MultistageInstance",
    "SEAM_U",
    "bounds",
    "bounds_coincide",
    "closed_form_upper_sorted",
    "envelope_breakpoints",
    "lower_bound",
    "phi",
    "phi_dagger",
    "phi_dagger_prime",
    "phi_prime",
    "psi",
    "psi_dagger",
    "upper_bound",
]

SQRT2 = math.sqrt(2.0)
# Detection probability at which the envelope switches from the
# three-breakpoint shape to the single-chord shape.
SEAM_U = 2.0 - SQRT2


@dataclass(frozen=True, slots=True)
class Field:
    """One field: its worth and its detection probability."""

    worth: float
    detect_prob: float

    def __post_init__(self):
        if not math.isfinite(self.worth) or self.worth <= 0:
            raise ValueError(f"field worth must be finite and > 0, got {self.worth}")
        if not 0.0 <= self.detect_prob <= 1.0:
            raise ValueError(f"detection probability must lie in [0, 1], got {self.detect_prob}")


@dataclass(frozen=True, slots=True)
class MultistageInstance:
    """Budgets plus at least two fields whose worths sum to one."""

    blue_budget: float
    red_budget: float
    fields: tuple[Field, ...]

    def __post_init__(self):
        if not math.isfinite(self.blue_budget) or self.blue_budget <= 0:
            raise ValueError(f"blue budget must be finite and > 0, got {self.blue_budget}")
        if not math.isfinite(self.red_budget) or self.red_budget <= 0:
            raise ValueError(f"red budget must be finite and > 0, got {self.red_budget}")
        object.__setattr__(self, "fields", tuple(self.fields))
        if len(self.fields) < 2:
            raise ValueError("a multistage instance needs at least two fields")
        total = math.fsum(f.worth for f in self.fields)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"field worths must sum to 1 (within 1e-9), got {total}")

    @property
    def ratio(self) -> float:
        return self.blue_budget / self.red_budget


def phi(x: float, f: Field) -> float:
    """Worth-scaled single-field value as a function of the local ratio."""
    if x < 0:
        raise ValueError(f"resource ratio must be >= 0, got {x}")
    u, w = f.detect_prob, f.worth
    if x <= u:
        return w * x
    if x <= 1.0:
        return w * 0.5 * (x + u)
    return w * (1.0 - (1.0 - u) ** 2 / (2.0 * (x - u)))


def phi_prime(x: float, f: Field) -> float:
    """Right derivative of ``phi``; the kink at ``x == u`` takes the flat side."""
    if x < 0:
        raise ValueError(f"resource ratio must be >= 0, got {x}")
    u, w = f.detect_prob, f.worth
    if x < u:
        return w
    if x < 1.0:
        return w * 0.5
    num = (1.0 - u) ** 2
    den = 2.0 * (x - u) ** 2
    if den == 0.0:  # only u == 1, x == 1: the curve is flat to the right
        return 0.0
    return w * num / den


def psi(x: float, f: Field) -> float:
    """``phi`` in reciprocal coordinates: ``psi(x) = phi(1/x)``."""
    if x <= 0:
        raise ValueError(f"psi needs x > 0, got {x}")
    return phi(1.0 / x, f)


def envelope_breakpoints(f: Field) -> tuple[float, float, float] | None:
    """Breakpoints ``(alpha, beta, gamma)`` of the three-piece envelope.

    Defined for ``0 < u <= 2 - sqrt(2)``; ``None`` otherwise. They satisfy
    ``1 <= alpha <= beta <= 1/u <= gamma`` and degenerate to
    ``alpha == beta == sqrt(2)``, ``gamma == 2`` at the seam.
    """
    u = f.detect_prob
    if u <= 0.0 or u > SEAM_U:
        return None
    alpha = 2.0 / (2.0 - u)
    beta = 2.0 * (SQRT2 - 1.0) / u
    gamma = 2.0 * (2.0 - SQRT2) / u
    return alpha, beta, gamma


def psi_dagger(x: float, f: Field) -> float:
    """Lower convex envelope of ``psi`` (largest convex function below it)."""
    if x <= 0:
        raise ValueError(f"psi_dagger needs x > 0, got {x}")
    u, w = f.detect_prob, f.worth
    if u == 0.0:
        return psi(x, f)  # already convex
    if u >= SEAM_U:
        return w * (1.0 - x / 4.0) if x <= 2.0 else w / x
    alpha, beta, gamma = envelope_breakpoints(f)
    if x <= alpha:
        return w * (1.0 - x / (2.0 * alpha * alpha))
    if x <= beta:
        return w * (0.5 * u + 0.5 / x)
    if x <= gamma:
        return w * (2.0 * gamma - x) / (gamma * gamma)
    return w / x


def phi_dagger(x: float, f: Field) -> float:
    """Surrogate payoff curve: ``psi_dagger`` transformed back, ``phi_dagger(0) = 0``."""
    if x < 0:
        raise ValueError(f"resource ratio must be >= 0, got {x}")
    u, w = f.detect_prob, f.worth
    if u == 0.0:
        return phi(x, f)
    if u >= SEAM_U:
        return w * x if x <= 0.5 else w * (1.0 - 1.0 / (4.0 * x))
    alpha, beta, gamma = envelope_breakpoints(f)
    if x <= 1.0 / gamma:
        return w * x
    if x <= 1.0 / beta:
        return w * (2.0 * gamma * x - 1.0) / (gamma * gamma * x)
    if x <= 1.0 / alpha:
        return w * 0.5 * (u + x)
    return w * (1.0 - 1.0 / (2.0 * alpha * alpha * x))


def phi_dagger_prime(x: float, f: Field) -> float:
    """Derivative of ``phi_dagger`` (the surrogate is C^1, so one-sided issues vanish)."""
    if x < 0:
        raise ValueError(f"resource ratio must be >= 0, got {x}")
    u, w = f.detect_prob, f.worth
    if u == 0.0:
        return w * 0.5 if x <= 1.0 else w / (2.0 * x * x)
    if u >= SEAM_U:
        return w if x <= 0.5 else w / (4.0 * x * x)
    alpha, beta, gamma = envelope_breakpoints(f)
    if x <= 1.0 / gamma:
        return w
    if x <= 1.0 / beta:
        return w / (gamma * gamma * x * x)
    if x <= 1.0 / alpha:
        return w * 0.5
    return w / (2.0 * alpha * alpha * x * x)


def upper_bound(inst: MultistageInstance) -> tuple[float, list[float]]:
    """Upper bound on the game value and the Red split that certifies it.

    Value is ``sum_i phi_i(B/R)``; Red's split is proportional to the
    derivatives ``phi_i'(B/R)``. At a kink ``B/R == u_i`` the right
    derivative is used, which equals nudging that ``u_i`` down by an
    epsilon. If every derivative vanishes (all fields have ``u_i == 1``
    and ``B/R >= 1``) any split certifies the bound; worths are used.
    """
    r = inst.ratio
    value = math.fsum(phi(r, f) for f in inst.fields)
    slopes = [phi_prime(r, f) for f in inst.fields]
    total = math.fsum(slopes)
    if total == 0.0:
        slopes, total = [f.worth for f in inst.fields], 1.0
    allocation = [inst.red_budget * s / total for s in slopes]
    return value, allocation


def closed_form_upper_sorted(inst: MultistageInstance) -> float:
    """The upper bound rewritten by sorting fields on detection probability.

    With ``k`` fields satisfying ``u_i < B/R`` (and ``B/R`` strictly between
    adjacent sorted ``u``'s), the bound is
    ``0.5 * sum_{i<=k} w_i u_i + (B/R) * (1 - w_(k) / 2)``. Only derived for
    ``B/R < 1``; must agree with :func:`upper_bound` wherever defined.
    """
    r = inst.ratio
    if r >= 1.0:
        raise ValueError(f"closed form requires B/R < 1, got {r}")
    if any(f.detect_prob == r for f in inst.fields):
        raise ValueError("closed form requires B/R to differ from every detection probability")
    low = [f for f in inst.fields if f.detect_prob < r]
    w_k = math.fsum(f.worth for f in low)
    return 0.5 * math.fsum(f.worth * f.detect_prob for f in low) + r * (1.0 - 0.5 * w_k)


def lower_bound(inst: MultistageInstance) -> tuple[float, list[tuple[float, float]]]:
    """Value of the surrogate game and the common split that attains it.

    The surrogate's unique equilibrium splits both budgets with weights
    ``c_i`` proportional to ``phi_i_dag'(B/R)``; those derivatives are
    strictly positive, so every field receives resources.
    """
    r = inst.ratio
    value = math.fsum(phi_dagger(r, f) for f in inst.fields)
    slopes = [phi_dagger_prime(r, f) for f in inst.fields]
    total = math.fsum(slopes)
    allocation = [
        (inst.blue_budget * s / total, inst.red_budget * s / total) for s in slopes
    ]
    return value, allocation


def _coincidence_label(r: float, f: Field) -> str:
    u = f.detect_prob
    if u == 0.0:
        return "i"
    if u <= SEAM_U:
        if r <= u / (2.0 * (2.0 - SQRT2)):
            return "ii-low"
        if u / (2.0 * (SQRT2 - 1.0)) <= r <= 1.0 - 0.5 * u:
            return "ii-mid"
    if u >= SEAM_U and r <= 0.5:
        return "iii"
    return "none"


def bounds_coincide(inst: MultistageInstance) -> tuple[bool, list[str]]:
    """Whether the bound pair is tight, with the condition met per field.

    A field passes when (i) ``u == 0``; (ii) ``0 < u <= 2 - sqrt(2)`` and
    the ratio is below ``1/gamma`` or inside ``[1/beta, 1/alpha]``; or
    (iii) ``u >= 2 - sqrt(2)`` and the ratio is at most one half. Fields
    that pass none are labelled ``"none"``.
    """
    labels = [_coincidence_label(inst.ratio, f) for f in inst.fields]
    return all(lab != "none" for lab in labels), labels


@dataclass(frozen=True)
class BoundsResult:
    """Both bounds with their certifying allocations and coincidence report."""

    upper: float
    lower: float
    coincide: bool
    red_upper_allocation: tuple[float, ...]
    dagger_allocation: tuple[tuple[float, float], ...]
    coincide_reasons: tuple[str, ...]


def bounds(inst: MultistageInstance) -> BoundsResult:
    """Evaluate both bounds and the coincidence test in one call."""
    upper, red_alloc = upper_bound(inst)
    lower, dag_alloc = lower_bound(inst)
    coincide, labels = bounds_coincide(inst)
    return BoundsResult(
        upper=upper,
        lower=lower,
        coincide=coincide,
        red_upper_allocation=tuple(red_alloc),
        dagger_allocation=tuple(dag_alloc),
        coincide_reasons=tuple(labels),
    )
