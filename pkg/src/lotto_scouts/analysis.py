"""Information-versus-strength metrics built on the single-field value.

Everything here interrogates the closed-form value surface: its partial
derivatives with respect to information and resources, the influence ratio
(the marginal worth of information measured in resources), the resource
ratio needed to reach a target value, and the weapons-mix optimiser that
splits a fixed budget between resources (unit cost) and information
(cost ``c`` per unit of detection probability, Red's budget pinned at 1).

Derivative conventions: at regime boundaries the right derivative is
returned, so along the exploitation line ``B = u R`` extra information is
already worthless while extra resources still pay half rate. The influence
ratio therefore jumps there by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .single_field import GameParams, game_value

__all__ = [
    "BudgetProblem",
    "MixSolution",
    "SweepTable",
    "influence_ratio",
    "required_ratio",
    "sweep",
    "value_partial_B",
    "value_partial_u",
    "weapons_mix",
]

_MIX_GRID_STEP = 1e-4
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, slots=True)
class BudgetProblem:
    """Weapons-mix instance: total budget ``D`` and information price ``c``.

    Red's budget is fixed at 1, so Blue's resources are bought at unit cost
    and the constraint is ``B + c*u <= D``.
    """

    total_budget: float
    info_cost: float

    def __post_init__(self):
        if not math.isfinite(self.total_budget) or self.total_budget <= 0:
            raise ValueError(f"total budget must be finite and > 0, got {self.total_budget}")
        if not math.isfinite(self.info_cost) or self.info_cost <= 0:
            raise ValueError(f"information cost must be finite and > 0, got {self.info_cost}")


@dataclass(frozen=True, slots=True)
class MixSolution:
    """Optimal budget split: game value, purchases, and any surplus budget."""

    value: float
    blue_budget: float
    info: float
    unused: float


def value_partial_u(blue_budget: float, red_budget: float, detect_prob: float) -> float:
    """Partial derivative of the value in the detection probability.

    Zero when information already outstrips resources (``B/R <= u``, right
    derivative at the boundary), one half in the contested band, and the
    smooth expression beyond parity.
    """
    p = GameParams(blue_budget, red_budget, detect_prob)
    r, u = p.ratio, p.detect_prob
    if r <= u:
        return 0.0
    if r <= 1.0:
        return 0.5
    return (1.0 - u) * (2.0 * r - 1.0 - u) / (2.0 * (r - u) ** 2)


def value_partial_B(blue_budget: float, red_budget: float, detect_prob: float) -> float:
    """Partial derivative of the value in Blue's budget (right derivative at kinks)."""
    p = GameParams(blue_budget, red_budget, detect_prob)
    r, u, R = p.ratio, p.detect_prob, p.red_budget
    if r < u:
        return 1.0 / R
    if r <= 1.0:
        return 0.5 / R
    return (1.0 - u) ** 2 / (2.0 * R * (r - u) ** 2)


def influence_ratio(blue_budget: float, red_budget: float, detect_prob: float) -> float:
    """Marginal value of information relative to resources, ``(V_u / V_B) / R``.

    Evaluates to 0 above the exploitation line ``B = u R``, exactly 1 in the
    contested band, and ``1 + 2 (B/R - 1) / (1 - u)`` beyond parity; with
    perfect information and surplus resources the ratio is infinite.
    """
    p = GameParams(blue_budget, red_budget, detect_prob)
    r, u = p.ratio, p.detect_prob
    if r <= u:
        return 0.0
    if r <= 1.0:
        return 1.0
    if u == 1.0:
        return math.inf
    return 1.0 + 2.0 * (r - 1.0) / (1.0 - u)


def required_ratio(value: float, detect_prob: float) -> float:
    """Resource ratio ``B/R`` needed to reach ``value`` given information ``u``.

    This is the contour line of the value surface. A target of exactly 1 is
    reachable only with perfect information; for ``u < 1`` the requirement
    diverges and infinity is returned as the documented sentinel.
    """
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"target value must lie in [0, 1], got {value}")
    if not 0.0 <= detect_prob <= 1.0:
        raise ValueError(f"detection probability must lie in [0, 1], got {detect_prob}")
    v, u = value, detect_prob
    if v == 1.0:
        return 1.0 if u == 1.0 else math.inf
    if u >= v:
        return v
    if u >= 2.0 * v - 1.0:
        return 2.0 * v - u
    return u + (1.0 - u) ** 2 / (2.0 * (1.0 - v))


def _value_on_ratio_grid(ratio: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorised game value over broadcastable arrays of ``B/R`` and ``u``."""
    ratio = np.asarray(ratio, dtype=float)
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        dominant = 1.0 - (1.0 - u) ** 2 / (2.0 * (ratio - u))
    return np.where(ratio <= u, ratio, np.where(ratio <= 1.0, 0.5 * (u + ratio), dominant))


def _golden_max(f, lo: float, hi: float, tol: float = 1e-11) -> tuple[float, float]:
    """Golden-section maximum of a unimodal ``f`` on ``[lo, hi]``; ties go left."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def weapons_mix(prob: BudgetProblem) -> MixSolution:
    """Best split of the budget between resources and information.

    Spending the whole budget is optimal below value 1 (the value is
    nondecreasing in ``B``), so the search runs along ``B = D - c*u``: a
    fine grid over ``u`` followed by golden-section refinement inside the
    bracketing smooth piece (the objective only kinks where the regime of
    ``(B, u)`` changes). A budget of at least ``1 + c`` buys perfect
    information plus matching resources and wins outright; the cheapest
    such bundle is reported and the surplus marked unused. Ties between
    equal-value optima resolve to the smallest information purchase.
    """
    D, c = prob.total_budget, prob.info_cost
    if D >= 1.0 + c:
        return MixSolution(value=1.0, blue_budget=1.0, info=1.0, unused=D - 1.0 - c)

    u_max = min(1.0, D / c)
    grid = np.arange(0.0, u_max + 0.5 * _MIX_GRID_STEP, _MIX_GRID_STEP)
    grid[-1] = min(grid[-1], u_max)
    vals = _value_on_ratio_grid(np.maximum(D - c * grid, 0.0), grid)
    best = int(np.argmax(vals))  # first maximum: prefers smaller u on ties

    def objective(u: float) -> float:
        return game_value(GameParams(max(D - c * u, 0.0), 1.0, u))

    lo = max(0.0, grid[best] - _MIX_GRID_STEP)
    hi = min(u_max, grid[best] + _MIX_GRID_STEP)
    # Kinks of the objective along the budget line: regime changes at
    # B = u (u = D/(1+c)) and B = 1 (u = (D-1)/c).
    knots = sorted({lo, hi} | {k for k in (D / (1.0 + c), (D - 1.0) / c) if lo < k < hi})
    candidates = [(float(u), objective(float(u))) for u in (*knots, grid[best])]
    for a, b in zip(knots[:-1], knots[1:]):
        candidates.append(_golden_max(objective, a, b))
    u_star, value = max(candidates, key=lambda t: (t[1], -t[0]))
    b_star = max(D - c * u_star, 0.0)
    return MixSolution(value=value, blue_budget=b_star, info=u_star, unused=0.0)


class SweepTable(NamedTuple):
    """Rectangular result table: column names plus rows in deterministic order."""

    columns: tuple[str, ...]
    rows: list[tuple[float, ...]]


def _check_axis(name: str, axis: Sequence[float]) -> np.ndarray:
    arr = np.asarray(axis, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"axis {name!r} must be a non-empty 1-d sequence")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError(f"axis {name!r} must be strictly increasing")
    return arr


def sweep(kind: str, **axes: Iterable[float]) -> SweepTable:
    """Tabulate one of the standard parameter sweeps.

    Supported kinds and their axes/columns:

    * ``value_vs_ratio`` (``us``, ``ratios``) -> ``u, ratio, value``
    * ``value_vs_u`` (``ratios``, ``us``) -> ``ratio, u, value``
    * ``value_heatmap`` / ``contours`` (``ratios``, ``us``) -> ``ratio, u, value``
    * ``ir_heatmap`` (``bs``, ``us``) -> ``B, u, ir`` (Red's budget fixed at 1)
    * ``budget_curves`` (``cs``, ``ds``) -> ``D, c, value, u_star, B_star, unused``

    The first listed axis is the outer (family) loop; rows appear in axis
    order, so output is deterministic.
    """
    if kind in ("value_vs_ratio",):
        us = _check_axis("us", axes.pop("us"))
        ratios = _check_axis("ratios", axes.pop("ratios"))
        rows = [
            (float(u), float(r), game_value(GameParams(float(r), 1.0, float(u))))
            for u in us
            for r in ratios
        ]
        table = SweepTable(("u", "ratio", "value"), rows)
    elif kind in ("value_vs_u", "value_heatmap", "contours"):
        ratios = _check_axis("ratios", axes.pop("ratios"))
        us = _check_axis("us", axes.pop("us"))
        rows = [
            (float(r), float(u), game_value(GameParams(float(r), 1.0, float(u))))
            for r in ratios
            for u in us
        ]
        table = SweepTable(("ratio", "u", "value"), rows)
    elif kind == "ir_heatmap":
        bs = _check_axis("bs", axes.pop("bs"))
        us = _check_axis("us", axes.pop("us"))
        rows = [
            (float(b), float(u), influence_ratio(float(b), 1.0, float(u)))
            for b in bs
            for u in us
        ]
        table = SweepTable(("B", "u", "ir"), rows)
    elif kind == "budget_curves":
        cs = _check_axis("cs", axes.pop("cs"))
        ds = _check_axis("ds", axes.pop("ds"))
        rows = []
        for c in cs:
            for d in ds:
                mix = weapons_mix(BudgetProblem(float(d), float(c)))
                rows.append((float(d), float(c), mix.value, mix.info, mix.blue_budget, mix.unused))
        table = SweepTable(("D", "c", "value", "u_star", "B_star", "unused"), rows)
    else:
        raise ValueError(f"unknown sweep kind {kind!r}")
    if axes:
        raise ValueError(f"unexpected axes for {kind!r}: {sorted(axes)}")
    return table
