"""Closed-form values and optimal strategies for the single-field game.

Two players fight over one field. Red commits a random allocation ``X`` with
``E[X] <= R`` before anything happens. With probability ``u`` (the scouting
or detection probability) Blue observes the realised allocation and either
*calls* -- matches it exactly and wins, ties going to Blue -- or folds.
With probability ``1 - u`` nothing is revealed and Blue plays a fallback
random allocation ``Z``. Blue's strategy is the pair ``(t, Z)`` where
``t(x)`` is the probability of calling a revealed ``x``; his spending must
satisfy ``u*E[t(X)*X] + (1-u)*E[Z] <= B`` in expectation.

The game splits into three regimes of the resource ratio ``B/R``:

* ``B/R <= u``     info-rich: Red pins her allocation at ``R``; Blue calls a
  fixed fraction of revealed fields and never spends otherwise.
* ``u <= B/R <= 1`` contested: Red plays uniform on ``[0, 2R]``; Blue always
  calls and mirrors the uniform with probability ``p`` as fallback.
* ``B/R >= 1``     blue-dominant: Red mixes an atom at 0 with a uniform on a
  stretched interval ``[0, 2C]``; Blue always calls and mirrors the uniform.

Everything in this module is an exact closed form over finite mixtures of
atoms and uniform intervals.  Nothing is simulated here; independent
certification of these formulas lives in :mod:`lotto_scouts.verification`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Atom",
    "BlueStrategy",
    "CallPolicy",
    "Case",
    "GameParams",
    "MixedAllocation",
    "Solution",
    "Uniform",
    "blue_budget_usage",
    "classify_case",
    "game_value",
    "payoff_exact",
    "solve",
]

# Mixture weights below this are treated as numerically zero and dropped.
WEIGHT_EPS = 1e-12


class Case(str, enum.Enum):
    """Regime of a single-field instance, ordered by the spec's tie-break."""

    INFO_RICH = "InfoRich"
    CONTESTED = "Contested"
    BLUE_DOMINANT = "BlueDominant"


@dataclass(frozen=True, slots=True)
class GameParams:
    """Instance of the single-field game: budgets ``B``, ``R`` and scouting probability ``u``."""

    blue_budget: float
    red_budget: float
    detect_prob: float

    def __post_init__(self):
        if not math.isfinite(self.blue_budget) or self.blue_budget < 0:
            raise ValueError(f"blue budget must be finite and >= 0, got {self.blue_budget}")
        if not math.isfinite(self.red_budget) or self.red_budget <= 0:
            raise ValueError(f"red budget must be finite and > 0, got {self.red_budget}")
        if not 0.0 <= self.detect_prob <= 1.0:
            raise ValueError(f"detection probability must lie in [0, 1], got {self.detect_prob}")

    @property
    def ratio(self) -> float:
        """Resource ratio ``B/R``, the quantity the regime split keys on."""
        return self.blue_budget / self.red_budget


@dataclass(frozen=True, slots=True)
class Atom:
    """Deterministic allocation of ``point`` resources."""

    point: float

    def __post_init__(self):
        if not math.isfinite(self.point) or self.point < 0:
            raise ValueError(f"atom must sit at a finite point >= 0, got {self.point}")


@dataclass(frozen=True, slots=True)
class Uniform:
    """Uniform random allocation on ``[lo, hi)``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi) or not math.isfinite(self.hi):
            raise ValueError(f"uniform support needs 0 <= lo < hi < inf, got [{self.lo}, {self.hi}]")


AllocationComponent = Atom | Uniform


def _component_mean(comp: AllocationComponent) -> float:
    if isinstance(comp, Atom):
        return comp.point
    return 0.5 * (comp.lo + comp.hi)


def _component_cdf(comp: AllocationComponent, x: float) -> float:
    # P(component <= x), right-continuous: an atom at x is counted.
    if isinstance(comp, Atom):
        return 1.0 if x >= comp.point else 0.0
    return min(max((x - comp.lo) / (comp.hi - comp.lo), 0.0), 1.0)


def _component_sf(comp: AllocationComponent, x: float) -> float:
    # P(component >= x); an atom at x is counted (ties go to Blue).
    if isinstance(comp, Atom):
        return 1.0 if comp.point >= x else 0.0
    return min(max((comp.hi - x) / (comp.hi - comp.lo), 0.0), 1.0)


@dataclass(frozen=True)
class MixedAllocation:
    """Finite mixture of atoms and uniform intervals.

    ``components`` is a tuple of ``(weight, component)`` pairs. Weights must
    be positive and sum to one; weights below ``WEIGHT_EPS`` are dropped and
    the remainder renormalised, so degenerate mixtures collapse cleanly.
    """

    components: tuple[tuple[float, AllocationComponent], ...]

    def __post_init__(self):
        kept = [(w, c) for w, c in self.components if w > WEIGHT_EPS]
        if not kept:
            raise ValueError("mixture has no component with positive weight")
        if any(w < 0 or not math.isfinite(w) for w, _ in self.components):
            raise ValueError("mixture weights must be finite and nonnegative")
        total = math.fsum(w for w, _ in kept)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixture weights must sum to 1, got {total}")
        if abs(total - 1.0) > WEIGHT_EPS or len(kept) != len(self.components):
            kept = [(w / total, c) for w, c in kept]
        object.__setattr__(self, "components", tuple(kept))

    @classmethod
    def atom(cls, point: float) -> "MixedAllocation":
        return cls(((1.0, Atom(point)),))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "MixedAllocation":
        return cls(((1.0, Uniform(lo, hi)),))

    @classmethod
    def mix(cls, *parts: tuple[float, AllocationComponent]) -> "MixedAllocation":
        return cls(tuple(parts))

    def mean(self) -> float:
        return math.fsum(w * _component_mean(c) for w, c in self.components)

    def cdf(self, x: float) -> float:
        """P(allocation <= x), right-continuous; atoms at ``x`` are included."""
        return math.fsum(w * _component_cdf(c, x) for w, c in self.components)

    def prob_at_least(self, x: float) -> float:
        """P(allocation >= x); atoms at ``x`` are included."""
        return math.fsum(w * _component_sf(c, x) for w, c in self.components)

    def support_max(self) -> float:
        return max(c.point if isinstance(c, Atom) else c.hi for _, c in self.components)


@dataclass(frozen=True)
class CallPolicy:
    """Piecewise-constant calling probability ``t : [0, inf) -> [0, 1]``.

    ``t(x) = values[i]`` for ``x`` in ``[breakpoints[i-1], breakpoints[i])``
    with the convention ``breakpoints[-1] = 0`` and an implicit final piece
    to infinity; the policy is right-continuous. Constant policies (the only
    optimal ones) have no breakpoints.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ValueError("call probabilities must lie in [0, 1]")
        bp = self.breakpoints
        if any(b <= 0 or not math.isfinite(b) for b in bp) or any(
            bp[i] >= bp[i + 1] for i in range(len(bp) - 1)
        ):
            raise ValueError("breakpoints must be finite, positive and strictly increasing")

    @classmethod
    def constant(cls, prob: float) -> "CallPolicy":
        return cls((), (prob,))

    def __call__(self, x):
        """Evaluate the policy at a scalar or array of allocations."""
        idx = np.searchsorted(self.breakpoints, x, side="right")
        out = np.asarray(self.values, dtype=float)[idx]
        return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out

    def _edges(self) -> np.ndarray:
        return np.array([0.0, *self.breakpoints, np.inf])

    def expected_call(self, alloc: MixedAllocation) -> float:
        """E[t(X)] for a mixed allocation X, by exact integration."""
        edges, vals = self._edges(), np.asarray(self.values)
        total = 0.0
        for w, comp in alloc.components:
            if isinstance(comp, Atom):
                total += w * self(comp.point)
            else:
                lo_c = np.clip(edges[:-1], comp.lo, comp.hi)
                hi_c = np.clip(edges[1:], comp.lo, comp.hi)
                total += w * float(vals @ (hi_c - lo_c)) / (comp.hi - comp.lo)
        return total

    def expected_call_cost(self, alloc: MixedAllocation) -> float:
        """E[t(X) * X]: the expected spend of calling under this policy."""
        edges, vals = self._edges(), np.asarray(self.values)
        total = 0.0
        for w, comp in alloc.components:
            if isinstance(comp, Atom):
                total += w * self(comp.point) * comp.point
            else:
                lo_c = np.clip(edges[:-1], comp.lo, comp.hi)
                hi_c = np.clip(edges[1:], comp.lo, comp.hi)
                total += w * float(vals @ (hi_c**2 - lo_c**2)) / (2.0 * (comp.hi - comp.lo))
        return total


@dataclass(frozen=True)
class BlueStrategy:
    """Blue's strategy: a call policy plus the fallback allocation ``Z``."""

    call: CallPolicy
    fallback: MixedAllocation


@dataclass(frozen=True)
class Solution:
    """Optimal play for one instance.

    ``p``, ``q`` and ``big_c`` are the derived strategy parameters of the
    contested and blue-dominant regimes; they are ``None`` where undefined.
    """

    case: Case
    value: float
    red: MixedAllocation
    blue: BlueStrategy
    p: float | None = field(default=None)
    q: float | None = field(default=None)
    big_c: float | None = field(default=None)


def classify_case(params: GameParams) -> Case:
    """Regime of the instance; boundary ties go to the lower-indexed case.

    At ``B/R == u`` and ``B/R == 1`` the adjacent value formulas agree, so
    the deterministic tie-break is observationally irrelevant for the value.
    """
    if params.ratio <= params.detect_prob:
        return Case.INFO_RICH
    if params.ratio <= 1.0:
        return Case.CONTESTED
    return Case.BLUE_DOMINANT


def game_value(params: GameParams) -> float:
    """Exact value of the game (Blue's winning probability under optimal play)."""
    r, u = params.ratio, params.detect_prob
    case = classify_case(params)
    if case is Case.INFO_RICH:
        return r
    if case is Case.CONTESTED:
        return 0.5 * (u + r)
    return 1.0 - (1.0 - u) ** 2 / (2.0 * (r - u))


def solve(params: GameParams) -> Solution:
    """Optimal strategies for both players, plus the value and derived parameters.

    Degenerate mixture weights collapse to single components. The edge
    ``u == 1`` with ``B > R`` has no finite mirrored interval (the stretched
    support diverges); there Red plays the atom at ``R``, Blue always calls
    and the fallback is irrelevant, spending ``R <= B``. For every other
    instance the returned strategies spend exactly ``B`` and ``R``.
    """
    case = classify_case(params)
    value = game_value(params)
    B, R, u = params.blue_budget, params.red_budget, params.detect_prob

    if case is Case.INFO_RICH:
        # u == 0 forces B == 0 here; Blue can never afford a call.
        t_star = 0.0 if B == 0.0 else B / (u * R)
        red = MixedAllocation.atom(R)
        blue = BlueStrategy(CallPolicy.constant(t_star), MixedAllocation.atom(0.0))
        return Solution(case, value, red, blue)

    if case is Case.CONTESTED:
        p = (params.ratio - u) / (1.0 - u)
        red = MixedAllocation.uniform(0.0, 2.0 * R)
        fallback = MixedAllocation.mix((p, Uniform(0.0, 2.0 * R)), (1.0 - p, Atom(0.0)))
        blue = BlueStrategy(CallPolicy.constant(1.0), fallback)
        return Solution(case, value, red, blue, p=p)

    if u == 1.0:
        # Perfectly scouted: Blue calls everything, any Red loses everything.
        red = MixedAllocation.atom(R)
        blue = BlueStrategy(CallPolicy.constant(1.0), MixedAllocation.atom(0.0))
        return Solution(case, value, red, blue, q=0.0)

    q = (1.0 - u) / (params.ratio - u)
    big_c = R / q
    red = MixedAllocation.mix((q, Uniform(0.0, 2.0 * big_c)), (1.0 - q, Atom(0.0)))
    blue = BlueStrategy(CallPolicy.constant(1.0), MixedAllocation.uniform(0.0, 2.0 * big_c))
    return Solution(case, value, red, blue, q=q, big_c=big_c)


def _pair_win_prob(z: AllocationComponent, x: AllocationComponent) -> float:
    """P(Z >= X) for one component pair, ties resolved in Blue's favour."""
    if isinstance(z, Atom) and isinstance(x, Atom):
        return 1.0 if z.point >= x.point else 0.0
    if isinstance(z, Uniform) and isinstance(x, Atom):
        return min(max((z.hi - x.point) / (z.hi - z.lo), 0.0), 1.0)
    if isinstance(z, Atom) and isinstance(x, Uniform):
        return min(max((z.point - x.lo) / (x.hi - x.lo), 0.0), 1.0)
    # Uniform vs uniform: integrate P(Z >= x) over x, splitting at z.lo, z.hi.
    a, b = z.lo, z.hi
    c, d = x.lo, x.hi
    full = max(0.0, min(d, a) - c)  # x below z's support always loses to Z
    s, e = max(c, a), min(d, b)
    linear = 0.0
    if e > s:
        linear = ((b - s) + (b - e)) * (e - s) / (2.0 * (b - a))
    return (full + linear) / (d - c)


def win_prob(z: MixedAllocation, x: MixedAllocation) -> float:
    """P(Z >= X) for independent mixtures, ties going to Blue."""
    return math.fsum(
        wz * wx * _pair_win_prob(cz, cx) for wz, cz in z.components for wx, cx in x.components
    )


def payoff_exact(blue: BlueStrategy, red: MixedAllocation, u: float) -> float:
    """Blue's expected payoff ``u*E[t(X)] + (1-u)*P(Z >= X)``, in closed form."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"detection probability must lie in [0, 1], got {u}")
    return u * blue.call.expected_call(red) + (1.0 - u) * win_prob(blue.fallback, red)


def blue_budget_usage(blue: BlueStrategy, red: MixedAllocation, u: float) -> float:
    """Blue's expected spend ``u*E[t(X)*X] + (1-u)*E[Z]`` against a fixed Red."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"detection probability must lie in [0, 1], got {u}")
    return u * blue.call.expected_call_cost(red) + (1.0 - u) * blue.fallback.mean()
