"""Independent certification of the closed forms.

Three mechanisms, all free of the formulas they check:

* seeded Monte Carlo play-outs of the actual game mechanics, which must
  agree with :func:`lotto_scouts.single_field.payoff_exact` to statistical
  tolerance;
* a discretised best-response oracle for Blue (a fractional-knapsack /
  concave-hull greedy over call and fallback spending), bounding how much
  any Blue can extract from a fixed Red strategy;
* a discretised best-response oracle for Red (lower convex envelope of
  Blue's pointwise winning probability), bounding how far any Red can push
  a fixed Blue strategy down.

Small exploitability gaps from the oracles certify that the claimed optimal
strategies really are within discretisation error of an equilibrium.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .single_field import (
    Atom,
    BlueStrategy,
    CallPolicy,
    GameParams,
    MixedAllocation,
    Uniform,
    blue_budget_usage,
    game_value,
    solve,
)

__all__ = [
    "BestResponseReport",
    "SimConfig",
    "blue_best_response",
    "exploitability",
    "lower_convex_envelope",
    "monte_carlo_value",
    "red_best_response",
    "sample_allocation",
    "upper_concave_envelope",
]

_BATCH = 1 << 19  # plays per RNG stream; fixed so results don't depend on threading


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo configuration: number of play-outs and the master seed."""

    num_plays: int
    seed: int = 0

    def __post_init__(self):
        if self.num_plays < 1:
            raise ValueError(f"num_plays must be >= 1, got {self.num_plays}")


@dataclass(frozen=True)
class BestResponseReport:
    """Outcome of one oracle run.

    ``gap`` is oriented so that positive values mean the oracle beat the
    supplied reference: ``oracle - reference`` for the Blue oracle and
    ``reference - oracle`` for the Red oracle.
    """

    oracle_payoff: float
    reference_value: float
    gap: float
    grid_size: int
    support_hi: float


def _sample_array(alloc: MixedAllocation, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` values; always consumes exactly two uniform blocks."""
    weights = np.array([w for w, _ in alloc.components])
    lo = np.array([c.point if isinstance(c, Atom) else c.lo for _, c in alloc.components])
    span = np.array([0.0 if isinstance(c, Atom) else c.hi - c.lo for _, c in alloc.components])
    cum = np.cumsum(weights)
    cum[-1] = 1.0
    idx = np.searchsorted(cum, rng.random(size), side="right")
    return lo[idx] + rng.random(size) * span[idx]


def sample_allocation(alloc: MixedAllocation, rng: np.random.Generator, size: int | None = None):
    """Sample the mixture: pick a component by weight, then draw from it.

    Atoms return their point; uniform components draw from ``[lo, hi)``.
    Deterministic given the generator state.
    """
    if size is None:
        return float(_sample_array(alloc, 1, rng)[0])
    return _sample_array(alloc, size, rng)


def _batch_wins(blue: BlueStrategy, red: MixedAllocation, u: float, size: int, seed_seq) -> int:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    revealed = rng.random(size) < u
    x = _sample_array(red, size, rng)
    calls = rng.random(size) < blue.call(x)
    z = _sample_array(blue.fallback, size, rng)
    wins = np.where(revealed, calls, z >= x)  # ties at z == x go to Blue
    return int(np.count_nonzero(wins))


def monte_carlo_value(
    blue: BlueStrategy,
    red: MixedAllocation,
    u: float,
    cfg: SimConfig,
    threads: int = 1,
) -> float:
    """Empirical win frequency over ``cfg.num_plays`` independent play-outs.

    Each play-out reveals the field with probability ``u``; a revealed field
    is won with probability ``t(x)`` (a call matches exactly), otherwise the
    fallback wins on ``z >= x``. Batches own independent Philox streams
    spawned from the single seed and win counts are summed as integers, so
    the result is bit-identical for a given ``(seed, num_plays)`` no matter
    the thread count.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"detection probability must lie in [0, 1], got {u}")
    n = cfg.num_plays
    sizes = [_BATCH] * (n // _BATCH)
    if n % _BATCH:
        sizes.append(n % _BATCH)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            wins = sum(pool.map(lambda a: _batch_wins(blue, red, u, *a), zip(sizes, seeds)))
    else:
        wins = sum(_batch_wins(blue, red, u, s, ss) for s, ss in zip(sizes, seeds))
    return wins / n


def lower_convex_envelope(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the lower convex envelope of points sorted by x."""
    hull_x: list[float] = []
    hull_y: list[float] = []
    for x, y in zip(xs, ys):
        while len(hull_x) >= 2:
            cross = (hull_x[-1] - hull_x[-2]) * (y - hull_y[-2]) - (
                hull_y[-1] - hull_y[-2]
            ) * (x - hull_x[-2])
            if cross <= 0.0:  # middle point is on or above the chord: not on the lower hull
                hull_x.pop()
                hull_y.pop()
            else:
                break
        hull_x.append(float(x))
        hull_y.append(float(y))
    return np.array(hull_x), np.array(hull_y)


def upper_concave_envelope(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the upper concave envelope of points sorted by x."""
    hx, hy = lower_convex_envelope(xs, -np.asarray(ys, dtype=float))
    return hx, -hy


def _red_cell_masses(red: MixedAllocation, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact probability mass and first moment of Red per grid cell.

    Cell ``j`` covers ``[edges[j], edges[j+1])``; the final cell also takes
    any atom sitting exactly on the last edge.
    """
    ncells = len(edges) - 1
    mass = np.zeros(ncells)
    moment = np.zeros(ncells)
    for w, comp in red.components:
        if isinstance(comp, Atom):
            j = min(int(np.searchsorted(edges, comp.point, side="right")) - 1, ncells - 1)
            mass[j] += w
            moment[j] += w * comp.point
        else:
            lo = np.clip(edges[:-1], comp.lo, comp.hi)
            hi = np.clip(edges[1:], comp.lo, comp.hi)
            dens = w / (comp.hi - comp.lo)
            mass += dens * (hi - lo)
            moment += dens * 0.5 * (hi**2 - lo**2)
    return mass, moment


def blue_best_response(
    red: MixedAllocation,
    u: float,
    blue_budget: float,
    grid_size: int,
    reference_value: float = math.nan,
) -> tuple[BlueStrategy, BestResponseReport]:
    """Best discretised Blue reply to a fixed Red strategy.

    Red's support is cut into grid cells with exact masses and in-cell mean
    costs; candidate fallback points are the grid edges with Red's exact CDF
    as their winning probability. Calling a cell and moving fallback mass up
    the CDF's concave hull are then knapsack items, taken greedily in order
    of decreasing value per unit of budget (ties: cheaper item, then lower
    grid index).  The budget constraint is enforced against this fixed Red
    only, which can only enlarge Blue's feasible set, so small gaps are
    conservative evidence of optimality.
    """
    if grid_size < 100:
        raise ValueError(f"grid_size must be >= 100, got {grid_size}")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"detection probability must lie in [0, 1], got {u}")
    if blue_budget < 0:
        raise ValueError(f"blue budget must be >= 0, got {blue_budget}")

    support_hi = red.support_max()
    atoms = [c.point for _, c in red.components if isinstance(c, Atom)]
    edges = np.unique(
        np.concatenate([np.linspace(0.0, support_hi, grid_size), np.asarray(atoms, dtype=float)])
    )
    if len(edges) < 2:  # all of Red's mass sits at a single point
        edges = np.array([edges[0], edges[0] + 1.0])
    mass, moment = _red_cell_masses(red, edges)

    base_value = 0.0
    items: list[tuple[float, float, int, str, int, float]] = []
    # (slope, cost, order, kind, index, full value); sorted by (-slope, cost, order)

    ncells = len(edges) - 1
    t_vals = np.zeros(ncells)
    if u > 0.0:
        for j in range(ncells):
            if mass[j] <= 0.0:
                continue
            xbar = moment[j] / mass[j]
            if xbar <= 0.0:  # calling costless allocations is free
                t_vals[j] = 1.0
                base_value += u * mass[j]
            else:
                items.append((1.0 / xbar, u * mass[j] * xbar, j, "call", j, u * mass[j]))

    hull_x = hull_y = np.array([])
    if u < 1.0:
        cdf_vals = np.array([red.cdf(z) for z in edges])
        hull_x, hull_y = upper_concave_envelope(edges, cdf_vals)
        base_value += (1.0 - u) * hull_y[0]  # all fallback mass parked at z = 0
        for k in range(len(hull_x) - 1):
            dz, df = hull_x[k + 1] - hull_x[k], hull_y[k + 1] - hull_y[k]
            if df <= 0.0:
                continue
            items.append((df / dz, (1.0 - u) * dz, ncells + k, "hull", k, (1.0 - u) * df))

    items.sort(key=lambda it: (-it[0], it[1], it[2]))
    budget = blue_budget
    oracle_value = base_value
    hull_pos = 0  # index of the hull vertex the fallback has fully reached
    hull_frac = 0.0  # fractional progress into the next hull segment
    for slope, cost, _order, kind, idx, value in items:
        if budget <= 0.0:
            break
        frac = min(1.0, budget / cost)
        budget -= frac * cost
        oracle_value += frac * value
        if kind == "call":
            t_vals[idx] = frac
        else:
            # hull slopes strictly decrease, so segments arrive in path order
            hull_pos, hull_frac = (idx + 1, 0.0) if frac == 1.0 else (idx, frac)

    # Assemble the oracle strategy: a piecewise-constant call policy over the
    # grid cells and an at-most-two-point fallback on the CDF hull.
    if u > 0.0:
        keep = np.concatenate([[True], np.diff(t_vals) != 0.0])
        policy = CallPolicy(tuple(edges[1:-1][keep[1:]]), tuple(t_vals[keep]))
    else:
        policy = CallPolicy.constant(0.0)
    if u >= 1.0 or len(hull_x) == 0:
        fallback = MixedAllocation.atom(0.0)
    elif hull_frac == 0.0:
        fallback = MixedAllocation.atom(float(hull_x[hull_pos]))
    else:
        za, zb = float(hull_x[hull_pos]), float(hull_x[hull_pos + 1])
        fallback = MixedAllocation.mix((1.0 - hull_frac, Atom(za)), (hull_frac, Atom(zb)))
    strategy = BlueStrategy(policy, fallback)
    oracle_value = float(oracle_value)
    report = BestResponseReport(
        oracle_payoff=oracle_value,
        reference_value=reference_value,
        gap=oracle_value - reference_value,
        grid_size=grid_size,
        support_hi=float(support_hi),
    )
    return strategy, report


def _blue_support_max(blue: BlueStrategy) -> float:
    hi = blue.fallback.support_max()
    if blue.call.breakpoints:
        hi = max(hi, blue.call.breakpoints[-1])
    return hi


def red_best_response(
    blue: BlueStrategy,
    u: float,
    red_budget: float,
    grid_size: int,
    reference_value: float = math.nan,
) -> tuple[MixedAllocation, BestResponseReport]:
    """Best discretised Red reply to a fixed Blue strategy.

    Against a fixed ``(t, Z)``, an allocation of ``x`` loses with probability
    ``g(x) = u*t(x) + (1-u)*P(Z >= x)``; Red's problem is linear in the law
    of ``X`` under the single moment constraint ``E[X] <= R``, so an optimal
    reply lives on at most two support points of the lower convex envelope
    of ``g``. The grid spans ``[0, M]`` with ``M = 2 * blue support + R``;
    beyond Blue's support only the revealed branch can pay and the mean
    constraint caps how much mass that is worth.
    """
    if grid_size < 100:
        raise ValueError(f"grid_size must be >= 100, got {grid_size}")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"detection probability must lie in [0, 1], got {u}")
    if red_budget <= 0:
        raise ValueError(f"red budget must be > 0, got {red_budget}")

    hi = 2.0 * _blue_support_max(blue) + red_budget
    eps = 1e-12 * max(hi, 1.0)
    special = [p for _, c in blue.fallback.components for p in
               ((c.point,) if isinstance(c, Atom) else (c.lo, c.hi))]
    special += list(blue.call.breakpoints)
    extra = np.array([v for p in special for v in (p - eps, p, p + eps)])
    xs = np.unique(np.clip(np.concatenate([np.linspace(0.0, hi, grid_size), extra]), 0.0, hi))

    g = u * np.asarray(blue.call(xs), dtype=float)
    if u < 1.0:
        sf = np.zeros_like(xs)
        for w, comp in blue.fallback.components:
            if isinstance(comp, Atom):
                sf += w * (comp.point >= xs)
            else:
                sf += w * np.clip((comp.hi - xs) / (comp.hi - comp.lo), 0.0, 1.0)
        g = g + (1.0 - u) * sf

    hull_x, hull_y = lower_convex_envelope(xs, g)
    # Minimise the envelope over means m in [0, red_budget].
    in_range = hull_x <= red_budget
    cand_x = list(hull_x[in_range])
    cand_y = list(hull_y[in_range])
    if hull_x[-1] > red_budget:
        cand_x.append(red_budget)
        cand_y.append(float(np.interp(red_budget, hull_x, hull_y)))
    best = int(np.argmin(cand_y))
    m_star, payoff = float(cand_x[best]), float(cand_y[best])

    # A single atom at the minimiser is preferred whenever it does at least
    # as well as mixing the bracketing hull vertices (e.g. where g is linear).
    direct = u * float(blue.call(m_star))
    if u < 1.0:
        direct += (1.0 - u) * blue.fallback.prob_at_least(m_star)
    k = int(np.searchsorted(hull_x, m_star, side="right"))
    if direct <= payoff + 1e-15 or k >= len(hull_x) or hull_x[k - 1] >= m_star:
        payoff = min(payoff, direct)
        mixture = MixedAllocation.atom(m_star)
    else:
        xa, xb = float(hull_x[k - 1]), float(hull_x[k])
        lam = (xb - m_star) / (xb - xa)
        mixture = MixedAllocation.mix((lam, Atom(xa)), (1.0 - lam, Atom(xb)))
    report = BestResponseReport(
        oracle_payoff=payoff,
        reference_value=reference_value,
        gap=reference_value - payoff,
        grid_size=grid_size,
        support_hi=float(hi),
    )
    return mixture, report


def exploitability(params: GameParams, grid_size: int = 2000) -> tuple[float, float]:
    """Both oracles run against the closed-form solution of ``params``.

    Returns ``(blue_gap, red_gap)``: how much a best-responding Blue improves
    on the game value against the optimal Red, and how far a best-responding
    Red pushes the optimal Blue below it. Both should be O(1/grid_size).
    """
    sol = solve(params)
    value = game_value(params)
    _, blue_rep = blue_best_response(
        sol.red, params.detect_prob, params.blue_budget, grid_size, reference_value=value
    )
    _, red_rep = red_best_response(
        sol.blue, params.detect_prob, params.red_budget, grid_size, reference_value=value
    )
    return blue_rep.gap, red_rep.gap
