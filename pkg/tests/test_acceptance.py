"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS line once its criterion holds (visible with
``pytest -s tests/test_acceptance.py``); a failure reads as the usual pytest
failure for that criterion.
"""

import csv
import io
import math
import time

import numpy as np
import pytest

from lotto_scouts.analysis import (
    BudgetProblem,
    influence_ratio,
    required_ratio,
    weapons_mix,
)
from lotto_scouts.cli import main
from lotto_scouts.multistage import (
    SEAM_U,
    Field,
    MultistageInstance,
    bounds,
    closed_form_upper_sorted,
    envelope_breakpoints,
    phi,
    phi_dagger,
    phi_dagger_prime,
    psi,
    psi_dagger,
    upper_bound,
)
from lotto_scouts.single_field import GameParams, Uniform, game_value, solve
from lotto_scouts.verification import SimConfig, exploitability, monte_carlo_value

GRID_PARAMS = [GameParams(r, 1.0, u) for r in (0.3, 0.6, 2.0) for u in (0.2, 0.5, 0.8)]


def _report(name: str, detail: str = ""):
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: PASS{suffix}")


def test_c1_closed_form_value_spot_checks():
    cases = [
        (0.5, 1.0, 0.0, 0.25),
        (0.3, 1.0, 0.5, 0.3),
        (0.6, 1.0, 0.4, 0.5),
        (2.0, 1.0, 0.5, 11.0 / 12.0),
    ]
    params = [GameParams(b, r, u) for b, r, u, _ in cases]
    for p in params:  # warm-up outside the timed region
        game_value(p)
    t0 = time.perf_counter()
    values = [game_value(p) for p in params]
    elapsed = time.perf_counter() - t0
    for (_, _, _, expected), got in zip(cases, values):
        assert got == pytest.approx(expected, abs=1e-12)
    assert elapsed < 1e-3
    _report("closed-form value spot-checks", f"{elapsed * 1e6:.0f} us")


def test_c2_monte_carlo_certification():
    t0 = time.perf_counter()
    worst = 0.0
    for p in GRID_PARAMS:
        sol = solve(p)
        mc = monte_carlo_value(sol.blue, sol.red, p.detect_prob, SimConfig(1_000_000, 2024))
        worst = max(worst, abs(mc - game_value(p)))
        assert mc == pytest.approx(game_value(p), abs=2e-3)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report("Monte Carlo certification", f"worst |mc-v| {worst:.2e}, {elapsed:.1f} s")


def test_c3_exploitability_certification():
    t0 = time.perf_counter()
    worst = -math.inf
    for p in GRID_PARAMS:
        blue_gap, red_gap = exploitability(p, 2000)
        worst = max(worst, blue_gap, red_gap)
        assert blue_gap <= 0.01
        assert red_gap <= 0.01
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report("exploitability certification", f"worst gap {worst:.2e}, {elapsed:.1f} s")


def test_c4_hart_reduction():
    rng = np.random.default_rng(1848)
    for _ in range(50):
        R = float(rng.uniform(0.2, 4.0))
        B = float(rng.uniform(1e-3, 5.0 * R))
        value = game_value(GameParams(B, R, 0.0))
        expected = B / (2 * R) if B <= R else 1.0 - R / (2 * B)
        assert value == pytest.approx(expected, abs=1e-12)
        if B <= R:
            sol = solve(GameParams(B, R, 0.0))
            assert sol.red.components == ((1.0, Uniform(0.0, 2.0 * R)),)
    _report("Hart reduction at u = 0")


def test_c5_multistage_bound_checks():
    inst = MultistageInstance(0.5, 1.0, (Field(0.5, 0.3), Field(0.5, 0.6)))
    via_sum, _ = upper_bound(inst)
    via_sorted = closed_form_upper_sorted(inst)
    assert via_sum == pytest.approx(0.45, abs=1e-12)
    assert via_sorted == pytest.approx(0.45, abs=1e-12)
    assert abs(via_sum - via_sorted) <= 1e-12

    rng = np.random.default_rng(451)
    coincided = 0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        w = rng.uniform(0.05, 1.0, size=n)
        w /= w.sum()
        us = rng.uniform(0.0, 0.97, size=n)
        R = float(rng.uniform(0.2, 3.0))
        B = R * float(rng.uniform(0.02, 3.0))
        res = bounds(
            MultistageInstance(B, R, tuple(Field(float(a), float(b)) for a, b in zip(w, us)))
        )
        assert res.lower <= res.upper + 1e-12
        if res.coincide:
            coincided += 1
            assert abs(res.upper - res.lower) <= 1e-9
    _report("multistage bound checks", f"{coincided}/1000 instances coincided")


def test_c6_envelope_property_suite():
    t0 = time.perf_counter()
    evaluations = 0
    for u in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, SEAM_U, 0.7, 0.8, 0.9, 1.0):
        f = Field(1.0, float(u))
        xs = np.logspace(-2, 1, 2500)
        psi_vals = np.array([psi(float(x), f) for x in xs])
        dag_vals = np.array([psi_dagger(float(x), f) for x in xs])
        evaluations += 2 * xs.size
        assert np.all(dag_vals <= psi_vals + 1e-12)
        slopes = np.diff(dag_vals) / np.diff(xs)
        assert np.all(np.diff(slopes) >= -1e-9)

        ys = np.linspace(0.0, 10.0, 2500)
        phi_vals = np.array([phi(float(x), f) for x in ys])
        pdag_vals = np.array([phi_dagger(float(x), f) for x in ys])
        evaluations += 2 * ys.size
        assert np.all(pdag_vals <= phi_vals + 1e-12)
        pslopes = np.diff(pdag_vals) / np.diff(ys)
        assert np.all(np.diff(pslopes) <= 1e-9)

        bp = envelope_breakpoints(f)
        seams = list(bp) + [2.0] if bp else [2.0]
        for s in seams:
            lo = psi_dagger(s * (1 - 1e-12), f) if u > 0 else psi(s * (1 - 1e-12), f)
            hi = psi_dagger(s * (1 + 1e-12), f) if u > 0 else psi(s * (1 + 1e-12), f)
            assert abs(hi - lo) <= 1e-9
            evaluations += 2
        if bp:
            alpha, beta, gamma = bp
            for x in (alpha, beta, gamma, 2 * gamma):
                assert psi_dagger(x, f) == pytest.approx(psi(x, f), abs=1e-9)
                evaluations += 2
    # The four-branch and two-branch envelope shapes agree at the seam in u.
    for x in np.linspace(0.05, 5.0, 200):
        below = phi_dagger(float(x), Field(1.0, SEAM_U - 1e-12))
        above = phi_dagger(float(x), Field(1.0, SEAM_U + 1e-12))
        assert abs(below - above) <= 1e-9
        evaluations += 2
    elapsed = time.perf_counter() - t0
    assert evaluations >= 100_000
    assert elapsed < 5.0
    _report("envelope property suite", f"{evaluations} evaluations, {elapsed:.2f} s")


def test_c7_derivative_checks():
    from lotto_scouts.analysis import value_partial_B, value_partial_u

    rng = np.random.default_rng(777)
    h = 1e-6
    for region in ("info", "contested", "dominant"):
        for _ in range(1000):
            R = float(rng.uniform(0.3, 2.5))
            u = float(rng.uniform(0.05, 0.9))
            if region == "info":
                B = R * u * float(rng.uniform(0.05, 0.95))
            elif region == "contested":
                B = R * float(rng.uniform(u + 1e-3, 1.0 - 1e-3))
            else:
                B = R * float(rng.uniform(1.0 + 1e-3, 4.0))

            fd_B = (
                game_value(GameParams(B + h, R, u)) - game_value(GameParams(B - h, R, u))
            ) / (2 * h)
            assert value_partial_B(B, R, u) == pytest.approx(fd_B, abs=1e-4)
            fd_u = (
                game_value(GameParams(B, R, u + h)) - game_value(GameParams(B, R, u - h))
            ) / (2 * h)
            assert value_partial_u(B, R, u) == pytest.approx(fd_u, abs=1e-4)

    for _ in range(1000):
        u = float(rng.uniform(0.0, 1.0))
        f = Field(float(rng.uniform(0.1, 1.0)), u)
        if u == 0.0:
            breaks = [1.0]
        elif u >= SEAM_U:
            breaks = [0.5]
        else:
            a, b, g = envelope_breakpoints(f)
            breaks = [1.0 / g, 1.0 / b, 1.0 / a]
        x = float(rng.uniform(0.05, 4.0))
        if any(abs(x - bp) < 10 * h for bp in breaks):
            continue
        fd = (phi_dagger(x + h, f) - phi_dagger(x - h, f)) / (2 * h)
        assert phi_dagger_prime(x, f) == pytest.approx(fd, abs=1e-4)
    _report("derivative checks")


def test_c8_analysis_formulas():
    assert influence_ratio(0.5, 1.0, 0.7) == 0.0
    assert influence_ratio(0.5, 1.0, 0.2) == 1.0
    rng = np.random.default_rng(88)
    for _ in range(200):
        R = float(rng.uniform(0.3, 2.0))
        u = float(rng.uniform(0.0, 0.98))
        B = R * float(rng.uniform(1.0 + 1e-6, 4.0))
        expected = 1.0 + 2.0 * (B / R - 1.0) / (1.0 - u)
        assert influence_ratio(B, R, u) == pytest.approx(expected, abs=1e-12)

    for v in np.linspace(0.05, 0.95, 19):
        for u in np.linspace(0.0, 1.0, 21):
            ratio = required_ratio(float(v), float(u))
            assert game_value(GameParams(ratio, 1.0, float(u))) == pytest.approx(
                float(v), abs=1e-9
            )

    for c in (0.25, 1.0, 4.0):
        for margin in (0.0, 0.5, 2.0):
            mix = weapons_mix(BudgetProblem(1.0 + c + margin, c))
            assert mix.value == 1.0
            assert mix.unused == pytest.approx(margin, abs=1e-12)
    for d in (0.2, 0.6, 1.0):
        mix = weapons_mix(BudgetProblem(d, 100.0))
        assert mix.info == 0.0
    _report("analysis formulas")


def test_c9_full_paper_figure_data(tmp_path):
    t0 = time.perf_counter()
    out = io.StringIO()
    code = main(["figure-data", "--figure", "all", "--out", str(tmp_path)], out=out)
    elapsed = time.perf_counter() - t0
    assert code == 0
    assert elapsed < 120.0
    produced = sorted(p.name for p in tmp_path.glob("*.csv"))
    for fig in range(1, 10):
        assert any(name.startswith(f"fig{fig}") for name in produced), produced
    with open(tmp_path / "fig6_b.csv") as fh:
        rows = list(csv.DictReader(fh))
    gaps = [float(r["upper"]) - float(r["lower"]) for r in rows]
    assert max(gaps) > 0.0
    assert all(g >= -1e-12 for g in gaps)
    _report(
        "full-paper figure data",
        f"{len(produced)} files in {elapsed:.1f} s, max fig6 gap {max(gaps):.3f}",
    )
