"""Acceptance criteria 1-10, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with the measured
figure, bypassing output capture so the lines land in any test log.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import std_normal_cdf
from qmarket import cli, risk, strategies
from qmarket.errors import DegenerateState
from qmarket.market import (
    Basis,
    Player,
    RWStrategy,
    SimConfig,
    clear_tick,
    expected_acceptance,
    make_rng,
    monopolist_experiment,
    rate_statistics,
    seed_sweep,
    simulate,
    symmetric_population,
)
from qmarket.phase import Representation, Wavefunction, gaussian, make_grid, normalize
from qmarket.risk import RiskParams, minimal_risk_constant, spectrum
from qmarket.strategies import CoherentParams, coherent_strategy, dispersions, eigen_residual
from qmarket.wigner import (
    PhaseGrid,
    auto_phase_grid,
    entropy,
    gibbs_mixture,
    mean_risk,
    thermal_density,
    wigner_excited,
)


@pytest.fixture
def verdict(capsys):
    def report(number, label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {label}: {detail}")
        assert ok, detail

    return report


def test_criterion_01_spectrum(verdict):
    params = RiskParams()
    grid = make_grid(-10, 10, 1024)
    t0 = time.perf_counter()
    res = spectrum(params, grid, 8)
    elapsed = time.perf_counter() - t0
    exact = np.array([params.exact_level(n) for n in range(8)])
    rel = float(np.max(np.abs(res.eigenvalues - exact) / exact))
    verdict(1, "spectrum fidelity", rel < 1e-6 and elapsed < 5.0, f"max rel err {rel:.2e}, {elapsed:.2f}s")


def _fitted_grid(params):
    # 14 ground-state widths each side keeps the periodic wrap far below 1e-6
    sigma = math.sqrt(params.effective_hbar / (2 * params.m * params.omega))
    return make_grid(params.q0 - 14 * sigma, params.q0 + 14 * sigma, 512)


def test_criterion_02_minimal_risk_constant(verdict):
    worst = 0.0
    for hbar, theta, m in itertools.product((0.5, 1.0, 3.0), (math.pi, 2 * math.pi), (0.5, 1.0, 7.0)):
        params = RiskParams(m=m, theta=theta, hbar_e=hbar)
        h = minimal_risk_constant(params, _fitted_grid(params))
        worst = max(worst, abs(h - 2 * math.pi * hbar) / (2 * math.pi * hbar))
    verdict(2, "minimal risk constant", worst < 1e-6, f"max rel err {worst:.2e} over 18 configs")


def test_criterion_03_noncommutative_shift(verdict):
    grid = make_grid(-10, 10, 1024)
    base = spectrum(RiskParams(), grid, 8).eigenvalues
    levels = [base]
    worst = 0.0
    for big_theta in (0.75, 1.0):
        vals = spectrum(RiskParams(big_theta=big_theta), grid, 8).eigenvalues
        scaled = base * math.sqrt(1 + big_theta**2)
        worst = max(worst, float(np.max(np.abs(vals - scaled) / scaled)))
        levels.append(vals)
    increasing = bool(np.all(np.diff(np.array(levels), axis=0) > 0))
    verdict(3, "noncommutative shift", worst < 1e-6 and increasing,
            f"max rel err {worst:.2e}, strictly increasing={increasing}")


def test_criterion_04_coherent_suite(verdict):
    grid = make_grid(-20, 20, 2048)
    res_max = sat_err = corr_err = 0.0
    for r, eta in itertools.product((-0.9, -0.5, 0.0, 0.5, 0.9), (0.5, 1.0, 2.0)):
        cp = CoherentParams(r, eta)
        psi = coherent_strategy(cp, grid, 1.0)
        d = dispersions(psi)
        res_max = max(res_max, eigen_residual(cp, psi))
        sat = d.delta_p * d.delta_q * math.sqrt(1 - r * r)
        sat_err = max(sat_err, abs(sat - 0.5))
        corr_err = max(corr_err, abs(d.corr - r))
    ok = res_max < 1e-8 and sat_err < 1e-6 and corr_err < 1e-5
    verdict(4, "coherent strategies", ok,
            f"residual {res_max:.2e}, saturation err {sat_err:.2e}, corr err {corr_err:.2e}")


def test_criterion_05_wigner_suite(verdict):
    params = RiskParams()
    pg = PhaseGrid(make_grid(-10, 10, 1024), make_grid(-10, 10, 512))
    states = spectrum(params, pg.q, 11).eigenstates
    i, j = pg.q.nearest_index(0.0), pg.p.nearest_index(0.0)
    assert pg.q.points[i] == 0.0 and pg.p.points[j] == 0.0
    mass_err = origin_err = marg_err = 0.0
    for n in range(11):
        w = wigner_excited(n, params, pg)
        mass_err = max(mass_err, abs(w.mass - 1))
        origin_err = max(origin_err, abs(w.values[i, j] - (-1) ** n / math.pi))
        marg_err = max(marg_err, float(np.max(np.abs(w.q_marginal() - states[n].density))))
    ok = mass_err < 1e-6 and origin_err < 1e-8 and marg_err < 1e-5
    verdict(5, "Wigner functions", ok,
            f"mass err {mass_err:.2e}, origin err {origin_err:.2e}, marginal err {marg_err:.2e}")


def test_criterion_06_thermal(verdict):
    params = RiskParams()
    hw = params.quantum
    betas = (0.25, 0.5, 1.0, 2.0, 50.0 / hw)
    pg = auto_phase_grid(params, betas=betas)

    beta = 1.0 / hw
    rho = thermal_density(beta, params, pg)
    series_err = float(np.max(np.abs(gibbs_mixture(beta, params, pg, 60).values - rho.values)))

    risk_err = 0.0
    entropies = []
    for b in betas:
        r = thermal_density(b, params, pg)
        x = (2 / hw) * math.tanh(b * hw / 2)
        risk_err = max(risk_err, abs(mean_risk(r, params) - 1 / x))
        entropies.append(entropy(r))
    decreasing = all(a > b for a, b in zip(entropies, entropies[1:]))

    cold = thermal_density(50.0 / hw, params, pg)
    cold_err = float(np.max(np.abs(cold.values - wigner_excited(0, params, pg).values)))

    ok = series_err < 1e-6 and risk_err < 1e-5 and decreasing and cold_err < 1e-6
    verdict(6, "thermal closed form", ok,
            f"series err {series_err:.2e}, mean risk err {risk_err:.2e}, "
            f"entropy decreasing={decreasing}, cold vs W0 {cold_err:.2e}")


def test_criterion_07_heisenberg(verdict):
    states = spectrum(RiskParams(), make_grid(-10, 10, 1024), 6).eigenstates
    basis = np.array([s.amplitudes for s in states])
    rng = np.random.default_rng(2024)
    worst = math.inf
    for _ in range(100):
        c = rng.normal(size=6) + 1j * rng.normal(size=6)
        psi = normalize(Wavefunction(states[0].grid, c @ basis))
        worst = min(worst, dispersions(psi).uncertainty_product)
    verdict(7, "uncertainty bound", worst >= 0.5 - 1e-9, f"min product {worst:.12f} (bound 0.5)")


def test_criterion_08_zeno(verdict):
    base = SimConfig(symmetric_population(2), RWStrategy.gaussian(), ticks=10_000)
    seeds = range(32)
    stats = []
    for f in (0.0, 0.25, 0.5, 0.75, 1.0):
        cfg = SimConfig(base.players, base.rw, ticks=base.ticks, switch_probability=f)
        stats.append(rate_statistics(seed_sweep(cfg, seeds)))
    zero_exact = stats[0][0] == 0.0
    monotone = all(m1 >= m0 - 3 * math.hypot(s0, s1) for (m0, s0), (m1, s1) in zip(stats, stats[1:]))
    pinned_lower = True
    for seed in seeds:
        cfg = SimConfig(base.players, base.rw, ticks=base.ticks, rng_seed=seed)
        pinned_lower &= monopolist_experiment(cfg, 0.0).price_variance < simulate(cfg).price_variance
    rates = ", ".join(f"{m:.4f}" for m, _ in stats)
    verdict(8, "Zeno monotonicity", zero_exact and monotone and pinned_lower,
            f"rates [{rates}], f=0 exact={zero_exact}, pinned<unpinned on 32 seeds={pinned_lower}")


def _quadrature_oracle(mu, s, basis):
    # RW price ~ N(0, 1); buyer accepts x >= q, seller accepts x <= p
    sign = 1.0 if basis is Basis.DEMAND else -1.0
    f = lambda x: std_normal_cdf(sign * (x - mu) / s) * math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    return quad(f, -12, 12, epsabs=1e-13)[0]


def test_criterion_09_calibration(verdict):
    grid = make_grid(-12, 12, 1024)
    rw = RWStrategy.gaussian()
    n = 10_000
    players = [
        Player("buyer", gaussian(grid, 0.3, 0.8), gaussian(grid, representation=Representation.MOMENTUM), Basis.DEMAND),
        Player("seller", gaussian(grid), gaussian(grid, -0.5, 1.3, representation=Representation.MOMENTUM), Basis.SUPPLY),
    ]
    params = [(0.3, 0.8), (-0.5, 1.3)]
    worst_z = 0.0
    ok = True
    details = []
    for pl, (mu, s), seed in zip(players, params, (101, 202)):
        oracle = _quadrature_oracle(mu, s, pl.basis)
        model = expected_acceptance(pl, rw, pl.basis)
        rng = make_rng(seed)
        prices = rw.sample(rng, n)
        hits = sum((lambda t: t.buys + t.sells)(clear_tick([pl], x, rng)) for x in prices)
        se = math.sqrt(oracle * (1 - oracle) / n)
        z = abs(hits / n - oracle) / se
        worst_z = max(worst_z, z)
        ok &= z < 3 and abs(model - oracle) < 1e-6
        details.append(f"{pl.id}: freq {hits / n:.4f} vs {oracle:.4f} ({z:.2f} SE)")
    verdict(9, "Monte-Carlo calibration", ok, "; ".join(details))


RUNS = {
    "spectrum": ["--levels", "8"],
    "coherent": ["--r", "0.5", "--eta", "2"],
    "wigner": ["--level", "3", "--phase-points", "128"],
    "thermal": ["--beta", "0.5"],
    "zeno": ["--seed", "7", "--ticks", "2000"],
    "monopolist": ["--seed", "7", "--ticks", "2000"],
}


def test_criterion_10_reproducibility(verdict, tmp_path, monkeypatch, capsys):
    identical = True
    for cmd, extra in RUNS.items():
        for fmt in ("csv", "json"):
            outs = []
            for k in range(2):
                path = tmp_path / f"{cmd}-{k}.{fmt}"
                assert cli.run([cmd, *extra, "--format", fmt, "-o", str(path)]) == 0
                outs.append(path.read_bytes())
            identical &= outs[0] == outs[1] and len(outs[0]) > 0

    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"not_a_key": 1}))
    cases = {
        "unknown subcommand": (["frobnicate"], 2),
        "invalid grid": (["spectrum", "--n-points", "1000"], 2),
        "beta <= 0": (["thermal", "--beta", "0"], 2),
        "|r| >= 1": (["coherent", "--r", "1"], 2),
        "bad config key": (["spectrum", "--config", str(cfg)], 2),
        "grid too small": (["coherent", "--eta", "5", "--q-min", "-10", "--q-max", "10"], 1),
        "unwritable output": (["spectrum", "-o", str(tmp_path / "no" / "x.csv")], 1),
    }
    codes = {name: cli.run(argv) for name, (argv, _) in cases.items()}

    monkeypatch.setattr(risk, "RESIDUAL_TOL", 0.0)
    codes["convergence"] = cli.run(["spectrum", "--levels", "2", "--n-points", "128"])
    monkeypatch.undo()

    def degenerate(*a, **k):
        raise DegenerateState("zero norm")

    monkeypatch.setattr(strategies, "coherent_strategy", degenerate)
    codes["degenerate state"] = cli.run(["coherent"])
    capsys.readouterr()

    expected = {name: code for name, (_, code) in cases.items()} | {"convergence": 1, "degenerate state": 1}
    wrong = {k: v for k, v in codes.items() if v != expected[k]}
    verdict(10, "reproducibility and exit codes", identical and not wrong,
            f"byte-identical={identical}, exit-code mismatches={wrong or 'none'}")
