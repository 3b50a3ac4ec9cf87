"""Acceptance criteria 1-10.

Each test records one ``criterion N: PASS|FAIL ...`` line. The lines are
printed as they are produced and repeated in the terminal summary (see
``conftest.py``). A FAIL line is a genuine miss at the stated tolerance;
nothing here is loosened to make it pass.
"""

import math
import time

import numpy as np
import pytest

from fdrelay import (
    AdcModel,
    approx_rate,
    draw_channels,
    estimation_stats,
    exact_rate,
    limit_rate_infinite_M,
    linear_to_db,
    placement_rates,
    simulate_pilot_estimation,
    simulate_terms,
)
from fdrelay.design import (
    duplex_crossover_loop_interference,
    optimal_relay_power_homogeneous,
    optimize_relay_power,
    required_antennas,
    required_source_power,
)
from fdrelay.experiments import run_validation
from fdrelay.mc_oracle import sample_functionals
from tests.conftest import db, make_config
from tests.test_channel import dense_products, lemma_check

LINES = []
FIG3_PS_DB = (-10, 0, 10, 20, 30)
FIG3_M = (64, 128, 256, 512)


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return ok


def dB(x):
    return float(linear_to_db(x))


def fig3(M, ps_db):
    two = AdcModel.from_bits(2)
    return make_config(M=M, p_S=db(ps_db), p_R=10.0, p_p=10.0, sigma_LI2=1.0,
                       relay_adc=two, dest_adc=two)


@pytest.fixture(scope="module")
def fig3_samples():
    out, times = {}, {}
    for M in FIG3_M:
        t0 = time.perf_counter()
        out[M] = sample_functionals(fig3(M, 0), 10_000, seed=M)
        times[M] = time.perf_counter() - t0
    return out, times


def test_criterion_1_exact_vs_monte_carlo(fig3_samples):
    samples, times = fig3_samples
    worst_z, worst_rel, where = 0.0, 0.0, None
    for M in FIG3_M:
        for ps in FIG3_PS_DB:
            rep = run_validation(fig3(M, ps), functionals=samples[M], mc_n=10_000, seed=M)
            z = max(abs(r.z) for r in rep.rows if r.name != "sum_rate")
            s = rep.row("sum_rate")
            rel = abs(s.mc_mean - s.closed_form) / s.closed_form
            if z > worst_z:
                worst_z, where = z, (M, ps)
            worst_rel = max(worst_rel, rel)
    # one full (sample, evaluate) pass at M=512 against the 60 s budget
    t0 = time.perf_counter()
    rep = simulate_terms(fig3(512, 0), 10_000, seed=1)
    t512 = time.perf_counter() - t0
    ok = worst_z <= 3 and worst_rel <= 0.01 and t512 < 60
    assert record(
        1, ok,
        f"max |z| = {worst_z:.2f} (M={where[0]}, p_S={where[1]} dB), "
        f"max sum-rate rel. diff = {worst_rel:.4%}, M=512 point {t512:.1f} s "
        f"(n={rep.n}; sampling times {', '.join(f'{m}:{t:.1f}s' for m, t in times.items())})",
    )


def test_criterion_2_approximation_accuracy():
    gaps = {}
    for M in (64, 512):
        gaps[M] = [abs(approx_rate(fig3(M, p)).sum_rate - exact_rate(fig3(M, p)).sum_rate)
                   / exact_rate(fig3(M, p)).sum_rate for p in FIG3_PS_DB]
    ok = max(gaps[64]) <= 0.05 and max(gaps[512]) <= 0.01
    detail = "; ".join(
        f"M={M}: " + ", ".join(f"{p}dB {g:.2%}" for p, g in zip(FIG3_PS_DB, gaps[M]))
        for M in gaps
    )
    assert record(2, ok, f"limits 5% (M=64) / 1% (M=512). {detail}")


def test_criterion_3_rate_limit():
    two = AdcModel.from_bits(2)
    c = make_config(M=10**7, p_S=1.0, p_R=1.0, p_p=1.0, sigma_LI2=0.1,
                    relay_adc=two, dest_adc=AdcModel.from_rho(0.8825))
    assert c.tau_c == 196 and c.tau_p == 5
    ref = 186 / 196 * math.log2(1 + 0.8825 / (1 - 0.8825))
    r = approx_rate(c).rate
    rel = float(np.max(np.abs(r - ref) / ref))
    lims = [limit_rate_infinite_M(c.replace(alpha=a)) for a in (0.3, 0.6366, 0.8825, 1.0)]
    indep = all(np.array_equal(lims[0], x) for x in lims[1:])
    ok = rel <= 0.005 and indep and np.allclose(lims[0], ref, rtol=1e-12)
    assert record(3, ok, f"M=1e7 max rel. gap {rel:.3e} (limit {ref:.5f}), "
                         f"alpha-independent: {indep}")


def test_criterion_4_antenna_compensation():
    t0 = time.perf_counter()
    got = {}
    for label, adc in (("perfect", AdcModel.perfect()), ("1-bit", AdcModel.from_bits(1)),
                       ("3-bit", AdcModel.from_bits(3))):
        c = make_config(p_S=1.0, p_R=1.0, p_p=1.0, sigma_LI2=0.1, relay_adc=adc,
                        dest_adc=AdcModel.perfect())
        got[label] = required_antennas(c, 15.0, 5000)
    dt = time.perf_counter() - t0
    ok = (abs(got["perfect"] - 158) <= 5 and abs(got["1-bit"] - 305) <= 8
          and abs(got["3-bit"] - 167) <= 5 and dt < 30)
    assert record(4, ok, f"{got} (targets 158+-5, 305+-8, 167+-5), {dt:.2f} s")


def test_criterion_5_optimal_relay_power():
    res, search, perfect = {}, {}, {}
    for li in (-20, -10):
        c = make_config(M=64, p_S=0.1, p_p=0.1, sigma_LI2=db(li),
                        relay_adc=AdcModel.from_bits(1), dest_adc=AdcModel.from_rho(0.8825))
        res[li] = optimal_relay_power_homogeneous(c)
        search[li] = optimize_relay_power(c)
        perfect[li] = optimal_relay_power_homogeneous(c.replace(alpha=1.0))
    gap = {li: 1 - res[li] / perfect[li] for li in res}
    ok = (round(dB(res[-20]), 2) == 7.51 and round(dB(res[-10]), 2) == 2.51
          and all(abs(dB(search[li]) - dB(res[li])) <= 0.05 for li in res)
          and all(f"{g:.3g}" == "0.202" for g in gap.values()))
    assert record(
        5, ok,
        f"closed form {dB(res[-20]):.4f} / {dB(res[-10]):.4f} dB, search "
        f"{dB(search[-20]):.4f} / {dB(search[-10]):.4f} dB, power reduction "
        f"{gap[-20]:.4f} / {gap[-10]:.4f}",
    )


def _required_db(M, bits, li_db):
    adc = AdcModel.perfect() if bits is None else AdcModel.from_bits(bits)
    c = make_config(M=M, p_S=1.0, p_R=1.0, p_p=1.0, sigma_LI2=db(li_db),
                    relay_adc=adc, dest_adc=adc)
    return dB(required_source_power(c, 5.0))


def test_criterion_6_power_scaling():
    one = {li: _required_db(200, 1, li) for li in (-20, 0)}
    g1 = one[-20] - _required_db(200, None, -20)
    g2 = _required_db(200, 2, -20) - _required_db(200, None, -20)
    ok = (abs(one[-20] + 6.25) <= 0.5 and abs(one[0] + 1.25) <= 0.5
          and abs(g1 - 10) <= 1 and abs(g2 - 2.5) <= 0.5)
    info = _required_db(1000, 1, -20) - _required_db(1000, None, -20)
    assert record(
        6, ok,
        f"M=200 one-bit p_S {one[-20]:.2f} dB (-20 dB LI), {one[0]:.2f} dB (0 dB LI); "
        f"gaps vs perfect at -20 dB LI: one-bit {g1:.2f} dB (want 10+-1), 2-bit {g2:.2f} dB "
        f"(want 2.5+-0.5). [info: one-bit gap at M=1000 is {info:.2f} dB]",
    )


def test_criterion_7_duplex_crossover():
    two = AdcModel.from_bits(2)
    got = {}
    for M in (100, 200):
        c = make_config(M=M, p_S=0.1, p_R=0.1, p_p=0.1, relay_adc=two, dest_adc=two)
        got[M] = dB(duplex_crossover_loop_interference(c))
    ok = abs(got[100] - 13.5) <= 0.5 and abs(got[200] - 15.5) <= 0.5
    assert record(7, ok, f"sigma_LI0^2 = {got[100]:.2f} dB (M=100), {got[200]:.2f} dB (M=200)")


def test_criterion_8_adc_placement():
    rng = np.random.default_rng(2024)
    worst, per_user = math.inf, 0
    for i in range(100):
        rho = (0.6366, 0.8825, 0.96546)[i % 3]
        c = make_config(M=128, sigma_LI2=0.1, beta_SR=rng.uniform(0.5, 2, 5),
                        beta_RD=rng.uniform(0.5, 2, 5))
        r, d = placement_rates(c, rho)
        worst = min(worst, r.sum() - d.sum())
        per_user += int(np.any(r < d))
    r, d = placement_rates(make_config(M=128), 1 - 1e-13)
    conv = float(np.max(np.abs(r - d)))
    ok = worst >= 0 and conv < 1e-9
    assert record(
        8, ok,
        f"min sum-rate margin R^R - R^D = {worst:.4f} bits over 100 points (M=128), "
        f"rho->1 difference {conv:.1e}. [info: points with some user R^R < R^D: {per_user}]",
    )


def test_criterion_9_lemma_suite():
    rng = np.random.default_rng(99)
    worst_z, worst_corr, worst_sum = 0.0, 0.0, 0.0
    for i in range(5):
        K = int(rng.integers(1, 5))
        c = make_config(M=int(rng.integers(2, 9)), K=K, p_p=float(10 ** rng.uniform(-1, 1.5)),
                        alpha=float(rng.choice([0.6366, 0.8825, 1.0])),
                        beta_SR=rng.uniform(0.3, 3, K), beta_RD=rng.uniform(0.3, 3, K))
        z, corr, *_ = lemma_check(c, 10_000, seed=i)
        s = estimation_stats(c)
        for var, err, beta in ((s.sigma2_SR, s.sigma2err_SR, c.beta_SR),
                               (s.sigma2_RD, s.sigma2err_RD, c.beta_RD)):
            worst_sum = max(worst_sum, float(np.max(np.abs(var + err - beta) / beta)))
        worst_z, worst_corr = max(worst_z, z), max(worst_corr, corr)
    ok = worst_z <= 3 and worst_sum <= 1e-12 and worst_corr < 0.02
    assert record(9, ok, f"max |z| = {worst_z:.2f}, max |sigma2 + err - beta|/beta = "
                         f"{worst_sum:.1e}, max |corr| = {worst_corr:.4f}")


def test_criterion_10_reproducibility_and_oracles():
    c = make_config(M=16, K=3, alpha=0.8825, theta=0.8825)
    a, b = simulate_terms(c, 500, seed=11), simulate_terms(c, 500, seed=11)
    pairs = [(a.rate, b.rate), (a.gamma, b.gamma), (a.sum_rate, b.sum_rate)]
    pairs += [(a.raw[k], b.raw[k]) for k in a.raw]
    pairs += [(a.terms[k], b.terms[k]) for k in a.terms]
    same = all(
        np.array_equal(np.asarray(getattr(x, f)), np.asarray(getattr(y, f)))
        for x, y in pairs for f in ("mean", "std_error")
    )
    worst = 0.0
    for seed, (M, K) in enumerate([(1, 1), (2, 2), (4, 3), (8, 3), (8, 1), (5, 2)]):
        rp, F, ch, r = dense_products(seed, M, K)
        gT = ch.G_RD.T
        d = r.uniform(0.1, 2.0, M)
        pairs = [
            (rp.gains(), gT @ F @ ch.G_SR),
            (rp.row_norms(), np.sum(np.abs(gT @ F) ** 2, axis=1)),
            (rp.norm_F(), np.sum(np.abs(F) ** 2)),
            (rp.norm_F_G_SR(), np.sum(np.abs(F @ ch.G_SR) ** 2)),
            (rp.norm_F_G_RR(), np.sum(np.abs(F @ ch.G_RR) ** 2)),
            (rp.loop_row_norms(), np.sum(np.abs(gT @ F @ ch.G_RR) ** 2, axis=1)),
            (rp.quant_rows(d), np.abs(gT @ F) ** 2 @ d),
            (rp.quant_total(d), np.trace(F @ np.diag(d) @ F.conj().T).real),
        ]
        for x, y in pairs:
            worst = max(worst, float(np.max(np.abs(np.asarray(x) - y) / np.abs(y))))
    ok = same and worst <= 1e-10
    assert record(10, ok, f"bit-identical reruns: {same}, max dense-vs-factorized "
                          f"rel. error {worst:.1e} on M<=8, K<=3")
