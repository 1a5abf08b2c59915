import math

import numpy as np
import pytest

from cicdsp import analysis, cic
from cicdsp.analysis import (
    NoiseBudget,
    ResponseCurve,
    cic_power_response_approx,
    cic_power_response_exact,
    fir_response,
    hj_coefficients,
    measure_snr,
    prune_stage_widths,
    stage_response,
    truncation_budget,
    widths_to_discards,
)
from cicdsp.cic import CicConfig
from cicdsp.fir import FirFilter

CFG = CicConfig(5, 16, 1, 5)


# -- closed-form responses ---------------------------------------------------

def test_exact_response_dc():
    assert cic_power_response_exact(CFG, 0.0, normalized=True) == 1.0
    assert cic_power_response_exact(CFG, 0.0) == (16.0) ** 10


def test_exact_response_nulls():
    cfg = CicConfig(3, 8, 2, 4)
    for k in (1, 2, 3):
        p = cic_power_response_exact(cfg, k / cfg.m, normalized=True)
        assert p < 1e-25


def test_exact_response_droop_at_22k():
    # 22 kHz at a 6.144 MHz input rate is f = 22/384 of the low rate
    p = cic_power_response_exact(CFG, 22e3 / 384e3, normalized=True)
    db = 10 * math.log10(p)
    assert abs(db - (-0.25)) <= 0.05


def test_approx_equals_exact_at_dc():
    assert cic_power_response_approx(CFG, 0.0) == cic_power_response_exact(CFG, 0.0)


def test_approx_null_at_inverse_m():
    cfg = CicConfig(2, 16, 2, 4)
    # sin(pi) in floats is ~1e-16, so the null lands at ~1e-60 in power
    assert cic_power_response_approx(cfg, 1 / cfg.m) < 1e-50


def test_approx_domain():
    with pytest.raises(ValueError):
        cic_power_response_approx(CFG, 1.5)


def test_approx_within_1db_flagship():
    f = np.linspace(1e-6, 255 / 256, 4096)
    for n in range(1, 8):
        cfg = CicConfig(n, 16, 1, 5)
        e = 10 * np.log10(cic_power_response_exact(cfg, f))
        a = 10 * np.log10(cic_power_response_approx(cfg, f))
        assert np.abs(e - a).max() < 1.0, n


def test_stage_response_integrator():
    p, ph = stage_response("integrator", 1, math.pi)
    assert abs(p - 0.25) < 1e-15
    p0, ph0 = stage_response("integrator", 1, 0.0)
    assert math.isinf(p0) and math.isnan(ph0)


def test_stage_response_comb():
    p, ph = stage_response("comb", 4, 0.0)
    assert p == 0.0
    k = 3
    p, ph = stage_response("comb", k, math.pi / k)
    assert abs(p - 4.0) < 1e-12
    assert abs(ph + k * (math.pi / k) / 2) < 1e-15


def test_fir_response_trivial():
    one = fir_response(FirFilter((1.0,), 100.0), np.linspace(0, 50, 11))
    assert np.abs(one.magnitude_db).max() < 1e-12
    assert np.abs(one.phase_rad).max() < 1e-12
    pair = fir_response(FirFilter((1.0, 1.0), 100.0), np.array([0.0, 50.0]))
    assert pair.magnitude_db[1] < -300.0  # float-precision null


def test_fir_response_cross_checks_closed_form():
    # two independent routes to the same curve: the expanded integer taps
    # versus the sin-ratio formula
    cfg = CicConfig(3, 8, 1, 4)
    taps = cic.impulse_coefficients(cfg)
    rate = 1.0
    f_low = np.linspace(0.013, 0.47, 57)  # keep clear of the nulls
    curve = fir_response(FirFilter(tuple(float(t) for t in taps), rate),
                         f_low / cfg.r)
    direct = 10 * np.log10(cic_power_response_exact(cfg, f_low))
    assert np.abs(curve.magnitude_db - direct).max() < 1e-9


def test_response_curve_csv_round_trip(tmp_path):
    c = ResponseCurve(np.array([0.0, 1.0, 2.0]), np.array([0.0, -3.0, -600.0]),
                      np.array([0.0, -0.5, -1.0]), 48e3)
    path = tmp_path / "c.csv"
    c.to_csv(path)
    d = ResponseCurve.from_csv(path)
    assert np.array_equal(c.freqs, d.freqs)
    assert np.array_equal(c.magnitude_db, d.magnitude_db)  # clamped at -400
    assert d.reference_rate == 48e3
    assert d.magnitude_db[2] == analysis.DB_FLOOR


# -- SNR measurement ---------------------------------------------------------

def test_measure_snr_pure_tone():
    n = 1 << 14
    rate = 48e3
    k = 601
    x = 0.9 * np.sin(2 * np.pi * k / n * np.arange(n))
    assert measure_snr(x, k * rate / n, rate, 20e3) >= 150.0


def test_measure_snr_known_white_noise():
    n = 1 << 16
    rate = 48e3
    k = 1201
    amp, sigma = 0.5, 0.01
    rng = np.random.default_rng(6)
    x = amp * np.sin(2 * np.pi * k / n * np.arange(n)) + rng.normal(0, sigma, n)
    band = 20e3
    want = 10 * math.log10((amp**2 / 2) / (sigma**2 * 2 * band / rate))
    got = measure_snr(x, k * rate / n, rate, band)
    assert abs(got - want) <= 0.5


def test_measure_snr_quantized_sine():
    n = 1 << 14
    rate = 48e3
    k = 1001
    bits = 10
    x = np.sin(2 * np.pi * k / n * np.arange(n))
    step = 2.0 / (2**bits - 1)
    q = np.round(x / step) * step
    got = measure_snr(q, k * rate / n, rate, rate / 2)
    assert abs(got - (6.02 * bits + 1.76)) <= 1.0


def test_measure_snr_validation():
    with pytest.raises(ValueError):
        measure_snr(np.zeros(100), 1e3, 48e3, 20e3)
    with pytest.raises(ValueError):
        measure_snr(np.zeros(4096), 25e3, 48e3, 20e3)


# -- truncation noise --------------------------------------------------------

def test_hj_output_register():
    assert hj_coefficients(CFG, 11) == [1]


def test_hj_last_comb():
    assert hj_coefficients(CFG, 10) == [1, -1]
    cfg = CicConfig(2, 4, 2, 4)
    assert hj_coefficients(cfg, 4) == [1, 0, -1]


def test_hj_first_stage_is_full_filter():
    assert hj_coefficients(CFG, 1) == cic.impulse_coefficients(CFG)


def test_hj_comb_stages_are_signed_binomials():
    cfg = CicConfig(3, 4, 1, 4)
    # stage N+1 .. 2N: (1 - z^-M)^(2N+1-j)
    assert hj_coefficients(cfg, 4) == [1, -3, 3, -1]
    assert hj_coefficients(cfg, 5) == [1, -2, 1]
    assert hj_coefficients(cfg, 6) == [1, -1]


def test_hj_integrator_stages_match_impulse_simulation():
    cfg = CicConfig(3, 4, 1, 4)
    rm = cfg.r * cfg.m
    for j in range(1, cfg.n + 1):
        # simulate: unit impulse through integrators j..N then the N combs,
        # all at the input rate (comb delay RM), unbounded integers
        length = (rm - 1) * cfg.n + j + 4
        x = [1] + [0] * (length - 1)
        for _ in range(cfg.n - j + 1):
            acc = 0
            y = []
            for v in x:
                acc += v
                y.append(acc)
            x = y
        for _ in range(cfg.n):
            x = [x[i] - (x[i - rm] if i >= rm else 0) for i in range(len(x))]
        sim = x
        taps = hj_coefficients(cfg, j)
        assert sim[: len(taps)] == taps
        assert all(v == 0 for v in sim[len(taps):])


def test_hj_index_range():
    with pytest.raises(ValueError):
        hj_coefficients(CFG, 0)
    with pytest.raises(ValueError):
        hj_coefficients(CFG, 12)


def test_budget_all_zero():
    b = truncation_budget(CFG, [0] * 11)
    assert b.mean_total == 0.0 and b.variance_total == 0.0
    assert all(s.quantum == 0.0 for s in b.stages)


def test_budget_output_stage_term():
    discards = [0] * 10 + [4]
    b = truncation_budget(CFG, discards)
    last = b.stages[-1]
    assert last.dc_gain == 1.0 and last.power_gain == 1.0
    assert b.variance_total == 2 ** (2 * 4) / 12
    assert b.mean_total == 2**4 / 2


def test_budget_first_stage_dc_gain():
    b = truncation_budget(CFG, [0] * 11)
    assert b.stages[0].dc_gain == 2**20
    assert all(s.dc_gain == 0.0 for s in b.stages[1:-1])


def test_budget_linearity():
    d1 = [0, 3] + [0] * 9
    d2 = [0, 0, 2] + [0] * 8
    both = [0, 3, 2] + [0] * 8
    v1 = truncation_budget(CFG, d1).variance_total
    v2 = truncation_budget(CFG, d2).variance_total
    v = truncation_budget(CFG, both).variance_total
    assert abs(v - (v1 + v2)) < 1e-9
    assert v1 > 0 and v > v2


def test_budget_validation():
    with pytest.raises(ValueError):
        truncation_budget(CFG, [0] * 10)
    with pytest.raises(ValueError):
        truncation_budget(CFG, [0] * 10 + [24])  # width would drop below 2


def test_budget_json_shape():
    d = truncation_budget(CFG, [0] * 11).as_dict()
    assert set(d) == {"stages", "mean_total", "variance_total"}
    assert len(d["stages"]) == 11


# -- pruning -----------------------------------------------------------------

def test_prune_no_output_truncation():
    full = cic.register_width(CFG)
    assert prune_stage_widths(CFG, full) == [full] * 11


def test_prune_flagship_matches_reference_widths():
    ws = prune_stage_widths(CFG, 16)
    reference = [25, 22, 20, 18, 16]
    assert all(abs(a - b) <= 1 for a, b in zip(ws[:5], reference))
    assert ws[0] == 25 and ws[-1] == 16


def test_prune_monotone_and_bounded():
    for b_out in (24, 20, 16, 12, 8):
        ws = prune_stage_widths(CFG, b_out)
        assert ws[0] == cic.register_width(CFG)
        assert ws[-1] == b_out
        assert all(a >= b for a, b in zip(ws, ws[1:]))
        assert all(w >= 2 for w in ws)


def test_prune_validation():
    with pytest.raises(ValueError):
        prune_stage_widths(CFG, 26)
    with pytest.raises(ValueError):
        prune_stage_widths(CFG, 1)


def test_widths_to_discards():
    ws = [25, 23, 19, 17, 16] + [16] * 6
    d = widths_to_discards(CFG, ws)
    assert d == [0, 2, 6, 8, 9, 0, 0, 0, 0, 0, 0]


def test_pruned_budget_predicts_monte_carlo_variance():
    # smaller companion to the acceptance run: 2e5 samples, 15% gate
    ws = prune_stage_widths(CFG, 16)
    cfg_t = CicConfig(5, 16, 1, 5, stage_widths=tuple(ws))
    sigma2 = truncation_budget(CFG, widths_to_discards(CFG, ws)).variance_total
    rng = np.random.default_rng(12)
    xs = rng.integers(-16, 16, 200_000)
    full = cic.decimate_array(CFG, xs).astype(np.int64)
    trunc = cic.decimate_array(cfg_t, xs).astype(np.int64)
    err = (full - (trunc << (25 - 16)))[20:]
    assert abs(err.var() / sigma2 - 1) < 0.15
