import math

import numpy as np
import pytest

from cicdsp import sdm
from cicdsp.sdm import InstabilityError, SdmConfig, SdmState


def test_quantize_zero_is_zero():
    cfg = SdmConfig(1, 5)
    assert sdm.quantize(0.0, cfg) == (0, 0.0, 0.0)


def test_quantize_clips_silently():
    cfg = SdmConfig(1, 5)
    code, recon, err = sdm.quantize(3.0, cfg)
    assert code == cfg.max_code
    assert recon < 3.0


def test_quantize_error_bound_unclipped():
    cfg = SdmConfig(1, 4)
    for v in np.linspace(-1, 1, 999):
        _, _, err = sdm.quantize(v, cfg)
        assert abs(err) <= cfg.step / 2 + 1e-15


def test_quantize_error_variance():
    cfg = SdmConfig(1, 5)
    rng = np.random.default_rng(2)
    v = rng.uniform(-1, 1, 1_000_000)
    errs = np.array([sdm.quantize(x, cfg)[2] for x in v])
    assert abs(errs.var() / (cfg.step**2 / 12) - 1) < 0.02


def test_config_validation():
    with pytest.raises(ValueError):
        SdmConfig(4, 5)
    with pytest.raises(ValueError):
        SdmConfig(1, 0)
    with pytest.raises(ValueError):
        SdmConfig(1, 5, full_scale=0.0)


def test_zero_input_zero_output():
    codes, errs = sdm.run_sdm(SdmConfig(1, 5), [0.0] * 256)
    assert codes == [0] * 256


def _tone(n, freq=997.0, fs=48000.0, amp=0.5):
    return amp * np.sin(2 * np.pi * freq / fs * np.arange(n))


def test_order1_per_sample_identity():
    cfg = SdmConfig(1, 5)
    x = _tone(10_000)
    codes, errs = sdm.run_sdm(cfg, x)
    y = np.array(codes) * cfg.step
    e = np.array(errs)
    lhs = y[1:]
    rhs = x[:-1] + e[1:] - e[:-1]
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_order2_per_sample_identity():
    cfg = SdmConfig(2, 5)
    x = _tone(10_000)
    codes, errs = sdm.run_sdm(cfg, x)
    y = np.array(codes) * cfg.step
    e = np.array(errs)
    lhs = y[2:]
    rhs = x[1:-1] + e[2:] - 2 * e[1:-1] + e[:-2]
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_order3_per_sample_identity():
    cfg = SdmConfig(3, 5)
    x = _tone(10_000)
    codes, errs = sdm.run_sdm(cfg, x)
    y = np.array(codes) * cfg.step
    e = np.array(errs)
    lhs = y[3:]
    rhs = x[2:-1] + e[3:] - 3 * e[2:-1] + 3 * e[1:-2] - e[:-3]
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_codes_stay_in_range():
    cfg = SdmConfig(3, 5)
    codes, _ = sdm.run_sdm(cfg, _tone(20_000, amp=0.5))
    assert max(abs(c) for c in codes) <= cfg.max_code


def test_instability_detected():
    # 1-bit midtread quantizer only emits code 0: the loop cannot track and
    # the integrators ramp away
    cfg = SdmConfig(3, 1)
    with pytest.raises(InstabilityError):
        sdm.run_sdm(cfg, [0.9] * 100_000)


def test_state_resume_matches_single_run():
    cfg = SdmConfig(2, 5)
    x = _tone(4000)
    full, _ = sdm.run_sdm(cfg, x)
    st = SdmState.initial(cfg)
    a, _ = sdm.run_sdm(cfg, x[:1500], state=st)
    b, _ = sdm.run_sdm(cfg, x[1500:], state=st)
    assert a + b == full


def test_snr_quantizer_db():
    assert abs(sdm.snr_quantizer_db(16) - 98.08) < 1e-9
    assert abs(sdm.snr_quantizer_db(1) - 7.78) < 1e-9
    assert abs(sdm.snr_quantizer_db(5) - 31.86) < 1e-9


def test_osr():
    assert sdm.osr(6.144e6, 24e3) == 128
    assert sdm.osr(2 * 24e3, 24e3) == 1
    assert sdm.osr(48e3, 24e3) == 1
    with pytest.raises(ValueError):
        sdm.osr(40e3, 24e3)


def test_inband_noise_power():
    assert abs(sdm.inband_noise_power(1 / 12, 128) - 1 / 1536) < 1e-18
    assert sdm.inband_noise_power(0.25, 1) == 0.25
    half = sdm.inband_noise_power(1.0, 64) / sdm.inband_noise_power(1.0, 32)
    assert abs(half - 0.5) < 1e-15


def test_noise_density():
    assert abs(sdm.noise_density(math.sqrt(1 / 12), 1.0)
               - math.sqrt(1 / 6)) < 1e-15
    # integrating the squared density over [0, fs/2] recovers the power
    e_rms, fs = 0.37, 4.0
    d = sdm.noise_density(e_rms, fs)
    assert abs(d * d * (fs / 2) - e_rms**2) < 1e-15
    ratio = sdm.noise_density(1.0, 2.0) / sdm.noise_density(1.0, 1.0)
    assert abs(ratio - 1 / math.sqrt(2)) < 1e-15
