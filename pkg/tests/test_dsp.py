import numpy as np
import pytest

from dnmf.dsp import (
    Spectrogram,
    input_snr,
    istft,
    mix_at_snr,
    output_snr,
    stft,
    wiener_reconstruct,
)


def test_stft_shapes_and_frame_count():
    sig = np.zeros(1000)
    spec = stft(sig, 256, 64, 8000)
    assert spec.n_bins == 129
    assert spec.n_frames == (1000 - 256) // 64 + 1
    assert spec.frames.dtype == np.complex128
    assert spec.sample_rate == 8000


def test_stft_pure_tone_peaks_at_its_bin():
    # A sinusoid exactly on bin 8 of a length-128 DFT.
    n = np.arange(128 * 10)
    sig = np.sin(2.0 * np.pi * 8.0 * n / 128.0)
    mag = stft(sig, 128, 128, 8000).magnitude
    np.testing.assert_array_equal(np.argmax(mag, axis=0), 8)


def test_stft_validation():
    with pytest.raises(ValueError):
        stft(np.zeros(500), 100, 25, 8000)  # not a power of two
    with pytest.raises(ValueError):
        stft(np.zeros(64), 128, 32, 8000)  # too short
    with pytest.raises(ValueError):
        stft(np.zeros((2, 500)), 128, 32, 8000)
    with pytest.raises(ValueError):
        stft(np.zeros(500), 128, 0, 8000)


def test_spectrogram_validates_bin_count():
    with pytest.raises(ValueError):
        Spectrogram(np.zeros((100, 4), dtype=complex), 256, 64, 8000)


def test_stft_istft_round_trip_interior():
    rng = np.random.default_rng(17)
    sig = rng.standard_normal(4096)
    spec = stft(sig, 256, 64, 8000)
    rec = istft(spec)
    n = min(rec.shape[0], sig.shape[0])
    # The first and last windows are partially covered; compare the interior.
    a = sig[256 : n - 256]
    b = rec[256 : n - 256]
    rel = np.max(np.abs(a - b)) / np.max(np.abs(a))
    assert rel < 1e-6


def test_istft_output_length():
    spec = stft(np.zeros(2048), 512, 128, 16000)
    out = istft(spec)
    assert out.shape[0] == 512 + (spec.n_frames - 1) * 128


def test_wiener_hand_values():
    part1, part2 = wiener_reconstruct(
        np.array([3.0]), np.array([2.0]), np.array([1.0])
    )
    np.testing.assert_allclose(part1, [2.0])
    np.testing.assert_allclose(part2, [1.0])


def test_wiener_parts_sum_to_mixture():
    rng = np.random.default_rng(19)
    mix = rng.uniform(0.0, 2.0, size=(65, 40))
    e1 = rng.uniform(0.0, 1.0, size=(65, 40))
    e2 = rng.uniform(0.0, 1.0, size=(65, 40))
    p1, p2 = wiener_reconstruct(mix, e1, e2)
    np.testing.assert_allclose(p1 + p2, mix, rtol=0.0, atol=1e-12)
    assert np.all(p1 >= 0.0)
    assert np.all(p2 >= 0.0)


def test_wiener_zero_estimates_give_all_mass_to_remainder():
    mix = np.array([5.0])
    p1, p2 = wiener_reconstruct(mix, np.array([0.0]), np.array([0.0]))
    np.testing.assert_allclose(p1, [0.0])
    np.testing.assert_allclose(p2, [5.0])


def test_wiener_validation():
    with pytest.raises(ValueError):
        wiener_reconstruct(np.ones(3), np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        wiener_reconstruct(np.ones(3), -np.ones(3), np.ones(3))


def test_input_snr_hand_value():
    clean = np.array([1.0, 1.0, 1.0, 1.0])
    noisy = clean + np.array([0.1, -0.1, 0.1, -0.1])
    # 10 log10(4 / 0.04) = 20 dB
    assert input_snr(clean, noisy) == pytest.approx(20.0, abs=1e-12)


def test_output_snr_perfect_estimate_is_infinite():
    ref = np.array([0.3, -0.2, 0.7])
    assert output_snr(ref, ref.copy()) == float("inf")


def test_snr_validation():
    with pytest.raises(ValueError):
        input_snr(np.zeros(4), np.ones(4))
    with pytest.raises(ValueError):
        output_snr(np.zeros(4), np.ones(4))
    with pytest.raises(ValueError):
        input_snr(np.ones(4), np.ones(4))  # zero noise => infinite
    with pytest.raises(ValueError):
        output_snr(np.ones(4), np.ones(5))


def test_mix_at_snr_hits_target_exactly():
    rng = np.random.default_rng(23)
    sig = np.sin(np.linspace(0.0, 40.0, 2000))
    noise = rng.standard_normal(2000)
    for target in (-10.0, 0.0, 7.5, 30.0):
        mixed = mix_at_snr(sig, noise, target)
        assert input_snr(sig, mixed) == pytest.approx(target, abs=1e-9)


def test_mix_at_snr_validation():
    sig = np.ones(10)
    with pytest.raises(ValueError):
        mix_at_snr(sig, np.zeros(10), 0.0)
    with pytest.raises(ValueError):
        mix_at_snr(np.zeros(10), sig, 0.0)
    with pytest.raises(ValueError):
        mix_at_snr(sig, np.ones(9), 0.0)
    with pytest.raises(ValueError):
        mix_at_snr(sig, sig, float("inf"))
