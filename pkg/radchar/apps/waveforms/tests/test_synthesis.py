import numpy as np
from django.test import SimpleTestCase

from radchar.apps.core.exceptions import FrameOverflowError
from radchar.apps.waveforms.params import F_S_HZ, SAMPLES_PER_FRAME, IQFrame, SignalClass, SignalParams
from radchar.apps.waveforms.synthesis import (
    apply_awgn,
    chip_index,
    min_sampling_rate,
    noise_power,
    pulse_starts,
    satisfies_sampling_bound,
    synthesize,
    synthesize_frame,
    synthesize_pulse,
    to_samples,
)


def make_params(**overrides):
    values = dict(
        signal_class=SignalClass.UNMODULATED,
        t_pw=10e-6,
        t_pri=20e-6,
        n_p=2,
        t_d=1e-6,
        l_c=1,
        snr_db=0.0,
    )
    values.update(overrides)
    return SignalParams(**values)


class PulseTests(SimpleTestCase):
    def test_unmodulated_pulse_is_constant(self):
        pulse = synthesize_pulse(make_params())
        self.assertEqual(len(pulse), 32)
        np.testing.assert_array_equal(pulse, np.ones(32))

    def test_barker_chip_grid(self):
        params = make_params(signal_class=SignalClass.BARKER, l_c=5)
        pulse = synthesize_pulse(params)
        self.assertEqual(len(pulse), 32)
        chips = chip_index(32, 5)
        starts = [int(np.argmax(chips == c)) for c in range(5)]
        self.assertEqual(starts, [0, 6, 12, 19, 25])
        np.testing.assert_allclose(pulse[19:25], -1.0, atol=1e-12)
        np.testing.assert_allclose(pulse[:19], 1.0, atol=1e-12)
        np.testing.assert_allclose(pulse[25:], 1.0, atol=1e-12)

    def test_chip_index_covers_every_sample(self):
        for n_samples, l_c in ((32, 13), (51, 16), (40, 7)):
            chips = chip_index(n_samples, l_c)
            self.assertEqual(chips[0], 0)
            self.assertEqual(chips[-1], l_c - 1)
            self.assertTrue(np.all(np.diff(chips) >= 0))
            self.assertEqual(len(np.unique(chips)), l_c)

    def test_lfm_starts_at_zero_phase(self):
        pulse = synthesize_pulse(make_params(signal_class=SignalClass.LFM))
        self.assertEqual(pulse[0], 1 + 0j)
        np.testing.assert_allclose(np.abs(pulse), 1.0)

    def test_all_classes_are_unit_modulus(self):
        for signal_class, l_c in (
            (SignalClass.BARKER, 13),
            (SignalClass.POLYPHASE_BARKER, 11),
            (SignalClass.FRANK, 16),
        ):
            pulse = synthesize_pulse(make_params(signal_class=signal_class, l_c=l_c, t_pw=13.3e-6))
            self.assertEqual(len(pulse), to_samples(13.3e-6))
            np.testing.assert_allclose(np.abs(pulse), 1.0)


class FrameTests(SimpleTestCase):
    def test_pulse_placement(self):
        np.testing.assert_array_equal(pulse_starts(make_params()), [3, 67])

    def test_unity_power_and_zero_gaps(self):
        params = make_params(signal_class=SignalClass.FRANK, l_c=9, n_p=4, t_pw=14e-6)
        frame = synthesize_frame(params)
        self.assertEqual(len(frame), SAMPLES_PER_FRAME)
        self.assertAlmostEqual(frame.mean_power(), 1.0, delta=1e-6)

        occupied = np.zeros(SAMPLES_PER_FRAME, dtype=bool)
        n_pulse = to_samples(params.t_pw)
        for start in pulse_starts(params):
            occupied[start:start + n_pulse] = True
        samples = frame.to_complex()
        self.assertTrue(np.all(samples[~occupied] == 0))
        self.assertTrue(np.all(np.abs(samples[occupied]) > 0))

    def test_maximum_extent_fits(self):
        params = make_params(t_d=10e-6, n_p=6, t_pri=23e-6, t_pw=16e-6)
        frame = synthesize_frame(params)
        last = int(np.flatnonzero(frame.to_complex())[-1])
        self.assertLessEqual(last, to_samples(141e-6))
        self.assertLessEqual(last, 511)

    def test_overflow_is_reported(self):
        with self.assertRaises(FrameOverflowError):
            synthesize_frame(make_params(n_p=6, t_pri=40e-6))


class NoiseTests(SimpleTestCase):
    def test_noise_power_levels(self):
        self.assertEqual(noise_power(0), 1.0)
        self.assertAlmostEqual(noise_power(20), 0.01)

    def test_same_seed_gives_identical_frames(self):
        params = make_params(snr_db=-5.0)
        first = synthesize(params, np.random.default_rng(11))
        second = synthesize(params, np.random.default_rng(11))
        np.testing.assert_array_equal(first.to_array(np.float64), second.to_array(np.float64))

    def test_empirical_noise_power(self):
        rng = np.random.default_rng(2024)
        silent = IQFrame(i=np.zeros(SAMPLES_PER_FRAME), q=np.zeros(SAMPLES_PER_FRAME))
        powers = [apply_awgn(silent, 10.0, rng).mean_power() for _ in range(10_000)]
        self.assertAlmostEqual(np.mean(powers), 0.1, delta=0.002)

    def test_noise_splits_evenly_between_channels(self):
        rng = np.random.default_rng(5)
        silent = IQFrame(i=np.zeros(200_000), q=np.zeros(200_000))
        noisy = apply_awgn(silent, 0.0, rng)
        self.assertAlmostEqual(np.var(noisy.i), 0.5, delta=0.01)
        self.assertAlmostEqual(np.var(noisy.q), 0.5, delta=0.01)


class SamplingRateTests(SimpleTestCase):
    def test_frank_extreme_sits_on_the_bound(self):
        params = make_params(signal_class=SignalClass.FRANK, l_c=16, t_pw=10e-6, t_pri=17e-6, t_d=1e-6)
        self.assertAlmostEqual(min_sampling_rate(params) / 3.2e6, 1.0, places=12)
        self.assertTrue(satisfies_sampling_bound(params, F_S_HZ))

    def test_unmodulated_bound(self):
        params = make_params(t_pw=10e-6, t_pri=17e-6, t_d=1e-6)
        self.assertAlmostEqual(min_sampling_rate(params) / 2e6, 1.0, places=12)

    def test_unit_times(self):
        params = make_params(t_pw=1.0, t_pri=1.0, t_d=1.0)
        self.assertEqual(min_sampling_rate(params), 2.0)

    def test_bound_violation(self):
        params = make_params(signal_class=SignalClass.FRANK, l_c=16, t_pw=10e-6)
        self.assertFalse(satisfies_sampling_bound(params, 3.0e6))
