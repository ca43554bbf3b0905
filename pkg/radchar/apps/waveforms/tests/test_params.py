import numpy as np
from django.test import SimpleTestCase

from radchar.apps.core.exceptions import ExitCode, SignalParamsValidationError
from radchar.apps.waveforms.params import FRAME_DURATION_S, IQFrame, SignalClass, SignalParams


def make_params(**overrides):
    values = dict(
        signal_class=SignalClass.BARKER,
        t_pw=12e-6,
        t_pri=20e-6,
        n_p=3,
        t_d=5e-6,
        l_c=7,
        snr_db=0.0,
    )
    values.update(overrides)
    return SignalParams(**values)


class SignalClassTests(SimpleTestCase):
    def test_five_stable_codes(self):
        self.assertEqual([int(c) for c in SignalClass], [0, 1, 2, 3, 4])
        self.assertEqual(SignalClass(2).label, "Frank")

    def test_from_label(self):
        self.assertIs(SignalClass.from_label("polyphase barker"), SignalClass.POLYPHASE_BARKER)
        self.assertIs(SignalClass.from_label("LFM"), SignalClass.LFM)
        with self.assertRaises(ValueError):
            SignalClass.from_label("chirp")


class SignalParamsTests(SimpleTestCase):
    def test_frame_duration(self):
        self.assertAlmostEqual(FRAME_DURATION_S, 160e-6)

    def test_valid_params_pass(self):
        make_params().validate()

    def test_maximum_extent_fits(self):
        params = make_params(t_d=10e-6, n_p=6, t_pri=23e-6, t_pw=16e-6)
        self.assertAlmostEqual(params.extent_s, 141e-6)
        params.validate()

    def test_float32_rounded_bounds_are_accepted(self):
        make_params(t_pw=float(np.float32(10e-6)), t_d=float(np.float32(1e-6))).validate()

    def test_every_violation_is_reported(self):
        params = make_params(t_pw=9e-6, n_p=7, snr_db=25.0, l_c=6)
        with self.assertRaises(SignalParamsValidationError) as ctx:
            params.validate()
        fields = {detail.field for detail in ctx.exception.details}
        self.assertEqual(fields, {"t_pw", "n_p", "snr_db", "l_c"})
        self.assertEqual(ctx.exception.exit_code, ExitCode.USAGE)

    def test_code_length_for_unmodulated(self):
        self.assertFalse(make_params(signal_class=SignalClass.UNMODULATED, l_c=2).check())
        self.assertTrue(make_params(signal_class=SignalClass.UNMODULATED, l_c=1).check())

    def test_dict_conversion(self):
        params = make_params(signal_class=SignalClass.FRANK, l_c=16)
        data = params.to_dict()
        self.assertEqual(data["signal_class"], "Frank")
        self.assertEqual(SignalParams.from_dict(data), params)


class IQFrameTests(SimpleTestCase):
    def test_channel_layout(self):
        frame = IQFrame.from_complex(np.array([1 + 2j, 3 - 4j]))
        np.testing.assert_array_equal(frame.to_array(), [[1, 3], [2, -4]])
        self.assertEqual(frame.to_array().dtype, np.float32)
        self.assertAlmostEqual(frame.mean_power(), (5 + 25) / 2)
