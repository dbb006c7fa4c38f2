import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from fofpid.controllers import (
    KINDS,
    FOPIDController,
    FopidParams,
    FuzzyFOPIDController,
    FuzzyFopidParams,
    FuzzyPIDController,
    PIDController,
    controller_from_dict,
    decode_parameter_vector,
    default_bounds,
    make_controller,
)
from fofpid.fracops import gl_oracle

H = 0.01
SAMPLE = {
    "pid": [1.2, 0.4, 0.3],
    "fopid": [1.2, 0.4, 0.3, 0.8, 0.6],
    "fuzzy_pid": [0.7, 0.8, 1.3, 0.7],
    "fuzzy_fopid": [0.5, 0.6, 1.8, 0.9, 0.9, 0.7],
}


def errors(n=1000, seed=0):
    return np.random.default_rng(seed).normal(size=n)


@pytest.mark.parametrize("kind", KINDS)
def test_zero_error_gives_zero_control(kind):
    c = make_controller(kind, SAMPLE[kind], H)
    assert np.all(c.transform(np.zeros(200)) == 0.0)


def test_proportional_only():
    u = make_controller("pid", [1, 0, 0], H).transform(np.ones(100))
    np.testing.assert_array_equal(u, 1.0)


def test_pid_oracle():
    # independent reconstruction: trapezoid integral from 0, backward difference
    e = errors(300, 4)
    Kp, Ki, Kd = 1.5, 0.7, 0.2
    u = make_controller("pid", [Kp, Ki, Kd], H).transform(e)
    integ = np.concatenate([[0.0], np.cumsum(0.5 * H * (e[1:] + e[:-1]))])
    deriv = np.concatenate([[0.0], np.diff(e) / H])
    np.testing.assert_allclose(u, Kp * e + Ki * integ + Kd * deriv, rtol=1e-10, atol=1e-10)


def test_fopid_integral_term_tracks_gl():
    # Ki / s**0.5 on a unit step: half-integral 2*sqrt(t/pi) at t = 1
    h = 1e-3
    c = FOPIDController(Kp=0, Ki=1, Kd=0, lam=0.5, mu=1.0, sample_time=h).fit()
    u = c.transform(np.ones(1001))
    assert u[-1] == pytest.approx(gl_oracle(np.ones(1001), -0.5, h)[-1], rel=0.05)


@pytest.mark.parametrize("seed", range(3))
def test_reduction_fopid_to_pid(seed):
    e = errors(1000, seed)
    a = FOPIDController(1.1, 0.6, 0.2, lam=1.0, mu=1.0, sample_time=H).fit().transform(e)
    b = PIDController(1.1, 0.6, 0.2, sample_time=H).fit().transform(e)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("seed", range(3))
def test_reduction_fuzzy_fopid_to_fuzzy_pid(seed):
    e = errors(1000, seed) * 0.3
    a = FuzzyFOPIDController(0.7, 0.8, 1.3, 0.7, lam=1.0, mu=1.0, sample_time=H).fit().transform(e)
    b = FuzzyPIDController(0.7, 0.8, 1.3, 0.7, sample_time=H).fit().transform(e)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("kind", KINDS)
def test_determinism_after_reset(kind):
    c = make_controller(kind, SAMPLE[kind], H)
    e = errors(400, 7)
    first = c.transform(e)
    np.testing.assert_array_equal(c.transform(e), first)


@given(st.floats(-10, 10))
@settings(max_examples=20, deadline=None)
def test_linear_controllers_scale(scale):
    e = errors(200, 2)
    for kind in ("pid", "fopid"):
        c = make_controller(kind, SAMPLE[kind], H)
        np.testing.assert_allclose(c.transform(scale * e), scale * c.transform(e), rtol=1e-9, atol=1e-9)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=60))
@settings(max_examples=30, deadline=None)
def test_flc_output_bounded(seq):
    c = make_controller("fuzzy_fopid", SAMPLE["fuzzy_fopid"], H)
    c.reset()
    for e in seq:
        assert abs(c.flc_output(e)) <= 1.0


def test_decode_table_rows():
    p = decode_parameter_vector("fuzzy_fopid", [0.478803, 0.605029, 1.780246, 0.865874, 0.999794, 0.999598])
    assert p == FuzzyFopidParams(0.478803, 0.605029, 1.780246, 0.865874, 0.999794, 0.999598)
    q = decode_parameter_vector("fopid", [0.337983, 0.155569, 0.497122, 0.972147, 0.556586])
    assert q == FopidParams(0.337983, 0.155569, 0.497122, 0.972147, 0.556586)
    assert decode_parameter_vector("pid", [1, 0, 0]) == FopidParams(1.0, 0.0, 0.0)


@pytest.mark.parametrize("kind,raw", [("pid", [1, 2]), ("fopid", [1, 1, 1, 1, 2.5]), ("pid", [-1, 0, 0]),
                                      ("fuzzy_pid", [1, 1, 1, np.nan]), ("bogus", [1])])
def test_decode_rejects(kind, raw):
    with pytest.raises(ValueError):
        decode_parameter_vector(kind, raw)


def test_default_bounds_layout():
    assert len(default_bounds("fuzzy_fopid")) == 6
    assert default_bounds("fopid")[3][0] > 0.0
    assert default_bounds("pid") == [(0.0, 100.0)] * 3


@pytest.mark.parametrize("kind", KINDS)
def test_serialization_round_trip(kind):
    c = make_controller(kind, SAMPLE[kind], H)
    d = controller_from_dict(c.to_dict())
    e = errors(100, 5)
    np.testing.assert_array_equal(d.transform(e), c.transform(e))


@pytest.mark.parametrize("kind", KINDS)
def test_sklearn_clone(kind):
    c = make_controller(kind, SAMPLE[kind], H)
    c2 = clone(c).fit()
    assert c2.get_params() == c.get_params()
    e = errors(50, 6)
    np.testing.assert_array_equal(c2.transform(e), c.transform(e))


def test_transform_requires_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        PIDController().transform([1.0])


def test_make_controller_missing_fields():
    with pytest.raises(ValueError):
        make_controller("pid", {"Kp": 1.0}, H)


def test_improper_derivative_order():
    # mu in (1, 2): backward difference applied to the fractional remainder
    c = FOPIDController(0, 0, 1, lam=1.0, mu=1.5, sample_time=H).fit()
    u = c.transform(np.arange(300) * H)
    assert np.all(np.isfinite(u))
