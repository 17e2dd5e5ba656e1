import math
from fractions import Fraction

import numpy as np
import pytest

from rnnreal.activation import (
    BUILTINS,
    IDENTITY,
    SIGMOID,
    TANH,
    A1Data,
    ActivationSpec,
    a2_to_a1,
    builtin,
    check_a1,
    sigma_eval,
    xi_eval,
    xi_ode,
)
from rnnreal.algebra import MultiPoly, RationalFunc, parse_poly
from rnnreal.errors import ArgumentError, ConfigurationError, EvaluationError


def poly1(text):
    return parse_poly(text, 1)


@pytest.mark.parametrize("spec, u1", [
    (TANH, "1 - X1^2"),
    (SIGMOID, "X1 - X1^2"),
    (IDENTITY, "1"),
])
def test_a2_to_a1_builtins(spec, u1):
    data = a2_to_a1(spec)
    assert data.N == 1
    assert data.U == (poly1("X1"), poly1(u1))
    assert data.V == (MultiPoly.one(1), MultiPoly.one(1))
    assert data.is_polynomial()


def test_a2_to_a1_higher_order_shifts():
    # sigma'' = -sigma: sine with init (0, 1)
    spec = ActivationSpec("sine", 2, RationalFunc.from_poly(parse_poly("-X1", 2)), (0, 1))
    data = a2_to_a1(spec)
    assert len(data.U) == len(data.V) == 3
    assert all(p.num_vars == 2 for p in data.U + data.V)
    assert data.U[0] == parse_poly("X1", 2)
    assert data.U[1] == parse_poly("X2", 2)
    assert data.U[2] == parse_poly("-X1", 2)
    z = np.linspace(-2, 2, 9)
    xi = xi_eval(spec, z)
    assert np.allclose(xi[:, 0], np.sin(z), atol=1e-9)
    assert np.allclose(xi[:, 1], np.cos(z), atol=1e-9)


def test_sigma_at_zero():
    assert sigma_eval(TANH, 0.0) == 0.0
    assert sigma_eval(SIGMOID, 0.0) == 0.5


@pytest.mark.parametrize("spec, oracle", [
    (TANH, np.tanh),
    (SIGMOID, lambda z: 1 / (1 + np.exp(-z))),
    (IDENTITY, lambda z: z),
])
def test_ode_path_matches_closed_form(spec, oracle):
    z = np.linspace(-5, 5, 101)
    ode = sigma_eval(spec, z, method="ode")
    assert np.max(np.abs(ode - oracle(z))) <= 1e-8
    assert abs(sigma_eval(spec, 1.0, method="ode") - float(oracle(1.0))) <= 1e-8


def test_sigma_eval_shapes_and_errors():
    assert np.shape(sigma_eval(TANH, np.zeros((2, 3)))) == (2, 3)
    assert isinstance(sigma_eval(TANH, 0.3), float)
    custom = ActivationSpec("custom", 1, RationalFunc.from_poly(poly1("1 - X1^2")), (0,))
    with pytest.raises(ConfigurationError):
        sigma_eval(custom, 0.0, method="closed")
    with pytest.raises(ArgumentError):
        sigma_eval(TANH, 0.0, method="euler")


def test_custom_activation_uses_ode():
    custom = ActivationSpec("my_tanh", 1, RationalFunc.from_poly(poly1("1 - X1^2")), (0,))
    assert abs(sigma_eval(custom, 0.7) - math.tanh(0.7)) <= 1e-8


def test_ode_denominator_guard():
    # sigma' = 1 / (1 - sigma) hits the pole at sigma = 1 near z = 1/2
    spec = ActivationSpec("pole", 1, RationalFunc(MultiPoly.one(1), poly1("1 - X1")), (0,))
    with pytest.raises(EvaluationError):
        xi_ode(spec, 2.0)


def test_spec_validation():
    rhs = RationalFunc.from_poly(poly1("1"))
    with pytest.raises(ArgumentError):
        ActivationSpec("bad", 0, rhs, ())
    with pytest.raises(ArgumentError):
        ActivationSpec("bad", 1, rhs, (0, 1))
    with pytest.raises(ArgumentError):
        ActivationSpec("bad", 1, RationalFunc(MultiPoly.one(1), poly1("X1")), (0,))
    with pytest.raises(ArgumentError):
        ActivationSpec("bad", 1, rhs, (0,), closed_form="relu")
    with pytest.raises(ConfigurationError):
        builtin("relu")
    assert set(BUILTINS) == {"tanh", "sigmoid", "identity"}
    assert TANH.invertible and SIGMOID.invertible


@pytest.mark.parametrize("spec", [TANH, SIGMOID])
def test_check_a1_passes(spec):
    report = check_a1(a2_to_a1(spec), spec, np.linspace(-3, 3, 61))
    assert report.passed
    assert max(report.max_output_residual, report.max_derivative_residual) <= 1e-6


def test_check_a1_catches_corrupted_data():
    good = a2_to_a1(TANH)
    bad = A1Data(1, (good.U[0], poly1("1 + X1^2")), good.V, TANH)
    report = check_a1(bad, TANH, np.linspace(-3, 3, 61))
    assert not report.passed
    # residual |(1 - s^2) - (1 + s^2)| = 2 s^2 at the worst sample
    assert report.max_derivative_residual > 0.1
    s = math.tanh(report.worst_sample)
    assert report.max_derivative_residual == pytest.approx(2 * s * s, rel=1e-6)


def test_a1_data_validation():
    one = MultiPoly.one(1)
    with pytest.raises(ArgumentError):
        A1Data(1, (one,), (one,), TANH)
    with pytest.raises(ArgumentError):
        A1Data(1, (one, one), (one, MultiPoly.zero(1)), TANH)


def test_init_is_exact():
    assert SIGMOID.init == (Fraction(1, 2),)
