"""Activation functions given by explicit polynomial ODEs.

An activation of order ``N`` is described by
``sigma^(N) = U(sigma, ..., sigma^(N-1)) / V(sigma, ..., sigma^(N-1))`` together
with initial values at zero.  :func:`a2_to_a1` turns this into the rational
data ``(U_i, V_i)`` with ``xi_i = sigma^(i-1)`` that the system constructions
consume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction

import numpy as np

from .algebra import CompiledPolys, MultiPoly, RationalFunc, parse_poly, to_scalar
from .errors import ArgumentError, ConfigurationError, EvaluationError

CLOSED_FORMS = {
    "tanh": np.tanh,
    "sigmoid": lambda z: 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float))),
    "identity": lambda z: np.asarray(z, dtype=float) * 1.0,
}

ODE_TOL = 1e-10
GUARD = 1e-12
_MAX_DOUBLINGS = 10


@dataclass(frozen=True)
class ActivationSpec:
    name: str
    order: int
    rhs: RationalFunc
    init: tuple[Fraction, ...]
    invertible: bool = False
    closed_form: str | None = None

    def __post_init__(self):
        if self.order < 1:
            raise ArgumentError("activation order must be at least 1")
        if self.rhs.num_vars != self.order:
            raise ArgumentError(
                f"rhs of {self.name!r} must use {self.order} variables, got {self.rhs.num_vars}"
            )
        object.__setattr__(self, "init", tuple(to_scalar(v) for v in self.init))
        if len(self.init) != self.order:
            raise ArgumentError(f"activation {self.name!r} needs {self.order} initial values")
        if self.closed_form is not None and self.closed_form not in CLOSED_FORMS:
            raise ArgumentError(f"unknown closed form {self.closed_form!r}")
        if not self.rhs.denominator.evaluate(self.init):
            raise ArgumentError(f"rhs denominator of {self.name!r} vanishes at the initial values")

    @property
    def N(self) -> int:
        return self.order


def _explicit(name, rhs_text, init, invertible, closed_form):
    return ActivationSpec(
        name=name,
        order=1,
        rhs=RationalFunc.from_poly(parse_poly(rhs_text, 1)),
        init=tuple(init),
        invertible=invertible,
        closed_form=closed_form,
    )


TANH = _explicit("tanh", "1 - X1^2", [0], True, "tanh")
SIGMOID = _explicit("sigmoid", "X1 - X1^2", [Fraction(1, 2)], True, "sigmoid")
IDENTITY = _explicit("identity", "1", [0], True, "identity")

BUILTINS = {spec.name: spec for spec in (TANH, SIGMOID, IDENTITY)}


def builtin(name: str) -> ActivationSpec:
    try:
        return BUILTINS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown activation {name!r}; built-ins are {sorted(BUILTINS)}"
        ) from None


@dataclass(frozen=True)
class A1Data:
    """Rational ODE data for the auxiliary functions xi_1..xi_N.

    ``U[0]/V[0]`` expresses sigma through ``xi``; ``U[i]/V[i]`` is the
    derivative of ``xi_i`` for ``i >= 1``.
    """

    N: int
    U: tuple[MultiPoly, ...]
    V: tuple[MultiPoly, ...]
    spec: ActivationSpec = field(repr=False, compare=False)

    def __post_init__(self):
        if len(self.U) != self.N + 1 or len(self.V) != self.N + 1:
            raise ArgumentError("A1 data needs N+1 numerator/denominator pairs")
        if any(v.is_zero() for v in self.V):
            raise ArgumentError("A1 denominators must be nonzero polynomials")
        if any(p.num_vars != self.N for p in self.U + self.V):
            raise ArgumentError("A1 polynomials must be in N variables")

    def is_polynomial(self) -> bool:
        return all(v.is_one() for v in self.V)

    def xi(self, z):
        """Values ``(xi_1(z), ..., xi_N(z))``; shape ``z.shape + (N,)``."""
        return xi_eval(self.spec, z)


def a2_to_a1(spec: ActivationSpec) -> A1Data:
    """Rational data with ``xi_i = sigma^(i-1)``: shifts for i < N, the ODE for i = N."""
    n = spec.order
    one = MultiPoly.one(n)
    U = [MultiPoly.variable(n, 0)]
    V = [one]
    for i in range(1, n):
        U.append(MultiPoly.variable(n, i))
        V.append(one)
    U.append(spec.rhs.numerator)
    V.append(spec.rhs.denominator)
    return A1Data(N=n, U=tuple(U), V=tuple(V), spec=spec)


class _OdeField:
    def __init__(self, spec: ActivationSpec):
        self.n = spec.order
        self.num = CompiledPolys([spec.rhs.numerator])
        self.den = CompiledPolys([spec.rhs.denominator])
        self.name = spec.name
        # the exact solution never crosses a zero of the denominator
        self.sign = 1.0 if spec.rhs.denominator.evaluate(spec.init) > 0 else -1.0

    def __call__(self, xi, scale):
        den = self.den(xi)[..., 0]
        if np.any(self.sign * den < GUARD):
            raise EvaluationError(f"rhs denominator of {self.name!r} vanished during integration")
        top = self.num(xi)[..., 0] / den
        d = np.empty_like(xi)
        d[..., :-1] = xi[..., 1:]
        d[..., -1] = top
        return d * scale[..., None]


def _rk4_unit(fld, x0, z, steps):
    # integrate d/ds xi(s z) = z * F(xi) over s in [0, 1]
    h = 1.0 / steps
    x = x0.copy()
    for _ in range(steps):
        k1 = fld(x, z)
        k2 = fld(x + 0.5 * h * k1, z)
        k3 = fld(x + 0.5 * h * k2, z)
        k4 = fld(x + h * k3, z)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def xi_ode(spec: ActivationSpec, z, tol: float = ODE_TOL):
    """Integrate the activation ODE from 0 to each ``z``; returns all N derivatives.

    RK4 over the rescaled interval, doubling the number of steps until two
    successive results agree within ``tol``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    flat = z.reshape(-1)
    fld = _OdeField(spec)
    x0 = np.tile(np.array([float(v) for v in spec.init]), (flat.size, 1))
    steps = max(16, int(math.ceil(8 * float(np.max(np.abs(flat), initial=0.0)))))
    prev = _rk4_unit(fld, x0, flat, steps)
    for _ in range(_MAX_DOUBLINGS):
        steps *= 2
        cur = _rk4_unit(fld, x0, flat, steps)
        if not np.all(np.isfinite(cur)):
            raise EvaluationError(f"integration of {spec.name!r} diverged")
        if np.max(np.abs(cur - prev)) <= tol:
            return cur.reshape(z.shape + (spec.order,))
        prev = cur
    raise EvaluationError(f"integration of {spec.name!r} did not reach tolerance {tol}")


class _XiTable:
    """All xi components on a uniform grid, read back by cubic Hermite interpolation.

    The ODE is integrated once outward from 0 with RK4 at the grid spacing and
    the grid grows on demand.  Node derivatives come from the ODE itself
    (``xi_i' = xi_{i+1}``, ``xi_N' = rhs``), so the interpolation error is
    of order ``h^4``.
    """

    H = 1.0 / 1024

    def __init__(self, spec: ActivationSpec):
        self.fld = _OdeField(spec)
        self.init = np.array([float(v) for v in spec.init])
        self.reach = 0
        self.pos = self.init[None, :]
        self.neg = self.init[None, :]

    def _grow(self, reach: int):
        h = self.H
        steps = reach - self.reach
        out = np.empty((steps, 2, self.init.size))
        x = np.stack([self.pos[-1], self.neg[-1]])
        scale = np.array([1.0, -1.0])
        for k in range(steps):
            k1 = self.fld(x, scale)
            k2 = self.fld(x + 0.5 * h * k1, scale)
            k3 = self.fld(x + 0.5 * h * k2, scale)
            k4 = self.fld(x + h * k3, scale)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            out[k] = x
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"integration of {self.fld.name!r} diverged")
        self.pos = np.concatenate([self.pos, out[:, 0]])
        self.neg = np.concatenate([self.neg, out[:, 1]])
        self.reach = reach
        # nodes ordered from -reach*H to +reach*H
        self.nodes = np.concatenate([self.neg[:0:-1], self.pos])
        self.deriv = self.fld(self.nodes, np.ones(len(self.nodes)))

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        need = int(math.ceil(float(np.max(np.abs(z), initial=0.0)) / self.H)) + 1
        if need > self.reach:
            self._grow(max(need, 2 * self.reach, 1024))
        nodes, deriv = self.nodes, self.deriv
        s = z / self.H + self.reach
        i = np.clip(np.floor(s).astype(np.int64), 0, len(nodes) - 2)
        t = (s - i)[..., None]
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return (h00 * nodes[i] + h10 * self.H * deriv[i]
                + h01 * nodes[i + 1] + h11 * self.H * deriv[i + 1])


@lru_cache(maxsize=32)
def _xi_table(spec: ActivationSpec) -> _XiTable:
    return _XiTable(spec)


def xi_table(spec: ActivationSpec, z):
    """xi values from the cached interpolation table; shape ``z.shape + (N,)``."""
    return _xi_table(spec)(z)


def xi_eval(spec: ActivationSpec, z):
    """xi rule: the closed form for order-1 built-ins, otherwise the interpolation table."""
    z_arr = np.asarray(z, dtype=float)
    if spec.closed_form is not None and spec.order == 1:
        return CLOSED_FORMS[spec.closed_form](z_arr)[..., None]
    return xi_table(spec, z_arr)


def sigma_eval(spec: ActivationSpec, z, method: str = "auto"):
    """Evaluate sigma; ``method`` is ``"auto"``, ``"closed"``, ``"ode"`` or ``"table"``.

    ``"ode"`` integrates from 0 to every argument to tolerance; ``"table"``
    interpolates a cached integration and is what ``"auto"`` uses when there
    is no closed form.  Accepts scalars or arrays and returns the same shape.
    """
    z_arr = np.asarray(z, dtype=float)
    if method == "auto":
        method = "closed" if spec.closed_form is not None else "table"
    if method == "table":
        out = xi_table(spec, z_arr)[..., 0]
    elif method == "closed":
        if spec.closed_form is None:
            raise ConfigurationError(f"activation {spec.name!r} has no closed form")
        out = CLOSED_FORMS[spec.closed_form](z_arr)
    elif method == "ode":
        out = xi_ode(spec, z_arr)[..., 0].reshape(z_arr.shape)
    else:
        raise ArgumentError(f"unknown method {method!r}")
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class A1Check:
    max_output_residual: float
    max_derivative_residual: float
    tol: float
    worst_sample: float

    @property
    def passed(self) -> bool:
        return max(self.max_output_residual, self.max_derivative_residual) <= self.tol


def check_a1(data: A1Data, spec: ActivationSpec, samples, tol: float = 1e-6,
             fd_step: float = 1e-4) -> A1Check:
    """Residuals of ``sigma V0(xi) = U0(xi)`` and ``xi_i' V_i(xi) = U_i(xi)`` on samples.

    sigma comes from :func:`sigma_eval` and ``xi_i'`` from central differences
    of the xi rule, so neither side reuses the ODE right-hand side.
    """
    z = np.asarray(samples, dtype=float).reshape(-1)
    xi = data.xi(z)
    U = CompiledPolys(data.U)
    V = CompiledPolys(data.V)
    u_val, v_val = U(xi), V(xi)
    sigma = np.asarray(sigma_eval(spec, z), dtype=float).reshape(-1)
    out_res = np.abs(sigma * v_val[:, 0] - u_val[:, 0])
    dxi = (data.xi(z + fd_step) - data.xi(z - fd_step)) / (2 * fd_step)
    der_res = np.abs(dxi * v_val[:, 1:] - u_val[:, 1:])
    per_sample = np.maximum(out_res, der_res.max(axis=1))
    worst = int(np.argmax(per_sample))
    return A1Check(
        max_output_residual=float(out_res.max()),
        max_derivative_residual=float(der_res.max()),
        tol=tol,
        worst_sample=float(z[worst]),
    )
