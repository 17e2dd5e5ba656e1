"""Rational realizations of an RNN and numeric checks of the embedding.

State layout of both constructed systems: the auxiliary block comes first,
variable ``phi(i, j, r) - 1`` holding ``xi_i(e_j^T (A x + B alpha_r))``; in
``R(Sigma)`` the original states ``x_1 .. x_n`` follow at ``n N K + j - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .activation import A1Data, ActivationSpec, a2_to_a1, sigma_eval, xi_eval
from .algebra import MultiPoly, RationalFunc, rat_combine
from .errors import ArgumentError, ConfigurationError
from .systems import (
    PwcInput,
    RationalSystemSpec,
    RnnSystem,
    simulate_rational,
    simulate_rnn,
)

XI_PRECISION = 10**12


@dataclass(frozen=True)
class IndexMap:
    """Flattening of (derivative index i, neuron j, letter r), all 1-based."""

    N: int
    n: int
    K: int

    def __post_init__(self):
        if min(self.N, self.n, self.K) < 1:
            raise ArgumentError("N, n and K must all be positive")

    @property
    def size(self) -> int:
        return self.N * self.n * self.K

    def phi(self, i: int, j: int, r: int) -> int:
        if not (1 <= i <= self.N and 1 <= j <= self.n and 1 <= r <= self.K):
            raise ArgumentError(f"index triple ({i}, {j}, {r}) outside N={self.N}, n={self.n}, K={self.K}")
        return self.N * self.K * (j - 1) + self.N * (r - 1) + i

    def inverse(self, k: int) -> tuple[int, int, int]:
        if not 1 <= k <= self.size:
            raise ArgumentError(f"flat index {k} outside 1..{self.size}")
        j, rest = divmod(k - 1, self.N * self.K)
        r, i = divmod(rest, self.N)
        return i + 1, j + 1, r + 1

    def block(self, j: int, r: int) -> list[int]:
        """0-based variable positions of the tuple X_{j, alpha_r}."""
        return [self.phi(i, j, r) - 1 for i in range(1, self.N + 1)]


def phi_index(index_map: IndexMap, i: int, j: int, r: int) -> int:
    return index_map.phi(i, j, r)


def phi_inverse(index_map: IndexMap, k: int) -> tuple[int, int, int]:
    return index_map.inverse(k)


def _check_activation(sys: RnnSystem):
    if not isinstance(sys.activation, ActivationSpec):
        raise ConfigurationError("the activation carries no polynomial ODE data")


def a1_data(sys: RnnSystem) -> A1Data:
    _check_activation(sys)
    return a2_to_a1(sys.activation)


def index_map(sys: RnnSystem) -> IndexMap:
    _check_activation(sys)
    return IndexMap(sys.activation.order, sys.n, sys.K)


class _Builder:
    """Shared pieces of both constructions, expressed in ``num_vars`` variables."""

    def __init__(self, sys: RnnSystem, num_vars: int):
        self.sys = sys
        self.data = a1_data(sys)
        self.imap = index_map(sys)
        self.L = num_vars
        self._cache = {}

    def at(self, which: int, j: int, r: int) -> RationalFunc:
        # U_which / V_which evaluated at the tuple X_{j, alpha_r}
        key = ("at", which, j, r)
        if key not in self._cache:
            pos = self.imap.block(j, r)
            self._cache[key] = RationalFunc(
                self.data.U[which].embed(self.L, pos), self.data.V[which].embed(self.L, pos)
            )
        return self._cache[key]

    def drive(self, j: int, s: int) -> RationalFunc:
        """sum_l a_{j,l} U0/V0(X_{l, alpha_s}) in common-denominator form."""
        key = ("drive", j, s)
        if key not in self._cache:
            row = self.sys.A[j - 1]
            self._cache[key] = rat_combine(
                [self.at(0, l, s).scale(row[l - 1]) for l in range(1, self.sys.n + 1)]
            )
        return self._cache[key]

    def aux_fields(self) -> list[list[RationalFunc]]:
        N, n, K = self.imap.N, self.imap.n, self.imap.K
        fields = []
        for s in range(1, K + 1):
            fld = [None] * self.imap.size
            for j in range(1, n + 1):
                drive = self.drive(j, s)
                for r in range(1, K + 1):
                    for i in range(1, N + 1):
                        fld[self.imap.phi(i, j, r) - 1] = self.at(i, j, r) * drive
            fields.append(fld)
        return fields

    def aux_initial_state(self) -> list[Fraction]:
        z = embed_state(self.sys, [float(v) for v in self.sys.x0])[: self.imap.size]
        return [Fraction(float(v)).limit_denominator(XI_PRECISION) for v in z]

    def aux_names(self) -> list[str]:
        return [
            "v_{}_{}_alpha{}".format(*self.imap.inverse(k)) for k in range(1, self.imap.size + 1)
        ]


def build_r_sigma(sys: RnnSystem) -> RationalSystemSpec:
    """Rational system of dimension ``n (1 + N K)`` realizing the RNN's input-output map."""
    imap = index_map(sys)
    nu = imap.size
    L = nu + sys.n
    b = _Builder(sys, L)
    fields = b.aux_fields()
    for s, fld in enumerate(fields, start=1):
        fld.extend(b.at(0, j, s) for j in range(1, sys.n + 1))
    outputs = []
    for row in sys.C:
        y = MultiPoly.zero(L)
        for i, c in enumerate(row):
            if c:
                y = y + MultiPoly.variable(L, nu + i).scale(c)
        outputs.append(RationalFunc.from_poly(y))
    v0 = b.aux_initial_state() + list(sys.x0)
    names = b.aux_names() + [f"x_{j}" for j in range(1, sys.n + 1)]
    return RationalSystemSpec(fields, outputs, v0, names, sys.alphabet)


def build_r_aux(sys: RnnSystem) -> RationalSystemSpec:
    """Auxiliary system of dimension ``n N K`` realizing the stacked derivatives of the output.

    Outputs are ordered letter-major: output ``(r - 1) * p + k`` is ``D_{alpha_r} y_k``.
    """
    imap = index_map(sys)
    L = imap.size
    b = _Builder(sys, L)
    outputs = []
    for r in range(1, sys.K + 1):
        for row in sys.C:
            outputs.append(rat_combine([b.at(0, i, r).scale(row[i - 1]) for i in range(1, sys.n + 1)]))
    return RationalSystemSpec(b.aux_fields(), outputs, b.aux_initial_state(), b.aux_names(), sys.alphabet)


def embed_state(sys: RnnSystem, x) -> np.ndarray:
    """The map F(x) = (xi_i(e_j^T (A x + B alpha_r)) in phi order, x).

    ``x`` may be one state of shape ``(n,)`` or a batch ``(T, n)``.
    """
    A, B, _, letters = sys.float_matrices()
    x = np.asarray(x, dtype=float)
    imap = index_map(sys)
    pre = x @ A.T  # (..., n)
    drive = letters @ B.T  # (K, n)
    args = pre[..., None, :] + drive  # (..., K, n) indexed [r, j]
    xi = xi_eval(sys.activation, args)  # (..., K, n, N)
    # phi order: j slowest, then r, then i
    z = np.swapaxes(xi, -3, -2).reshape(x.shape[:-1] + (imap.size,))
    return np.concatenate([z, x], axis=-1)


def derivative_output_closed_form(sys: RnnSystem, x, letter: int) -> np.ndarray:
    """C sigma(A x + B alpha): the right derivative of y after switching to ``letter``."""
    A, B, C, letters = sys.float_matrices()
    x = np.asarray(x, dtype=float)
    pre = x @ A.T + letters[letter] @ B.T
    return np.asarray(sigma_eval(sys.activation, pre)) @ C.T


@dataclass
class EmbeddingReport:
    state_deviation: float
    output_deviation: float
    horizon: float
    step: float
    input: PwcInput
    tol: float

    @property
    def passed(self) -> bool:
        return self.state_deviation <= self.tol and self.output_deviation <= self.tol

    def as_dict(self) -> dict:
        return {
            "state_deviation": self.state_deviation,
            "output_deviation": self.output_deviation,
            "horizon": self.horizon,
            "step": self.step,
            "input": {"durations": list(self.input.durations), "letters": list(self.input.letters)},
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_embedding(sys: RnnSystem, u: PwcInput, horizon: float = 5.0, step: float = 1e-3,
                     tol: float = 1e-6, r_system: RationalSystemSpec | None = None) -> EmbeddingReport:
    """Co-simulate the RNN and R(Sigma); compare upsilon(t) with F(x(t)) and the outputs."""
    if r_system is None:
        r_system = build_r_sigma(sys)
    rnn = simulate_rnn(sys, u, horizon, step)
    rat = simulate_rational(r_system, u, horizon, step)
    image = embed_state(sys, rnn.states)
    return EmbeddingReport(
        state_deviation=float(np.max(np.abs(rat.states - image))),
        output_deviation=float(np.max(np.abs(rat.outputs - rnn.outputs))),
        horizon=horizon,
        step=step,
        input=u,
        tol=tol,
    )


@dataclass
class AuxReport:
    closed_form_deviation: float
    finite_difference_deviation: float
    horizon: float
    step: float
    fd_step: float
    input: PwcInput
    tol_closed: float
    tol_fd: float

    @property
    def passed(self) -> bool:
        return (self.closed_form_deviation <= self.tol_closed
                and self.finite_difference_deviation <= self.tol_fd)

    def as_dict(self) -> dict:
        return {
            "closed_form_deviation": self.closed_form_deviation,
            "finite_difference_deviation": self.finite_difference_deviation,
            "horizon": self.horizon,
            "step": self.step,
            "fd_step": self.fd_step,
            "input": {"durations": list(self.input.durations), "letters": list(self.input.letters)},
            "tol_closed": self.tol_closed,
            "tol_fd": self.tol_fd,
            "passed": self.passed,
        }


def switched_output_difference(sys: RnnSystem, states: np.ndarray, letter: int, h: float) -> np.ndarray:
    """Forward difference (y(t+h) - y(t)) / h after holding ``letter`` from each state.

    One RK4 step of size ``h`` from every sampled state at once.
    """
    A, B, C, letters = sys.float_matrices()
    drive = letters[letter] @ B.T
    x = np.asarray(states, dtype=float)

    def f(z):
        return np.asarray(sigma_eval(sys.activation, z @ A.T + drive), dtype=float)

    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    step = (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return (step @ C.T) / h


def verify_aux(sys: RnnSystem, u: PwcInput, horizon: float = 5.0, step: float = 1e-3,
               tol_closed: float = 1e-6, tol_fd: float = 1e-4, fd_step: float = 1e-6,
               aux_system: RationalSystemSpec | None = None) -> AuxReport:
    """Check that R_aux outputs equal the derivatives D_alpha y along the RNN trajectory.

    Two independent references: the closed form ``C sigma(A x + B alpha)`` and a
    forward difference of the switched-input output.
    """
    if aux_system is None:
        aux_system = build_r_aux(sys)
    rnn = simulate_rnn(sys, u, horizon, step)
    aux = simulate_rational(aux_system, u, horizon, step)
    closed = np.concatenate(
        [derivative_output_closed_form(sys, rnn.states, r) for r in range(sys.K)], axis=-1
    )
    fd = np.concatenate(
        [switched_output_difference(sys, rnn.states, r, fd_step) for r in range(sys.K)], axis=-1
    )
    return AuxReport(
        closed_form_deviation=float(np.max(np.abs(aux.outputs - closed))),
        finite_difference_deviation=float(np.max(np.abs(aux.outputs - fd))),
        horizon=horizon,
        step=step,
        fd_step=fd_step,
        input=u,
        tol_closed=tol_closed,
        tol_fd=tol_fd,
    )
