"""RNNs, rational systems, piecewise-constant inputs and their simulation.

Both system classes are integrated with the same fixed-step RK4 scheme.  Grid
nodes are ``k * step``; whenever an input switch falls strictly inside a step,
the step is split at the switch so the right-hand side is smooth on every
sub-step.
"""
from __future__ import annotations

import bisect
import csv
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .activation import ActivationSpec, sigma_eval
from .algebra import CompiledPolys, RationalFunc, matrix_to_scalars, to_scalar
from .errors import ArgumentError, DivergenceError, SingularityError

log = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
DENOMINATOR_GUARD = 1e-12
# switch times closer than this (relative) to a grid node are treated as on it
_ALIGN_RTOL = 1e-9


def _as_matrix(rows, name, shape=None):
    try:
        mat = matrix_to_scalars(rows)
    except TypeError:
        raise ArgumentError(f"{name} must be a list of rows") from None
    widths = {len(r) for r in mat}
    if len(widths) > 1:
        raise ArgumentError(f"{name}: rows have different lengths {sorted(widths)}")
    if shape is not None:
        rows_, cols = shape
        if len(mat) != rows_ or (mat and len(mat[0]) != cols):
            got = (len(mat), len(mat[0]) if mat else 0)
            raise ArgumentError(f"{name} must be {rows_}x{cols}, got {got[0]}x{got[1]}")
    return mat


@dataclass(frozen=True)
class RnnSystem:
    """Continuous-time RNN ``x' = sigma(A x + B u)``, ``y = C x`` over a finite alphabet."""

    A: tuple
    B: tuple
    C: tuple
    x0: tuple
    alphabet: tuple
    activation: ActivationSpec

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        n = len(A)
        if n == 0:
            raise ArgumentError("state dimension n must be positive")
        A = _as_matrix(self.A, "A", (n, n))
        B = _as_matrix(self.B, "B")
        m = len(B[0]) if B else 0
        B = _as_matrix(self.B, "B", (n, m))
        C = _as_matrix(self.C, "C")
        if not C:
            raise ArgumentError("C must have at least one row")
        C = _as_matrix(self.C, "C", (len(C), n))
        x0 = tuple(to_scalar(v) for v in self.x0)
        if len(x0) != n:
            raise ArgumentError(f"x0 must have length {n}, got {len(x0)}")
        alphabet = tuple(tuple(to_scalar(v) for v in letter) for letter in self.alphabet)
        if not alphabet:
            raise ArgumentError("the input alphabet must be non-empty")
        for letter in alphabet:
            if len(letter) != m:
                raise ArgumentError(f"alphabet letters must have length m={m}, got {len(letter)}")
        if len(set(alphabet)) != len(alphabet):
            raise ArgumentError("alphabet letters must be pairwise distinct")
        for name, value in (("A", A), ("B", B), ("C", C), ("x0", x0), ("alphabet", alphabet)):
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def m(self) -> int:
        return len(self.B[0])

    @property
    def p(self) -> int:
        return len(self.C)

    @property
    def K(self) -> int:
        return len(self.alphabet)

    def float_matrices(self):
        A = np.array(self.A, dtype=float).reshape(self.n, self.n)
        B = np.array(self.B, dtype=float).reshape(self.n, self.m)
        C = np.array(self.C, dtype=float).reshape(self.p, self.n)
        letters = np.array(self.alphabet, dtype=float).reshape(self.K, self.m)
        return A, B, C, letters


@dataclass(frozen=True)
class RationalSystemSpec:
    """Rational system with one vector field per input letter.

    ``fields[r][i]`` is ``P_{i,alpha_r} / Q_{i,alpha_r}``; ``outputs[k]`` is
    ``h_{k,1} / h_{k,2}``.
    """

    fields: tuple
    outputs: tuple
    v0: tuple
    var_names: tuple = ()
    letters: tuple = ()

    def __post_init__(self):
        fields = tuple(tuple(f) for f in self.fields)
        if not fields:
            raise ArgumentError("a rational system needs at least one input letter")
        dim = len(fields[0])
        if dim == 0:
            raise ArgumentError("a rational system needs a positive dimension")
        for r, fld in enumerate(fields):
            if len(fld) != dim:
                raise ArgumentError(f"vector field {r} has {len(fld)} components, expected {dim}")
        everything = [f for fld in fields for f in fld] + list(self.outputs)
        for f in everything:
            if not isinstance(f, RationalFunc):
                raise ArgumentError("fields and outputs must be RationalFunc instances")
            if f.num_vars != dim:
                raise ArgumentError(f"all polynomials must have {dim} variables, found {f.num_vars}")
        v0 = tuple(to_scalar(v) for v in self.v0)
        if len(v0) != dim:
            raise ArgumentError(f"v0 must have length {dim}, got {len(v0)}")
        names = tuple(self.var_names) or tuple(f"X{i + 1}" for i in range(dim))
        if len(names) != dim or len(set(names)) != dim:
            raise ArgumentError("variable names must be distinct, one per state")
        letters = tuple(tuple(to_scalar(v) for v in a) for a in self.letters)
        if letters and len(letters) != len(fields):
            raise ArgumentError("one letter label per vector field is required")
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "var_names", names)
        object.__setattr__(self, "letters", letters)

    @property
    def dim(self) -> int:
        return len(self.fields[0])

    @property
    def K(self) -> int:
        return len(self.fields)

    @property
    def p(self) -> int:
        return len(self.outputs)


def is_polynomial(sys: RationalSystemSpec) -> bool:
    return all(f.is_polynomial() for fld in sys.fields for f in fld) and all(
        h.is_polynomial() for h in sys.outputs
    )


@dataclass(frozen=True)
class PwcInput:
    """Piecewise-constant input: letter ``letters[i]`` for ``durations[i]`` time units.

    Letters are 0-based positions in the system's alphabet; the last letter is
    held forever.
    """

    durations: tuple
    letters: tuple

    def __post_init__(self):
        durations = tuple(float(d) for d in self.durations)
        letters = tuple(int(a) for a in self.letters)
        if not letters:
            raise ArgumentError("an input needs at least one letter")
        if len(durations) != len(letters):
            raise ArgumentError("one duration per letter is required")
        if any(not d > 0 or not np.isfinite(d) for d in durations):
            raise ArgumentError("durations must be positive and finite")
        if any(a < 0 for a in letters):
            raise ArgumentError("letter indices must be non-negative")
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "_ends", tuple(np.cumsum(durations)))

    @classmethod
    def constant(cls, letter: int = 0) -> PwcInput:
        return cls((1.0,), (letter,))

    def switch_times(self) -> list[float]:
        """Times at which the letter changes (end of every piece except the last)."""
        return list(self._ends[:-1])

    def letter_at(self, t: float) -> int:
        """Active letter at ``t`` (right-continuous)."""
        for end, letter in zip(self._ends, self.letters):
            if t < end - _ALIGN_RTOL * max(1.0, abs(end)):
                return letter
        return self.letters[-1]

    def check_alphabet(self, K: int):
        if max(self.letters) >= K:
            raise ArgumentError(f"input uses letter {max(self.letters)} but the alphabet has {K} letters")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    letters: np.ndarray
    step: float

    def write_csv(self, path, state_prefix: str = "x"):
        n = self.states.shape[1]
        p = self.outputs.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"{state_prefix}{i + 1}" for i in range(n)]
                       + [f"y{k + 1}" for k in range(p)] + ["input_letter_index"])
            for t, x, y, a in zip(self.times, self.states, self.outputs, self.letters):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in x]
                           + [repr(float(v)) for v in y] + [int(a)])


def time_grid(horizon: float, step: float) -> np.ndarray:
    if not step > 0 or not horizon > 0:
        raise ArgumentError("horizon and step must be positive")
    count = int(np.floor(horizon / step + 1e-9))
    grid = np.arange(count + 1) * step
    if horizon - grid[-1] > _ALIGN_RTOL * max(1.0, horizon):
        grid = np.append(grid, horizon)
    return grid


def _substeps(t0, t1, switches):
    cuts = [s for s in switches if t0 + _ALIGN_RTOL * max(1.0, abs(s)) < s < t1 - _ALIGN_RTOL * max(1.0, abs(s))]
    return [t0] + cuts + [t1]


def integrate_pwc(rhs: Callable, x0: np.ndarray, u: PwcInput, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """RK4 on ``grid`` with steps split at input switches.

    ``rhs(x, letter, t)`` returns the vector field and may raise on any
    evaluated stage.  Returns states and active letters per node.
    """
    switches = u.switch_times()
    states = np.empty((len(grid), len(x0)))
    letters = np.empty(len(grid), dtype=np.int64)
    x = np.array(x0, dtype=float)
    states[0] = x
    letters[0] = u.letter_at(grid[0])
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(len(grid) - 1):
            t0, t1 = grid[k], grid[k + 1]
            # most steps contain no switch; only those need splitting
            i = bisect.bisect_right(switches, t0)
            if i < len(switches) and switches[i] < t1:
                pts = _substeps(t0, t1, switches)
            else:
                pts = (t0, t1)
            for a0, b0 in zip(pts[:-1], pts[1:]):
                h = b0 - a0
                a = u.letter_at(a0)
                k1 = rhs(x, a, a0)
                k2 = rhs(x + 0.5 * h * k1, a, a0 + 0.5 * h)
                k3 = rhs(x + 0.5 * h * k2, a, a0 + 0.5 * h)
                k4 = rhs(x + h * k3, a, b0)
                x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if not math.isfinite(x.sum()):
                    raise DivergenceError(f"state became non-finite at t={b0:g}", time=b0, state=x)
            states[k + 1] = x
            letters[k + 1] = u.letter_at(t1)
    return states, letters


def rnn_vector_field(sys: RnnSystem):
    A, B, _, alphabet = sys.float_matrices()
    drive = alphabet @ B.T  # row r is B alpha_r

    def rhs(x, a, t=None):
        return np.asarray(sigma_eval(sys.activation, A @ x + drive[a]), dtype=float)

    return rhs


def simulate_rnn(sys: RnnSystem, u: PwcInput, horizon: float, step: float = DEFAULT_STEP,
                 x0=None) -> Trajectory:
    u.check_alphabet(sys.K)
    grid = time_grid(horizon, step)
    start = np.array(sys.x0 if x0 is None else x0, dtype=float)
    states, letters = integrate_pwc(rnn_vector_field(sys), start, u, grid)
    C = np.array(sys.C, dtype=float).reshape(sys.p, sys.n)
    return Trajectory(grid, states, states @ C.T, letters, step)


class CompiledRationalSystem:
    """Float evaluators for the fields, denominators and outputs of a rational system."""

    def __init__(self, sys: RationalSystemSpec):
        self.sys = sys
        # numerators and denominators stacked so one call evaluates both
        self.polys = [
            CompiledPolys([f.numerator for f in fld] + [f.denominator for f in fld], sys.dim)
            for fld in sys.fields
        ]
        self.out_num = CompiledPolys([h.numerator for h in sys.outputs], sys.dim)
        self.out_den = CompiledPolys([h.denominator for h in sys.outputs], sys.dim)
        self.guard = DENOMINATOR_GUARD
        # A solution cannot pass through a zero of an active denominator, so
        # each one must keep the sign it had when the current letter took
        # over; RK4 stages would otherwise step straight across a pole.
        self._letter = None
        self._signs = None

    def field(self, x, a, t=None):
        vals = self.polys[a](x)
        num, den = vals[: self.sys.dim], vals[self.sys.dim:]
        if a != self._letter:
            self._letter, self._signs = a, np.where(den < 0, -1.0, 1.0)
        if (self._signs * den).min() < self.guard:
            raise SingularityError(
                f"vector-field denominator dropped below {self.guard:g} at t={t}", time=t, state=x
            )
        return num / den

    def outputs(self, states, times=None):
        den = self.out_den(states)
        signs = np.where(self.out_den(np.asarray(states)[:1]) < 0, -1.0, 1.0)
        bad = signs * den < self.guard
        if np.any(bad):
            row = int(np.argwhere(bad)[0][0])
            t = None if times is None else float(times[row])
            raise SingularityError(
                f"output denominator dropped below {self.guard:g} at t={t}", time=t, state=states[row]
            )
        if den.shape[-1] == 0:
            return np.zeros(states.shape[:-1] + (0,))
        return self.out_num(states) / den


def simulate_rational(sys: RationalSystemSpec, u: PwcInput, horizon: float,
                      step: float = DEFAULT_STEP) -> Trajectory:
    u.check_alphabet(sys.K)
    for r, fld in enumerate(sys.fields):
        for i, f in enumerate(fld):
            if not f.denominator.evaluate(sys.v0):
                raise ArgumentError(f"denominator Q[{i}] of letter {r} vanishes at the initial state")
    for k, h in enumerate(sys.outputs):
        if not h.denominator.evaluate(sys.v0):
            raise ArgumentError(f"output denominator h[{k}] vanishes at the initial state")
    comp = CompiledRationalSystem(sys)
    grid = time_grid(horizon, step)
    x0 = np.array([float(v) for v in sys.v0])
    states, letters = integrate_pwc(comp.field, x0, u, grid)
    return Trajectory(grid, states, comp.outputs(states, grid), letters, step)
