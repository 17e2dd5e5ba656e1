"""Shared system generators for the test suite."""
import random
from fractions import Fraction

from rnnreal.activation import SIGMOID, TANH
from rnnreal.systems import PwcInput, RnnSystem

U_LETTER = Fraction(1, 3)


def worked_example(u=U_LETTER, x0=(0, 0)):
    """Two sigmoid neurons feeding each other, one input letter."""
    return RnnSystem(
        A=[[0, 1], [1, 0]],
        B=[[1], [1]],
        C=[[1, 0]],
        x0=list(x0),
        alphabet=[[u]],
        activation=SIGMOID,
    )


def random_rnn(rng: random.Random, max_n=4, max_k=3, activation=None, denominator=4):
    """Random RNN with rational weights of absolute value at most 1."""
    n = rng.randint(1, max_n)
    K = rng.randint(1, max_k)
    m = rng.randint(1, 2)
    p = rng.randint(1, 2)

    def q():
        return Fraction(rng.randint(-denominator, denominator), denominator)

    letters = set()
    while len(letters) < K:
        letters.add(tuple(q() for _ in range(m)))
    return RnnSystem(
        A=[[q() for _ in range(n)] for _ in range(n)],
        B=[[q() for _ in range(m)] for _ in range(n)],
        C=[[q() for _ in range(n)] for _ in range(p)],
        x0=[q() for _ in range(n)],
        alphabet=sorted(letters),
        activation=activation or rng.choice([TANH, SIGMOID]),
    )


def three_piece_input(rng: random.Random, K: int) -> PwcInput:
    return PwcInput((1.5, 2.0, 1.5), tuple(rng.randrange(K) for _ in range(3)))


def random_suite(size=20, seed=2024):
    rng = random.Random(seed)
    out = []
    for _ in range(size):
        sys = random_rnn(rng)
        out.append((sys, three_piece_input(rng, sys.K)))
    return out


# acceptance lines collected during the run, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, title: str, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})"
    ACCEPTANCE[number] = line
    print(line)
    return line
