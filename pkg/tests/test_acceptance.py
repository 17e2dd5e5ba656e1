"""Acceptance criteria, one PASS/FAIL line each at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary under "acceptance criteria".
"""
import itertools
import random
import time
from fractions import Fraction

import numpy as np

from rnnreal.activation import SIGMOID, TANH, a2_to_a1, check_a1, sigma_eval
from rnnreal.algebra import MultiPoly, RationalFunc, parse_poly
from rnnreal.analysis import coordinate_obs_subspace, lie_derivative, observability_rank, rnn_property_report
from rnnreal.embedding import IndexMap, build_r_aux, build_r_sigma, verify_aux, verify_embedding
from rnnreal.systems import PwcInput

from support import random_suite, record, worked_example


def _suite_with_example():
    return [(worked_example(), PwcInput((5.0,), (0,)))] + random_suite()


def test_criterion_1_worked_example_fields():
    start = time.perf_counter()
    aux = build_r_aux(worked_example())
    x1, x2, one = parse_poly("X1", 2), parse_poly("X2", 2), MultiPoly.one(2)
    expected = [RationalFunc.from_poly(x1 * x2 * (one - x1)), RationalFunc.from_poly(x1 * x2 * (one - x2))]
    fields_ok = all(f.equivalent(e) for f, e in zip(aux.fields[0], expected))
    output_ok = len(aux.outputs) == 1 and aux.outputs[0].equivalent(RationalFunc.from_poly(x1))
    elapsed = time.perf_counter() - start
    ok = fields_ok and output_ok and aux.dim == 2 and elapsed < 1.0
    record(1, ok, "worked-example R_aux fields and output", f"{elapsed:.3f} s")
    assert ok


def test_criterion_2_embedding_suite():
    start = time.perf_counter()
    worst_state = worst_out = 0.0
    for sys, u in _suite_with_example():
        rep = verify_embedding(sys, u, horizon=5.0, step=1e-3)
        worst_state = max(worst_state, rep.state_deviation)
        worst_out = max(worst_out, rep.output_deviation)
    elapsed = time.perf_counter() - start
    ok = worst_state <= 1e-6 and worst_out <= 1e-6 and elapsed < 30.0
    record(2, ok, "embedding co-simulation on 21 systems",
           f"state {worst_state:.1e}, output {worst_out:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_3_derivative_realization():
    worst_closed = worst_fd = 0.0
    for sys, u in _suite_with_example():
        rep = verify_aux(sys, u, horizon=5.0, step=1e-3, fd_step=1e-6)
        worst_closed = max(worst_closed, rep.closed_form_deviation)
        worst_fd = max(worst_fd, rep.finite_difference_deviation)
    ok = worst_closed <= 1e-6 and worst_fd <= 1e-4
    record(3, ok, "R_aux outputs vs closed form and finite differences",
           f"closed {worst_closed:.1e}, fd {worst_fd:.1e}")
    assert ok


def test_criterion_4_worked_example_observability():
    start = time.perf_counter()
    tower = observability_rank(build_r_aux(worked_example()))
    report = rnn_property_report(worked_example())
    elapsed = time.perf_counter() - start
    ok = ((tower.rank, tower.dim) == (2, 2)
          and tower.verdict == "semi-algebraically observable"
          and "Σ weakly observable" in report.conclusions()
          and elapsed < 1.0)
    record(4, ok, "worked-example observability rank and verdict",
           f"rank {tower.rank}/{tower.dim}, {elapsed:.3f} s")
    assert ok


def _brute_force_oc(A, C):
    n = len(A)
    for size in range(n, -1, -1):
        for subset in itertools.combinations(range(n), size):
            s = set(subset)
            if all(row[i] == 0 for row in C for i in s) and \
                    all(A[j][k] == 0 for k in s for j in range(n) if j not in s):
                return subset
    return ()


def test_criterion_5_coordinate_subspace_vs_brute_force():
    rng = random.Random(5)
    cases = []
    for _ in range(200):
        n = rng.randint(1, 8)
        A = [[rng.choice((-1, 0, 1)) for _ in range(n)] for _ in range(n)]
        C = [[rng.choice((-1, 0, 1)) for _ in range(n)] for _ in range(rng.randint(1, 3))]
        for col in rng.sample(range(n), rng.randint(0, n)):
            for row in C:
                row[col] = 0
        cases.append((A, C))
    start = time.perf_counter()
    got = [coordinate_obs_subspace(A, C) for A, C in cases]
    elapsed = time.perf_counter() - start
    mismatches = sum(g != _brute_force_oc(A, C) for g, (A, C) in zip(got, cases))
    nontrivial = sum(bool(g) for g in got)
    ok = mismatches == 0 and elapsed < 10.0
    record(5, ok, "coordinate subspace fixed point vs exhaustive oracle",
           f"{mismatches} mismatches over 200 pairs, {nontrivial} nontrivial, {elapsed:.3f} s")
    assert ok


def test_criterion_6_dimensions_and_index_map():
    dims_ok = True
    for sys, _ in _suite_with_example():
        N = a2_to_a1(sys.activation).N
        dims_ok &= build_r_sigma(sys).dim == sys.n * (1 + N * sys.K)
        dims_ok &= build_r_aux(sys).dim == sys.n * N * sys.K
    roundtrip_ok = True
    for N, n, K in itertools.product(range(1, 4), range(1, 6), range(1, 5)):
        im = IndexMap(N, n, K)
        triples = list(itertools.product(range(1, N + 1), range(1, n + 1), range(1, K + 1)))
        flat = [im.phi(*t) for t in triples]
        roundtrip_ok &= sorted(flat) == list(range(1, N * n * K + 1))
        roundtrip_ok &= all(im.inverse(k) == t for k, t in zip(flat, triples))
    ok = dims_ok and roundtrip_ok
    record(6, ok, "dimension formulas and index map roundtrip",
           f"dims {'ok' if dims_ok else 'wrong'}, roundtrip {'ok' if roundtrip_ok else 'wrong'}")
    assert ok


def test_criterion_7_activation_machinery():
    p = lambda text: parse_poly(text, 1)  # noqa: E731
    exact_ok = (a2_to_a1(TANH).U == (p("X1"), p("1 - X1^2"))
                and a2_to_a1(SIGMOID).U == (p("X1"), p("X1 - X1^2"))
                and all(v == MultiPoly.one(1) for s in (TANH, SIGMOID) for v in a2_to_a1(s).V))
    residual = max(max(c.max_output_residual, c.max_derivative_residual)
                   for c in (check_a1(a2_to_a1(s), s, np.linspace(-3, 3, 121)) for s in (TANH, SIGMOID)))
    z = np.linspace(-5, 5, 201)
    ode_err = max(np.max(np.abs(sigma_eval(TANH, z, method="ode") - np.tanh(z))),
                  np.max(np.abs(sigma_eval(SIGMOID, z, method="ode") - 1 / (1 + np.exp(-z)))))
    ok = exact_ok and residual <= 1e-6 and ode_err <= 1e-8
    record(7, ok, "activation conversion, A1 residuals, ODE path",
           f"exact {exact_ok}, residual {residual:.1e}, ode {ode_err:.1e}")
    assert ok


def _random_poly(rng, n, degree=3):
    p = MultiPoly.zero(n)
    for _ in range(rng.randint(1, 4)):
        exps = [0] * n
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(n)] += 1
        p = p + MultiPoly(n, {tuple(exps): Fraction(rng.randint(-4, 4), 4)})
    return p


def test_criterion_8_lie_derivative_vs_finite_differences():
    rng = random.Random(88)
    h, dt = 1e-4, 1e-3
    worst = 0.0
    for _ in range(10):
        n = rng.randint(1, 3)
        field = [_random_poly(rng, n) for _ in range(n)]
        g = _random_poly(rng, n)
        lg = lie_derivative(RationalFunc.from_poly(g), [RationalFunc.from_poly(f) for f in field])

        def f(x):
            return np.array([fi.evaluate_float(x) for fi in field])

        def rk4(x, step):
            k1 = f(x)
            k2 = f(x + 0.5 * step * k1)
            k3 = f(x + 0.5 * step * k2)
            k4 = f(x + step * k3)
            return x + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

        x = np.array([rng.uniform(-0.5, 0.5) for _ in range(n)])
        for _ in range(5):
            if np.max(np.abs(x)) > 2:
                break  # leave the segment before any blow-up
            fd = (g.evaluate_float(rk4(x, h)) - g.evaluate_float(rk4(x, -h))) / (2 * h)
            exact = lg.numerator.evaluate_float(x) / lg.denominator.evaluate_float(x)
            worst = max(worst, abs(fd - exact))
            for _ in range(100):
                x = rk4(x, dt)
    ok = worst <= 1e-5
    record(8, ok, "Lie derivative vs trajectory finite differences", f"worst {worst:.1e}")
    assert ok


def test_criterion_9_observability_consistency():
    violations = certified = 0
    for sys, _ in _suite_with_example():
        tower = observability_rank(build_r_aux(sys))
        if tower.observable:
            certified += 1
            violations += bool(coordinate_obs_subspace(sys.A, sys.C))
    ok = violations == 0
    record(9, ok, "observable R_aux never has a nontrivial coordinate subspace",
           f"{violations} violations among {certified} certified systems")
    assert ok
