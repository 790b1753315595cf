#!/usr/bin/env python3

import sys

from errors import CapMismatchError, UnregisteredElementError
from f2series import GradedPolynomial, PowerSeries
from hopf import faa_di_bruno, milnor
from qring import (bsigma4_dimensions, build_free_qring, closed_form_holds, eval_unary_operation,
                   freeness_check, functional_equation_residual, interchange_check, product_rule,
                   negative_control, qring_suite, quadratic_xxt, solved_qstructure, tensor_qstructure)


def test_closed_form_milnor():
    A = solved_qstructure('A', 12)
    H = milnor(12)
    assert closed_form_holds(A, H)
    q0 = A.qt('ξ0')
    assert q0.coefficient(0) == H.gen(0) ** 2
    assert q0.coefficient(1) == H.gen(0) * H.gen(1)
    assert q0.coefficient(2).is_zero()
    assert q0.coefficient(3) == H.gen(0) * H.gen(2)
    assert q0.coefficient(7) == H.gen(0) * H.gen(3)


def test_xi1_low_coefficients():
    A = solved_qstructure('A', 12)
    H = milnor(12)
    q1 = A.qt('ξ1')
    assert q1.cap == 8
    assert q1.coefficient(0) == H.gen(1) ** 2
    assert q1.coefficient(1) == H.gen(0) * H.gen(2)
    assert q1.coefficient(2) == H.gen(1) * H.gen(2)


def test_residuals_vanish():
    for H in (milnor(10), faa_di_bruno(8)):
        spec = solved_qstructure(H.letter, H.cap)
        residual = functional_equation_residual(H, spec.table, product_rule(H),
                                                quadratic_xxt(H.alphabet, H.cap))
        assert residual.is_zero(), residual.to_text()


def test_squaring_at_t_zero():
    B = solved_qstructure('B', 8)
    H = faa_di_bruno(8)
    for gen in B.table:
        assert B.qt(gen).coefficient(0) == GradedPolynomial.var(H.alphabet, gen) ** 2
    assert B.operation(0, H.gen(0)) == H.gen(0) ** 2


def test_qt_eval_is_multiplicative():
    A = solved_qstructure('A', 8)
    H = milnor(8)
    one = A.qt_eval(GradedPolynomial.one(H.alphabet))
    assert one.coefficient(0).is_one()
    assert all(one.coefficient(k).is_zero() for k in range(1, 7))
    square = A.qt_eval(H.gen(0) ** 2)
    assert square.agrees_with(A.qt('ξ0') ** 2)
    s = H.gen(0) + H.gen(1)
    assert A.operation(0, s) == s * s


def test_unregistered_generator():
    A = solved_qstructure('A', 3)
    assert not A.registered('ξ1')
    try:
        A.qt('ξ1')
    except UnregisteredElementError:
        pass
    else:
        assert False, "operation beyond the cap returned"


def test_interchange_milnor():
    A = solved_qstructure('A', 20)
    H = milnor(20)
    report = interchange_check(A, H.gen(0), 8)
    assert report.passed, report.to_text()
    assert len(report.cases) == 9
    report = interchange_check(A, H.gen(1), 6)
    assert report.passed, report.to_text()


def test_interchange_faa_di_bruno():
    B = solved_qstructure('B', 16)
    H = faa_di_bruno(16)
    for n in range(2):
        report = interchange_check(B, H.gen(n), 6)
        assert report.passed, report.to_text()


def test_truncated_interchange_fails():
    B = solved_qstructure('B', 10)
    H = faa_di_bruno(10)
    # Q_s of the coefficients of Q_t(h1) is known through degree 4 only at this cap
    report = interchange_check(B, H.gen(1), 6)
    assert not report.passed
    assert any('known through' in case.detail for case in report.failures())


def test_suite_runs_negative_control():
    report = qring_suite(8, maxdeg=4, maxweight=4, interchange_degree=6)
    assert report.passed, report.to_text()
    assert not report.skipped()
    control = [case for case in report.cases if case.suite == 'negative-control']
    assert len(control) == 1 and control[0].passed
    assert len([case for case in report.cases if case.label == 'ξ2']) == 7


def test_negative_control_catches_altered_table():
    A = solved_qstructure('A', 12)
    H = milnor(12)
    report = negative_control(A, H)
    assert report.passed, report.to_text()
    assert report.cases[0].label.startswith('interchange rejects')


def test_perturbed_table_breaks_interchange():
    A = solved_qstructure('A', 12)
    H = milnor(12)
    bad = A.perturbed('ξ1', 1, H.gen(1) ** 3)
    report = interchange_check(bad, H.gen(1), 6)
    assert not report.passed
    assert report.failures()
    # the original is untouched
    assert interchange_check(A, H.gen(1), 6).passed


def test_free_ring_weight_two():
    free = build_free_qring([('x', 0, 1)], 6, 4)
    for d in range(7):
        assert free.dimension(d, 2) == 1
    assert free.basis(0, 2) == [free.generator('x') ** 2]
    assert free.basis(3, 2) == [free.word('x', (3,))]


def test_free_ring_weight_four_is_bsigma4():
    free = build_free_qring([('x', 0, 1)], 6, 4)
    assert bsigma4_dimensions(6) == [1, 1, 2, 3, 3, 4, 5]
    assert [free.dimension(d, 4) for d in range(7)] == [1, 1, 2, 3, 3, 4, 5]
    assert len(free.relations(4, 4)) == 1
    assert len(free.relations(3, 4)) == 0
    assert free.normal_form(free.word('x', (2, 1))).is_zero()
    assert free.normal_form(free.word('x', (4, 1))) == free.word('x', (3,)) ** 2


def test_free_ring_confluence_and_permutation():
    free = build_free_qring([('x', 0, 1)], 6, 4)
    report = free.confluence_check()
    assert report.passed, report.to_text()
    report = free.permutation_check(seed=3)
    assert report.passed, report.to_text()


def test_op_zero_is_squaring():
    free = build_free_qring([('x', 0, 1)], 4, 4)
    x = free.generator('x')
    assert free.op_poly(0, x) == x * x
    q1 = free.word('x', (1,))
    assert free.op_poly(0, q1) == q1 * q1
    assert free.op_poly(2, x * x) == q1 * q1


def test_word_names():
    free = build_free_qring([('x', 0, 1)], 4, 4)
    names = free.alphabet.names
    assert names[0] == 'x'
    assert 'Q1(x)' in names and 'Q2Q1(x)' in names
    assert free.word('x', (2, 1)).grade() == 4


def test_eval_unary_operation():
    free = build_free_qring([('x', 0, 1)], 4, 4)
    A = solved_qstructure('A', 8)
    H = milnor(8)
    a = H.gen(0)
    x = free.generator('x')
    assert eval_unary_operation(x, A, a, free) == a
    assert eval_unary_operation(x * x, A, a, free) == a * a
    assert eval_unary_operation(free.word('x', (1,)), A, a, free) == H.gen(0) * H.gen(1)
    assert eval_unary_operation(free.word('x', (2, 1)), A, a, free).is_zero()

    other = build_free_qring([('y', 0, 1)], 4, 4)
    R = other.as_operation_spec()
    y = other.generator('y')
    assert eval_unary_operation(free.word('x', (1,)), R, y, free) == other.word('y', (1,))


def test_freeness_into_milnor():
    free = build_free_qring([('x', 0, 1)], 4, 4)
    A = solved_qstructure('A', 8)
    report = freeness_check(free, A, milnor(8).gen(0))
    assert report.passed, report.to_text()


def test_tensor_structure():
    free = build_free_qring([('r', 0, 1)], 4, 4)
    R = free.as_operation_spec()
    A = solved_qstructure('A', 8)
    T = tensor_qstructure(R, A)
    lift = lambda p: p.embed(T.alphabet)
    xi1 = GradedPolynomial.var(T.alphabet, 'ξ1')
    r = GradedPolynomial.var(T.alphabet, 'r')
    for k in range(4):
        assert T.operation(k, xi1) == lift(A.operation(k, milnor(8).gen(1)))
        assert T.operation(k, r) == lift(R.operation(k, free.generator('r')))
    xi0 = GradedPolynomial.var(T.alphabet, 'ξ0')
    report = interchange_check(T, xi0 * r, 4)
    assert report.passed, report.to_text()


def test_tensor_cap_mismatch():
    R = build_free_qring([('r', 0, 1)], 4, 4).as_operation_spec()
    try:
        tensor_qstructure(R, solved_qstructure('A', 3))
    except CapMismatchError:
        pass
    else:
        assert False, "low-cap structure accepted"


def test_table_json():
    A = solved_qstructure('A', 8)
    data = A.table_json('ξ0')
    assert data['op'] == 'Q' and data['gen'] == 'ξ0'
    assert data['series'][0] == [0, 'ξ0^2']
    assert isinstance(A.qt('ξ0'), PowerSeries)


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith('test_')]
    failed = 0
    for name, fn in tests:
        try:
            fn()
            print(f"✓ {name}")
        except Exception as e:
            failed += 1
            print(f"✗ {name}: {e!r}")
    sys.exit(1 if failed else 0)
