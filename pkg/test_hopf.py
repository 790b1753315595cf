#!/usr/bin/env python3

import sys

from f2series import GradedPolynomial, TensorElement
from hopf import (DroppedTermCoaction, algebra_map_check, antipode, antipode_check,
                  coaction_rp_infinity, coassociativity_check, comodule_check, coproduct,
                  counit_check, epsilon_bialgebra_check, epsilon_reduce, faa_di_bruno,
                  homogeneity_check, hopf_suite, milnor, rp_infinity)


def test_presentations():
    A, B = milnor(8), faa_di_bruno(8)
    assert A.alphabet.names == ('ξ0', 'ξ1', 'ξ2', 'ξ3')
    assert A.alphabet.grades == (0, 1, 3, 7)
    assert B.alphabet.names[:3] == ('h0', 'h1', 'h2')
    assert B.count == 8
    assert A.alphabet.invertible == 'ξ0' and B.alphabet.invertible == 'h0'


def test_milnor_coproduct():
    A = milnor(8)
    assert coproduct(A, 0) == TensorElement.pure(A.gen(0), A.gen(0))
    assert coproduct(A, 1) == TensorElement.pure(A.gen(0), A.gen(1)) + TensorElement.pure(A.gen(1), A.gen(0) ** 2)
    # δ(ξ2) = Σ ξ_i ⊗ ξ_j^(2^i)
    expected = (TensorElement.pure(A.gen(0), A.gen(2)) + TensorElement.pure(A.gen(1), A.gen(1) ** 2)
                + TensorElement.pure(A.gen(2), A.gen(0) ** 4))
    assert coproduct(A, 2) == expected


def test_faa_di_bruno_coproduct_text():
    B = faa_di_bruno(6)
    assert coproduct(B, 1).to_text() == 'h0⊗h1 + h1⊗h0^2'
    assert B.to_json(1)['algebra'] == 'B'


def test_antipode_values():
    A = milnor(8)
    assert antipode(A, 0) == A.gen(0) ** -1
    assert antipode(A, 1) == A.gen(1) * A.gen(0) ** -3


def test_epsilon_reduce():
    B = faa_di_bruno(4)
    A = milnor(4)
    h = B.gen
    assert epsilon_reduce(h(1), A) == A.gen(1)
    assert epsilon_reduce(h(2), A).is_zero()
    assert epsilon_reduce(h(0) ** -1 * h(3), A) == A.gen(0) ** -1 * A.gen(2)


def test_rp_infinity_coaction():
    A = milnor(8)
    b = rp_infinity(A).b
    assert coaction_rp_infinity(A, 1) == TensorElement.pure(A.gen(0) ** -1, b(1))
    assert coaction_rp_infinity(A, 2) == (TensorElement.pure(A.gen(1) * A.gen(0) ** -3, b(1))
                                          + TensorElement.pure(A.gen(0) ** -2, b(2)))


def test_grading_specialization():
    A = milnor(8)
    graded = rp_infinity(A).specialized(A.grading_only)
    b = rp_infinity(A).b
    for n in range(9):
        assert graded.coact(b(n)) == TensorElement.pure(A.gen(0) ** -n, b(n))


def test_hopf_axioms():
    for H in (milnor(8), faa_di_bruno(8)):
        for check in (coassociativity_check, counit_check, homogeneity_check, antipode_check, algebra_map_check):
            report = check(H)
            assert report.passed, report.to_text()


def test_epsilon_is_bialgebra_map():
    report = epsilon_bialgebra_check(faa_di_bruno(8), milnor(8))
    assert report.passed, report.to_text()
    # h2 and h4..h6 reduce to zero
    assert {case.label for case in report.cases} >= {'h2', 'h4', 'h5', 'h6'}


def test_delta_of_zero():
    for H in (milnor(6), faa_di_bruno(6)):
        zero = GradedPolynomial.zero(H.alphabet)
        assert H.delta(zero) == TensorElement.zero((H.alphabet, H.alphabet))
        assert H.delta(H.gen(1) + H.gen(1)).is_zero()


def test_hopf_suite_passes():
    report = hopf_suite(8)
    assert report.passed, report.to_text()
    assert not report.skipped()


def test_comodule_rp_infinity():
    A = milnor(10)
    assert comodule_check(rp_infinity(A), 10).passed
    assert comodule_check(rp_infinity(A).specialized(A.unit_leading), 10).passed
    assert comodule_check(rp_infinity(faa_di_bruno(6)), 6).passed


def test_corrupted_coaction_fails():
    A = milnor(6)
    report = comodule_check(DroppedTermCoaction(rp_infinity(A), 3), 6)
    assert not report.passed
    assert 3 in report.failed_degrees()
    assert all(d >= 3 for d in report.failed_degrees())


def test_counit_is_specialization():
    A = milnor(4)
    assert A.counit(A.gen(0) ** 3) == 1
    assert A.counit(A.gen(1)) == 0
    assert A.counit(GradedPolynomial.one(A.alphabet) + A.gen(0)) == 0


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
