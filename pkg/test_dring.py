#!/usr/bin/env python3

import sys

from errors import CapMismatchError
from f2series import GradedPolynomial
from fgl import additive_model, build_universal_fgl
from dring import (additive_collapse_check, build_free_dring, d_extension, d_interchange_check,
                   dring_suite, dt_eval, free_module_dimensions, lazard_closure_check, scalar_dstructure,
                   solve_dstructure, solve_tensor_dstructure)
from hopf import faa_di_bruno
from qring import (EMPTY_ALPHABET, build_free_qring, interchange_check, quadratic_extension,
                   solve_generator_qstructure)


def test_additive_extension_is_quadratic():
    law = additive_model(6).fgl
    assert d_extension(law) == quadratic_extension(EMPTY_ALPHABET, 7)


def test_additive_collapse():
    report = additive_collapse_check(6, maxdeg=4, maxweight=4)
    assert report.passed, report.to_text()


def test_additive_tables_match_q_side():
    H = faa_di_bruno(6)
    Q = solve_generator_qstructure(H)
    for quadratic in ('xf', 'xxt'):
        D, report = solve_dstructure(H, additive_model(6).fgl, quadratic)
        assert report.passed, report.to_text()
        for gen in Q.table:
            assert D.qt(gen) == Q.qt(gen), gen
    D, _ = solve_dstructure(H, additive_model(6).fgl)
    assert dt_eval(D, H.gen(0) ** 2) == Q.qt('h0') ** 2
    assert dt_eval(D, H.one()).coefficient(0).is_one()


def test_universal_structure():
    H = faa_di_bruno(6)
    D, report = solve_dstructure(H, build_universal_fgl(6).fgl, 'xf')
    assert report.passed, report.to_text()
    labels = [case.label for case in report.cases]
    assert 'residual q=xf' in labels and 'residual q=xxt' not in labels
    assert [c for c in report.cases if c.label == 'residual q=xf'][0].passed
    # the literal quadratic is recorded as a note only
    assert any(note.startswith('residual q=xxt') for note in report.notes)
    assert not report.skipped()
    h = lambda n: GradedPolynomial.var(D.alphabet, H.name(n))
    d0 = D.qt('h0')
    assert d0.coefficient(0) == h(0) ** 2
    # D_t(h0) = h0·h(t)/t
    for k in range(d0.cap + 1):
        assert d0.coefficient(k) == h(0) * h(k)


def test_universal_interchange_without_scalars_fails():
    H = faa_di_bruno(6)
    D, _ = solve_dstructure(H, build_universal_fgl(8).fgl)
    report = d_interchange_check(D, GradedPolynomial.var(D.alphabet, 'h0'), 4)
    assert not report.passed
    assert not report.skipped()
    assert 'm1' in report.cases[0].detail


def test_universal_interchange_with_derived_scalars():
    H = faa_di_bruno(6)
    model = build_universal_fgl(8)
    D, _ = solve_dstructure(H, model.fgl)
    scalars, derived = scalar_dstructure(model)
    assert derived.passed, derived.to_text()
    D = D.with_scalars(scalars)
    assert D.registered('m1') and 'm7' in D.unknown
    report = d_interchange_check(D, GradedPolynomial.var(D.alphabet, 'h0'), 4)
    assert report.passed, report.to_text()
    assert not report.skipped()
    assert sorted({case.degree for case in report.cases}) == [0, 1, 2, 3, 4]


def test_scalar_structure_low_terms():
    model = build_universal_fgl(6)
    scalars, report = scalar_dstructure(model)
    assert report.passed, report.to_text()
    assert set(scalars.table) == {'m1', 'm2'}
    assert scalars.unknown == {'m3', 'm4', 'm5'}
    m = lambda n: GradedPolynomial.var(model.alphabet, f"m{n}")
    d1 = scalars.qt('m1')
    assert d1.cap == 3
    assert d1.coefficient(0) == m(1) ** 2
    assert d1.coefficient(1) == m(1) * m(2) + m(3)
    assert d1.coefficient(2) == m(1) ** 4 + m(1) ** 2 * m(2)
    assert scalars.qt('m2').cap == 1
    assert scalars.qt('m2').coefficient(0) == m(2) ** 2


def test_scalar_structure_is_a_dring_on_the_lazard_ring():
    model = build_universal_fgl(10)
    scalars, _ = scalar_dstructure(model)
    m1 = GradedPolynomial.var(model.alphabet, 'm1')
    report = interchange_check(scalars, m1, 4)
    assert report.passed, report.to_text()
    closure = lazard_closure_check(scalars, model, 4)
    assert closure.passed, closure.to_text()
    assert len(closure.cases) == 3


def test_scalar_structure_additive_is_empty():
    scalars, report = scalar_dstructure(additive_model(6))
    assert not scalars.table and report.passed


def test_free_dring_additive_matches_q():
    dfree = build_free_dring([('x', 0, 1)], additive_model(7), 6, 4)
    qfree = build_free_qring([('x', 0, 1)], 6, 4)
    assert dfree.dimensions() == qfree.dimensions()
    x = dfree.generator('x')
    assert dfree.op_word(0, dfree.words[0]) == x * x
    assert dfree.word('x', (1,)).to_text() == 'D1(x)'


def test_free_dring_universal_weight_two():
    model = build_universal_fgl(5)
    free = build_free_dring([('x', 0, 1)], model, 4, 2)
    assert free_module_dimensions(model, 4) == [1, 1, 2, 2, 4]
    assert [free.dimension(d, 2) for d in range(5)] == [1, 1, 2, 2, 4]
    assert free.permutation_check(seed=5).passed
    assert free.confluence_check().passed


def test_free_dring_needs_scalars_through_maxdeg():
    try:
        build_free_dring([('x', 0, 1)], build_universal_fgl(4), 4, 2)
    except CapMismatchError:
        pass
    else:
        assert False, "model too small for the requested degree"


def test_tensor_dstructure():
    free = build_free_dring([('x', 0, 1)], additive_model(5), 4, 4)
    R = free.as_operation_spec()
    assert R.op == 'D' and R.fgl is not None
    T, report = solve_tensor_dstructure(R)
    assert report.passed, report.to_text()
    H = faa_di_bruno(4)
    Q = solve_generator_qstructure(H)
    lift = lambda p: p.embed(T.alphabet)
    h0 = GradedPolynomial.var(T.alphabet, 'h0')
    x = GradedPolynomial.var(T.alphabet, 'x')
    for k in range(3):
        assert T.operation(k, h0) == lift(Q.operation(k, H.gen(0)))
    for k in range(5):
        assert T.operation(k, x) == lift(R.operation(k, free.generator('x')))
    report = d_interchange_check(T, h0 * x, 2)
    assert report.passed and not report.cases[0].skipped, report.to_text()


def test_dring_suite_passes_without_skips():
    report = dring_suite(8)
    assert report.passed, report.to_text()
    assert not report.skipped()
    labels = {case.label for case in report.cases}
    assert {'h0', 'm1'} <= labels


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
