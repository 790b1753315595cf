#!/usr/bin/env python3

import sys

from errors import ActionNotClosedError
from f2series import GradedAlphabet, GradedPolynomial, TensorElement
from fgl import build_universal_fgl
from hopf import comodule_check, faa_di_bruno, milnor, rp_infinity
from qring import build_free_qring
from nishida import (BORDISM, HOMOLOGY, build_square, coaction_consistency, extend_coaction,
                     free_dring_module, lazard_module, nishida_square_check, nishida_suite,
                     reduced_matches, square_elements, tensor_to_poly, thom_reduce, thom_reduction_check,
                     trivial_module, word_correspondence)


def series_expected(sq, rp, i):
    """RP∞ value of b_i with b_j read as the j-th operation on x (b_0 as x^2)"""
    free = sq.free
    x = free.generator('x')
    total = TensorElement.zero((sq.hopf.alphabet, free.alphabet))
    for amono, bmono in rp.value(i).terms:
        j = bmono.index(1)
        word = x * x if j == 0 else free.word('x', (j,))
        total = total + TensorElement.pure(GradedPolynomial._make(sq.hopf.alphabet, frozenset([amono])), word)
    return total


def test_tensor_to_poly():
    left = GradedAlphabet.build([('a', 1)])
    right = GradedAlphabet.build([('b', 2)])
    both = left.concat(right)
    el = TensorElement.pure(GradedPolynomial.var(left, 'a'), GradedPolynomial.var(right, 'b', 2))
    assert tensor_to_poly(el, both) == GradedPolynomial.monomial(both, {'a': 1, 'b': 2})


def test_generator_words_follow_rp_infinity():
    sq = build_square(HOMOLOGY, 4, 4)
    rp = rp_infinity(sq.hopf)
    x = sq.free.generator('x')
    assert sq.coaction.coact(x) == TensorElement.pure(sq.hopf.one(), x)
    for i in range(1, 5):
        assert sq.coaction.coact(sq.free.word('x', (i,))) == series_expected(sq, rp, i), i


def test_homology_square():
    report = nishida_suite(4, 4, HOMOLOGY)
    assert report.passed, report.to_text()
    assert not [c for c in report.cases if c.skipped]


def test_relations_coact_to_zero():
    sq = build_square(HOMOLOGY, 4, 4)
    report = coaction_consistency(sq.coaction)
    assert report.passed, report.to_text()
    assert report.cases


def test_bad_generator_value_breaks_comodule():
    sq = build_square(HOMOLOGY, 4, 4)
    x = GradedPolynomial.var(sq.tensor.alphabet, 'x')
    bad = extend_coaction(sq.free, sq.tensor, sq.hopf, {'x': x + x * x})
    report = comodule_check(bad, 2)
    assert not report.passed
    assert 0 in report.failed_degrees()


def test_bordism_additive_matches_homology():
    report = nishida_suite(4, 4, BORDISM, 'additive')
    assert report.passed, report.to_text()
    assert not report.skipped()
    assert any(c.suite.startswith('thom:') for c in report.cases)
    homology = nishida_suite(4, 4, HOMOLOGY)
    square = lambda r: [(c.label, c.passed) for c in r.cases if c.suite.startswith('nishida:')]
    assert [label.replace('D', 'Q') for label, _ in square(report)] == [label for label, _ in square(homology)]


def test_additive_bordism_coacts_over_milnor():
    sq = build_square(BORDISM, 8, 4, 'additive')
    assert sq.hopf.letter == 'A'
    report = coaction_consistency(sq.coaction, maxdeg=4)
    assert report.passed, report.to_text()
    assert 'relations (4,4)' in {c.label for c in report.cases}
    d1 = sq.free.word('x', (1,))
    report = nishida_square_check(sq, [d1], sq.free.maxdeg)
    assert report.passed, report.to_text()
    # D2D1(x) = 0 in the ring, and its coaction vanishes with it
    assert sq.free.normal_form(sq.free.word('x', (2, 1))).is_zero()
    assert sq.coaction.coact(sq.free.word('x', (2, 1))).is_zero()


def test_bordism_universal_weight_two():
    sq = build_square(BORDISM, 4, 2, 'universal')
    assert sq.model is not None and not sq.model.additive
    assert sq.solved.passed, sq.solved.to_text()
    rp = rp_infinity(sq.hopf)
    for i in range(1, 5):
        assert sq.coaction.coact(sq.free.word('x', (i,))) == series_expected(sq, rp, i), i
    report = nishida_square_check(sq, square_elements(sq, 2), 4)
    assert report.passed, report.to_text()
    assert not report.skipped()
    labels = {c.label for c in report.cases}
    assert any('m' in label for label in labels)
    report = comodule_check(sq.coaction, 4)
    assert report.passed, report.to_text()

    reduced = thom_reduce(free_dring_module(sq, sq.model, 2), milnor(sq.hopf.cap))
    assert [reduced.dimension(d) for d in range(5)] == [1, 1, 1, 1, 1]
    homology = build_square(HOMOLOGY, 4, 2)
    report = reduced_matches(reduced, homology.coaction, word_correspondence(sq.free, homology.free))
    assert report.passed, report.to_text()


def test_thom_reduction_at_weight_four():
    sq = build_square(BORDISM, 8, 4, 'universal')
    homology = build_square(HOMOLOGY, 4, 4)
    reduced = thom_reduce(free_dring_module(sq, sq.model, 4, 4), homology.hopf)
    assert [reduced.dimension(d) for d in range(5)] == [1, 1, 2, 3, 3]
    report = reduced_matches(reduced, homology.coaction, word_correspondence(sq.free, homology.free))
    assert report.passed, report.to_text()
    report = thom_reduction_check(sq, 4, 4)
    assert report.passed, report.to_text()
    assert {c.label for c in report.cases if c.label.startswith('dim')} == {
        f"dim T(D⟨x⟩) = dim Q⟨x⟩ (weight {w})" for w in range(1, 5)}


def test_word_correspondence_is_structural():
    dfree = build_square(BORDISM, 4, 4, 'universal').free
    qfree = build_free_qring([('x', 0, 1)], 4, 4)
    correspond = word_correspondence(dfree, qfree)
    x = dfree.generator('x')
    assert correspond(x * x) == qfree.generator('x') ** 2
    assert correspond(dfree.word('x', (1,)) * x) == qfree.normal_form(qfree.word('x', (1,)) * qfree.generator('x'))
    m1 = GradedPolynomial.var(dfree.alphabet, 'm1')
    assert correspond(m1 * x).is_zero()


def test_thom_reduction_of_lazard_ring():
    model = build_universal_fgl(6)
    reduced = thom_reduce(lazard_module(model, 5))
    assert [reduced.dimension(d) for d in range(6)] == [1, 0, 0, 0, 0, 0]
    (unit,) = reduced.basis(0)
    assert reduced.coact(unit) == TensorElement.pure(reduced.hopf.one(), unit)


def test_thom_reduction_of_trivial_module():
    B = faa_di_bruno(5)
    reduced = thom_reduce(trivial_module(B))
    A = milnor(5)
    target = rp_infinity(A)
    assert [reduced.dimension(d) for d in range(6)] == [1] * 6
    report = reduced_matches(reduced, target, lambda p: p.embed(target.carrier))
    assert report.passed, report.to_text()


def test_reduction_outside_presented_range():
    B = faa_di_bruno(5)
    reduced = thom_reduce(trivial_module(B, maxdeg=3))
    b4 = GradedPolynomial.var(rp_infinity(B).carrier, 'b4')
    try:
        reduced.reduce(b4)
    except ActionNotClosedError:
        pass
    else:
        assert False, "degree 4 accepted beyond the presented range"


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
