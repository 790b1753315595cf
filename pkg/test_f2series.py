#!/usr/bin/env python3

import random
import sys

from errors import (AlphabetMismatchError, CapExceededError, ConstantTermError,
                    LaurentBoundError, NegativeExponentError, NonInvertibleError)
from f2series import (GradedAlphabet, GradedPolynomial, PowerSeries, TensorElement,
                      express_in_invariant, poly_arith, series_comp_inverse, series_compose)
from sympy import Poly, symbols

XI = GradedAlphabet.build([('ξ0', 0), ('ξ1', 1), ('ξ2', 3), ('ξ3', 7)], invertible='ξ0')
H = GradedAlphabet.build([('h0', 0), ('h1', 1), ('h2', 2), ('h3', 3)], invertible='h0')


def xi(n, power=1):
    return GradedPolynomial.var(XI, f"ξ{n}", power)


def h(n, power=1):
    return GradedPolynomial.var(H, f"h{n}", power)


def univariate(alphabet, coeffs, cap, var='x'):
    return PowerSeries.from_univariate(coeffs, alphabet, var, cap)


def bivariate(alphabet, coeffs, cap):
    return PowerSeries(alphabet, ('x', 't'), coeffs, cap)


def test_characteristic_two():
    assert poly_arith(xi(1), xi(1), 'add').is_zero()
    assert poly_arith(xi(0, -1), xi(0), 'mul').is_one()
    s = xi(0) + xi(1)
    assert s * s == xi(0, 2) + xi(1, 2)


def to_sympy(p):
    gens = symbols(' '.join(p.alphabet.names))
    return Poly.from_dict({m: 1 for m in p.terms}, *gens, modulus=2)


def test_products_agree_with_sympy_mod_two():
    P = GradedAlphabet.build([('a', 1), ('b', 2), ('c', 3)])
    rng = random.Random(3)

    def sample():
        monos = {tuple(rng.randrange(3) for _ in range(3)) for _ in range(rng.randrange(1, 5))}
        return GradedPolynomial(P, sorted(monos))

    for _ in range(20):
        p, q = sample(), sample()
        assert to_sympy(p * q) == to_sympy(p) * to_sympy(q)
        assert to_sympy(p ** 3) == to_sympy(p) ** 3


def test_negative_exponent_rejected():
    try:
        GradedPolynomial(XI, [(0, -1, 0, 0)])
    except NegativeExponentError:
        pass
    else:
        assert False, "ξ1^-1 accepted"


def test_alphabet_mismatch():
    try:
        poly_arith(xi(1), h(1), 'mul')
    except AlphabetMismatchError:
        pass
    else:
        assert False, "mixed alphabets accepted"


def test_grading():
    p = xi(1, 2) * xi(2)
    assert p.grade() == 5
    assert (xi(0, -3) * xi(1)).grade() == 1
    assert not (xi(1) + xi(2)).is_homogeneous()


def test_text_form():
    p = xi(0, -3) * xi(1) + xi(2)
    assert p.to_text() == 'ξ0^-3·ξ1 + ξ2'
    assert GradedPolynomial.zero(XI).to_text() == '0'
    assert GradedPolynomial.one(XI).to_text() == '1'
    assert p.to_json() == [{'ξ0': -3, 'ξ1': 1}, {'ξ2': 1}]
    t = TensorElement.pure(h(0), h(1)) + TensorElement.pure(h(1), h(0, 2))
    assert t.to_text() == 'h0⊗h1 + h1⊗h0^2'


def test_compose_identity_and_squares():
    g = univariate(H, {1: h(0), 2: h(1), 3: h(2)}, 5)
    x = univariate(H, {1: GradedPolynomial.one(H)}, 5)
    assert series_compose(x, g) == g
    f = univariate(H, {2: GradedPolynomial.one(H)}, 4)
    g = univariate(H, {1: h(0), 2: h(1)}, 4)
    assert series_compose(f, g) == univariate(H, {2: h(0, 2), 4: h(1, 2)}, 4)


def test_compose_generator_series_with_itself():
    hx = univariate(H, {1: h(0), 2: h(1), 3: h(2), 4: h(3)}, 4)
    outer = PowerSeries(H, ('x',), {}, 4)
    # sum_n h_n * h(x)^(n+1)
    for n in range(4):
        outer = outer + (hx ** (n + 1)).scale(h(n))
    assert outer.coefficient(2) == h(0) * h(1) + h(1) * h(0, 2)
    composed = series_compose(hx, hx)
    assert composed.coefficient(2) == h(0) * h(1) + h(1) * h(0, 2)


def test_compose_needs_zero_constant_term():
    f = univariate(H, {1: GradedPolynomial.one(H)}, 3)
    g = univariate(H, {0: h(1), 1: h(0)}, 3)
    try:
        series_compose(f, g)
    except ConstantTermError:
        pass
    else:
        assert False, "constant term accepted"


def test_comp_inverse_of_milnor_series():
    f = univariate(XI, {1: xi(0), 2: xi(1), 4: xi(2)}, 4)
    g = series_comp_inverse(f)
    assert g.coefficient(1) == xi(0, -1)
    assert g.coefficient(2) == xi(1) * xi(0, -3)
    assert g.coefficient(3).is_zero()
    assert g.coefficient(4) == xi(1, 3) * xi(0, -7) + xi(2) * xi(0, -5)


def test_comp_inverse_needs_unit():
    f = univariate(XI, {1: xi(1), 2: xi(0)}, 3)
    try:
        series_comp_inverse(f)
    except NonInvertibleError:
        pass
    else:
        assert False, "non-unit leading coefficient accepted"


def _random_series(rng, cap):
    coeffs = {1: xi(0, rng.choice([-1, 1]))}
    for k in range(2, cap + 1):
        c = GradedPolynomial.zero(XI)
        for _ in range(rng.randrange(3)):
            c = c + xi(rng.randrange(4)) * xi(rng.randrange(1, 3))
        coeffs[k] = c
    return univariate(XI, coeffs, cap)


def test_comp_inverse_round_trip():
    rng = random.Random(7)
    cap = 6
    x = univariate(XI, {1: GradedPolynomial.one(XI)}, cap)
    for _ in range(100):
        f = _random_series(rng, cap)
        g = series_comp_inverse(f)
        assert series_compose(f, g) == x
        assert series_compose(g, f) == x


def test_compose_associative():
    rng = random.Random(11)
    for _ in range(20):
        f, g, k = (_random_series(rng, 5) for _ in range(3))
        assert series_compose(series_compose(f, g), k) == series_compose(f, series_compose(g, k))


def test_precision_tracking():
    x = univariate(XI, {1: GradedPolynomial.one(XI)}, 4)
    rough = univariate(XI, {2: xi(1)}, 2)
    product = x * rough
    assert product.cap == 3
    assert (x + rough).cap == 2
    try:
        rough.coefficient(3)
    except CapExceededError:
        pass
    else:
        assert False, "coefficient beyond cap returned"


def test_laurent_bound():
    try:
        univariate(XI, {1: xi(0, -20)}, 4)
    except LaurentBoundError:
        pass
    else:
        assert False, "ξ0^-20 accepted at cap 4"


def test_series_inverse():
    one = GradedPolynomial.one(XI)
    s = univariate(XI, {0: one, 1: one}, 5)
    inv = s.inverse()
    assert inv == univariate(XI, {k: one for k in range(6)}, 5)
    assert (s * inv) == univariate(XI, {0: one}, 5)


def test_express_quadratic_itself():
    one = GradedPolynomial.one(XI)
    q = bivariate(XI, {(2, 0): one, (1, 1): one}, 6)
    coefficients, residual = express_in_invariant(q, q, [1])
    assert residual.is_zero()
    assert coefficients[0] == PowerSeries(XI, ('t',), {(0,): one}, 4)


def test_express_detects_non_invariant():
    one = GradedPolynomial.one(XI)
    q = bivariate(XI, {(2, 0): one, (1, 1): one}, 6)
    cases = [
        ({(3, 0): one}, False),
        ({(2, 1): one, (1, 2): one}, True),
        ({(4, 0): one, (2, 2): one}, True),
        ({(1, 1): one}, False),
    ]
    shift = bivariate(XI, {(1, 0): one, (0, 1): one}, 6)
    for coeffs, invariant in cases:
        F = bivariate(XI, coeffs, 6)
        _, residual = express_in_invariant(F, q, [1, 2])
        assert residual.is_zero() == invariant, coeffs
        shifted = F.substitute({'x': shift, 't': bivariate(XI, {(0, 1): one}, 6)})
        assert (shifted == F) == invariant, coeffs


def test_express_milnor_product():
    cap = 8
    one = GradedPolynomial.one(XI)
    xi_x = bivariate(XI, {(1, 0): xi(0), (2, 0): xi(1), (4, 0): xi(2), (8, 0): xi(3)}, cap)
    shift = bivariate(XI, {(1, 0): one, (0, 1): one}, cap)
    F = xi_x * xi_x.substitute({'x': shift, 't': bivariate(XI, {(0, 1): one}, cap)})
    q = bivariate(XI, {(2, 0): one, (1, 1): one}, cap)
    coefficients, residual = express_in_invariant(F, q, [1, 2, 4, 8])
    assert residual.is_zero()
    c0 = coefficients[0]
    assert c0.cap == 6
    assert c0.coefficient(0) == xi(0, 2)
    assert c0.coefficient(1) == xi(0) * xi(1)
    assert c0.coefficient(2).is_zero()
    assert c0.coefficient(3) == xi(0) * xi(2)
    assert c0.coefficient(4).is_zero()


def test_tensor_arithmetic():
    a = TensorElement.pure(h(0), h(1))
    b = TensorElement.pure(h(1), h(0))
    assert (a + a).is_zero()
    assert a * b == TensorElement.pure(h(0) * h(1), h(1) * h(0))
    unit = TensorElement.pure(h(0, 2), h(0, -1))
    assert unit * unit.inverse() == TensorElement.one((H, H))


def test_apply_factor_on_zero_never_calls_hom():
    calls = []

    def hom(p):
        calls.append(p)
        (m,) = p.terms
        return TensorElement.pure(p, p)

    zero = TensorElement.zero((H,))
    assert zero.apply_factor(0, hom, (H, H)) == TensorElement.zero((H, H))
    assert zero.apply_factor(0, hom) == zero
    assert not calls
    assert zero.map_polynomials(0, lambda q: q, XI) == TensorElement.zero((XI,))
    assert TensorElement.pure(h(1)).apply_factor(0, hom) == TensorElement.pure(h(1), h(1))
    assert len(calls) == 1


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
