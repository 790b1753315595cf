"""
The Milnor and Faa di Bruno Hopf algebras, the reduction between them, and coactions.

Both algebras are presented by a generator series g(x) = sum_n g_n x^(e(n)) with an
invertible leading generator g_0; the diagonal is composition of series, the antipode is
the compositional inverse, and the counit is the specialization g_0 = 1, g_(>0) = 0.
"""

import logging
import random
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Mapping, Optional

from errors import AlphabetMismatchError
from f2series import (GradedAlphabet, GradedPolynomial, PowerSeries, TensorElement,
                      series_comp_inverse)
from report import CheckReport

logger = logging.getLogger(__name__)

MILNOR = 'milnor'
FAA_DI_BRUNO = 'faadibruno'
EMPTY = TensorElement.one(())
NOTHING = TensorElement.zero(())


class HopfPresentation:
    def __init__(self, kind: str, cap: int):
        if kind not in (MILNOR, FAA_DI_BRUNO):
            raise ValueError(f"unknown Hopf algebra {kind}")
        self.kind = kind
        self.cap = cap
        self.prefix = 'ξ' if kind == MILNOR else 'h'
        self.letter = 'A' if kind == MILNOR else 'B'
        self.x = 'x'
        count = 0
        while self.exponent(count) <= cap:
            count += 1
        self.count = count
        self.alphabet = GradedAlphabet.build(
            ((self.name(n), self.grade(n)) for n in range(count)), invertible=self.name(0))
        self._delta_cache: Dict[int, TensorElement] = {}
        self.logger = logging.getLogger(__name__)

    def __repr__(self) -> str:
        return f"HopfPresentation({self.kind}, cap={self.cap})"

    def exponent(self, n: int) -> int:
        return 2 ** n if self.kind == MILNOR else n + 1

    def grade(self, n: int) -> int:
        return self.exponent(n) - 1

    def name(self, n: int) -> str:
        return f"{self.prefix}{n}"

    def index_of_exponent(self, e: int) -> Optional[int]:
        for n in range(self.count):
            if self.exponent(n) == e:
                return n
        return None

    @property
    def exponents(self) -> List[int]:
        return [self.exponent(n) for n in range(self.count)]

    def gen(self, n: int) -> GradedPolynomial:
        return GradedPolynomial.var(self.alphabet, self.name(n))

    def one(self) -> GradedPolynomial:
        return GradedPolynomial.one(self.alphabet)

    @cached_property
    def series(self) -> PowerSeries:
        """g(x) = sum_n g_n x^(e(n))"""
        return PowerSeries.from_univariate({self.exponent(n): self.gen(n) for n in range(self.count)},
                                           self.alphabet, self.x, self.cap)

    @cached_property
    def inverse_series(self) -> PowerSeries:
        return series_comp_inverse(self.series)

    @cached_property
    def _series_powers(self) -> Dict[int, PowerSeries]:
        powers = {}
        for k in range(self.count):
            powers[k] = self.series ** self.exponent(k)
        return powers

    # Coalgebra structure
    def coproduct(self, n: int) -> TensorElement:
        """δ(g_n) = sum_k g_k ⊗ [x^e(n)] g(x)^e(k)"""
        if n not in self._delta_cache:
            if n >= self.count:
                raise AlphabetMismatchError(f"generator {self.name(n)} lies beyond cap {self.cap}")
            e = self.exponent(n)
            total = TensorElement.zero((self.alphabet, self.alphabet))
            for k in range(n + 1):
                right = self._series_powers[k].coefficient(e)
                if not right.is_zero():
                    total = total + TensorElement.pure(self.gen(k), right)
            self._delta_cache[n] = total
        return self._delta_cache[n]

    def _delta_monomial(self, p: GradedPolynomial) -> TensorElement:
        (m,) = p.terms
        result = TensorElement.one((self.alphabet, self.alphabet))
        for n, e in enumerate(m):
            if e:
                result = result * self.coproduct(n) ** e
        return result

    def delta(self, p: GradedPolynomial) -> TensorElement:
        if p.is_zero():
            return TensorElement.zero((self.alphabet, self.alphabet))
        return TensorElement.pure(p).apply_factor(0, self._delta_monomial)

    def counit(self, p: GradedPolynomial) -> int:
        inv = self.alphabet.inv_index
        hits = sum(1 for m in p.terms if all(e == 0 for i, e in enumerate(m) if i != inv))
        return hits % 2

    def counit_factor(self, p: GradedPolynomial) -> TensorElement:
        return EMPTY if self.counit(p) else NOTHING

    def antipode(self, n: int) -> GradedPolynomial:
        return self.inverse_series.coefficient(self.exponent(n))

    def antipode_map(self, p: GradedPolynomial) -> GradedPolynomial:
        images = {self.name(n): self.antipode(n) for n in range(self.count)}
        return p.substitute(images)

    def specialize(self, p: GradedPolynomial, values: Mapping[str, int]) -> GradedPolynomial:
        return p.evaluate(values)

    @property
    def unit_leading(self) -> Dict[str, int]:
        """g_0 = 1"""
        return {self.name(0): 1}

    @property
    def grading_only(self) -> Dict[str, int]:
        """g_(>0) = 0"""
        return {self.name(n): 0 for n in range(1, self.count)}

    def to_json(self, n: int) -> dict:
        return {'algebra': self.letter, 'generator': n, 'coproduct': self.coproduct(n).to_json()}


@lru_cache(maxsize=None)
def milnor(cap: int) -> HopfPresentation:
    return HopfPresentation(MILNOR, cap)


@lru_cache(maxsize=None)
def faa_di_bruno(cap: int) -> HopfPresentation:
    return HopfPresentation(FAA_DI_BRUNO, cap)


def presentation(kind: str, cap: int) -> HopfPresentation:
    return milnor(cap) if kind in (MILNOR, 'A') else faa_di_bruno(cap)


def coproduct(H: HopfPresentation, n: int) -> TensorElement:
    return H.coproduct(n)


def antipode(H: HopfPresentation, n: int) -> GradedPolynomial:
    return H.antipode(n)


def epsilon_reduce(p: GradedPolynomial, A: Optional[HopfPresentation] = None) -> GradedPolynomial:
    """h_n -> ξ_i when n = 2^i - 1, otherwise 0; a ring homomorphism"""
    B = p.alphabet
    if A is None:
        count = sum(1 for name in B.names if name.startswith('h'))
        A = milnor(count)
    images = {}
    for name in B.names:
        n = int(name[1:])
        i = (n + 1).bit_length() - 1
        if 2 ** i == n + 1 and A.name(i) in A.alphabet:
            images[name] = A.gen(i)
        else:
            images[name] = GradedPolynomial.zero(A.alphabet)
    return p.substitute(images, A.alphabet)


class Coaction:
    """Left coaction of a Hopf presentation on a carrier with a basis per degree"""

    def __init__(self, hopf: HopfPresentation, carrier: GradedAlphabet,
                 specialization: Optional[Mapping[str, int]] = None, name: str = 'coaction'):
        self.hopf = hopf
        self.carrier = carrier
        self.specialization = dict(specialization) if specialization else None
        self.name = name
        self.logger = logging.getLogger(__name__)

    def basis(self, degree: int) -> List[GradedPolynomial]:
        raise NotImplementedError

    def _coact(self, p: GradedPolynomial) -> TensorElement:
        raise NotImplementedError

    def coact(self, p: GradedPolynomial) -> TensorElement:
        value = self._coact(p)
        if self.specialization:
            value = value.map_polynomials(0, lambda q: q.evaluate(self.specialization))
        return value

    def coact_right(self, T: TensorElement) -> TensorElement:
        """(id ⊗ α) on an element of H ⊗ C, grouping by the H factor first"""
        result = None
        for key, cpoly in sorted(T.coefficients(1).items()):
            image = self.coact(cpoly)
            prefixed = TensorElement._make((T.alphabets[0],) + image.alphabets,
                                           frozenset(key + t for t in image.terms))
            result = prefixed if result is None else result + prefixed
        if result is None:
            return TensorElement.zero((T.alphabets[0], self.hopf.alphabet, self.carrier))
        return result

    def specialized(self, values: Mapping[str, int]) -> 'Coaction':
        return _SpecializedCoaction(self, values)


class _SpecializedCoaction(Coaction):
    def __init__(self, base: Coaction, values: Mapping[str, int]):
        merged = dict(base.specialization or {})
        merged.update(values)
        super().__init__(base.hopf, base.carrier, merged, f"{base.name}|{values}")
        self.base = base

    def basis(self, degree: int) -> List[GradedPolynomial]:
        return self.base.basis(degree)

    def _coact(self, p: GradedPolynomial) -> TensorElement:
        return self.base.coact(p)


class SeriesCoaction(Coaction):
    """α(b)(x) = b(g^(-1)(x)) on the module spanned by b_0, b_1, ..."""

    def __init__(self, hopf: HopfPresentation, prefix: str = 'b', **kwargs):
        carrier = GradedAlphabet.build((f"{prefix}{i}", i) for i in range(hopf.cap + 1))
        super().__init__(hopf, carrier, name=kwargs.pop('name', f"RP∞/{hopf.letter}"), **kwargs)
        self.prefix = prefix
        self._values: Dict[int, TensorElement] = {}

    def b(self, i: int) -> GradedPolynomial:
        return GradedPolynomial.var(self.carrier, f"{self.prefix}{i}")

    def basis(self, degree: int) -> List[GradedPolynomial]:
        return [self.b(degree)] if degree <= self.hopf.cap else []

    def value(self, i: int) -> TensorElement:
        if i not in self._values:
            inverse = self.hopf.inverse_series
            total = TensorElement.zero((self.hopf.alphabet, self.carrier))
            power = PowerSeries.one(self.hopf.alphabet, (self.hopf.x,), self.hopf.cap)
            for j in range(i + 1):
                coefficient = power.coefficient(i)
                if not coefficient.is_zero():
                    total = total + TensorElement.pure(coefficient, self.b(j))
                power = power * inverse
            self._values[i] = total
        return self._values[i]

    def _coact(self, p: GradedPolynomial) -> TensorElement:
        total = TensorElement.zero((self.hopf.alphabet, self.carrier))
        for m in p.terms:
            if sum(m) != 1:
                raise AlphabetMismatchError(f"{p.to_text()} is not linear in the RP∞ basis")
            total = total + self.value(m.index(1))
        return total


class MultiplicativeCoaction(Coaction):
    """
    Coaction on a ring fixed on generators and extended multiplicatively.

    `values` maps generator names to elements of H ⊗ carrier. Generators may live on a
    separate alphabet; `decompose` then rewrites a carrier polynomial as a polynomial in
    the generators (for subrings such as the Lazard model).
    """

    def __init__(self, hopf: HopfPresentation, carrier: GradedAlphabet,
                 values: Mapping[str, TensorElement],
                 basis_fn: Callable[[int], List[GradedPolynomial]],
                 generators: Optional[GradedAlphabet] = None,
                 decompose: Optional[Callable[[GradedPolynomial], GradedPolynomial]] = None,
                 **kwargs):
        super().__init__(hopf, carrier, **kwargs)
        self.values = dict(values)
        self.generators = generators or carrier
        self.decompose = decompose
        self.basis_fn = basis_fn
        self._cache: Dict[tuple, TensorElement] = {}

    def basis(self, degree: int) -> List[GradedPolynomial]:
        return self.basis_fn(degree)

    def _value_of_monomial(self, m: tuple) -> TensorElement:
        if m not in self._cache:
            result = TensorElement.one((self.hopf.alphabet, self.carrier))
            for name, e in zip(self.generators.names, m):
                if e:
                    result = result * self.values[name] ** e
            self._cache[m] = result
        return self._cache[m]

    def _coact(self, p: GradedPolynomial) -> TensorElement:
        q = self.decompose(p) if self.decompose else p
        total = TensorElement.zero((self.hopf.alphabet, self.carrier))
        for m in q.terms:
            total = total + self._value_of_monomial(m)
        return total


class DroppedTermCoaction(Coaction):
    """A coaction with one term removed from its value in a chosen degree"""

    def __init__(self, base: Coaction, degree: int):
        super().__init__(base.hopf, base.carrier, base.specialization, f"{base.name}/corrupted@{degree}")
        self.base = base
        self.degree = degree

    def basis(self, degree: int) -> List[GradedPolynomial]:
        return self.base.basis(degree)

    def _coact(self, p: GradedPolynomial) -> TensorElement:
        value = self.base.coact(p)
        if p.grades() == {self.degree} and value.terms:
            victim = value.sorted_terms()[-1]
            value = TensorElement._make(value.alphabets, value.terms - {victim})
        return value


def comodule_check(c: Coaction, maxdeg: int) -> CheckReport:
    """Counit, coassociativity and grading of a coaction, degree by degree"""
    report = CheckReport(f"comodule:{c.name}")
    H = c.hopf
    spec = c.specialization

    def reduce(T: TensorElement, factors: int) -> TensorElement:
        if spec:
            for k in range(factors):
                T = T.map_polynomials(k, lambda q: q.evaluate(spec))
        return T

    for d in range(maxdeg + 1):
        ok_counit = ok_coassoc = ok_grade = True
        for b in c.basis(d):
            value = c.coact(b)
            if value.term_grades() - {d}:
                ok_grade = False
            if value.apply_factor(0, H.counit_factor, ()) != TensorElement.pure(b):
                ok_counit = False
            left = reduce(value.apply_factor(0, H.delta, (H.alphabet, H.alphabet)), 2)
            right = reduce(c.coact_right(value), 2)
            if left != right:
                ok_coassoc = False
        report.add('counit', ok_counit, d)
        report.add('coassociativity', ok_coassoc, d)
        report.add('grading', ok_grade, d)
        if not (ok_counit and ok_coassoc and ok_grade):
            logger.error(f"{c.name} fails the comodule axioms in degree {d}")
    return report


@lru_cache(maxsize=None)
def rp_infinity(H: HopfPresentation) -> SeriesCoaction:
    return SeriesCoaction(H)


def coaction_rp_infinity(H: HopfPresentation, i: int) -> TensorElement:
    return rp_infinity(H).value(i)


# Hopf algebra axioms as checks

def coassociativity_check(H: HopfPresentation) -> CheckReport:
    report = CheckReport(f"coassociativity:{H.letter}")
    for n in range(H.count):
        d = H.coproduct(n)
        left = d.apply_factor(0, H.delta, (H.alphabet, H.alphabet))
        right = d.apply_factor(1, H.delta, (H.alphabet, H.alphabet))
        report.add(H.name(n), left == right, H.grade(n))
    return report


def counit_check(H: HopfPresentation) -> CheckReport:
    report = CheckReport(f"counit:{H.letter}")
    for n in range(H.count):
        d = H.coproduct(n)
        g = TensorElement.pure(H.gen(n))
        left = d.apply_factor(0, H.counit_factor, ())
        right = d.apply_factor(1, H.counit_factor, ())
        report.add(H.name(n), left == g and right == g, H.grade(n))
    return report


def homogeneity_check(H: HopfPresentation) -> CheckReport:
    report = CheckReport(f"homogeneity:{H.letter}")
    for n in range(H.count):
        grades = H.coproduct(n).term_grades()
        report.add(H.name(n), grades == {H.grade(n)}, H.grade(n), detail=str(sorted(grades)))
    return report


def antipode_check(H: HopfPresentation) -> CheckReport:
    """m(S ⊗ id)δ = m(id ⊗ S)δ = unit∘counit on every generator"""
    report = CheckReport(f"antipode:{H.letter}")
    for n in range(H.count):
        d = H.coproduct(n)
        expected = GradedPolynomial.constant(H.alphabet, H.counit(H.gen(n)))
        left = GradedPolynomial.zero(H.alphabet)
        right = GradedPolynomial.zero(H.alphabet)
        for a, b in d.terms:
            pa = GradedPolynomial._make(H.alphabet, frozenset([a]))
            pb = GradedPolynomial._make(H.alphabet, frozenset([b]))
            left = left + H.antipode_map(pa) * pb
            right = right + pa * H.antipode_map(pb)
        report.add(H.name(n), left == expected and right == expected, H.grade(n))
    return report


def random_element(H: HopfPresentation, rng: random.Random, terms: int = 2, factors: int = 2) -> GradedPolynomial:
    total = GradedPolynomial.zero(H.alphabet)
    for _ in range(terms):
        mono = H.one()
        for _ in range(factors):
            n = rng.randrange(H.count)
            e = rng.randrange(-1, 3) if n == 0 else rng.randrange(0, 3)
            mono = mono * H.gen(n) ** e
        total = total + mono
    return total


def algebra_map_check(H: HopfPresentation, samples: int = 10, seed: int = 0) -> CheckReport:
    """δ(pq) = δ(p)δ(q) on random products"""
    report = CheckReport(f"algebra-map:{H.letter}")
    rng = random.Random(seed)
    for k in range(samples):
        p, q = random_element(H, rng), random_element(H, rng)
        report.add(f"sample {k}", H.delta(p * q) == H.delta(p) * H.delta(q))
    return report


def epsilon_bialgebra_check(B: HopfPresentation, A: HopfPresentation) -> CheckReport:
    """(ε⊗ε)δ_B(h_n) = δ_A(ε(h_n))"""
    report = CheckReport('epsilon-bialgebra')
    eps = lambda p: epsilon_reduce(p, A)
    for n in range(B.count):
        left = B.coproduct(n).map_polynomials(0, eps, A.alphabet).map_polynomials(1, eps, A.alphabet)
        right = A.delta(eps(B.gen(n)))
        report.add(B.name(n), left == right, n)
    return report


def hopf_suite(cap: int) -> CheckReport:
    report = CheckReport('hopf')
    A, B = milnor(cap), faa_di_bruno(cap)
    for H in (A, B):
        for check in (coassociativity_check, counit_check, homogeneity_check, antipode_check, algebra_map_check):
            report.extend(check(H))
    report.extend(epsilon_bialgebra_check(B, A))
    report.extend(comodule_check(rp_infinity(A), cap))
    report.extend(comodule_check(rp_infinity(A).specialized(A.unit_leading), cap))
    report.extend(comodule_check(rp_infinity(B), cap))
    return report
