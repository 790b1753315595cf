"""
Exact arithmetic over the two-element field.

GradedPolynomial: multivariate Laurent polynomials on a graded alphabet (one
designated grade-0 variable may carry negative exponents). TensorElement:
sums of tuples of monomials over several alphabets. PowerSeries: series in a
few formal variables with polynomial coefficients, truncated at a total-degree
cap that is tracked through every operation.
"""

import logging
import operator
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from errors import (AlphabetMismatchError, CapExceededError, ConstantTermError,
                    LaurentBoundError, NegativeExponentError, NonInvertibleError)

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]


@dataclass(frozen=True)
class GradedAlphabet:
    names: Tuple[str, ...]
    grades: Tuple[int, ...]
    invertible: Optional[str] = None

    def __post_init__(self):
        if len(self.names) != len(self.grades):
            raise ValueError("names and grades differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        if any(g < 0 for g in self.grades):
            raise ValueError("grades must be non-negative")
        if self.invertible is not None:
            if self.invertible not in self.names:
                raise ValueError(f"invertible variable {self.invertible} not in alphabet")
            if self.grades[self.names.index(self.invertible)] != 0:
                raise ValueError("the invertible variable must have grade 0")

    @classmethod
    def build(cls, pairs: Iterable[Tuple[str, int]], invertible: Optional[str] = None) -> 'GradedAlphabet':
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), invertible)

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @cached_property
    def inv_index(self) -> Optional[int]:
        return None if self.invertible is None else self._positions[self.invertible]

    @property
    def size(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._positions

    def index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise AlphabetMismatchError(f"variable {name} not in alphabet") from None

    def grade_of(self, name: str) -> int:
        return self.grades[self.index(name)]

    def monomial_grade(self, exps: Monomial) -> int:
        return sum(e * g for e, g in zip(exps, self.grades) if e)

    def concat(self, other: 'GradedAlphabet') -> 'GradedAlphabet':
        if self.invertible and other.invertible:
            raise AlphabetMismatchError("both alphabets carry an invertible variable")
        return GradedAlphabet(self.names + other.names, self.grades + other.grades,
                              self.invertible or other.invertible)

    def unit_exponents(self) -> Monomial:
        return (0,) * len(self.names)


def _monomial_key(alphabet: GradedAlphabet, exps: Monomial):
    # graded, then lexicographic in declared variable order (higher power of an earlier variable first)
    return (alphabet.monomial_grade(exps), tuple(-e for e in exps))


def _monomial_text(alphabet: GradedAlphabet, exps: Monomial) -> str:
    parts = []
    for name, e in zip(alphabet.names, exps):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return '·'.join(parts) if parts else '1'


def _toggle(acc: set, item):
    if item in acc:
        acc.remove(item)
    else:
        acc.add(item)


class GradedPolynomial:
    __slots__ = ('alphabet', 'terms')

    def __init__(self, alphabet: GradedAlphabet, terms: Iterable[Sequence[int]] = ()):
        acc: set = set()
        n = alphabet.size
        inv = alphabet.inv_index
        for m in terms:
            m = tuple(int(e) for e in m)
            if len(m) != n:
                raise AlphabetMismatchError(f"monomial {m} does not fit alphabet of size {n}")
            for i, e in enumerate(m):
                if e < 0 and i != inv:
                    raise NegativeExponentError(
                        f"negative exponent on non-invertible variable {alphabet.names[i]}")
            _toggle(acc, m)
        self.alphabet = alphabet
        self.terms: FrozenSet[Monomial] = frozenset(acc)

    @classmethod
    def _make(cls, alphabet: GradedAlphabet, terms) -> 'GradedPolynomial':
        obj = cls.__new__(cls)
        obj.alphabet = alphabet
        obj.terms = terms if isinstance(terms, frozenset) else frozenset(terms)
        return obj

    # Constructors
    @classmethod
    def zero(cls, alphabet: GradedAlphabet) -> 'GradedPolynomial':
        return cls._make(alphabet, frozenset())

    @classmethod
    def one(cls, alphabet: GradedAlphabet) -> 'GradedPolynomial':
        return cls._make(alphabet, frozenset([alphabet.unit_exponents()]))

    @classmethod
    def constant(cls, alphabet: GradedAlphabet, value: int) -> 'GradedPolynomial':
        return cls.one(alphabet) if value % 2 else cls.zero(alphabet)

    @classmethod
    def var(cls, alphabet: GradedAlphabet, name: str, power: int = 1) -> 'GradedPolynomial':
        exps = [0] * alphabet.size
        exps[alphabet.index(name)] = power
        return cls(alphabet, [exps])

    @classmethod
    def monomial(cls, alphabet: GradedAlphabet, powers: Mapping[str, int]) -> 'GradedPolynomial':
        exps = [0] * alphabet.size
        for name, e in powers.items():
            exps[alphabet.index(name)] += e
        return cls(alphabet, [exps])

    # Arithmetic
    def _check(self, other: 'GradedPolynomial'):
        if other.alphabet is not self.alphabet and other.alphabet != self.alphabet:
            raise AlphabetMismatchError("polynomials live on different alphabets")

    def _coerce(self, other) -> 'GradedPolynomial':
        if isinstance(other, GradedPolynomial):
            self._check(other)
            return other
        if isinstance(other, int):
            return GradedPolynomial.constant(self.alphabet, other)
        return NotImplemented

    def __add__(self, other) -> 'GradedPolynomial':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GradedPolynomial._make(self.alphabet, self.terms ^ other.terms)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self) -> 'GradedPolynomial':
        return self

    def __mul__(self, other) -> 'GradedPolynomial':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GradedPolynomial._make(self.alphabet, _product_terms(self.terms, other.terms))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> 'GradedPolynomial':
        if n < 0:
            return self.inverse() ** (-n)
        result = GradedPolynomial.one(self.alphabet)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.square()
        return result

    def square(self) -> 'GradedPolynomial':
        # Frobenius: cross terms cancel in characteristic 2
        return GradedPolynomial._make(self.alphabet, frozenset(tuple(2 * e for e in m) for m in self.terms))

    def inverse(self) -> 'GradedPolynomial':
        if not self.is_unit():
            raise NonInvertibleError(f"{self.to_text()} is not a unit")
        (m,) = self.terms
        return GradedPolynomial._make(self.alphabet, frozenset([tuple(-e for e in m)]))

    # Predicates
    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.terms == GradedPolynomial.constant(self.alphabet, other).terms
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        return self.terms == other.terms and (self.alphabet is other.alphabet or self.alphabet == other.alphabet)

    def __hash__(self) -> int:
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == frozenset([self.alphabet.unit_exponents()])

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_unit(self) -> bool:
        if len(self.terms) != 1:
            return False
        (m,) = self.terms
        inv = self.alphabet.inv_index
        return all(e == 0 for i, e in enumerate(m) if i != inv)

    def grades(self) -> set:
        return {self.alphabet.monomial_grade(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def grade(self) -> Optional[int]:
        gs = self.grades()
        if len(gs) > 1:
            raise ValueError(f"{self.to_text()} is not homogeneous")
        return next(iter(gs)) if gs else None

    def min_exponent(self, name: str) -> int:
        i = self.alphabet.index(name)
        return min((m[i] for m in self.terms), default=0)

    def uses(self, name: str) -> bool:
        i = self.alphabet.index(name)
        return any(m[i] for m in self.terms)

    # Homomorphisms
    def substitute(self, images: Mapping[str, 'GradedPolynomial'],
                   target: Optional[GradedAlphabet] = None) -> 'GradedPolynomial':
        """Ring homomorphism sending each listed variable to its image; others keep their name"""
        target = target or self.alphabet
        source = self.alphabet
        per_var: List[Optional[GradedPolynomial]] = []
        for name in source.names:
            if name in images:
                image = images[name]
                if image.alphabet != target:
                    raise AlphabetMismatchError(f"image of {name} lives on another alphabet")
                per_var.append(image)
            else:
                per_var.append(GradedPolynomial.var(target, name))
        cache: Dict[Tuple[int, int], GradedPolynomial] = {}

        def power(i: int, e: int) -> GradedPolynomial:
            key = (i, e)
            if key not in cache:
                cache[key] = per_var[i] ** e
            return cache[key]

        acc: set = set()
        one = GradedPolynomial.one(target)
        for m in self.terms:
            value = one
            for i, e in enumerate(m):
                if e:
                    value = value * power(i, e)
                    if value.is_zero():
                        break
            acc ^= value.terms
        return GradedPolynomial._make(target, frozenset(acc))

    def evaluate(self, values: Mapping[str, int]) -> 'GradedPolynomial':
        """Specialize variables to 0 or 1 (evaluation homomorphism)"""
        idx = {self.alphabet.index(name): v % 2 for name, v in values.items()}
        acc: set = set()
        for m in self.terms:
            if any(m[i] and not v for i, v in idx.items()):
                continue
            _toggle(acc, tuple(0 if i in idx else e for i, e in enumerate(m)))
        return GradedPolynomial._make(self.alphabet, frozenset(acc))

    def embed(self, target: GradedAlphabet) -> 'GradedPolynomial':
        """Same polynomial on a larger alphabet, matched by variable name"""
        if target is self.alphabet:
            return self
        positions = [target.index(name) for name in self.alphabet.names]
        inv = self.alphabet.inv_index
        if inv is not None and target.inv_index != positions[inv] and self.min_exponent(self.alphabet.invertible) < 0:
            raise NegativeExponentError(f"{self.alphabet.invertible} is not invertible in the target")
        terms = set()
        size = target.size
        for m in self.terms:
            out = [0] * size
            for i, e in enumerate(m):
                out[positions[i]] = e
            terms.add(tuple(out))
        return GradedPolynomial._make(target, frozenset(terms))

    def restrict(self, target: GradedAlphabet) -> 'GradedPolynomial':
        """Drop to a sub-alphabet; every variable outside it must be absent"""
        positions = [self.alphabet.index(name) for name in target.names]
        keep = set(positions)
        terms = set()
        for m in self.terms:
            if any(e for i, e in enumerate(m) if i not in keep):
                raise AlphabetMismatchError(f"{self.to_text()} uses variables outside the target alphabet")
            terms.add(tuple(m[p] for p in positions))
        return GradedPolynomial._make(target, frozenset(terms))

    # Output
    def sorted_terms(self) -> List[Monomial]:
        return sorted(self.terms, key=lambda m: _monomial_key(self.alphabet, m))

    def to_text(self) -> str:
        if not self.terms:
            return '0'
        return ' + '.join(_monomial_text(self.alphabet, m) for m in self.sorted_terms())

    def to_json(self) -> List[Dict[str, int]]:
        return [{name: e for name, e in zip(self.alphabet.names, m) if e} for m in self.sorted_terms()]

    def __repr__(self) -> str:
        return f"GradedPolynomial({self.to_text()})"

    __str__ = to_text


def _product_terms(a: FrozenSet[Monomial], b: FrozenSet[Monomial]) -> FrozenSet[Monomial]:
    if len(a) > len(b):
        a, b = b, a
    acc: set = set()
    add = operator.add
    for ma in a:
        for mb in b:
            _toggle(acc, tuple(map(add, ma, mb)))
    return frozenset(acc)


def poly_arith(a: GradedPolynomial, b: GradedPolynomial, kind: str) -> GradedPolynomial:
    if a.alphabet != b.alphabet:
        raise AlphabetMismatchError("poly_arith needs a common alphabet")
    if kind == 'add':
        return a + b
    if kind == 'mul':
        return a * b
    raise ValueError(f"unknown kind {kind}")


class TensorElement:
    """Element of a tensor product of graded polynomial rings"""
    __slots__ = ('alphabets', 'terms')

    def __init__(self, alphabets: Sequence[GradedAlphabet], terms: Iterable[Tuple[Monomial, ...]] = ()):
        acc: set = set()
        for t in terms:
            _toggle(acc, tuple(tuple(m) for m in t))
        self.alphabets = tuple(alphabets)
        self.terms: FrozenSet[Tuple[Monomial, ...]] = frozenset(acc)

    @classmethod
    def _make(cls, alphabets, terms) -> 'TensorElement':
        obj = cls.__new__(cls)
        obj.alphabets = tuple(alphabets)
        obj.terms = terms if isinstance(terms, frozenset) else frozenset(terms)
        return obj

    @classmethod
    def zero(cls, alphabets: Sequence[GradedAlphabet]) -> 'TensorElement':
        return cls._make(alphabets, frozenset())

    @classmethod
    def one(cls, alphabets: Sequence[GradedAlphabet]) -> 'TensorElement':
        return cls._make(alphabets, frozenset([tuple(a.unit_exponents() for a in alphabets)]))

    @classmethod
    def pure(cls, *factors: GradedPolynomial) -> 'TensorElement':
        """factors[0] ⊗ factors[1] ⊗ ..."""
        alphabets = tuple(f.alphabet for f in factors)
        combos = [()]
        for f in factors:
            combos = [c + (m,) for c in combos for m in f.terms]
        return cls(alphabets, combos)

    @classmethod
    def split(cls, poly: GradedPolynomial, alphabets: Sequence[GradedAlphabet]) -> 'TensorElement':
        """Read a polynomial on a concatenated alphabet as a tensor over its parts"""
        positions = [[poly.alphabet.index(n) for n in a.names] for a in alphabets]
        covered = {p for ps in positions for p in ps}
        terms = set()
        for m in poly.terms:
            if any(e for i, e in enumerate(m) if i not in covered):
                raise AlphabetMismatchError("polynomial uses variables outside the tensor factors")
            terms.add(tuple(tuple(m[p] for p in ps) for ps in positions))
        return cls._make(alphabets, frozenset(terms))

    def _check(self, other: 'TensorElement'):
        if self.alphabets != other.alphabets:
            raise AlphabetMismatchError("tensor elements over different factors")

    def __add__(self, other: 'TensorElement') -> 'TensorElement':
        self._check(other)
        return TensorElement._make(self.alphabets, self.terms ^ other.terms)

    __sub__ = __add__

    def __mul__(self, other: 'TensorElement') -> 'TensorElement':
        self._check(other)
        acc: set = set()
        add = operator.add
        for a in self.terms:
            for b in other.terms:
                _toggle(acc, tuple(tuple(map(add, ma, mb)) for ma, mb in zip(a, b)))
        return TensorElement._make(self.alphabets, frozenset(acc))

    def __pow__(self, n: int) -> 'TensorElement':
        if n < 0:
            return self.inverse() ** (-n)
        result = TensorElement.one(self.alphabets)
        for _ in range(n):
            result = result * self
        return result

    def inverse(self) -> 'TensorElement':
        if len(self.terms) != 1:
            raise NonInvertibleError(f"{self.to_text()} is not a unit")
        (t,) = self.terms
        for alphabet, m in zip(self.alphabets, t):
            if any(e for i, e in enumerate(m) if i != alphabet.inv_index):
                raise NonInvertibleError(f"{self.to_text()} is not a unit")
        return TensorElement._make(self.alphabets, frozenset([tuple(tuple(-e for e in m) for m in t)]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.terms == other.terms and self.alphabets == other.alphabets

    def __hash__(self) -> int:
        return hash(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def apply_factor(self, k: int, hom: Callable[[GradedPolynomial], 'TensorElement'],
                     target: Optional[Sequence[GradedAlphabet]] = None) -> 'TensorElement':
        """Replace factor k by the tensor hom(factor); hom must be additive, and is applied monomialwise.

        hom is only ever called on single monomials. `target` names the factors hom
        produces, which fixes the alphabets of a zero result; without it the image of
        zero keeps factor k as it was.
        """
        cache: Dict[Monomial, TensorElement] = {}
        acc: set = set()
        out_alphabets = None
        if target is not None:
            out_alphabets = self.alphabets[:k] + tuple(target) + self.alphabets[k + 1:]
        for t in self.terms:
            m = t[k]
            if m not in cache:
                cache[m] = hom(GradedPolynomial._make(self.alphabets[k], frozenset([m])))
            image = cache[m]
            if out_alphabets is None:
                out_alphabets = self.alphabets[:k] + image.alphabets + self.alphabets[k + 1:]
            for it in image.terms:
                _toggle(acc, t[:k] + it + t[k + 1:])
        if out_alphabets is None:
            out_alphabets = self.alphabets
        return TensorElement._make(out_alphabets, frozenset(acc))

    def map_polynomials(self, k: int, fn: Callable[[GradedPolynomial], GradedPolynomial],
                        target: Optional[GradedAlphabet] = None) -> 'TensorElement':
        """Apply a polynomial map (e.g. a specialization) to factor k, landing in `target`"""
        def hom(p: GradedPolynomial) -> TensorElement:
            return TensorElement.pure(fn(p))
        return self.apply_factor(k, hom, None if target is None else (target,))

    def coefficients(self, k: int) -> Dict[Tuple[Monomial, ...], GradedPolynomial]:
        """Group by every factor except k; values are the factor-k polynomials"""
        groups: Dict[Tuple[Monomial, ...], set] = {}
        for t in self.terms:
            key = t[:k] + t[k + 1:]
            groups.setdefault(key, set()).add(t[k])
        return {key: GradedPolynomial._make(self.alphabets[k], frozenset(ms)) for key, ms in groups.items()}

    def term_grades(self) -> set:
        return {sum(a.monomial_grade(m) for a, m in zip(self.alphabets, t)) for t in self.terms}

    def sorted_terms(self) -> List[Tuple[Monomial, ...]]:
        return sorted(self.terms, key=lambda t: tuple(_monomial_key(a, m) for a, m in zip(self.alphabets, t)))

    def to_text(self) -> str:
        if not self.terms:
            return '0'
        return ' + '.join('⊗'.join(_monomial_text(a, m) for a, m in zip(self.alphabets, t))
                          for t in self.sorted_terms())

    def to_json(self) -> List[List[Dict[str, int]]]:
        return [[{n: e for n, e in zip(a.names, m) if e} for a, m in zip(self.alphabets, t)]
                for t in self.sorted_terms()]

    def __repr__(self) -> str:
        return f"TensorElement({self.to_text()})"


def check_laurent(poly: GradedPolynomial, cap: int):
    inv = poly.alphabet.invertible
    if inv is not None and poly.terms and poly.min_exponent(inv) < -4 * cap:
        raise LaurentBoundError(f"exponent of {inv} below {-4 * cap}")


class PowerSeries:
    """Truncated series; coefficients with total degree above `cap` are unknown"""
    __slots__ = ('alphabet', 'variables', 'coeffs', 'cap')

    def __init__(self, alphabet: GradedAlphabet, variables: Sequence[str],
                 coeffs: Mapping[Sequence[int], GradedPolynomial], cap: int):
        variables = tuple(variables)
        clean: Dict[Monomial, GradedPolynomial] = {}
        for exps, c in coeffs.items():
            exps = tuple(exps)
            if len(exps) != len(variables) or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps} for variables {variables}")
            if c.alphabet != alphabet:
                raise AlphabetMismatchError("coefficient on a foreign alphabet")
            if sum(exps) > cap or c.is_zero():
                continue
            check_laurent(c, cap)
            clean[exps] = clean[exps] + c if exps in clean else c
        self.alphabet = alphabet
        self.variables = variables
        self.coeffs = {e: c for e, c in clean.items() if not c.is_zero()}
        self.cap = cap

    @classmethod
    def _make(cls, alphabet, variables, coeffs, cap) -> 'PowerSeries':
        obj = cls.__new__(cls)
        obj.alphabet = alphabet
        obj.variables = variables
        obj.coeffs = coeffs
        obj.cap = cap
        return obj

    @classmethod
    def _from_sets(cls, alphabet, variables, acc: Dict[Monomial, set], cap) -> 'PowerSeries':
        coeffs = {e: GradedPolynomial._make(alphabet, frozenset(ts)) for e, ts in acc.items() if ts and sum(e) <= cap}
        return cls._make(alphabet, variables, coeffs, cap)

    # Constructors
    @classmethod
    def zero(cls, alphabet: GradedAlphabet, variables: Sequence[str], cap: int) -> 'PowerSeries':
        return cls._make(alphabet, tuple(variables), {}, cap)

    @classmethod
    def constant(cls, poly: GradedPolynomial, variables: Sequence[str], cap: int) -> 'PowerSeries':
        variables = tuple(variables)
        coeffs = {} if poly.is_zero() or cap < 0 else {(0,) * len(variables): poly}
        return cls._make(poly.alphabet, variables, coeffs, cap)

    @classmethod
    def one(cls, alphabet: GradedAlphabet, variables: Sequence[str], cap: int) -> 'PowerSeries':
        return cls.constant(GradedPolynomial.one(alphabet), variables, cap)

    @classmethod
    def variable(cls, alphabet: GradedAlphabet, variables: Sequence[str], name: str, cap: int) -> 'PowerSeries':
        variables = tuple(variables)
        exps = tuple(1 if v == name else 0 for v in variables)
        if name not in variables:
            raise ValueError(f"{name} is not one of {variables}")
        coeffs = {exps: GradedPolynomial.one(alphabet)} if cap >= 1 else {}
        return cls._make(alphabet, variables, coeffs, cap)

    @classmethod
    def from_univariate(cls, poly_coeffs: Mapping[int, GradedPolynomial], alphabet: GradedAlphabet,
                        var: str, cap: int) -> 'PowerSeries':
        return cls(alphabet, (var,), {(k,): c for k, c in poly_coeffs.items()}, cap)

    # Basic queries
    def order(self) -> int:
        return min((sum(e) for e in self.coeffs), default=self.cap + 1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, exps) -> GradedPolynomial:
        if isinstance(exps, int):
            exps = (exps,)
        exps = tuple(exps)
        if sum(exps) > self.cap:
            raise CapExceededError(f"coefficient {exps} beyond cap {self.cap}")
        return self.coeffs.get(exps, GradedPolynomial.zero(self.alphabet))

    def constant_term(self) -> GradedPolynomial:
        return self.coefficient((0,) * len(self.variables))

    def items(self) -> List[Tuple[Monomial, GradedPolynomial]]:
        return sorted(self.coeffs.items())

    def _check(self, other: 'PowerSeries'):
        if other.variables != self.variables:
            raise AlphabetMismatchError(f"series in {self.variables} vs {other.variables}")
        if other.alphabet is not self.alphabet and other.alphabet != self.alphabet:
            raise AlphabetMismatchError("series coefficients on different alphabets")

    def truncate(self, cap: int) -> 'PowerSeries':
        cap = min(cap, self.cap)
        return PowerSeries._make(self.alphabet, self.variables,
                                 {e: c for e, c in self.coeffs.items() if sum(e) <= cap}, cap)

    # Arithmetic
    def __add__(self, other) -> 'PowerSeries':
        if isinstance(other, GradedPolynomial):
            other = PowerSeries.constant(other, self.variables, self.cap)
        self._check(other)
        cap = min(self.cap, other.cap)
        coeffs = {e: c for e, c in self.coeffs.items() if sum(e) <= cap}
        for e, c in other.coeffs.items():
            if sum(e) > cap:
                continue
            if e in coeffs:
                s = coeffs[e] + c
                if s.is_zero():
                    del coeffs[e]
                else:
                    coeffs[e] = s
            else:
                coeffs[e] = c
        return PowerSeries._make(self.alphabet, self.variables, coeffs, cap)

    __sub__ = __add__
    __radd__ = __add__

    def scale(self, poly: GradedPolynomial) -> 'PowerSeries':
        if poly.alphabet != self.alphabet:
            raise AlphabetMismatchError("scalar on a foreign alphabet")
        coeffs = {}
        for e, c in self.coeffs.items():
            p = c * poly
            if not p.is_zero():
                coeffs[e] = p
        return PowerSeries._make(self.alphabet, self.variables, coeffs, self.cap)

    def __mul__(self, other) -> 'PowerSeries':
        if isinstance(other, GradedPolynomial):
            return self.scale(other)
        if isinstance(other, int):
            return self if other % 2 else PowerSeries.zero(self.alphabet, self.variables, self.cap)
        self._check(other)
        cap = min(self.cap + other.order(), other.cap + self.order(), max(self.cap, other.cap))
        acc: Dict[Monomial, set] = {}
        add = operator.add
        for ea, ca in self.coeffs.items():
            da = sum(ea)
            for eb, cb in other.coeffs.items():
                if da + sum(eb) > cap:
                    continue
                e = tuple(map(add, ea, eb))
                bucket = acc.setdefault(e, set())
                bucket ^= _product_terms(ca.terms, cb.terms)
        return PowerSeries._from_sets(self.alphabet, self.variables, acc, cap)

    __rmul__ = __mul__

    def square(self) -> 'PowerSeries':
        cap = min(self.cap + self.order(), self.cap)
        coeffs = {}
        for e, c in self.coeffs.items():
            e2 = tuple(2 * x for x in e)
            if sum(e2) <= cap:
                coeffs[e2] = c.square()
        return PowerSeries._make(self.alphabet, self.variables, coeffs, cap)

    def __pow__(self, n: int) -> 'PowerSeries':
        if n < 0:
            return self.inverse() ** (-n)
        result = PowerSeries.one(self.alphabet, self.variables, self.cap)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.square()
        return result

    def inverse(self) -> 'PowerSeries':
        c0 = self.constant_term()
        if not c0.is_unit():
            raise NonInvertibleError(f"constant term {c0.to_text()} is not a unit")
        c0_inv = c0.inverse()
        zero_exps = (0,) * len(self.variables)
        rest = PowerSeries._make(self.alphabet, self.variables,
                                 {e: c * c0_inv for e, c in self.coeffs.items() if e != zero_exps}, self.cap)
        # (1 + r)^-1 = 1 + r + r^2 + ... in characteristic 2
        total = PowerSeries.one(self.alphabet, self.variables, self.cap)
        term = total
        for _ in range(self.cap):
            term = term * rest
            if term.is_zero():
                break
            total = total + term
        result = total.scale(c0_inv)
        for c in result.coeffs.values():
            check_laurent(c, self.cap)
        return result

    # Substitution
    def substitute(self, images: Mapping[str, 'PowerSeries'],
                   variables: Optional[Sequence[str]] = None) -> 'PowerSeries':
        """Replace formal variables by series (zero constant term) in the target variables"""
        variables = tuple(variables) if variables is not None else self.variables
        per_var = []
        for v in self.variables:
            if v in images:
                img = images[v]
                if img.variables != variables:
                    raise AlphabetMismatchError(f"image of {v} is in {img.variables}, expected {variables}")
                if img.alphabet != self.alphabet:
                    raise AlphabetMismatchError("image series on a foreign alphabet")
                if not img.constant_term().is_zero():
                    raise ConstantTermError(f"image of {v} has a nonzero constant term")
                per_var.append(img)
            else:
                per_var.append(PowerSeries.variable(self.alphabet, variables, v, self.cap))
        min_order = min((img.order() for img in per_var), default=1)
        # unknown terms of self (total degree > cap) land at order >= (cap + 1) * min_order
        limit = (self.cap + 1) * max(min_order, 1) - 1
        cap_bound = max(img.cap for img in per_var) if per_var else self.cap
        cap_bound = min(cap_bound, limit)
        powers: Dict[Tuple[int, int], PowerSeries] = {}

        def power(i: int, e: int) -> PowerSeries:
            key = (i, e)
            if key not in powers:
                powers[key] = per_var[i] if e == 1 else power(i, e - 1) * per_var[i]
            return powers[key]

        result = PowerSeries.zero(self.alphabet, variables, cap_bound)
        for exps, c in self.items():
            term = PowerSeries.constant(c, variables, cap_bound)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result.truncate(cap_bound)

    def map_coefficients(self, fn: Callable[[GradedPolynomial], GradedPolynomial],
                         alphabet: Optional[GradedAlphabet] = None) -> 'PowerSeries':
        alphabet = alphabet or self.alphabet
        coeffs = {}
        for e, c in self.coeffs.items():
            p = fn(c)
            if p.alphabet != alphabet:
                raise AlphabetMismatchError("mapped coefficient on an unexpected alphabet")
            if not p.is_zero():
                coeffs[e] = p
        return PowerSeries._make(alphabet, self.variables, coeffs, self.cap)

    def with_variables(self, variables: Sequence[str]) -> 'PowerSeries':
        """View this series inside a superset of formal variables"""
        variables = tuple(variables)
        positions = [variables.index(v) for v in self.variables]
        coeffs = {}
        for e, c in self.coeffs.items():
            out = [0] * len(variables)
            for p, x in zip(positions, e):
                out[p] = x
            coeffs[tuple(out)] = c
        return PowerSeries._make(self.alphabet, variables, coeffs, self.cap)

    def rename(self, mapping: Mapping[str, str]) -> 'PowerSeries':
        return PowerSeries._make(self.alphabet, tuple(mapping.get(v, v) for v in self.variables),
                                 dict(self.coeffs), self.cap)

    def coefficient_series(self, var: str, power: int) -> 'PowerSeries':
        """Coefficient of var^power, as a series in the remaining variables"""
        k = self.variables.index(var)
        if power > self.cap:
            raise CapExceededError(f"{var}^{power} beyond cap {self.cap}")
        rest = self.variables[:k] + self.variables[k + 1:]
        coeffs = {e[:k] + e[k + 1:]: c for e, c in self.coeffs.items() if e[k] == power}
        return PowerSeries._make(self.alphabet, rest, coeffs, self.cap - power)

    def at_zero(self, var: str) -> 'PowerSeries':
        return self.coefficient_series(var, 0)

    def shift_down(self, var: str, k: int) -> Tuple['PowerSeries', 'PowerSeries']:
        """Exact division by var^k: returns (quotient, part of degree < k in var)"""
        i = self.variables.index(var)
        quotient, remainder = {}, {}
        for e, c in self.coeffs.items():
            if e[i] >= k:
                quotient[e[:i] + (e[i] - k,) + e[i + 1:]] = c
            else:
                remainder[e] = c
        return (PowerSeries._make(self.alphabet, self.variables, quotient, self.cap - k),
                PowerSeries._make(self.alphabet, self.variables, remainder, self.cap))

    def valuation(self, var: str) -> int:
        i = self.variables.index(var)
        return min((e[i] for e in self.coeffs), default=self.cap + 1)

    # Comparison and output
    def agrees_with(self, other: 'PowerSeries', upto: Optional[int] = None) -> bool:
        self._check(other)
        cap = min(self.cap, other.cap)
        if upto is not None:
            cap = min(cap, upto)
        keys = {e for e in self.coeffs if sum(e) <= cap} | {e for e in other.coeffs if sum(e) <= cap}
        return all(self.coeffs.get(e) == other.coeffs.get(e) for e in keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self.agrees_with(other)

    __hash__ = None

    def differences(self, other: 'PowerSeries', upto: Optional[int] = None) -> List[Monomial]:
        cap = min(self.cap, other.cap, upto if upto is not None else self.cap)
        keys = {e for e in self.coeffs if sum(e) <= cap} | {e for e in other.coeffs if sum(e) <= cap}
        return sorted(e for e in keys if self.coeffs.get(e) != other.coeffs.get(e))

    def swap(self, a: str, b: str) -> 'PowerSeries':
        return self.rename({a: b, b: a}).reorder(self.variables)

    def reorder(self, variables: Sequence[str]) -> 'PowerSeries':
        variables = tuple(variables)
        positions = [self.variables.index(v) for v in variables]
        coeffs = {tuple(e[p] for p in positions): c for e, c in self.coeffs.items()}
        return PowerSeries._make(self.alphabet, variables, coeffs, self.cap)

    def is_homogeneous(self, variable_grades: Optional[Mapping[str, int]] = None) -> bool:
        grades = variable_grades or {v: 1 for v in self.variables}
        seen = set()
        for e, c in self.coeffs.items():
            shift = sum(x * grades[v] for x, v in zip(e, self.variables))
            seen |= {g + shift for g in c.grades()}
        return len(seen) <= 1

    def to_text(self) -> str:
        parts = []
        for e, c in sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            mono = '·'.join(v if x == 1 else f"{v}^{x}" for v, x in zip(self.variables, e) if x)
            body = c.to_text()
            if len(c.terms) > 1:
                body = f"({body})"
            parts.append(body if not mono else (mono if c.is_one() else f"{body}·{mono}"))
        return (' + '.join(parts) if parts else '0') + f" + O({self.cap + 1})"

    def to_json(self) -> List[list]:
        return [[list(e) if len(e) > 1 else e[0], c.to_text()] for e, c in sorted(self.coeffs.items())]

    def __repr__(self) -> str:
        return f"PowerSeries({self.to_text()})"


def series_compose(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """f(g(x)); g is applied first"""
    if len(f.variables) != 1 or f.variables != g.variables:
        raise AlphabetMismatchError("series_compose needs univariate series in the same variable")
    if not g.constant_term().is_zero():
        raise ConstantTermError("inner series has a nonzero constant term")
    return f.substitute({f.variables[0]: g})


def series_comp_inverse(f: PowerSeries) -> PowerSeries:
    """Compositional inverse of c·x + O(x^2), solved one degree at a time"""
    if len(f.variables) != 1:
        raise AlphabetMismatchError("compositional inverse needs a univariate series")
    (x,) = f.variables
    if not f.constant_term().is_zero():
        raise ConstantTermError("series has a nonzero constant term")
    lead = f.coefficient(1)
    if not lead.is_unit():
        raise NonInvertibleError(f"leading coefficient {lead.to_text()} is not invertible")
    lead_inv = lead.inverse()
    coeffs: Dict[int, GradedPolynomial] = {1: lead_inv}
    for n in range(2, f.cap + 1):
        partial = PowerSeries.from_univariate(coeffs, f.alphabet, x, n)
        known = f.truncate(n).substitute({x: partial})
        c = known.coefficient(n) * lead_inv
        check_laurent(c, f.cap)
        if not c.is_zero():
            coeffs[n] = c
    return PowerSeries.from_univariate(coeffs, f.alphabet, x, f.cap)


def express_in_invariant(F: PowerSeries, q: PowerSeries, exponents: Sequence[int],
                         x: Optional[str] = None) -> Tuple[List[PowerSeries], PowerSeries]:
    """
    Write F(x, t) as sum_k c_k(t) q(x, t)^(e_k), working up from the lowest power of x.

    The x^e coefficient of q^e is q_1(t)^e, where q_1 = t^v * unit; c_k is that
    coefficient of the running remainder divided by q_1^e. Parts that are not
    divisible, or x-powers outside the exponent list, stay in the residual.
    Entries whose exponent lies beyond the cap come back as series with a
    negative cap (nothing known).
    """
    x = x or F.variables[0]
    if q.variables != F.variables or len(F.variables) != 2:
        raise AlphabetMismatchError("express_in_invariant needs F and q in the same two variables")
    if any(list(exps)[F.variables.index(x)] == 0 for exps in q.coeffs):
        raise ConstantTermError("q must have x-order at least 1")
    if list(exponents) != sorted(set(exponents)):
        raise ValueError("exponents must be strictly increasing")
    (t,) = [v for v in F.variables if v != x]
    q1 = q.coefficient_series(x, 1)
    v = q1.valuation(t)
    unit, _ = q1.shift_down(t, v)
    unit_inv = unit.inverse()

    remaining = F
    coefficients: List[PowerSeries] = []
    q_power = PowerSeries.one(F.alphabet, F.variables, q.cap)
    current = 0
    for e in exponents:
        if e > remaining.cap:
            coefficients.append(PowerSeries.zero(F.alphabet, (t,), remaining.cap - e * (1 + v)))
            continue
        column = remaining.coefficient_series(x, e)
        quotient, _ = column.shift_down(t, v * e)
        c = quotient * unit_inv ** e
        coefficients.append(c)
        if c.is_zero():
            continue
        while current < e:
            q_power = q_power * q
            current += 1
        remaining = remaining - c.with_variables(F.variables) * q_power
        logger.debug(f"solved exponent {e}: {c.to_text()}")
    return coefficients, remaining
