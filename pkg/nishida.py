"""
Nishida squares: coactions on free Q-/D-rings and their compatibility with the operations.

A coaction given on generators extends to words by the square itself:
α(Q_t(a)) with α(t) = ξ(t) must equal Q_t(α(a)) in the tensor structure, so α(Q_i a)
is the u^i coefficient of Q_t(α(a)) after t = ξ^(-1)(u). Products extend
multiplicatively. The Thom reduction T(M) = M ⊗_N F2 carries a D-side coaction over
to a Q-side one through ε(h) = ξ.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import gf2
from errors import ActionNotClosedError, UnregisteredElementError
from f2series import GradedAlphabet, GradedPolynomial, PowerSeries, TensorElement
from fgl import LazardModel, ln_coaction, model_for
from hopf import (Coaction, HopfPresentation, MultiplicativeCoaction, comodule_check,
                  epsilon_reduce, faa_di_bruno, milnor, rp_infinity)
from dring import build_free_dring, scalar_dstructure, solve_tensor_dstructure
from qring import (FreeOperationRing, QRingSpec, build_free_qring, solved_qstructure,
                   tensor_qstructure)
from report import CheckReport

logger = logging.getLogger(__name__)

HOMOLOGY = 'homology'
BORDISM = 'bordism'


def tensor_to_poly(element: TensorElement, target: GradedAlphabet) -> GradedPolynomial:
    """Multiply the factors of each term out inside a concatenated alphabet"""
    terms = set()
    for term in element.terms:
        exps = [0] * target.size
        for alphabet, mono in zip(element.alphabets, term):
            for name, e in zip(alphabet.names, mono):
                if e:
                    exps[target.index(name)] += e
        terms ^= {tuple(exps)}
    return GradedPolynomial._make(target, frozenset(terms))


class FreeRingCoaction(Coaction):
    """The coaction on a free ring determined by its generator values and the Nishida square"""

    def __init__(self, free: FreeOperationRing, tensor: QRingSpec, hopf: HopfPresentation,
                 generator_values: Mapping[str, GradedPolynomial],
                 scalar_coaction: Optional[MultiplicativeCoaction] = None, name: Optional[str] = None):
        super().__init__(hopf, free.alphabet, name=name or f"{free.name}/{hopf.letter}")
        self.free = free
        self.tensor = tensor
        self.scalar_coaction = scalar_coaction
        self.generator_values = {gen: v for gen, v in generator_values.items()}
        for gen, v in self.generator_values.items():
            if v.alphabet != tensor.alphabet:
                raise UnregisteredElementError(f"value of {gen} is not in {hopf.letter} ⊗ {free.name}")
        lift = lambda p: p.embed(tensor.alphabet)
        # t = g^(-1)(u)
        self.inverse_u = hopf.inverse_series.map_coefficients(lift, tensor.alphabet).rename({hopf.x: 'u'})
        self._word_values: Dict[int, GradedPolynomial] = {}

    def basis(self, degree: int) -> List[GradedPolynomial]:
        out = []
        for w in range(1, self.free.maxweight + 1):
            out.extend(self.free.basis(degree, w))
        return out

    def reexpand(self, series: PowerSeries) -> PowerSeries:
        """A series in t rewritten in u = g(t)"""
        return series.substitute({'t': self.inverse_u}, ('u',))

    def word_value(self, pos: int) -> GradedPolynomial:
        if pos not in self._word_values:
            word = self.free.words[pos]
            if not word.indices:
                if word.gen not in self.generator_values:
                    raise UnregisteredElementError(f"no coaction value for generator {word.gen}")
                value = self.generator_values[word.gen]
            else:
                inner = self.free.word_index[(word.gen, word.indices[1:])]
                expanded = self.reexpand(self.tensor.qt_eval(self.word_value(inner)))
                value = self.tensor.normalize(expanded.coefficient(word.indices[0]))
            self._word_values[pos] = value
            self.logger.debug(f"coaction on {word.name(self.free.op)}: {value.to_text()}")
        return self._word_values[pos]

    def _scalar_value(self, scalar: GradedPolynomial) -> GradedPolynomial:
        target = self.tensor.alphabet
        if scalar.is_one():
            return GradedPolynomial.one(target)
        if self.scalar_coaction is None:
            raise UnregisteredElementError("element has scalars but no coaction on them was given")
        return tensor_to_poly(self.scalar_coaction.coact(scalar), target)

    def combined(self, p: GradedPolynomial) -> GradedPolynomial:
        """α(p) as a polynomial on the concatenated alphabet H ⊗ R"""
        split = self.free.split
        # scalars coact as whole elements of the Lazard ring, one per word monomial
        by_words: Dict[tuple, set] = {}
        for m in p.terms:
            by_words.setdefault(m[split:], set()).add(m[:split])
        total = GradedPolynomial.zero(self.tensor.alphabet)
        for words, scalars in by_words.items():
            term = self._scalar_value(GradedPolynomial._make(self.free.scalar_alphabet, frozenset(scalars)))
            for pos, e in enumerate(words):
                if e:
                    term = term * self.word_value(pos) ** e
            total = total + term
        return self.tensor.normalize(total)

    def _coact(self, p: GradedPolynomial) -> TensorElement:
        return TensorElement.split(self.combined(p), (self.hopf.alphabet, self.free.alphabet))


def extend_coaction(free: FreeOperationRing, tensor: QRingSpec, hopf: HopfPresentation,
                    generator_values: Mapping[str, GradedPolynomial],
                    scalar_coaction: Optional[MultiplicativeCoaction] = None) -> FreeRingCoaction:
    return FreeRingCoaction(free, tensor, hopf, generator_values, scalar_coaction)


@dataclass
class NishidaSquare:
    side: str
    free: FreeOperationRing
    spec: QRingSpec
    tensor: QRingSpec
    hopf: HopfPresentation
    coaction: FreeRingCoaction
    model: Optional[LazardModel] = None
    notes: List[str] = field(default_factory=list)
    solved: Optional[CheckReport] = None

    def t_series(self) -> PowerSeries:
        """α(t) = g(t)"""
        lift = lambda p: p.embed(self.tensor.alphabet)
        return self.hopf.series.map_coefficients(lift, self.tensor.alphabet).rename({self.hopf.x: 't'})


def build_square(side: str, maxdeg: int, maxweight: int, fgl_kind: str = 'additive') -> NishidaSquare:
    """
    Q⟨x⟩ with α(x) = x over the Milnor algebra, or D⟨x⟩ with φ(x) = x.

    The additive law is only invariant under additive power series, so its bordism
    square coacts over the Milnor algebra; the universal law coacts over Faa di Bruno
    with D_t on the scalars derived from the Lazard coaction.
    """
    cap = maxdeg + 2
    solved = None
    if side == HOMOLOGY:
        free = build_free_qring([('x', 0, 1)], maxdeg, maxweight)
        spec = free.as_operation_spec()
        hopf = milnor(cap)
        tensor = tensor_qstructure(spec, solved_qstructure('A', cap))
        scalars = None
        model = None
        notes = []
    elif side == BORDISM:
        model = model_for(fgl_kind, cap)
        free = build_free_dring([('x', 0, 1)], model, maxdeg, maxweight)
        spec = free.as_operation_spec()
        if model.additive:
            hopf = milnor(cap)
            scalars = None
        else:
            hopf = faa_di_bruno(cap)
            derived_scalars, derived = scalar_dstructure(model)
            spec = spec.with_scalars(derived_scalars)
            scalars = ln_coaction(model, hopf)
        tensor, solved = solve_tensor_dstructure(spec, H=hopf)
        if not model.additive:
            solved.extend(derived)
        notes = list(solved.notes)
    else:
        raise ValueError(f"unknown side {side!r}")
    x = GradedPolynomial.var(tensor.alphabet, 'x')
    coaction = extend_coaction(free, tensor, hopf, {'x': x}, scalars)
    return NishidaSquare(side, free, spec, tensor, hopf, coaction, model, notes, solved)


def nishida_square_check(sq: NishidaSquare, elements: Sequence[GradedPolynomial], maxdeg: int) -> CheckReport:
    """Operate-then-coact against coact-then-operate, with α(t) = g(t)"""
    report = CheckReport(f"nishida:{sq.side}:{sq.free.name}")
    g_t = sq.t_series()
    for a in elements:
        label = a.to_text()
        degree = max(a.grades(), default=0)
        try:
            ops = sq.spec.qt_eval(a)
            right = sq.tensor.qt_eval(sq.coaction.combined(a))
        except UnregisteredElementError as e:
            report.add(label, False, degree, detail=str(e))
            continue
        top = min(ops.cap, right.cap, maxdeg)
        if top < 0:
            report.add(label, False, degree, detail='no coefficient of either side is known')
            continue
        left = PowerSeries.zero(sq.tensor.alphabet, ('t',), top)
        for i in range(top + 1):
            image = sq.coaction.combined(ops.coefficient(i))
            if image.is_zero():
                continue
            left = left + PowerSeries.constant(image, ('t',), top) * g_t ** i
        left = left.truncate(top).map_coefficients(sq.tensor.normalize)
        ok = left.agrees_with(right, top)
        report.add(label, ok, degree, detail='' if ok else f"differs at {left.differences(right, top)[:3]}")
    return report


def square_elements(sq: NishidaSquare, maxdeg: int) -> List[GradedPolynomial]:
    """Basis elements on which Q_t is tabulated: weight at most half the truncation"""
    out = [sq.free.one()]
    for w in range(1, sq.free.maxweight // 2 + 1):
        for d in range(maxdeg + 1):
            out.extend(sq.free.basis(d, w))
    return out


def coaction_consistency(coaction: FreeRingCoaction, free: Optional[FreeOperationRing] = None,
                         maxdeg: Optional[int] = None) -> CheckReport:
    """Every extracted relation coacts to zero, so rewriting before or after coacting agrees"""
    free = free or coaction.free
    report = CheckReport(f"consistency:{coaction.name}")
    for (d, w), comp in sorted(free.components.items()):
        if not comp.rows or (maxdeg is not None and d > maxdeg):
            continue
        try:
            ok = all(coaction.coact(free._poly(row)).is_zero() for row in comp.rows)
        except UnregisteredElementError as e:
            report.add(f"relations ({d},{w})", False, d, detail=str(e))
            continue
        report.add(f"relations ({d},{w})", ok, d)
    return report


# Thom reduction

@dataclass
class CoactedModule:
    """A module over the Lazard model presented degreewise, with a coaction over Faa di Bruno"""
    name: str
    carrier: GradedAlphabet
    coaction: Coaction
    spanning: Callable[[int], List[GradedPolynomial]]
    scalar_multiples: Callable[[int], List[GradedPolynomial]]
    maxdeg: int
    normal_form: Optional[Callable[[GradedPolynomial], GradedPolynomial]] = None


def lazard_module(model: LazardModel, maxdeg: Optional[int] = None) -> CoactedModule:
    maxdeg = min(model.cap - 1, maxdeg if maxdeg is not None else model.cap - 1)

    def multiples(d: int) -> List[GradedPolynomial]:
        return [s * b for j in range(1, d + 1) for s in model.basis(j) for b in model.basis(d - j)]

    return CoactedModule(f"N⋆/{model.fgl.name}", model.alphabet, ln_coaction(model), model.basis, multiples, maxdeg)


def trivial_module(B: HopfPresentation, maxdeg: Optional[int] = None) -> CoactedModule:
    """RP∞ with positive-degree scalars acting by zero"""
    coaction = rp_infinity(B)
    return CoactedModule(f"RP∞/{B.letter}", coaction.carrier, coaction, coaction.basis,
                         lambda d: [], min(B.cap, maxdeg if maxdeg is not None else B.cap))


def free_dring_module(sq: NishidaSquare, model: LazardModel, weight: int,
                      maxdeg: Optional[int] = None) -> CoactedModule:
    free = sq.free

    def lift(s: GradedPolynomial) -> GradedPolynomial:
        return s.embed(free.alphabet)

    def multiples(d: int) -> List[GradedPolynomial]:
        return [free.normal_form(lift(s) * b) for j in range(1, d + 1)
                for s in model.basis(j) for b in free.basis(d - j, weight)]

    return CoactedModule(f"{free.name} weight {weight}", free.alphabet, sq.coaction,
                         lambda d: free.basis(d, weight), multiples,
                         min(free.maxdeg, maxdeg if maxdeg is not None else free.maxdeg), free.normal_form)


class _ReducedDegree:
    def __init__(self):
        self.index = gf2.ColumnIndex()
        self.independent = gf2.IncrementalBasis()
        self.tags: List[Optional[int]] = []  # class index per inserted vector, None for N_+·M
        self.reps: List[GradedPolynomial] = []


class ReducedCoaction(Coaction):
    """T(M) = M ⊗_N F2 with the coaction pushed through ε"""

    def __init__(self, module: CoactedModule, A: HopfPresentation):
        self.module = module
        self._degrees: Dict[int, _ReducedDegree] = {}
        names = []
        for d in range(module.maxdeg + 1):
            data = self._build(d)
            for rep in data.reps:
                names.append((f"[{rep.to_text()}]", d))
        super().__init__(A, GradedAlphabet.build(names), name=f"T({module.name})")
        self._class_names: Dict[int, List[str]] = {}
        for name, d in names:
            self._class_names.setdefault(d, []).append(name)
        self._values: Dict[str, TensorElement] = {}

    def _normal(self, p: GradedPolynomial) -> GradedPolynomial:
        return self.module.normal_form(p) if self.module.normal_form else p

    def _build(self, d: int) -> _ReducedDegree:
        data = _ReducedDegree()
        for v in self.module.scalar_multiples(d):
            data.independent.add(data.index.bits(self._normal(v).terms))
            data.tags.append(None)
        for v in self.module.spanning(d):
            v = self._normal(v)
            if data.independent.add(data.index.bits(v.terms)):
                data.tags.append(len(data.reps))
                data.reps.append(v)
            else:
                data.tags.append(None)
        self._degrees[d] = data
        return data

    def dimension(self, d: int) -> int:
        return len(self._degrees[d].reps) if d in self._degrees else 0

    def basis(self, degree: int) -> List[GradedPolynomial]:
        return [GradedPolynomial.var(self.carrier, n) for n in self._class_names.get(degree, [])]

    def reduce(self, p: GradedPolynomial) -> GradedPolynomial:
        """The class of a module element, as a linear polynomial in the class variables"""
        p = self._normal(p)
        terms = set()
        for g in sorted(p.grades()):
            data = self._degrees.get(g)
            if data is None:
                raise ActionNotClosedError(f"degree {g} lies outside the presented range of {self.module.name}")
            part = frozenset(m for m in p.terms if p.alphabet.monomial_grade(m) == g)
            residue, combination = data.independent.reduce(data.index.bits(part))
            if residue:
                raise ActionNotClosedError(f"{p.to_text()} is not in the presented span of {self.module.name}")
            for k in gf2.mask_indices(combination):
                cls = data.tags[k]
                if cls is not None:
                    name = self._class_names[g][cls]
                    exps = [0] * self.carrier.size
                    exps[self.carrier.index(name)] = 1
                    terms ^= {tuple(exps)}
        return GradedPolynomial._make(self.carrier, frozenset(terms))

    def representative(self, name: str) -> GradedPolynomial:
        """The module element chosen for a class"""
        d = self.carrier.grade_of(name)
        return self._degrees[d].reps[self._class_names[d].index(name)]

    def _reduce_coefficient(self, b: GradedPolynomial) -> GradedPolynomial:
        if self.module.coaction.hopf.letter == self.hopf.letter:
            return b.restrict(self.hopf.alphabet)
        return epsilon_reduce(b, self.hopf)

    def class_value(self, name: str) -> TensorElement:
        if name not in self._values:
            value = self.module.coaction.coact(self.representative(name))
            total = TensorElement.zero((self.hopf.alphabet, self.carrier))
            for (bmono,), mpoly in value.coefficients(1).items():
                b = GradedPolynomial._make(value.alphabets[0], frozenset([bmono]))
                a = self._reduce_coefficient(b)
                if a.is_zero():
                    continue
                cls = self.reduce(mpoly)
                if not cls.is_zero():
                    total = total + TensorElement.pure(a, cls)
            self._values[name] = total
        return self._values[name]

    def _coact(self, p: GradedPolynomial) -> TensorElement:
        total = TensorElement.zero((self.hopf.alphabet, self.carrier))
        for m in p.terms:
            if sum(m) != 1:
                raise ActionNotClosedError(f"{p.to_text()} is not linear in the classes of {self.module.name}")
            total = total + self.class_value(self.carrier.names[m.index(1)])
        return total


def thom_reduce(module: CoactedModule, A: Optional[HopfPresentation] = None) -> ReducedCoaction:
    A = A or milnor(module.coaction.hopf.cap)
    reduced = ReducedCoaction(module, A)
    logger.info(f"{reduced.name}: dimensions {[reduced.dimension(d) for d in range(module.maxdeg + 1)]}")
    return reduced


def reduced_matches(reduced: ReducedCoaction, target: Coaction,
                    correspond: Callable[[GradedPolynomial], GradedPolynomial]) -> CheckReport:
    """Compare T(M) with a Q-side coaction; `correspond` sends module elements to the target carrier"""
    report = CheckReport(f"thom:{reduced.name}")
    A = reduced.hopf.alphabet
    for d in range(reduced.module.maxdeg + 1):
        for name in reduced._class_names.get(d, []):
            expected = target.coact(correspond(reduced.representative(name)))
            mine = TensorElement.zero((A, target.carrier))
            for amono, cmono in reduced.class_value(name).terms:
                cls = reduced.carrier.names[cmono.index(1)]
                mine = mine + TensorElement.pure(GradedPolynomial._make(A, frozenset([amono])),
                                                 correspond(reduced.representative(cls)))
            report.add(name, mine == expected, d)
    return report


def word_correspondence(source: FreeOperationRing,
                        target: FreeOperationRing) -> Callable[[GradedPolynomial], GradedPolynomial]:
    """Scalars to zero and each word to the target word with the same generator and indices"""

    def correspond(p: GradedPolynomial) -> GradedPolynomial:
        total = GradedPolynomial.zero(target.alphabet)
        for m in p.terms:
            if any(m[:source.split]):
                continue
            value = target.one()
            for pos, e in enumerate(m[source.split:]):
                if e:
                    word = source.words[pos]
                    value = value * target.word(word.gen, word.indices) ** e
            total = total + value
        return target.normal_form(total)

    return correspond


def thom_reduction_check(sq: NishidaSquare, maxdeg: int, maxweight: int) -> CheckReport:
    """T(D⟨x⟩) against Q⟨x⟩ weight by weight: dimensions and coactions"""
    report = CheckReport('thom')
    homology = build_square(HOMOLOGY, maxdeg, maxweight)
    correspond = word_correspondence(sq.free, homology.free)
    for w in range(1, maxweight + 1):
        reduced = thom_reduce(free_dring_module(sq, sq.model, w, maxdeg), homology.hopf)
        dims = [reduced.dimension(d) for d in range(maxdeg + 1)]
        expected = [homology.free.dimension(d, w) for d in range(maxdeg + 1)]
        for d in range(maxdeg + 1):
            report.add(f"dim T(D⟨x⟩) = dim Q⟨x⟩ (weight {w})", dims[d] == expected[d], d,
                       detail=f"{dims[d]} vs {expected[d]}")
        report.extend(reduced_matches(reduced, homology.coaction, correspond))
    return report


def nishida_suite(maxdeg: int = 4, maxweight: int = 4, side: str = HOMOLOGY, fgl_kind: str = 'additive') -> CheckReport:
    """Elements through degree maxdeg; the free ring is truncated at twice that so Q_t is known on them"""
    report = CheckReport('nishida')
    sq = build_square(side, 2 * maxdeg, maxweight, fgl_kind)
    report.notes.extend(sq.notes)
    if sq.solved is not None:
        report.extend(sq.solved)
    report.extend(comodule_check(sq.coaction, maxdeg))
    report.extend(coaction_consistency(sq.coaction, maxdeg=maxdeg))
    report.extend(nishida_square_check(sq, square_elements(sq, maxdeg), sq.free.maxdeg))
    if side == BORDISM:
        report.extend(thom_reduction_check(sq, min(maxdeg, 4), maxweight))
    return report
