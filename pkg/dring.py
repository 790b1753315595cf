"""
D-rings: the operation rings of qring made parametric in a formal group law.

Everything runs through QRingSpec and FreeOperationRing; the only change is the
extension D_s(t) = t·F(t, s). The structure on the Faa di Bruno algebra comes from
D_t(h)(q) = h(x)·h(F(x, t)), solved against q = x·F(x, t) or the literal x(x + t).
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from errors import AlphabetMismatchError, CapMismatchError, ResidualError
from f2series import GradedAlphabet, GradedPolynomial, PowerSeries, express_in_invariant
from fgl import FormalGroupLaw, LazardModel, additive_model, model_for
from hopf import HopfPresentation, faa_di_bruno
from qring import (ST, FreeOperationRing, QRingSpec, bivariate, build_free_qring,
                   factorwise_normal_form, generator_series_xt,
                   interchange_check, quadratic_xxt, solve_generator_qstructure,
                   solved_qstructure)
from report import CheckReport

logger = logging.getLogger(__name__)

QUADRATIC_XF = 'xf'
QUADRATIC_XXT = 'xxt'


def d_extension(fgl: FormalGroupLaw, alphabet: Optional[GradedAlphabet] = None) -> PowerSeries:
    """D_s(t) = t·F(t, s), as a series in (s, t)"""
    law = fgl.lifted(alphabet) if alphabet is not None and alphabet != fgl.alphabet else fgl
    coeffs = {(j, i + 1): c for (i, j), c in law.series.items()}
    return PowerSeries(law.alphabet, ST, coeffs, law.cap + 1)


class DRingSpec(QRingSpec):
    op = 'D'
    fgl: Optional[FormalGroupLaw] = None

    def __init__(self, alphabet: GradedAlphabet, table: Mapping[str, PowerSeries], cap: int,
                 fgl: FormalGroupLaw, name: str = '', normal_form=None,
                 extension: Optional[PowerSeries] = None, unknown: Iterable[str] = ()):
        if not set(fgl.alphabet.names) <= set(alphabet.names):
            raise AlphabetMismatchError(f"carrier of {name or 'D-ring'} does not contain the law's coefficients")
        self.fgl = fgl.lifted(alphabet)
        if extension is None:
            extension = d_extension(self.fgl)
        super().__init__(alphabet, table, cap, name=name, normal_form=normal_form,
                         extension=extension, unknown=unknown)

    def with_scalars(self, scalars: 'DRingSpec') -> 'DRingSpec':
        """Copy with D_t on the base scalars taken from `scalars` (see scalar_dstructure)"""
        lift = lambda p: p.embed(self.alphabet)
        clone = type(self).__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.table = {**self.table, **{gen: s.map_coefficients(lift, self.alphabet)
                                        for gen, s in scalars.table.items()}}
        clone.unknown = self.unknown | {n for n in scalars.unknown if n in self.alphabet.names}
        clone._powers = {}
        clone.name = f"{self.name}+scalars"
        return clone


def dt_eval(R: QRingSpec, a: GradedPolynomial) -> PowerSeries:
    return R.qt_eval(a)


# The structure on the Faa di Bruno algebra

def _shifted_argument(fgl: FormalGroupLaw) -> PowerSeries:
    """F(x, t) in the variables (x, t)"""
    return fgl.series.rename({'y': 't'})


def quadratic_for(kind: str, fgl: FormalGroupLaw, cap: int) -> PowerSeries:
    if kind == QUADRATIC_XXT:
        return quadratic_xxt(fgl.alphabet, cap)
    if kind != QUADRATIC_XF:
        raise ValueError(f"unknown quadratic {kind!r}")
    x = bivariate(fgl.alphabet, {(1, 0): GradedPolynomial.one(fgl.alphabet)}, cap)
    return x * _shifted_argument(fgl)


def d_product_rule(H: HopfPresentation, fgl: FormalGroupLaw) -> PowerSeries:
    """h(x)·h(F(x, t)) over H ⊗ (coefficients of F)"""
    h = generator_series_xt(H, fgl.alphabet)
    return h * h.substitute({'x': _shifted_argument(fgl)})


def solve_dstructure(H: HopfPresentation, fgl: FormalGroupLaw,
                     quadratic: str = QUADRATIC_XF) -> Tuple[DRingSpec, CheckReport]:
    """
    D_t on the generators of H, with coefficients in H ⊗ (base of F).

    Both quadratics are tried; the table comes from the chosen one and the report
    carries both residuals. A nonzero residual is reported, never raised.
    """
    if fgl.cap < H.cap:
        raise CapMismatchError(f"law known through degree {fgl.cap}, need {H.cap}")
    alphabet = H.alphabet.concat(fgl.alphabet)
    law = fgl.lifted(alphabet)
    rhs = d_product_rule(H, law).truncate(H.cap)
    report = CheckReport(f"dstructure:{H.letter}/{fgl.name}")
    tables = {}
    for kind in (QUADRATIC_XF, QUADRATIC_XXT):
        q = quadratic_for(kind, law, H.cap)
        coefficients, residual = express_in_invariant(rhs, q, H.exponents)
        tables[kind] = {H.name(n): c for n, c in enumerate(coefficients) if c.cap >= 0}
        clean = residual.is_zero()
        detail = 'zero' if clean else f"{len(residual.coeffs)} nonzero coefficients"
        if kind == quadratic:
            report.add(f"residual q={kind}", clean, H.cap, detail=detail)
        else:
            # the other quadratic is compared, not required
            report.notes.append(f"residual q={kind}: {detail}")
        if not clean:
            logger.warning(f"D-structure on {H.letter} over the {fgl.name} law leaves a residual for q={kind}")
    table = tables[quadratic]
    unknown = [H.name(n) for n in range(H.count) if H.name(n) not in table]
    spec = DRingSpec(alphabet, table, H.cap, law, name=f"D/{H.letter}[{fgl.name},{quadratic}]", unknown=unknown)
    for gen, series in table.items():
        square = GradedPolynomial.var(alphabet, gen) ** 2
        report.add(f"squaring {gen}", series.coefficient(0) == square, 0)
    report.notes.append(f"table solved against q={quadratic}")
    return spec, report


def solve_tensor_dstructure(R: DRingSpec, quadratic: str = QUADRATIC_XF,
                            H: Optional[HopfPresentation] = None) -> Tuple[DRingSpec, CheckReport]:
    """The D-structure on H ⊗ R: D_t(h_n) from the product rule, R's own table on R"""
    H = H or faa_di_bruno(R.cap)
    if H.cap < R.cap:
        raise CapMismatchError(f"{H} below the cap {R.cap} of {R.name}")
    base = R.fgl.series.map_coefficients(lambda p: p.restrict(_law_alphabet(R)), _law_alphabet(R))
    hspec, report = solve_dstructure(H, FormalGroupLaw(base, R.fgl.name), quadratic)
    alphabet = H.alphabet.concat(R.alphabet)
    lift = lambda p: p.embed(alphabet)
    table = {gen: s.map_coefficients(lift, alphabet) for gen, s in hspec.table.items()}
    table.update({gen: s.map_coefficients(lift, alphabet) for gen, s in R.table.items()})
    spec = DRingSpec(alphabet, table, R.cap, R.fgl.lifted(alphabet), name=f"{hspec.name}⊗{R.name}",
                     normal_form=factorwise_normal_form(H.alphabet, R, alphabet),
                     extension=R.extension.map_coefficients(lift, alphabet),
                     unknown=hspec.unknown | R.unknown)
    return spec, report


def _law_alphabet(R: DRingSpec) -> GradedAlphabet:
    """The sub-alphabet of R's carrier that the law's coefficients use"""
    used = set()
    for _, c in R.fgl.series.items():
        for m in c.terms:
            used |= {R.alphabet.names[i] for i, e in enumerate(m) if e}
    names = [n for n in R.alphabet.names if n in used]
    return GradedAlphabet.build((n, R.alphabet.grade_of(n)) for n in names)


def d_interchange_check(R: DRingSpec, a: GradedPolynomial, maxdeg: int) -> CheckReport:
    """Interchange with D_s(t) = t·F(t,s); D_t on the law's coefficients must be known"""
    missing = [n for n in _law_alphabet(R).names if n not in R.table and n not in R.unknown]
    if missing:
        report = CheckReport(f"interchange:{R.name}")
        report.add(a.to_text(), False, maxdeg, detail=f"needs D_t on {', '.join(missing)}")
        report.notes.append("supply D_t on the law's coefficients with with_scalars(scalar_dstructure(model))")
        logger.error(f"interchange for {a.to_text()} in {R.name}: no D_t on {', '.join(missing)}")
        return report
    return interchange_check(R, a, maxdeg)


# D_t on the Lazard scalars

def _pull_back_scalar(p: GradedPolynomial, target: GradedAlphabet) -> GradedPolynomial:
    """Preimage under m_n -> h_n·h0^-(n+1); raises when p is outside the image"""
    terms = set()
    for m in p.terms:
        if m[0] != -sum((j + 1) * e for j, e in enumerate(m) if j):
            raise ResidualError(f"{p.to_text()} is not a polynomial in the h_n·h0^-(n+1)")
        exps = [0] * target.size
        for j, e in enumerate(m[1:], start=1):
            if not e:
                continue
            name = f"m{j}"
            if name not in target:
                raise ResidualError(f"{name} is beyond the model")
            exps[target.index(name)] = e
        terms ^= {tuple(exps)}
    return GradedPolynomial._make(target, frozenset(terms))


def scalar_dstructure(model: LazardModel) -> Tuple[DRingSpec, CheckReport]:
    """
    D_t on the scalars m_n of the Lazard model, forced by the Nishida relation.

    Coacting and then augmenting is the injective ring map m_n -> h_n·h0^-(n+1) into the
    Faa di Bruno algebra, and it carries D_t to Q_t with t read as h(t). So the image of
    D_t(m_n) is Q_t(h_n·h0^-(n+1)) at t = h^(-1)(u), pulled back coefficient by coefficient.
    D_t(m_n) is known through t^(cap-1-2n); a coefficient outside the image is a failed case.
    """
    report = CheckReport(f"scalars:{model.fgl.name}")
    table: Dict[str, PowerSeries] = {}
    unknown: List[str] = []
    if not model.additive:
        B = faa_di_bruno(model.cap + 1)
        Q = solved_qstructure('B', B.cap)
        inverse_u = B.inverse_series.rename({B.x: 'u'})
        for name in model.alphabet.names:
            n = int(name[1:])
            top = model.cap - 1 - 2 * n
            if top < 0:
                unknown.append(name)
                continue
            image = B.gen(n) * B.gen(0) ** -(n + 1)
            series = Q.qt_eval(image).substitute({'t': inverse_u}, ('u',))
            top = min(top, series.cap)
            coeffs = {}
            for k in range(top + 1):
                try:
                    coeffs[(k,)] = _pull_back_scalar(series.coefficient(k), model.alphabet)
                except ResidualError as e:
                    report.add(f"D_t({name})", False, 2 * n + k, detail=f"t^{k}: {e}")
                    top = k - 1
                    break
            table[name] = PowerSeries(model.alphabet, ('t',), coeffs, top)
            square = GradedPolynomial.var(model.alphabet, name) ** 2
            report.add(f"squaring {name}", top >= 0 and coeffs[(0,)] == square, 2 * n)
        logger.info(f"D_t on the {model.fgl.name} scalars: {len(table)} derived, {len(unknown)} beyond the cap")
    spec = DRingSpec(model.alphabet, table, model.cap - 1, model.fgl,
                     name=f"D/{model.fgl.name} scalars", unknown=unknown)
    return spec, report


# Free D-rings

def build_free_dring(generators: Sequence[Tuple[str, int, int]], model: LazardModel, maxdeg: int,
                     maxweight: int, seed: Optional[int] = None) -> FreeOperationRing:
    """Free D-ring over the Lazard model; components are modules over its degreewise bases"""
    if model.cap <= maxdeg:
        raise CapMismatchError(f"Lazard model at cap {model.cap} cannot supply scalars through degree {maxdeg}")
    free = FreeOperationRing(generators, maxdeg, maxweight, op='D', extension=d_extension(model.fgl),
                             scalar_alphabet=model.alphabet, scalar_basis=model.basis, seed=seed,
                             spec_class=DRingSpec, name=f"D⟨{','.join(g[0] for g in generators)}⟩/{model.fgl.name}")
    free.spec_extras['fgl'] = model.fgl.lifted(free.alphabet)
    if free.skipped_closures:
        logger.info(f"{free.name}: {free.skipped_closures} closure steps skipped on rows with scalar coefficients")
    return free


def _as_q_text(text: str) -> str:
    return text.replace('D', 'Q')


def additive_collapse_check(cap: int, maxdeg: int = 6, maxweight: int = 4) -> CheckReport:
    """With F(x,y) = x+y every D-side output must equal its Q-side counterpart"""
    report = CheckReport('additive-collapse')
    model = additive_model(max(cap, maxdeg + 1))
    H = faa_di_bruno(cap)
    dspec, _ = solve_dstructure(H, model.fgl, QUADRATIC_XF)
    dspec_literal, _ = solve_dstructure(H, model.fgl, QUADRATIC_XXT)
    qspec = solve_generator_qstructure(H)
    for gen, series in qspec.table.items():
        same = dspec.qt(gen) == series and dspec_literal.qt(gen) == series
        report.add(f"D_t({gen}) = Q_t({gen})", same, series.cap)
    h0sq = H.gen(0) ** 2
    report.add('D_t(h0^2) = Q_t(h0)^2', dt_eval(dspec, h0sq) == qspec.qt('h0') ** 2, cap)

    dfree = build_free_dring([('x', 0, 1)], model, maxdeg, maxweight)
    qfree = build_free_qring([('x', 0, 1)], maxdeg, maxweight)
    report.add('free ring dimensions', dfree.dimensions() == qfree.dimensions(), maxdeg)
    drules = {_as_q_text(k): _as_q_text(v) for k, v in dfree.rewrite_table().items()}
    report.add('free ring rewrite rules', drules == qfree.rewrite_table(), maxdeg)
    return report


def lazard_closure_check(scalars: DRingSpec, model: LazardModel, maxdeg: int) -> CheckReport:
    """D_t keeps the Lazard ring inside itself on its degreewise bases"""
    report = CheckReport(f"closure:{scalars.name}")
    for d in range(1, maxdeg + 1):
        for b in model.basis(d):
            series = scalars.qt_eval(b)
            outside = [k for (k,), c in series.items() if not model.contains(c)]
            report.add(f"D_t({b.to_text()})", not outside and series.cap >= 0, d,
                       detail=f"outside at t^{outside}" if outside else f"known through t^{series.cap}")
    return report


def free_module_dimensions(model: LazardModel, maxdeg: int) -> List[int]:
    """dim of (d, 2) in D⟨x⟩: one word per degree, tensored with the scalars"""
    return [sum(model.rank(j) for j in range(d + 1)) for d in range(maxdeg + 1)]


def dring_suite(cap: int, fgl_kind: str = 'universal', quadratic: str = QUADRATIC_XF,
                maxdeg: int = 4, maxweight: int = 4) -> CheckReport:
    report = CheckReport('dring')
    model = model_for(fgl_kind, max(cap, maxdeg + 1))
    H = faa_di_bruno(cap)
    spec, solved = solve_dstructure(H, model.fgl, quadratic)
    report.extend(solved)
    scalars, derived = scalar_dstructure(model)
    report.extend(derived)
    spec = spec.with_scalars(scalars)
    h0 = GradedPolynomial.var(spec.alphabet, H.name(0))
    # D_s(h_j) is known through s^(cap-2-2j) and D_s(m_j) through s^(model cap-1-2j)
    report.extend(d_interchange_check(spec, h0, min(cap - 2, model.cap - 1, 6)))
    if not model.additive:
        m1 = GradedPolynomial.var(scalars.alphabet, 'm1')
        report.extend(interchange_check(scalars, m1, min(model.cap - 5, 4)))
        report.extend(lazard_closure_check(scalars, model, 2))
    report.extend(additive_collapse_check(cap, maxdeg, maxweight))

    free = build_free_dring([('x', 0, 1)], model, maxdeg, min(maxweight, 2))
    expected = free_module_dimensions(model, maxdeg)
    for d in range(maxdeg + 1):
        report.add(f"{free.name} (d,2)", free.dimension(d, 2) == expected[d], d,
                   detail=f"{free.dimension(d, 2)} vs {expected[d]}")
    report.extend(free.permutation_check())
    report.extend(free.confluence_check())
    return report
