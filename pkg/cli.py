#!/usr/bin/env python3
"""
Batch front end: emits tables and runs the verification suites.

Exit codes: 0 success, 1 failed verification or algebra error, 2 usage, 3 cap over budget.
"""

import argparse
import dataclasses
import json
import logging
import sys
from typing import Any, List, Optional

from charnum import NORMAL, TANGENTIAL, SubstitutionRing, boardman, parse_manifold, theorem4_check
from config import (FGL_CHOICES, OUTPUT_CHOICES, QUADRATIC_CHOICES, READING_CHOICES, SessionConfig,
                    config)
from dring import solve_dstructure
from errors import AlgebraError, CapTooLargeError, UsageError
from fgl import lazard_rank, model_for
from hopf import faa_di_bruno, presentation, rp_infinity
from nishida import BORDISM, HOMOLOGY, nishida_suite
from qring import solved_qstructure
from report import CheckReport
from suites import SUITES, run_suites

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--cap', type=int, help='truncation degree (default NISHIDA_CAP or 8)')
    common.add_argument('--maxweight', type=int)
    common.add_argument('--fgl', choices=FGL_CHOICES)
    common.add_argument('--quadratic', choices=QUADRATIC_CHOICES)
    common.add_argument('--reading', dest='substitution_reading', choices=READING_CHOICES)
    common.add_argument('--output', choices=OUTPUT_CHOICES)

    parser = argparse.ArgumentParser(prog='nishida', description='Mod-2 Nishida relations at desk scale')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('coproduct', parents=[common], help='δ of one Hopf generator')
    p.add_argument('--algebra', choices=('A', 'B'), default='A')
    p.add_argument('--gen', type=int, required=True)

    p = sub.add_parser('qstruct', parents=[common], help='Q_t of one Hopf generator')
    p.add_argument('--algebra', choices=('A', 'B'), default='A')
    p.add_argument('--gen', type=int, required=True)

    p = sub.add_parser('dstruct', parents=[common], help='D_t of one Faa di Bruno generator')
    p.add_argument('--gen', type=int, required=True)

    p = sub.add_parser('coaction', parents=[common], help='coaction on H*(RP∞) or N*(RP∞)')
    p.add_argument('--algebra', choices=('A', 'B'), default='A')
    p.add_argument('--degree', type=int, required=True)

    p = sub.add_parser('nishida', parents=[common], help='Nishida square checks on a free ring')
    p.add_argument('action', nargs='?', choices=('check',), default='check')
    p.add_argument('--side', choices=(HOMOLOGY, BORDISM), default=HOMOLOGY)
    p.add_argument('--maxdeg', type=int, default=4)

    p = sub.add_parser('fgl', parents=[common], help='coefficients and ranks of the Lazard model')
    p.add_argument('--upto', type=int, default=3)

    p = sub.add_parser('charnum', parents=[common], help='characteristic numbers and substitution')
    p.add_argument('action', choices=('beta', 'thm4'))
    p.add_argument('--manifold', default='RP2')
    p.add_argument('--variant', choices=(TANGENTIAL, NORMAL), default=TANGENTIAL)

    p = sub.add_parser('verify', parents=[common], help='run verification suites')
    p.add_argument('--suite', choices=tuple(SUITES) + ('all',), default='all')
    return parser


def _session(args: argparse.Namespace) -> SessionConfig:
    overrides = {key: getattr(args, key) for key in
                 ('cap', 'maxweight', 'fgl', 'quadratic', 'substitution_reading', 'output')
                 if getattr(args, key, None) is not None}
    return dataclasses.replace(config, **overrides).validate()


def _emit(cfg: SessionConfig, text: str, payload: Any):
    if cfg.output == 'json':
        print(json.dumps(payload, sort_keys=True, ensure_ascii=False))
    else:
        print(text)


def _emit_reports(cfg: SessionConfig, reports: List[CheckReport]) -> int:
    for report in reports:
        print(report.to_json_lines() if cfg.output == 'json' else report.to_text())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _dispatch(args: argparse.Namespace, cfg: SessionConfig) -> int:
    if args.command == 'coproduct':
        H = presentation(args.algebra, cfg.cap)
        value = H.coproduct(args.gen)
        _emit(cfg, value.to_text(), H.to_json(args.gen))
    elif args.command == 'qstruct':
        # two spare degrees so the series is exact through t^cap
        H = presentation(args.algebra, cfg.cap)
        spec = solved_qstructure(args.algebra, cfg.cap + 2)
        gen = H.name(args.gen)
        _emit(cfg, spec.shown(gen, cfg.cap).to_text(), spec.table_json(gen, cfg.cap))
    elif args.command == 'dstruct':
        H = faa_di_bruno(cfg.cap)
        spec, report = solve_dstructure(H, model_for(cfg.fgl, cfg.cap).fgl, cfg.quadratic)
        for note in report.notes:
            logger.info(note)
        _emit(cfg, spec.qt(H.name(args.gen)).to_text(), spec.table_json(H.name(args.gen)))
    elif args.command == 'coaction':
        value = rp_infinity(presentation(args.algebra, cfg.cap)).value(args.degree)
        _emit(cfg, value.to_text(), {'degree': args.degree, 'coaction': value.to_json()})
    elif args.command == 'nishida':
        return _emit_reports(cfg, [nishida_suite(args.maxdeg, cfg.maxweight, args.side, cfg.fgl)])
    elif args.command == 'fgl':
        model = model_for(cfg.fgl, cfg.cap)
        ranks = [lazard_rank(model, n) for n in range(cfg.cap)]
        rows = model.fgl.to_json(args.upto)
        text = '\n'.join(f"a{r['i']}_{r['j']} = {r['value']}" for r in rows)
        _emit(cfg, f"{text}\nranks: {ranks}", {'coefficients': rows, 'ranks': ranks})
    elif args.command == 'charnum':
        if args.action == 'beta':
            try:
                M = parse_manifold(args.manifold)
            except ValueError as e:
                raise UsageError(str(e)) from None
            value = boardman(M, args.variant, faa_di_bruno(max(cfg.cap, M.dimension + 1)))
            _emit(cfg, value.to_text(), {'manifold': M.name, 'variant': args.variant, 'beta': value.to_json()})
        else:
            S = SubstitutionRing(max(cfg.cap, 8), reading=cfg.substitution_reading)
            return _emit_reports(cfg, [theorem4_check(cap=cfg.cap, S=S)])
    elif args.command == 'verify':
        return _emit_reports(cfg, run_suites(args.suite, cfg))
    return EXIT_OK


def run_command(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one command and map the outcome to an exit code"""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                        stream=sys.stderr)
    try:
        cfg = _session(args)
    except CapTooLargeError as e:
        logger.error(str(e))
        return EXIT_BUDGET
    except ValueError as e:
        logger.error(str(e))
        return EXIT_USAGE
    try:
        return _dispatch(args, cfg)
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except AlgebraError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAIL
    except Exception:
        logger.exception(f"internal error in {args.command}")
        return EXIT_FAIL


main = run_command


if __name__ == "__main__":
    raise SystemExit(main())
