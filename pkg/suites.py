import logging
from typing import Callable, Dict, List

from charnum import charnum_suite
from config import SessionConfig
from dring import dring_suite
from fgl import fgl_suite
from hopf import hopf_suite
from nishida import BORDISM, HOMOLOGY, nishida_suite
from qring import qring_suite
from report import CheckReport

logger = logging.getLogger(__name__)


def _nishida(cfg: SessionConfig) -> CheckReport:
    report = CheckReport('nishida')
    report.extend(nishida_suite(6, cfg.maxweight, HOMOLOGY))
    # the universal square carries N* scalars in every degree
    maxdeg = 6 if cfg.fgl == 'additive' else 4
    report.extend(nishida_suite(maxdeg, cfg.maxweight, BORDISM, cfg.fgl))
    return report


SUITES: Dict[str, Callable[[SessionConfig], CheckReport]] = {
    'hopf': lambda cfg: hopf_suite(cfg.cap),
    'qring': lambda cfg: qring_suite(cfg.cap, min(6, cfg.cap), cfg.maxweight),
    'fgl': lambda cfg: fgl_suite(cfg.cap),
    'dring': lambda cfg: dring_suite(cfg.cap, cfg.fgl, cfg.quadratic, min(4, cfg.cap - 1), cfg.maxweight),
    'nishida': _nishida,
    'charnum': lambda cfg: charnum_suite(max(cfg.cap, 8), reading=cfg.substitution_reading),
}


def run_suites(name: str, cfg: SessionConfig) -> List[CheckReport]:
    names = list(SUITES) if name == 'all' else [name]
    reports = []
    for suite in names:
        logger.info(f"running suite {suite} at cap {cfg.cap}")
        report = SUITES[suite](cfg)
        if report.passed:
            logger.info(f"suite {suite}: {len(report.cases)} cases passed")
        else:
            logger.error(f"suite {suite}: {len(report.failures())} failures in degrees {report.failed_degrees()}")
        reports.append(report)
    return reports
