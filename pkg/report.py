import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

SCHEMA_VERSION = 1


@dataclass
class CaseResult:
    suite: str
    label: str
    passed: bool
    degree: Optional[int] = None
    detail: str = ''
    skipped: bool = False

    @property
    def status(self) -> str:
        if self.skipped:
            return 'skipped'
        return 'pass' if self.passed else 'fail'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': SCHEMA_VERSION,
            'suite': self.suite,
            'case': self.label,
            'degree': self.degree,
            'status': self.status,
            'detail': self.detail,
        }


@dataclass
class CheckReport:
    """Outcome of a property check; failures are data, not exceptions"""
    name: str
    cases: List[CaseResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add(self, label: str, passed: bool, degree: Optional[int] = None,
            detail: str = '', skipped: bool = False) -> CaseResult:
        case = CaseResult(self.name, label, passed, degree, detail, skipped)
        self.cases.append(case)
        return case

    def extend(self, other: 'CheckReport'):
        self.cases.extend(other.cases)
        self.notes.extend(other.notes)

    @property
    def passed(self) -> bool:
        """A skipped case is not a pass: a report with skips does not pass"""
        return all(case.passed and not case.skipped for case in self.cases)

    def failures(self) -> List[CaseResult]:
        return [case for case in self.cases if not case.passed and not case.skipped]

    def skipped(self) -> List[CaseResult]:
        return [case for case in self.cases if case.skipped]

    def failed_degrees(self) -> List[int]:
        return sorted({case.degree for case in self.failures() if case.degree is not None})

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': SCHEMA_VERSION,
            'suite': self.name,
            'status': 'pass' if self.passed else 'fail',
            'skipped': len(self.skipped()),
            'cases': [case.to_dict() for case in self.cases],
            'notes': list(self.notes),
        }

    def to_json_lines(self) -> str:
        lines = [json.dumps(case.to_dict(), sort_keys=True, ensure_ascii=False)
                 for case in self.cases]
        for note in self.notes:
            lines.append(json.dumps({'schema': SCHEMA_VERSION, 'suite': self.name, 'note': note},
                                    sort_keys=True, ensure_ascii=False))
        return '\n'.join(lines)

    def to_text(self) -> str:
        skipped = len(self.skipped())
        counts = f"{len(self.cases)} cases, {skipped} skipped" if skipped else f"{len(self.cases)} cases"
        lines = [f"[{self.name}] {'PASS' if self.passed else 'FAIL'} ({counts})"]
        for case in self.cases:
            mark = {'pass': '✓', 'fail': '✗', 'skipped': '-'}[case.status]
            where = f" deg {case.degree}" if case.degree is not None else ''
            detail = f": {case.detail}" if case.detail else ''
            lines.append(f"  {mark} {case.label}{where}{detail}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return '\n'.join(lines)
