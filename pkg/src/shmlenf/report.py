"""Check reports shared by the logic, detection, enforcement and verify layers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class CheckReport:
    name: str
    passed: bool = True
    corpus: str = ""
    checked: int = 0
    counterexamples: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def fail(self, **info):
        self.passed = False
        self.counterexamples.append({k: _plain(v) for k, v in info.items()})

    def verdict(self) -> str:
        if not self.passed:
            return "fail"
        return "pass on corpus" if self.corpus else "pass"

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "corpus": self.corpus,
            "verdict": self.verdict(),
            "passed": self.passed,
            "checked": self.checked,
            "counterexamples": self.counterexamples,
            "notes": {k: _plain(v) for k, v in self.notes.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def __bool__(self):
        return self.passed


def _plain(v):
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        items = [_plain(x) for x in v]
        if isinstance(v, (set, frozenset)):
            items.sort(key=str)
        return items
    return str(v)
