"""Gas-style cost accounting: fixed per-operation charges from a schedule.

The default schedule carries the measured gas figures for the twelve
contract-level operations (five registration, seven poll) plus zero-cost
entries for plumbing operations, and round-trips through its JSON
configuration file byte-identically.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from .errors import UnknownOperation

# Measured per-operation gas charges (registration contract / poll contract).
DEFAULT_SCHEDULE = {
    "sendReq": 96584,
    "genKey": 184584,
    "verifyProof": 65082,
    "genChng": 94214,
    "regUser": 36548,
    "createPoll": 215949,
    "registerVoters": 150240,
    "OpenPoll": 8981,
    "setOpen": 77852,
    "castVotes": 19214,
    "closePoll": 7223,
    "getPollRes": 68547,
    # plumbing: recorded but free
    "publishResult": 0,
    "storeDocument": 0,
}


@dataclass(frozen=True)
class CostEntry:
    operation: str
    gas: int
    tx_id: int | None


@dataclass
class CostReport:
    scope: str
    entries: list[CostEntry] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(e.gas for e in self.entries)


class CostSchedule:
    def __init__(self, costs: dict[str, int]):
        for name, gas in costs.items():
            if not isinstance(gas, int) or gas < 0:
                raise ValueError(f"gas for {name!r} must be a non-negative integer")
        self.costs = dict(costs)

    def __getitem__(self, operation: str) -> int:
        try:
            return self.costs[operation]
        except KeyError:
            raise UnknownOperation(f"no scheduled cost for {operation!r}") from None

    def __contains__(self, operation: str) -> bool:
        return operation in self.costs

    @classmethod
    def default(cls) -> "CostSchedule":
        return cls(DEFAULT_SCHEDULE)

    @classmethod
    def load(cls, path: str) -> "CostSchedule":
        with open(path, "r", encoding="utf-8") as f:
            return cls(json.load(f))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())

    def dumps(self) -> str:
        return json.dumps(self.costs, sort_keys=True, indent=2) + "\n"


class CostMeter:
    """Accumulates charges, attributed to a scope (a requestId or pollId)."""

    def __init__(self, schedule: CostSchedule | None = None):
        self.schedule = schedule or CostSchedule.default()
        self._scopes: dict[str, list[CostEntry]] = {}
        self._lock = threading.Lock()

    def charge(self, operation: str, scope: str, tx_id: int | None = None) -> int:
        gas = self.schedule[operation]
        entry = CostEntry(operation=operation, gas=gas, tx_id=tx_id)
        with self._lock:
            self._scopes.setdefault(scope, []).append(entry)
        return gas

    def report(self, scope: str) -> CostReport:
        """Charges for a scope, in charge order. A scope with no charges yet
        reports empty (total 0); whether the scope *exists* is the owning
        module's call, made before asking for the report."""
        return CostReport(scope=scope, entries=list(self._scopes.get(scope, [])))

    def scopes(self) -> list[str]:
        return sorted(self._scopes)
