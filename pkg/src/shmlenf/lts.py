"""Finite labelled transition systems and bisimulation by partition refinement."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .syntax import TAU


class StateBudgetExceeded(RuntimeError):
    pass


DEFAULT_BUDGET = 20000


class Lts:
    """States are indices; ``labels`` keeps the term each index stands for."""

    def __init__(self, labels, succ, init=0):
        self.labels = list(labels)
        self.succ = [list(s) for s in succ]
        self.init = init

    def __len__(self):
        return len(self.labels)

    @property
    def states(self):
        return range(len(self.labels))

    def edges(self):
        for s, out in enumerate(self.succ):
            for a, t in out:
                yield s, a, t

    def num_edges(self) -> int:
        return sum(len(o) for o in self.succ)

    def alphabet(self) -> set:
        return {a for _, a, _ in self.edges()}

    def index(self, label) -> int:
        return self.labels.index(label)

    @classmethod
    def explore(cls, init, successors, budget: int = DEFAULT_BUDGET) -> "Lts":
        """Breadth-first materialization; ``successors(x)`` yields (action, x')."""
        ids = {init: 0}
        labels = [init]
        succ = []
        queue = deque([init])
        while queue:
            x = queue.popleft()
            out = []
            seen = set()
            for a, y in successors(x):
                if y not in ids:
                    if len(labels) >= budget:
                        raise StateBudgetExceeded(f"more than {budget} states")
                    ids[y] = len(labels)
                    labels.append(y)
                    queue.append(y)
                e = (a, ids[y])
                if e not in seen:
                    seen.add(e)
                    out.append(e)
            succ.append(out)
        return cls(labels, succ, 0)

    def union(self, other: "Lts") -> "Lts":
        """Disjoint union; labels become (0, label) and (1, label)."""
        n = len(self)
        labels = [(0, l) for l in self.labels] + [(1, l) for l in other.labels]
        succ = [list(o) for o in self.succ] + [[(a, t + n) for a, t in o] for o in other.succ]
        return Lts(labels, succ, self.init)

    def to_json(self) -> dict:
        return {
            "init": self.init,
            "states": [str(l) for l in self.labels],
            "edges": [[s, str(a), t] for s, a, t in self.edges()],
        }

    def tau_closure(self, s) -> set:
        seen = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for a, y in self.succ[x]:
                if a is TAU and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def visible_edges(self, weak: bool = True) -> list:
        """Per state, the visible (action, target) pairs.

        With ``weak`` the pairs are tau* a tau* moves; without it, single
        visible edges.
        """
        strong = [[(a, t) for a, t in out if a is not TAU] for out in self.succ]
        if not weak or all(a is not TAU for _, a, _ in self.edges()):
            return strong
        closure = [self.tau_closure(s) for s in self.states]
        out = []
        for s in self.states:
            seen = set()
            for t in closure[s]:
                for a, u in strong[t]:
                    for v in closure[u]:
                        seen.add((a, v))
            out.append(sorted(seen, key=lambda e: (str(e[0]), e[1])))
        return out

    def saturate(self) -> "Lts":
        """Weak transitions: s =a=> t is tau* a tau*, s =tau=> t is tau* (zero or more)."""
        closure = [self.tau_closure(s) for s in self.states]
        succ = []
        for s in self.states:
            out = set()
            for t in closure[s]:
                out.add((TAU, t))
                for a, u in self.succ[t]:
                    if a is not TAU:
                        for v in closure[u]:
                            out.add((a, v))
            succ.append(sorted(out, key=lambda e: (str(e[0]), e[1])))
        return Lts(self.labels, succ, self.init)


@dataclass
class BisimResult:
    equivalent: bool
    relation: list = field(default_factory=list)  # pairs (left label, right label)
    distinguishing: list = field(default_factory=list)  # attacker moves

    def __bool__(self):
        return self.equivalent


def refine(lts: Lts):
    """Coarsest stable partition; returns (block of each state, history).

    ``history[k][s]`` is the block of ``s`` after ``k`` rounds, which lets us
    replay why two states were separated.
    """
    block = [0] * len(lts)
    history = [list(block)]
    while True:
        sigs = {}
        new = []
        for s in lts.states:
            sig = (block[s], frozenset((a, block[t]) for a, t in lts.succ[s]))
            new.append(sigs.setdefault(sig, len(sigs)))
        history.append(new)
        if len(sigs) == len(set(block)):
            return new, history
        block = new


def _split_round(history, s, t):
    for k, b in enumerate(history):
        if b[s] != b[t]:
            return k
    return None


def _attack(lts: Lts, history, s, t, limit=50) -> list:
    """Extract a sequence of attacker moves separating s from t."""
    moves = []
    while limit > 0:
        limit -= 1
        k = _split_round(history, s, t)
        if k is None or k == 0:
            break
        prev = history[k - 1]
        found = None
        for side, (x, y) in (("left", (s, t)), ("right", (t, s))):
            for a, x2 in lts.succ[x]:
                answers = [y2 for b, y2 in lts.succ[y] if b == a]
                if all(prev[x2] != prev[y2] for y2 in answers):
                    found = (side, a, x2, answers)
                    break
            if found:
                break
        if found is None:
            break
        side, a, x2, answers = found
        moves.append((side, str(a)))
        if not answers:
            break
        # follow the defender's most resilient answer
        y2 = max(answers, key=lambda y: _split_round(history, x2, y) or 0)
        s, t = (x2, y2) if side == "left" else (y2, x2)
    return moves


def bisimilar(a: Lts, b: Lts) -> BisimResult:
    u = a.union(b)
    block, history = refine(u)
    n = len(a)
    s, t = a.init, n + b.init
    if block[s] == block[t]:
        rel = []
        # pairs reachable in the product of the two systems
        seen = {(s, t)}
        queue = deque([(s, t)])
        while queue:
            x, y = queue.popleft()
            rel.append((u.labels[x][1], u.labels[y][1]))
            for act, x2 in u.succ[x]:
                for act2, y2 in u.succ[y]:
                    if act2 == act and block[x2] == block[y2] and (x2, y2) not in seen:
                        seen.add((x2, y2))
                        queue.append((x2, y2))
        return BisimResult(True, rel, [])
    return BisimResult(False, [], _attack(u, history, s, t))
