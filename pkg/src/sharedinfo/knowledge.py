"""Partition models of knowledge: K_i, shared knowledge and common knowledge.

Each agent holds a partition of a finite state set. An agent knows an event at
a state when the cell containing that state lies inside the event.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

from .distribution import JointDistribution
from .errors import ParseError


@dataclass(frozen=True)
class KnowledgeModel:
    states: tuple
    partitions: Mapping[str, tuple[frozenset, ...]]

    def __post_init__(self):
        universe = set(self.states)
        if len(universe) != len(self.states):
            raise ValueError("duplicate state labels")
        for agent, cells in self.partitions.items():
            seen = set()
            for cell in cells:
                if not cell:
                    raise ValueError(f"agent {agent!r} has an empty cell")
                if seen & cell:
                    raise ValueError(f"agent {agent!r} has overlapping cells")
                if not cell <= universe:
                    raise ValueError(f"agent {agent!r} has a cell with unknown states")
                seen |= cell
            if seen != universe:
                raise ValueError(f"agent {agent!r} does not cover every state")

    @classmethod
    def from_observations(cls, states: Sequence[Hashable], observe: Mapping[str, callable]):
        """Partitions as preimages of observation functions ``state -> observation``."""
        partitions = {}
        for agent, f in observe.items():
            cells: dict = {}
            for s in states:
                cells.setdefault(f(s), []).append(s)
            partitions[agent] = tuple(frozenset(c) for c in cells.values())
        return cls(tuple(states), partitions)

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(self.partitions)

    def cell(self, agent: str, state) -> frozenset:
        for c in self._cells(agent):
            if state in c:
                return c
        raise KeyError(state)

    def _cells(self, agent):
        try:
            return self.partitions[agent]
        except KeyError:
            raise ValueError(f"unknown agent {agent!r}") from None

    def event(self, states: Iterable) -> frozenset:
        e = frozenset(states)
        if not e <= set(self.states):
            raise ValueError(f"event mentions unknown states {sorted(map(str, e - set(self.states)))}")
        return e


def knows(model: KnowledgeModel, agent: str, event) -> frozenset:
    event = model.event(event)
    out = set()
    for cell in model._cells(agent):
        if cell <= event:
            out |= cell
    return frozenset(out)


def shared_knowledge(model: KnowledgeModel, agents: Sequence[str], event) -> frozenset:
    if not agents:
        raise ValueError("need at least one agent")
    result = model.event(event)
    for agent in agents:
        result &= knows(model, agent, event)
    return result


def common_knowledge(model: KnowledgeModel, agents: Sequence[str], event) -> frozenset:
    """Iterate shared knowledge to its fixed point."""
    return common_knowledge_trace(model, agents, event)[-1]


def common_knowledge_trace(model: KnowledgeModel, agents: Sequence[str], event) -> list[frozenset]:
    """``[SK(E), SK(SK(E)), ...]`` up to and including the fixed point."""
    trace = [shared_knowledge(model, agents, event)]
    while True:
        nxt = shared_knowledge(model, agents, trace[-1])
        if nxt == trace[-1]:
            return trace
        trace.append(nxt)


def possibility_reduction_bits(model: KnowledgeModel, event) -> float:
    """Heuristic: log2(#states / #states in the event), the bits of ruling states out.

    Only a diagnostic for how much a known event narrows the world; it is not
    an information measure.
    """
    event = model.event(event)
    if not event:
        return math.inf
    return math.log2(len(model.states) / len(event))


def model_from_distribution(dist: JointDistribution, agents: Mapping[str, Sequence[str]] | Sequence) -> KnowledgeModel:
    """States are the support tuples; each agent observes the projection onto its variables."""
    if not len(dist):
        raise ValueError("empty support")
    if not isinstance(agents, Mapping):
        agents = {"".join(dist.subset(a)): a for a in agents}
    states = dist.support
    observe = {}
    for name, vars in agents.items():
        idx = dist.indices(vars)
        observe[name] = lambda s, idx=idx: tuple(s[i] for i in idx)
    return KnowledgeModel.from_observations(states, observe)


# scenario format ------------------------------------------------------------

_CELL_RE = re.compile(r"\{([^{}]*)\}")


@dataclass
class Scenario:
    model: KnowledgeModel
    events: dict[str, frozenset]


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario file.

    Lines (``#`` starts a comment)::

        states: s1 s2 s3 ...
        agent NAME: {s1 s2} {s3} ...
        event NAME: s1 s3 ...

    State labels are arbitrary whitespace-free tokens.
    """
    states = None
    partitions = {}
    events = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, body = line.partition(":")
        if not sep:
            raise ParseError("expected 'keyword: ...'", lineno)
        words = head.split()
        if words == ["states"]:
            states = body.split()
        elif len(words) == 2 and words[0] == "agent":
            cells = _CELL_RE.findall(body)
            if _CELL_RE.sub("", body).strip():
                raise ParseError("agent cells must be brace-grouped", lineno)
            partitions[words[1]] = tuple(frozenset(c.split()) for c in cells)
        elif len(words) == 2 and words[0] == "event":
            events[words[1]] = frozenset(body.split())
        else:
            raise ParseError(f"unknown line type {head!r}", lineno)
    if states is None:
        raise ParseError("missing 'states:' line")
    if not partitions:
        raise ParseError("no agents defined")
    if not events:
        raise ParseError("no events defined")
    try:
        model = KnowledgeModel(tuple(states), partitions)
        events = {k: model.event(v) for k, v in events.items()}
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return Scenario(model, events)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def format_event(model: KnowledgeModel, event) -> str:
    """Event in state-list order, e.g. ``{(0,0,00), (0,1,01)}``."""
    ordered = [s for s in model.states if s in event]
    return "{" + ", ".join(map(_label, ordered)) + "}"


def _label(s) -> str:
    if isinstance(s, tuple):
        return "(" + ",".join(map(str, s)) + ")"
    return str(s)
