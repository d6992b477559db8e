"""Antichain lattice of source subsets and Möbius inversion on it.

Nodes are antichains of nonempty subsets of ``{0, ..., n-1}``. Labels use the
juxtaposed 1-based index style, e.g. ``12|13`` for ``{X1,X2}{X1,X3}``.
"""
from __future__ import annotations

import functools
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import CapacityError, EvaluationError

MAX_SOURCES = 4


def _block_key(block):
    return (len(block), tuple(sorted(block)))


@dataclass(frozen=True)
class Antichain:
    blocks: tuple[frozenset, ...]
    n: int

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        if not blocks:
            raise ValueError("an antichain needs at least one block")
        for b in blocks:
            if not b:
                raise ValueError("blocks must be nonempty")
            if not all(0 <= i < self.n for i in b):
                raise ValueError(f"block {sorted(b)} outside ground set of size {self.n}")
        for a, b in itertools.permutations(blocks, 2):
            if a <= b:
                raise ValueError(f"blocks {sorted(a)} and {sorted(b)} are comparable")
        object.__setattr__(self, "blocks", tuple(sorted(blocks, key=_block_key)))

    @classmethod
    def parse(cls, label: str, n: int) -> "Antichain":
        blocks = [frozenset(int(c) - 1 for c in part) for part in label.split("|")]
        return cls(tuple(blocks), n)

    @property
    def label(self) -> str:
        return "|".join("".join(str(i + 1) for i in sorted(b)) for b in self.blocks)

    def named_blocks(self, ground: Sequence[str]) -> list[tuple[str, ...]]:
        return [tuple(ground[i] for i in sorted(b)) for b in self.blocks]

    def __str__(self):
        return self.label


def leq(a: Antichain, b: Antichain) -> bool:
    """``a <= b`` iff every block of ``b`` contains some block of ``a``."""
    if a.n != b.n:
        raise ValueError("antichains over different ground sets")
    return all(any(bb <= ab for bb in a.blocks) for ab in b.blocks)


def _nonempty_subsets(n):
    return [
        frozenset(c)
        for r in range(1, n + 1)
        for c in itertools.combinations(range(n), r)
    ]


def _antichains_by_filter(n):
    subsets = _nonempty_subsets(n)
    out = []
    for r in range(1, len(subsets) + 1):
        for family in itertools.combinations(subsets, r):
            if all(not (a <= b) for a, b in itertools.permutations(family, 2)):
                out.append(Antichain(family, n))
    return out


def _antichains_by_backtracking(n):
    subsets = sorted(_nonempty_subsets(n), key=_block_key)
    out = []

    def extend(start, chosen):
        if chosen:
            out.append(Antichain(tuple(chosen), n))
        for j in range(start, len(subsets)):
            s = subsets[j]
            if all(not (s <= c or c <= s) for c in chosen):
                chosen.append(s)
                extend(j + 1, chosen)
                chosen.pop()

    extend(0, [])
    return out


@functools.lru_cache(maxsize=None)
def _structure(n, method):
    """Sorted nodes, strict down-sets, heights and cover pairs; independent of names."""
    nodes = _antichains_by_filter(n) if method == "filter" else _antichains_by_backtracking(n)
    below = {a: frozenset(b for b in nodes if b != a and leq(b, a)) for a in nodes}
    height = {}
    for a in sorted(nodes, key=lambda x: len(below[x])):
        height[a] = 1 + max((height[b] for b in below[a]), default=-1)
    ordered = tuple(
        sorted(nodes, key=lambda a: (height[a], len(a.blocks), [_block_key(b) for b in a.blocks]))
    )
    covers = tuple(
        (b, a)
        for a in ordered
        for b in sorted(below[a], key=ordered.index)
        if not any(b in below[c] for c in below[a])
    )
    return ordered, below, height, covers


class PILattice:
    """All antichains over ``n`` sources with their order, covers and layers."""

    def __init__(self, n: int, ground: Sequence[str] | None = None, method: str = "auto"):
        if not 1 <= n <= MAX_SOURCES:
            raise CapacityError(
                f"n={n} sources unsupported: antichain counts grow like the Dedekind "
                f"numbers (1, 4, 18, 166, 7579, ...); at most {MAX_SOURCES} sources"
            )
        if ground is None:
            ground = [f"X{i + 1}" for i in range(n)]
        if len(ground) != n:
            raise ValueError("ground must list one name per source")
        self.n = n
        self.ground = tuple(ground)
        if method == "auto":
            method = "filter" if n <= 3 else "backtrack"
        self.nodes, self._below, height, covers = _structure(n, method)
        self.height = dict(height)
        self.index = {a: i for i, a in enumerate(self.nodes)}
        n_layers = max(self.height.values()) + 1
        self.layers: list[list[Antichain]] = [[] for _ in range(n_layers)]
        for a in self.nodes:
            self.layers[self.height[a]].append(a)
        self.covers: list[tuple[Antichain, Antichain]] = list(covers)
        self.bottom = self.nodes[0]
        self.top = self.nodes[-1]
        self._by_label = {a.label: a for a in self.nodes}

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def node(self, label: str) -> Antichain:
        return self._by_label[label]

    def leq(self, a: Antichain, b: Antichain) -> bool:
        return a == b or a in self._below[b]

    def strictly_below(self, a: Antichain) -> set[Antichain]:
        return set(self._below[a])

    def down_set(self, a: Antichain) -> set[Antichain]:
        return set(self._below[a]) | {a}


def enumerate_antichains(n: int, ground: Sequence[str] | None = None) -> PILattice:
    return PILattice(n, ground)


def mobius_inverse(lattice: PILattice, cumulative: Mapping[Antichain, object]) -> dict:
    """Local terms ``f(a) = g(a) - sum of f over the strict down-set``, bottom-up.

    Works for any values supporting ``+`` and ``-``.
    """
    partial = {}
    for a in lattice.nodes:
        acc = cumulative[a]
        for b in sorted(lattice.strictly_below(a), key=lattice.index.__getitem__):
            acc = acc - partial[b]
        partial[a] = acc
    return partial


def cumulate(lattice: PILattice, partial: Mapping[Antichain, float]) -> dict:
    return {
        a: math.fsum(partial[b] for b in lattice.down_set(a)) for a in lattice.nodes
    }


def format_bits(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass
class DecompositionTable:
    lattice: PILattice
    target: tuple[str, ...]
    measure: str
    i_cap: dict
    i_partial: dict | None = None
    self_mode: bool = False

    def rows(self):
        """(node, i_cap, i_partial) from the top layer down."""
        for layer in reversed(self.lattice.layers):
            for a in layer:
                yield a, self.i_cap[a], None if self.i_partial is None else self.i_partial[a]

    def to_text(self) -> str:
        mode = " (self)" if self.self_mode else ""
        lines = [
            f"# measure {self.measure}, target {' '.join(self.target)}{mode}, "
            f"sources {' '.join(self.lattice.ground)}"
        ]
        for a, cap, part in self.rows():
            cell = f"{a.label}: {format_bits(cap)}"
            if part is not None:
                cell += f" ({format_bits(part)})"
            lines.append(cell)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "measure": self.measure,
                "target": list(self.target),
                "sources": list(self.lattice.ground),
                "self_mode": self.self_mode,
                "nodes": [
                    {"label": a.label, "i_cap": cap, "i_partial": part}
                    for a, cap, part in self.rows()
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "DecompositionTable":
        data = json.loads(text)
        lattice = PILattice(len(data["sources"]), data["sources"])
        cap, part = {}, {}
        for row in data["nodes"]:
            a = lattice.node(row["label"])
            cap[a] = row["i_cap"]
            part[a] = row["i_partial"]
        has_partial = all(v is not None for v in part.values())
        return cls(
            lattice,
            tuple(data["target"]),
            data["measure"],
            cap,
            part if has_partial else None,
            data.get("self_mode", False),
        )

    def to_dot(self) -> str:
        return lattice_dot(self.lattice, self.i_cap, self.i_partial, title=self.measure)


def lattice_dot(lattice: PILattice, i_cap=None, i_partial=None, title="pi_lattice") -> str:
    """Graphviz source with the full set on top and arrows pointing down."""

    def q(s):
        return '"' + s.replace('"', r"\"") + '"'

    out = [f"digraph {q(title)} {{", "  rankdir=TB;", "  node [shape=box];"]
    for a in lattice.nodes:
        label = a.label
        if i_cap is not None:
            label += "\\n" + format_bits(i_cap[a])
            if i_partial is not None:
                label += f" ({format_bits(i_partial[a])})"
        out.append(f"  {q(a.label)} [label={q(label)}];")
    for layer in reversed(lattice.layers):
        out.append("  { rank=same; " + " ".join(q(a.label) + ";" for a in layer) + " }")
    for lower, upper in sorted(
        lattice.covers, key=lambda e: (-lattice.index[e[1]], lattice.index[e[0]])
    ):
        out.append(f"  {q(upper.label)} -> {q(lower.label)};")
    out.append("}")
    return "\n".join(out) + "\n"


def _eval_node(args):
    measure, dist, target, blocks = args
    return measure(dist, target, blocks)


def evaluate_lattice(
    dist,
    target,
    measure: Callable,
    *,
    sources: Sequence[str] | None = None,
    self_mode: bool = False,
    jobs: int = 1,
) -> DecompositionTable:
    """Fill ``i_cap`` at every node by calling ``measure(dist, target, blocks)``.

    In self mode the target and the sources are both the full variable set,
    which is how a system's information about itself is decomposed.
    """
    if self_mode:
        target = dist.names
        sources = dist.names
    else:
        target = dist.subset(target)
        if sources is None:
            sources = [n for n in dist.names if n not in target]
        sources = dist.subset(sources)
    lattice = PILattice(len(sources), sources)
    tasks = [(measure, dist, target, a.named_blocks(sources)) for a in lattice.nodes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_eval_node, tasks))
    else:
        values = [_eval_node(t) for t in tasks]
    i_cap = {}
    for a, v in zip(lattice.nodes, values):
        if math.isnan(v):
            raise EvaluationError(f"measure returned NaN at node {a.label}", node=a)
        i_cap[a] = v
    name = getattr(measure, "name", getattr(measure, "__name__", "measure"))
    return DecompositionTable(lattice, tuple(target), name, i_cap, self_mode=self_mode)


def mobius_invert(table: DecompositionTable) -> DecompositionTable:
    partial = mobius_inverse(table.lattice, table.i_cap)
    return DecompositionTable(
        table.lattice, table.target, table.measure, dict(table.i_cap), partial, table.self_mode
    )


def check_local_positivity(table: DecompositionTable, tol: float = 1e-9):
    """Nodes whose local term is below ``-tol``, as ``(node, value)`` pairs."""
    if table.i_partial is None:
        raise ValueError("run mobius_invert first")
    return [(a, v) for a, v in table.i_partial.items() if v < -tol]
