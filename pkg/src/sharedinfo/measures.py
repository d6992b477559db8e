"""Redundancy measures and the bivariate decomposition they induce.

A measure is called as ``measure(dist, target, blocks)`` where ``blocks`` is a
sequence of variable subsets (an antichain of sources). Blocks may overlap the
target only when the target is the whole variable set of ``dist``, i.e. when a
system's information about itself is being decomposed; any other overlap is
rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import geometric
from .distribution import JointDistribution, mutual_information, co_information


def _resolve(dist: JointDistribution, target, blocks):
    s_idx = dist.indices(target)
    if not s_idx:
        raise ValueError("target must name at least one variable")
    if isinstance(blocks, str) or not blocks:
        raise ValueError("need a nonempty sequence of blocks")
    b_idx = [dist.indices(b) for b in blocks]
    if any(not b for b in b_idx):
        raise ValueError("blocks must be nonempty")
    if len(s_idx) != len(dist.names) and any(set(b) & set(s_idx) for b in b_idx):
        raise ValueError(
            "blocks overlap the target; overlap is only defined when the target "
            "is the full variable set"
        )
    return s_idx, b_idx


def _specific(dist: JointDistribution, s_idx, a_idx) -> dict:
    """``s -> sum_a p(a,s) log p(a,s)/(p(a)p(s))`` over the positive support."""
    memo_key = ("specific", s_idx, a_idx)
    cached = dist.memo.get(memo_key)
    if cached is not None:
        return cached
    joint = tuple(sorted(set(s_idx) | set(a_idx)))
    s_pos = [joint.index(i) for i in s_idx]
    a_pos = [joint.index(i) for i in a_idx]
    ps = dist._fmarginal(s_idx)
    pa = dist._fmarginal(a_idx)
    terms: dict[tuple, list] = {s: [] for s in ps}
    for key, p in dist._fmarginal(joint).items():
        s = tuple(key[i] for i in s_pos)
        a = tuple(key[i] for i in a_pos)
        terms[s].append(p * math.log2(p / (pa[a] * ps[s])))
    out = {s: math.fsum(t) for s, t in terms.items()}
    dist.memo[memo_key] = out
    return out


def specific_information(dist: JointDistribution, target, block) -> dict:
    """Per-outcome specific information ``D(p(A|s) || p(A))`` in bits."""
    s_idx, (a_idx,) = _resolve(dist, target, [block])
    ps = dist._fmarginal(s_idx)
    return {s: v / ps[s] for s, v in _specific(dist, s_idx, a_idx).items()}


def i_min(dist: JointDistribution, target, blocks) -> float:
    s_idx, b_idx = _resolve(dist, target, blocks)
    per_block = [_specific(dist, s_idx, a) for a in b_idx]
    return math.fsum(min(spec[s] for spec in per_block) for s in per_block[0])


def i_min_argmin(dist: JointDistribution, target, blocks) -> dict:
    """Index of the minimizing block for each target outcome (lowest index on ties)."""
    s_idx, b_idx = _resolve(dist, target, blocks)
    per_block = [_specific(dist, s_idx, a) for a in b_idx]
    out = {}
    for s in per_block[0]:
        values = [spec[s] for spec in per_block]
        out[s] = values.index(min(values))
    return out


def i_i(dist: JointDistribution, target, blocks) -> float:
    """Smallest mutual information between the target and a single block."""
    s_idx, b_idx = _resolve(dist, target, blocks)
    return min(math.fsum(_specific(dist, s_idx, a).values()) for a in b_idx)


def si_kl(dist: JointDistribution, target, blocks) -> float:
    _resolve(dist, target, blocks)
    return geometric.si_kl(dist, target, blocks)


def si_lr(dist: JointDistribution, target, blocks) -> float:
    _resolve(dist, target, blocks)
    return geometric.si_lr(dist, target, blocks)


@dataclass(frozen=True)
class RedundancyMeasure:
    name: str
    evaluator: Callable
    conditional_evaluator: Callable | None = None

    def __call__(self, dist, target, blocks) -> float:
        return self.evaluator(dist, target, blocks)

    def conditional(self, dist, target, blocks, given) -> float:
        if self.conditional_evaluator is not None:
            return self.conditional_evaluator(dist, target, blocks, given)
        return conditional_measure(self, dist, target, blocks, given)


def conditional_measure(measure, dist: JointDistribution, target, blocks, given) -> float:
    """Average of ``measure`` over the distributions conditioned on each outcome of ``given``."""
    g_idx = dist.indices(given)
    s_idx = dist.indices(target)
    if not g_idx:
        raise ValueError("conditioning set must be nonempty")
    if set(g_idx) & set(s_idx) or any(set(g_idx) & set(dist.indices(b)) for b in blocks):
        raise ValueError("conditioning variables must be disjoint from target and blocks")
    given = dist.subset(given)
    terms = []
    for g, pg in dist._fmarginal(g_idx).items():
        sub = dist.restrict(given, g)
        terms.append(pg * measure(sub, target, blocks))
    return math.fsum(terms)


MEASURES: dict[str, RedundancyMeasure] = {
    "imin": RedundancyMeasure("imin", i_min),
    "ii": RedundancyMeasure("ii", i_i),
    "si_kl": RedundancyMeasure("si_kl", si_kl),
    "si_lr": RedundancyMeasure("si_lr", si_lr),
}


def get_measure(name: str) -> RedundancyMeasure:
    try:
        return MEASURES[name]
    except KeyError:
        raise ValueError(f"unknown measure {name!r}; choose from {sorted(MEASURES)}") from None


@dataclass(frozen=True)
class BivariateDecomposition:
    si: float
    ui_1: float
    ui_2: float
    ci: float
    consistency_residual: float

    def as_tuple(self):
        return (self.si, self.ui_1, self.ui_2, self.ci)

    @property
    def total(self):
        return self.si + self.ui_1 + self.ui_2 + self.ci


def bivariate_decomposition(measure, dist, target, x1, x2) -> BivariateDecomposition:
    """Shared, unique and complementary parts induced by a shared-information measure.

    Negative unique or complementary terms are returned as they are.
    """
    si = measure(dist, target, [x1, x2])
    i1 = mutual_information(dist, target, x1)
    i2 = mutual_information(dist, target, x2)
    i12 = mutual_information(dist, target, tuple(dist.subset(x1)) + tuple(dist.subset(x2)))
    ui_1 = i1 - si
    ui_2 = i2 - si
    ci = i12 - si - ui_1 - ui_2
    residual = abs((i1 + ui_2) - (i2 + ui_1))
    return BivariateDecomposition(si, ui_1, ui_2, ci, residual)


def coinformation_identity_check(dist, target, x1, x2, decomposition: BivariateDecomposition) -> float:
    """|co-information - (ci - si)|; zero up to rounding for any plugged-in measure."""
    return abs(co_information(dist, target, x1, x2) - (decomposition.ci - decomposition.si))
