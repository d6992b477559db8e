"""Finite joint distributions and the classical information functionals.

All logarithms are base 2. Probabilities ingested as fractions stay
``Fraction`` through marginalization and are converted to floats only when a
logarithm is taken.

Variable subsets are given as a single name or an iterable of names. They are
sets: order and repetition are ignored and the distribution's column order is
used internally.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DistributionError, ParseError, UnknownVariableError

TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    name: str
    arity: int

    def __post_init__(self):
        if self.arity < 1:
            raise DistributionError(f"variable {self.name!r} needs arity >= 1")


class JointDistribution:
    """Probability table over the product of the variables' outcome sets.

    Zero-mass entries are dropped; the support is kept in lexicographic order.
    Instances are immutable; marginals are memoized.
    """

    def __init__(self, variables: Sequence[Variable], masses: Mapping[tuple, Real]):
        variables = tuple(variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise DistributionError(f"duplicate variable names in {names}")
        if not variables:
            raise DistributionError("a distribution needs at least one variable")
        pmf = {}
        for outcome, p in masses.items():
            outcome = tuple(int(x) for x in outcome)
            if len(outcome) != len(variables):
                raise DistributionError(f"outcome {outcome} has wrong length")
            for x, v in zip(outcome, variables):
                if not 0 <= x < v.arity:
                    raise DistributionError(
                        f"outcome {x} out of range for {v.name} (arity {v.arity})"
                    )
            if p < 0:
                raise DistributionError(f"negative mass {p} at {outcome}")
            if p == 0:
                continue
            if outcome in pmf:
                raise DistributionError(f"duplicate outcome {outcome}")
            pmf[outcome] = p
        total = sum(pmf.values())
        if abs(float(total) - 1.0) > TOL:
            raise DistributionError(f"masses sum to {float(total)!r}, not 1")
        self._variables = variables
        self._names = tuple(names)
        self._index = {n: i for i, n in enumerate(names)}
        self._pmf = dict(sorted(pmf.items()))
        self.exact = all(isinstance(p, (int, Fraction)) for p in self._pmf.values())
        self._marginals: dict[tuple, dict] = {}
        self._fmarginals: dict[tuple, dict] = {}
        self.memo: dict = {}  # derived quantities cached by other modules

    @classmethod
    def from_rows(cls, names: Sequence[str], rows: Iterable[tuple], arities=None):
        """Build from ``(outcome_tuple, probability)`` rows.

        Arities default to one more than the largest outcome seen per column.
        Probabilities given as strings are parsed like the text format.
        """
        rows = [(tuple(o), _parse_prob(p) if isinstance(p, str) else p) for o, p in rows]
        if arities is None:
            arities = [max((o[i] for o, _ in rows), default=0) + 1 for i in range(len(names))]
        return cls([Variable(n, a) for n, a in zip(names, arities)], dict(rows))

    @classmethod
    def uniform(cls, names: Sequence[str], outcomes: Iterable[tuple], arities=None):
        outcomes = list(outcomes)
        p = Fraction(1, len(outcomes))
        return cls.from_rows(names, [(o, p) for o in outcomes], arities)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self._variables

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def support(self) -> tuple[tuple, ...]:
        return tuple(self._pmf)

    def items(self):
        return self._pmf.items()

    def prob(self, outcome) -> Real:
        return self._pmf.get(tuple(outcome), 0)

    def __len__(self):
        return len(self._pmf)

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self._variables == other._variables and self._pmf == other._pmf

    def __repr__(self):
        return f"JointDistribution({list(self._names)}, {len(self._pmf)} support points)"

    def indices(self, vars) -> tuple[int, ...]:
        """Canonical (sorted, deduplicated) column indices of a variable subset."""
        if isinstance(vars, str):
            vars = (vars,)
        out = set()
        for name in vars:
            try:
                out.add(self._index[name])
            except KeyError:
                raise UnknownVariableError(f"unknown variable {name!r}") from None
        return tuple(sorted(out))

    def subset(self, vars) -> tuple[str, ...]:
        return tuple(self._names[i] for i in self.indices(vars))

    def outcomes(self, vars) -> list[tuple]:
        """Every outcome tuple of a subset, in lexicographic order (including zero-mass ones)."""
        idx = self.indices(vars)
        return list(itertools.product(*(range(self._variables[i].arity) for i in idx)))

    def marginal_pmf(self, vars) -> dict[tuple, Real]:
        idx = self.indices(vars)
        return self._marginal(idx)

    def _marginal(self, idx: tuple[int, ...]) -> dict:
        m = self._marginals.get(idx)
        if m is None:
            m = {}
            for outcome, p in self._pmf.items():
                key = tuple(outcome[i] for i in idx)
                m[key] = m.get(key, 0) + p
            m = dict(sorted(m.items()))
            self._marginals[idx] = m
        return m

    def _fmarginal(self, idx: tuple[int, ...]) -> dict:
        m = self._fmarginals.get(idx)
        if m is None:
            m = {k: float(v) for k, v in self._marginal(idx).items()}
            self._fmarginals[idx] = m
        return m

    def marginalize(self, keep) -> "JointDistribution":
        idx = self.indices(keep)
        if not idx:
            raise ValueError("keep must name at least one variable")
        return JointDistribution([self._variables[i] for i in idx], self._marginal(idx))

    def restrict(self, given, outcome) -> "JointDistribution":
        """Distribution of the remaining variables conditioned on ``given = outcome``."""
        idx = self.indices(given)
        rest = tuple(i for i in range(len(self._names)) if i not in idx)
        if not rest:
            raise ValueError("cannot condition on every variable")
        outcome = tuple(outcome)
        norm = self._marginal(idx).get(outcome, 0)
        if norm == 0:
            raise DistributionError(f"conditioning outcome {outcome} has zero probability")
        masses = {}
        for o, p in self._pmf.items():
            if tuple(o[i] for i in idx) == outcome:
                masses[tuple(o[i] for i in rest)] = p / norm
        return JointDistribution([self._variables[i] for i in rest], masses)

    def to_text(self, directives: Mapping[str, str] | None = None) -> str:
        lines = [f"#! {k}: {v}" for k, v in (directives or {}).items()]
        lines.append(" ".join(self._names))
        for outcome, p in self._pmf.items():
            lines.append(" ".join(str(x) for x in outcome) + " " + format_prob(p))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ConditionalFamily:
    """Posteriors ``p(target | conditioner = o)`` for every positive-probability ``o``."""

    conditioner: tuple[str, ...]
    target: tuple[str, ...]
    weights: dict
    posteriors: dict
    target_outcomes: tuple[tuple, ...]

    def vector(self, o) -> list[float]:
        """Posterior for ``o`` as a dense list over ``target_outcomes``."""
        post = self.posteriors[tuple(o)]
        return [float(post.get(t, 0)) for t in self.target_outcomes]


def _check_disjoint(dist, *subsets):
    seen = set()
    resolved = []
    for s in subsets:
        idx = dist.indices(s)
        if not idx:
            raise ValueError("variable subsets must be nonempty")
        if seen & set(idx):
            raise ValueError("variable subsets must be pairwise disjoint")
        seen |= set(idx)
        resolved.append(idx)
    return resolved


def marginalize(dist: JointDistribution, keep) -> JointDistribution:
    return dist.marginalize(keep)


def condition(dist: JointDistribution, on, target) -> ConditionalFamily:
    on_idx, t_idx = _check_disjoint(dist, on, target)
    joint_idx = tuple(sorted(on_idx + t_idx))
    pos_on = [joint_idx.index(i) for i in on_idx]
    pos_t = [joint_idx.index(i) for i in t_idx]
    weights = dist._marginal(on_idx)
    posteriors = {o: {} for o in weights}
    for key, p in dist._marginal(joint_idx).items():
        o = tuple(key[i] for i in pos_on)
        t = tuple(key[i] for i in pos_t)
        posteriors[o][t] = p / weights[o]
    return ConditionalFamily(
        conditioner=dist.subset(on),
        target=dist.subset(target),
        weights=dict(weights),
        posteriors=posteriors,
        target_outcomes=tuple(dist.outcomes(target)),
    )


def _h(values) -> float:
    return -math.fsum(p * math.log2(p) for p in values if p > 0)


def entropy(dist: JointDistribution, vars) -> float:
    idx = dist.indices(vars)
    if not idx:
        raise ValueError("entropy needs at least one variable")
    return _h(dist._fmarginal(idx).values())


def _mi(dist: JointDistribution, a: tuple, b: tuple) -> float:
    if b < a:
        a, b = b, a
    joint = tuple(sorted(a + b))
    pa_pos = [joint.index(i) for i in a]
    pb_pos = [joint.index(i) for i in b]
    pa = dist._fmarginal(a)
    pb = dist._fmarginal(b)
    terms = []
    for key, p in dist._fmarginal(joint).items():
        ka = tuple(key[i] for i in pa_pos)
        kb = tuple(key[i] for i in pb_pos)
        terms.append(p * math.log2(p / (pa[ka] * pb[kb])))
    return math.fsum(terms)


def mutual_information(dist: JointDistribution, a, b) -> float:
    ia, ib = _check_disjoint(dist, a, b)
    return _mi(dist, ia, ib)


def conditional_mutual_information(dist: JointDistribution, a, b, c) -> float:
    """I(A:B|C) via the chain rule I(A:BC) - I(A:C)."""
    ia, ib, ic = _check_disjoint(dist, a, b, c)
    return _mi(dist, ia, tuple(sorted(ib + ic))) - _mi(dist, ia, ic)


def co_information(dist: JointDistribution, s, a, b) -> float:
    """I(S:A|B) - I(S:A); positive values mean net synergy."""
    _check_disjoint(dist, s, a, b)
    return conditional_mutual_information(dist, s, a, b) - mutual_information(dist, s, a)


def kl_divergence(q, p) -> float:
    """D(q || p) in bits for aligned sequences or dicts keyed by outcome.

    Returns ``math.inf`` when q puts mass where p has none.
    """
    if isinstance(q, Mapping):
        keys = sorted(set(q) | set(p))
        q = [q.get(k, 0) for k in keys]
        p = [p.get(k, 0) for k in keys]
    if len(q) != len(p):
        raise ValueError("distributions must have the same length")
    terms = []
    for qi, pi in zip(q, p):
        qi, pi = float(qi), float(pi)
        if qi <= 0:
            continue
        if pi <= 0:
            return math.inf
        terms.append(qi * math.log2(qi / pi))
    return math.fsum(terms)


# text format -----------------------------------------------------------------

_PROB_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")


def _parse_prob(token: str) -> Real:
    m = _PROB_RE.match(token)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if den == 0:
            raise ValueError("zero denominator")
        return Fraction(num, den)
    value = float(token)
    if not math.isfinite(value):
        raise ValueError("probability must be finite")
    return value


def format_prob(p) -> str:
    if isinstance(p, Fraction):
        return f"{p.numerator}/{p.denominator}" if p.denominator != 1 else str(p.numerator)
    if isinstance(p, int):
        return str(p)
    return repr(float(p))


def parse_text(text: str) -> tuple[JointDistribution, dict[str, str]]:
    """Parse the whitespace table format.

    The first non-comment line names the variables; each further line holds one
    integer outcome per variable and a probability (decimal or ``a/b``).
    ``#`` starts a comment. Lines of the form ``#! key: value`` are returned
    as directives (target sets, verdict blocks and similar metadata).
    """
    directives: dict[str, str] = {}
    names = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("#!"):
            key, sep, value = stripped[2:].partition(":")
            if not sep:
                raise ParseError("directive needs 'key: value'", lineno)
            directives[key.strip()] = value.strip()
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if names is None:
            names = tokens
            if len(set(names)) != len(names):
                raise ParseError("duplicate variable names in header", lineno)
            continue
        if len(tokens) != len(names) + 1:
            raise ParseError(
                f"expected {len(names)} outcomes and a probability, got {len(tokens)} fields",
                lineno,
            )
        try:
            outcome = tuple(int(t) for t in tokens[:-1])
        except ValueError:
            raise ParseError("outcomes must be integers", lineno) from None
        if any(x < 0 for x in outcome):
            raise ParseError("outcomes must be nonnegative", lineno)
        try:
            p = _parse_prob(tokens[-1])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad probability {tokens[-1]!r}", lineno) from None
        if p < 0:
            raise ParseError("negative probability", lineno)
        rows.append((lineno, outcome, p))
    if names is None:
        raise ParseError("missing header line")
    if not rows:
        raise ParseError("no probability rows")
    seen = {}
    for lineno, outcome, _ in rows:
        if outcome in seen:
            raise ParseError(f"outcome {outcome} repeats line {seen[outcome]}", lineno)
        seen[outcome] = lineno
    arities = [max(o[i] for _, o, _ in rows) + 1 for i in range(len(names))]
    dist = JointDistribution(
        [Variable(n, a) for n, a in zip(names, arities)],
        {o: p for _, o, p in rows},
    )
    return dist, directives


def load(path) -> tuple[JointDistribution, dict[str, str]]:
    return parse_text(Path(path).read_text())
