"""Axiom audits for redundancy measures, counterexample replay and violation search.

Axiom ids:

    GP   global positivity          I(S: a) >= 0
    S0   weak symmetry              invariance under permuting blocks
    I    self-redundancy            one block gives the mutual information
    M    monotonicity               order-preserving on the lattice; appending a
                                    superset block changes nothing (audited
                                    as clause "inequality" and clause "equality")
    LP   local positivity           Möbius-inverted terms are >= 0
    S1   strong symmetry            the target can swap places with a block
    LM   left monotonicity          I(S: a) <= I(SS': a)
    LC   left chain rule            I(SS': a) = I(S: a) + I(S': a | S)
    Id2  identity                   I(A1 A2: A1; A2) = I(A1: A2)
"""
from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .distribution import JointDistribution, Variable, entropy, mutual_information, parse_text
from .lattice import Antichain, DecompositionTable, PILattice, mobius_inverse
from .measures import RedundancyMeasure, get_measure

AXIOMS = ("GP", "S0", "I", "M", "LP", "S1", "LM", "LC", "Id2")
AXIOM_TOL = 1e-7

PASS, FAIL, NA = "pass", "fail", "n/a"


def normalize_axiom(name: str) -> str:
    for a in AXIOMS:
        if a.lower() == name.lower():
            return a
    raise ValueError(f"unknown axiom {name!r}; choose from {', '.join(AXIOMS)}")


@dataclass
class Witness:
    """Everything needed to replay a failed check."""

    dist: JointDistribution
    target: tuple
    sources: tuple
    self_mode: bool
    case: str  # human-readable description of the compared quantities


@dataclass
class AxiomVerdict:
    axiom: str
    status: str
    gap: float = 0.0
    clause: str = ""
    witness: Witness | None = None
    detail: str = ""

    def line(self) -> str:
        name = self.axiom + (f"[{self.clause}]" if self.clause else "")
        text = f"{name}: {self.status.upper()}"
        if self.status == FAIL:
            text += f" gap={self.gap:.6g}"
        if self.detail:
            text += f"  {self.detail}"
        return text


def _overlap_mi(dist, a, b) -> float:
    """I(A:B) for possibly overlapping subsets, H(A) + H(B) - H(A u B)."""
    a, b = dist.subset(a), dist.subset(b)
    if not set(a) & set(b):
        return mutual_information(dist, a, b)
    return entropy(dist, a) + entropy(dist, b) - entropy(dist, tuple(set(a) | set(b)))


class _Auditor:
    def __init__(self, measure, dist, target, sources, self_mode, tol):
        self.measure = measure
        self.dist = dist
        self.self_mode = self_mode
        if self_mode:
            target = dist.names
            sources = dist.names
        else:
            target = dist.subset(target)
            if sources is None:
                sources = [n for n in dist.names if n not in target]
            sources = dist.subset(sources)
            if set(target) & set(sources):
                raise ValueError("target and sources overlap; use self mode")
        self.target = tuple(target)
        self.sources = tuple(sources)
        self.lattice = PILattice(len(self.sources), self.sources)
        self.tol = tol
        self._cache = {}

    def value(self, target, blocks) -> float:
        key = (tuple(sorted(target)), tuple(tuple(b) for b in blocks))
        v = self._cache.get(key)
        if v is None:
            v = self.measure(self.dist, target, [list(b) for b in blocks])
            self._cache[key] = v
        return v

    def node_value(self, a: Antichain, target=None) -> float:
        return self.value(target or self.target, a.named_blocks(self.sources))

    def witness(self, case) -> Witness:
        return Witness(self.dist, self.target, self.sources, self.self_mode, case)

    def verdict(self, axiom, worst, checked=True, clause=""):
        """``worst`` is ``(gap, case)`` of the largest violation amount or None."""
        if not checked:
            return AxiomVerdict(axiom, NA, clause=clause, detail="not applicable to this input")
        if worst is not None and worst[0] > self.tol:
            return AxiomVerdict(axiom, FAIL, worst[0], clause, self.witness(worst[1]), worst[1])
        return AxiomVerdict(axiom, PASS, 0.0 if worst is None else max(worst[0], 0.0), clause)

    @staticmethod
    def _worse(worst, gap, case):
        if worst is None or gap > worst[0]:
            return (gap, case)
        return worst

    def tlabel(self, target):
        return "".join(target) if len(target) == 1 else "(" + ",".join(target) + ")"

    # individual axioms

    def gp(self):
        worst = None
        for a in self.lattice:
            worst = self._worse(worst, -self.node_value(a), f"I({self.tlabel(self.target)}: {a.label}) < 0")
        return [self.verdict("GP", worst)]

    def s0(self):
        worst, checked = None, False
        for a in self.lattice:
            blocks = a.named_blocks(self.sources)
            if len(blocks) < 2:
                continue
            checked = True
            base = self.value(self.target, blocks)
            for perm in itertools.permutations(blocks):
                gap = abs(self.value(self.target, perm) - base)
                worst = self._worse(worst, gap, f"block order of {a.label}")
        return [self.verdict("S0", worst, checked)]

    def self_redundancy(self):
        worst = None
        for a in self.lattice:
            if len(a.blocks) != 1:
                continue
            (block,) = a.named_blocks(self.sources)
            gap = abs(self.node_value(a) - _overlap_mi(self.dist, self.target, block))
            worst = self._worse(worst, gap, f"I({self.tlabel(self.target)}: {a.label}) vs mutual information")
        return [self.verdict("I", worst)]

    def monotonicity(self):
        ineq = None
        for a, b in itertools.permutations(self.lattice.nodes, 2):
            if self.lattice.leq(a, b):
                gap = self.node_value(a) - self.node_value(b)
                ineq = self._worse(ineq, gap, f"{a.label} <= {b.label} but value decreases")
        eq, checked = None, False
        subsets = [
            tuple(c)
            for r in range(1, len(self.sources) + 1)
            for c in itertools.combinations(self.sources, r)
        ]
        for a in self.lattice:
            blocks = a.named_blocks(self.sources)
            base = self.value(self.target, blocks)
            for sup in subsets:
                if sup in blocks or not any(set(b) < set(sup) for b in blocks):
                    continue
                checked = True
                gap = abs(self.value(self.target, blocks + [sup]) - base)
                label = "".join(str(self.sources.index(x) + 1) for x in sup)
                eq = self._worse(eq, gap, f"appending superset {label} to {a.label}")
        return [
            self.verdict("M", ineq, clause="inequality"),
            self.verdict("M", eq, checked, clause="equality"),
        ]

    def local_positivity(self):
        cap = {a: self.node_value(a) for a in self.lattice}
        partial = mobius_inverse(self.lattice, cap)
        worst = None
        for a, v in partial.items():
            worst = self._worse(worst, -v, f"local term at {a.label} = {v:.6g}")
        return [self.verdict("LP", worst)]

    def strong_symmetry(self):
        worst, checked = None, False
        if not self.self_mode:
            for a in self.lattice:
                blocks = a.named_blocks(self.sources)
                base = self.value(self.target, blocks)
                for i, swapped in enumerate(blocks):
                    others = blocks[:i] + blocks[i + 1:]
                    if any(set(o) & set(swapped) for o in others):
                        continue
                    checked = True
                    v = self.value(swapped, [self.target] + others)
                    worst = self._worse(
                        worst, abs(v - base),
                        f"swap {self.tlabel(self.target)} with block {''.join(str(self.sources.index(x) + 1) for x in swapped)} of {a.label}",
                    )
        return [self.verdict("S1", worst, checked)]

    def _splits(self):
        t = self.target
        for r in range(1, len(t)):
            for left in itertools.combinations(t, r):
                yield left, tuple(x for x in t if x not in left)

    def left_monotonicity(self):
        worst, checked = None, False
        if not self.self_mode:
            for left, _ in self._splits():
                checked = True
                for a in self.lattice:
                    gap = self.node_value(a, left) - self.node_value(a)
                    worst = self._worse(
                        worst, gap,
                        f"I({self.tlabel(left)}: {a.label}) > I({self.tlabel(self.target)}: {a.label})",
                    )
        return [self.verdict("LM", worst, checked)]

    def left_chain_rule(self):
        worst, checked = None, False
        if not self.self_mode:
            for left, right in self._splits():
                checked = True
                for a in self.lattice:
                    blocks = a.named_blocks(self.sources)
                    cond = self.measure.conditional(self.dist, right, blocks, left)
                    gap = abs(self.node_value(a) - self.node_value(a, left) - cond)
                    worst = self._worse(
                        worst, gap,
                        f"I({self.tlabel(self.target)}: {a.label}) != I({self.tlabel(left)}: {a.label}) + I({self.tlabel(right)}: {a.label} | {self.tlabel(left)})",
                    )
        return [self.verdict("LC", worst, checked)]

    def identity(self):
        worst, checked = None, False
        for x, y in itertools.combinations(self.sources, 2):
            checked = True
            sub = self.dist.marginalize([x, y])
            v = self.measure(sub, sub.names, [[x], [y]])
            gap = abs(v - mutual_information(sub, x, y))
            worst = self._worse(worst, gap, f"I({x}{y}: {x}; {y}) vs I({x}: {y})")
        return [self.verdict("Id2", worst, checked)]

    def run(self, axiom):
        return {
            "GP": self.gp,
            "S0": self.s0,
            "I": self.self_redundancy,
            "M": self.monotonicity,
            "LP": self.local_positivity,
            "S1": self.strong_symmetry,
            "LM": self.left_monotonicity,
            "LC": self.left_chain_rule,
            "Id2": self.identity,
        }[axiom]()


def audit(
    measure,
    dist: JointDistribution,
    axioms=None,
    *,
    target=None,
    sources=None,
    self_mode: bool = False,
    tol: float = AXIOM_TOL,
) -> list[AxiomVerdict]:
    """Check ``measure`` on ``dist`` against the listed axioms (all by default).

    Every lattice node over ``sources`` is examined. Axioms that cannot be
    posed for this input shape get a ``n/a`` verdict.
    """
    if isinstance(measure, str):
        measure = get_measure(measure)
    if not isinstance(measure, RedundancyMeasure):
        measure = RedundancyMeasure(getattr(measure, "__name__", "measure"), measure)
    if target is None and not self_mode:
        raise ValueError("a target is required unless self_mode is set")
    auditor = _Auditor(measure, dist, target, sources, self_mode, tol)
    verdicts = []
    for ax in axioms or AXIOMS:
        verdicts.extend(auditor.run(normalize_axiom(ax)))
    return verdicts


def worst_gap(verdicts, axiom: str) -> float:
    return max((v.gap for v in verdicts if v.axiom == axiom and v.status == FAIL), default=0.0)


def failed(verdicts) -> set[str]:
    return {v.axiom for v in verdicts if v.status == FAIL}


# builtin cases ----------------------------------------------------------------

@dataclass
class CounterexampleCase:
    name: str
    dist: JointDistribution
    target: tuple = ()
    sources: tuple | None = None
    self_mode: bool = False
    expected: dict = field(default_factory=dict)  # (measure, axiom) -> status
    values: dict = field(default_factory=dict)  # description -> expected bits

    def audit(self, measure, axioms=None, tol=AXIOM_TOL):
        return audit(measure, self.dist, axioms, target=self.target or None,
                     sources=self.sources, self_mode=self.self_mode, tol=tol)


def case_from_text(name: str, text: str) -> CounterexampleCase:
    dist, directives = parse_text(text)
    return CounterexampleCase(
        name=name,
        dist=dist,
        target=tuple(directives.get("target", "").split()),
        sources=tuple(directives["sources"].split()) if "sources" in directives else None,
        self_mode=directives.get("mode", "") == "self",
    )


def builtin_cases() -> dict[str, CounterexampleCase]:
    from . import datafiles

    log3 = math.log2(3)
    cases = {}
    for name in ("xor", "copy", "left-mono", "sec7"):
        cases[name] = case_from_text(name, datafiles.builtin_path(name).read_text())
    cases["xor"].expected = {("imin", "LP"): PASS, ("ii", "LP"): PASS, ("imin", "M"): PASS}
    cases["xor"].values = {"imin(123: 1|2|3)": 1.0, "imin(123: 12|13|23)": 2.0}
    cases["left-mono"].expected = {("imin", "LM"): FAIL, ("ii", "LM"): PASS}
    cases["left-mono"].values = {
        "imin(S: 1|2)": 1 / 3 + (2 / 3) * (0.75 * log3 - 1),
        "imin(SS2: 1|2)": 1 / 3,
    }
    cases["copy"].expected = {
        ("imin", "LM"): PASS, ("ii", "LM"): PASS, ("imin", "Id2"): FAIL, ("ii", "Id2"): FAIL,
    }
    cases["copy"].values = {"imin(S: 1|2)": 1.0, "ii(S: 1|2)": 1.0}
    h13 = -(1 / 3) * math.log2(1 / 3) - (2 / 3) * math.log2(2 / 3)
    cases["sec7"].values = {
        "I(S:X1)": 1 - h13,
        "si_kl(S: 1|2)": (4 / 6) * (1 - h13),
        "si_lr(S: 1|2)": (4 / 6) * math.log2(4 / 3),
    }
    return cases


# strong symmetry and the incompatibility certificate --------------------------

class Affine:
    """``const + sum coeff * unknown`` with unknowns keyed by lattice node."""

    def __init__(self, const=0.0, coeffs=None):
        self.const = const
        self.coeffs = dict(coeffs or {})

    def __add__(self, other):
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0.0) + v
        return Affine(self.const + other.const, c)

    def __neg__(self):
        return Affine(-self.const, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def extremes(self, bounds) -> tuple[float, float]:
        lo = hi = self.const
        for k, c in self.coeffs.items():
            a, b = bounds[k]
            lo += min(c * a, c * b)
            hi += max(c * a, c * b)
        return lo, hi


@dataclass
class Theorem1Report:
    lattice: PILattice
    determined: dict  # node -> value fixed by entropies and mutual informations
    expression: dict  # node -> description such as "H(12)" or "I(1:23)"
    bounds: dict  # unknown node -> (lower, upper) from monotonicity and positivity
    partial_range: dict  # node -> (min, max) of its local term over the unknown box
    certificate_node: Antichain | None
    certificate_bound: float | None
    infeasible: bool

    def strong_symmetry_table(self) -> DecompositionTable:
        """Cumulative values with every unknown set to its upper bound."""
        cap = {a: self.determined.get(a, self.bounds.get(a, (0, 0))[1]) for a in self.lattice}
        partial = mobius_inverse(self.lattice, cap)
        return DecompositionTable(self.lattice, self.lattice.ground, "strong-symmetry", cap, partial, True)

    def lines(self) -> list[str]:
        out = []
        for layer in reversed(self.lattice.layers):
            for a in layer:
                if a in self.determined:
                    out.append(f"{a.label}: {self.expression[a]} = {self.determined[a]:.6g}")
                else:
                    lo, hi = self.bounds[a]
                    out.append(f"{a.label}: ? in [{lo:.6g}, {hi:.6g}]")
        if self.infeasible:
            out.append(
                f"infeasible: I_partial({self.certificate_node.label}) <= {self.certificate_bound:.6g}"
            )
        else:
            out.append("consistent: no local term is forced negative")
        return out


def theorem1_certificate(dist: JointDistribution | None = None, tol: float = 1e-9) -> Theorem1Report:
    """Fill the self-decomposition lattice as strong symmetry dictates and bound the rest.

    Single blocks get entropies, pairs of blocks get mutual informations, and
    nodes with three or more blocks are unknowns bounded by monotonicity
    (and by positivity from below). Local terms are affine in the unknowns;
    a node whose local term is negative over the whole box certifies that
    strong symmetry, monotonicity, self-redundancy and local positivity
    cannot hold together.
    """
    if dist is None:
        from . import datafiles

        dist = datafiles.load_dist("xor")
    names = dist.names
    lattice = PILattice(len(names), names)
    determined, expression = {}, {}
    for a in lattice:
        blocks = a.named_blocks(names)
        lab = [
            "".join(str(names.index(x) + 1) for x in b) for b in blocks
        ]
        if len(blocks) == 1:
            determined[a] = entropy(dist, blocks[0])
            expression[a] = f"H({lab[0]})"
        elif len(blocks) == 2:
            determined[a] = _overlap_mi(dist, blocks[0], blocks[1])
            expression[a] = f"I({lab[0]}:{lab[1]})"

    bounds = {}
    for a in lattice:
        if a in determined:
            continue
        lower = [determined[b] for b in lattice.strictly_below(a) if b in determined]
        upper = [determined[b] for b in lattice.nodes if b != a and lattice.leq(a, b) and b in determined]
        bounds[a] = (max([0.0] + lower), min(upper) if upper else math.inf)

    # an unknown whose interval has collapsed is determined
    for a, (lo, hi) in list(bounds.items()):
        if abs(hi - lo) <= tol:
            determined[a] = hi
            expression[a] = "forced by monotonicity"
            del bounds[a]

    cap = {a: Affine(determined[a]) if a in determined else Affine(0.0, {a: 1.0}) for a in lattice}
    partial = mobius_inverse(lattice, cap)
    ranges = {a: partial[a].extremes(bounds) for a in lattice}
    cert_node, cert_bound = None, None
    for a in lattice:
        lo, hi = ranges[a]
        if hi < -tol and (cert_bound is None or hi < cert_bound):
            cert_node, cert_bound = a, hi
    return Theorem1Report(
        lattice, determined, expression, bounds, ranges, cert_node, cert_bound, cert_node is not None
    )


# randomized violation search ---------------------------------------------------

@dataclass
class SearchConfig:
    measure: str
    axiom: str
    n_sources: int = 2
    arities: tuple = (2, 3)
    support: tuple = (3, 8)
    max_denominator: int = 12
    seed: int = 0
    budget: int = 100_000
    threshold: float = 1e-5


@dataclass
class SearchResult:
    found: bool
    trials: int
    case: CounterexampleCase | None = None
    gap: float = 0.0
    trial: int | None = None
    verdict: AxiomVerdict | None = None

    def witness_text(self, config: SearchConfig) -> str:
        c = self.case
        directives = {
            "measure": config.measure,
            "axiom": normalize_axiom(config.axiom),
            "target": " ".join(c.target),
            "sources": " ".join(c.sources),
            "gap": repr(self.gap),
            "seed": str(config.seed),
            "trial": str(self.trial),
        }
        return c.dist.to_text(directives)


def _target_names(axiom):
    return ("S", "S2") if axiom in ("LM", "LC") else ("S",)


def random_case(config: SearchConfig, trial: int) -> CounterexampleCase:
    """Seeded random distribution with rational masses of small denominator."""
    rng = random.Random(f"{config.seed}:{trial}")
    axiom = normalize_axiom(config.axiom)
    sources = tuple(f"X{i + 1}" for i in range(config.n_sources))
    targets = _target_names(axiom)
    names = sources + targets
    arities = [rng.choice(config.arities) for _ in names]
    space = list(itertools.product(*(range(a) for a in arities)))
    lo, hi = config.support
    size = rng.randint(lo, min(hi, len(space), config.max_denominator))
    rows = rng.sample(space, size)
    den = rng.randint(size, config.max_denominator)
    cuts = sorted(rng.sample(range(1, den), size - 1))
    counts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    masses = {r: Fraction(c, den) for r, c in zip(rows, counts)}
    dist = JointDistribution([Variable(n, a) for n, a in zip(names, arities)], masses)
    return CounterexampleCase(f"trial-{trial}", dist, targets, sources)


def _gap(config: SearchConfig, case: CounterexampleCase) -> tuple[float, AxiomVerdict | None]:
    axiom = normalize_axiom(config.axiom)
    try:
        verdicts = case.audit(config.measure, [axiom])
    except (ValueError, ArithmeticError):
        return 0.0, None
    bad = [v for v in verdicts if v.status == FAIL]
    if not bad:
        return 0.0, None
    worst = max(bad, key=lambda v: v.gap)
    return worst.gap, worst


def _compact(case: CounterexampleCase, masses: dict) -> CounterexampleCase:
    names = case.dist.names
    dist = JointDistribution.from_rows(names, sorted(masses.items()))
    return CounterexampleCase(case.name, dist, case.target, case.sources, case.self_mode)


def _round_masses(masses: dict, den: int) -> dict | None:
    """Largest-remainder rounding to multiples of ``1/den``; None if nothing survives."""
    items = sorted(masses.items())
    scaled = [(k, v * den) for k, v in items]
    floors = {k: int(math.floor(v)) for k, v in scaled}
    short = den - sum(floors.values())
    order = sorted(scaled, key=lambda kv: (-(kv[1] - floors[kv[0]]), kv[0]))
    for k, _ in order[:short]:
        floors[k] += 1
    out = {k: Fraction(c, den) for k, c in floors.items() if c > 0}
    return out or None


def shrink(config: SearchConfig, case: CounterexampleCase) -> tuple[CounterexampleCase, float, AxiomVerdict]:
    """Drop support rows and round masses while the violation stays above threshold."""
    case = _compact(case, dict(case.dist.items()))
    gap, verdict = _gap(config, case)
    changed = True
    while changed:
        changed = False
        masses = dict(case.dist.items())
        for row in list(masses):
            if len(masses) <= 1:
                break
            rest = {k: v for k, v in masses.items() if k != row}
            total = sum(rest.values())
            candidate = _compact(case, {k: Fraction(v) / Fraction(total) for k, v in rest.items()})
            g, v = _gap(config, candidate)
            if g > config.threshold:
                case, gap, verdict, changed = candidate, g, v, True
                break
    masses = {k: Fraction(v) for k, v in case.dist.items()}
    current_den = max(m.denominator for m in masses.values())
    for den in range(2, min(config.max_denominator, current_den - 1) + 1):
        rounded = _round_masses(masses, den)
        if rounded is None:
            continue
        candidate = _compact(case, rounded)
        g, v = _gap(config, candidate)
        if g > config.threshold:
            case, gap, verdict = candidate, g, v
            break
    return case, gap, verdict


def _scan(args):
    config, start, stop = args
    for trial in range(start, stop):
        case = random_case(config, trial)
        gap, _ = _gap(config, case)
        if gap > config.threshold:
            return trial
    return None


def search_violations(config: SearchConfig, jobs: int = 1, chunk: int = 500) -> SearchResult:
    """Seeded random hunt for a distribution violating ``config.axiom``.

    Trials are numbered; the lowest violating trial index wins regardless of
    ``jobs``, so results are reproducible for a fixed seed.
    """
    chunks = [(config, s, min(s + chunk, config.budget)) for s in range(0, config.budget, chunk)]
    hit = None
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for result in pool.map(_scan, chunks):
                if result is not None:
                    hit = result
                    break
    else:
        for c in chunks:
            hit = _scan(c)
            if hit is not None:
                break
    if hit is None:
        return SearchResult(False, config.budget)
    case, gap, verdict = shrink(config, random_case(config, hit))
    case.name = f"{config.measure}-{normalize_axiom(config.axiom)}-seed{config.seed}-trial{hit}"
    return SearchResult(True, hit + 1, case, gap, hit, verdict)


def replay(text: str, tol: float = AXIOM_TOL) -> tuple[CounterexampleCase, list[AxiomVerdict], dict]:
    """Re-run the audit recorded in a witness file's directives."""
    case = case_from_text("replay", text)
    _, directives = parse_text(text)
    measure = directives.get("measure", "imin")
    axioms = [directives["axiom"]] if "axiom" in directives else None
    return case, case.audit(measure, axioms, tol), directives
