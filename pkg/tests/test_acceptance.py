"""Acceptance gate: one test per criterion, with a PASS/FAIL summary line each.

Run on its own with ``pytest tests/test_acceptance.py -v`` (or execute this
file directly); the summary lines appear at the end of the session.
"""
import functools
import math
import random
import sys

import numpy as np
import pytest

from sharedinfo import datafiles, evaluate_lattice, get_measure, mobius_invert, mutual_information
from sharedinfo.axioms import FAIL, PASS, audit, replay, search_violations, SearchConfig, theorem1_certificate
from sharedinfo.cli import main
from sharedinfo.geometric import build_configuration, shared_posterior, si_kl, si_lr, verify_hull_lemma
from sharedinfo.knowledge import (
    KnowledgeModel,
    common_knowledge,
    knows,
    load_scenario,
    shared_knowledge,
)
from sharedinfo.lattice import cumulate, mobius_inverse
from sharedinfo.measures import MEASURES, bivariate_decomposition, i_i, i_min

import oracles
from strategies import seeded_dist

RESULTS = {}


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                RESULTS[number] = (FAIL, title, f"{type(exc).__name__}: {exc}".splitlines()[0])
                raise
            RESULTS[number] = (PASS, title, detail or "")

        return run

    return wrap


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    lines = ["", "acceptance summary"]
    for n in sorted(RESULTS):
        status, title, detail = RESULTS[n]
        lines.append(f"  [{status.upper()}] {n}. {title}" + (f" -- {detail}" if detail else ""))
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    for line in lines:
        if reporter is not None:
            reporter.write_line(line)
        else:
            print(line)


# 1 --------------------------------------------------------------------------------

XOR_TWOS = {"123", "12", "13", "23", "12|13", "12|23", "13|23", "12|13|23"}
XOR_LOCAL_ONES = {"12|13|23", "1|2|3"}


@criterion(1, "XOR lattice reproduction")
def test_xor_lattice(capsys):
    assert main(["decompose", "xor.dist", "--measure", "imin", "--self", "--format", "json"]) == 0
    from sharedinfo.lattice import DecompositionTable

    table = DecompositionTable.from_json(capsys.readouterr().out)
    assert len(table.i_cap) == 18
    for a in table.lattice:
        cap = 2.0 if a.label in XOR_TWOS else 1.0
        part = 1.0 if a.label in XOR_LOCAL_ONES else 0.0
        assert abs(table.i_cap[a] - cap) <= 1e-9, a.label
        assert abs(table.i_partial[a] - part) <= 1e-9, a.label
    return "18 nodes match, local terms 1 at 12|13|23 and 1|2|3"


# 2 --------------------------------------------------------------------------------

@criterion(2, "left-monotonicity counterexample")
def test_left_monotonicity():
    d = datafiles.load_dist("left-mono")
    blocks = [["X1"], ["X2"]]
    expected_s = 1 / 3 + (2 / 3) * (0.75 * math.log2(3) - 1)
    v_s = i_min(d, ["S"], blocks)
    v_ss = i_min(d, ["S", "S2"], blocks)
    assert abs(v_s - expected_s) <= 1e-7 and abs(v_s - 0.459148) <= 1e-6
    assert abs(v_ss - 1 / 3) <= 1e-7
    (lm,) = audit("imin", d, ["LM"], target=["S", "S2"], sources=["X1", "X2"])
    assert lm.status == FAIL and abs(lm.gap - 0.125815) <= 1e-6
    (lm_ii,) = audit("ii", d, ["LM"], target=["S", "S2"], sources=["X1", "X2"])
    assert lm_ii.status == PASS
    return f"I_min(S)={v_s:.6f} I_min(SS')={v_ss:.6f} gap={lm.gap:.6f}; I_I passes"


# 3 --------------------------------------------------------------------------------

@criterion(3, "strong-symmetry incompatibility certificate")
def test_strong_symmetry_certificate():
    rep = theorem1_certificate(datafiles.load_dist("xor"))
    det = {a.label: v for a, v in rep.determined.items()}
    expected = {"123": 2, "1": 1, "2": 1, "3": 1, "12|13": 2, "12|23": 2, "13|23": 2,
                "1|23": 1, "2|13": 1, "3|12": 1, "1|2": 0, "1|3": 0, "2|3": 0}
    for label, value in expected.items():
        assert abs(det[label] - value) <= 1e-9, label
    assert rep.infeasible
    assert rep.certificate_node.label == "12|13|23"
    assert rep.certificate_bound <= -1 + 1e-9
    return f"I_partial(12|13|23) <= {rep.certificate_bound:g}"


# 4 --------------------------------------------------------------------------------

@criterion(4, "geometric counterexample")
def test_geometric():
    d = datafiles.load_dist("sec7")
    config = build_configuration(d, ["S"], [["X1"], ["X2"]])
    # independent route first: dense grid over the segment of each tuple
    grid_kl = 0.0
    grid_lr = 0.0
    for t in config.tuples:
        pt, kl = oracles.grid_shared_posterior(t.posteriors[0], t.posteriors[1], config.prior, step=1e-5)
        grid_kl += t.weight * kl
        for s, p in t.joint_with_target.items():
            i = config.target_outcomes.index(s)
            grid_lr += p * math.log2(pt[i] / config.prior[i])
        (x1,), (x2,) = t.outcome
        want = t.posteriors[0] if x1 == x2 else config.prior
        assert np.max(np.abs(np.array(t.shared.distribution) - want)) <= 1e-8
    kl = si_kl(d, ["S"], [["X1"], ["X2"]])
    lr = si_lr(d, ["S"], [["X1"], ["X2"]])
    mi = mutual_information(d, "S", "X1")
    assert abs(kl - grid_kl) <= 1e-6 and abs(kl - 0.054469) <= 1e-6
    assert abs(lr - grid_lr) <= 1e-6
    assert abs(mi - 0.081704) <= 1e-6
    assert kl < mi < lr
    ci = bivariate_decomposition(MEASURES["si_kl"], d, ["S"], "X1", "X2").ci
    assert abs(ci - (-0.027235)) <= 1e-6 and ci < 0
    return f"SI_KL={kl:.6f} (grid {grid_kl:.6f}) SI_lr={lr:.6f} (grid {grid_lr:.6f}) CI={ci:.6f}"


# 5 --------------------------------------------------------------------------------

@criterion(5, "copy example and knowledge counterpart")
def test_copy_and_knowledge():
    d = datafiles.load_dist("copy")
    target, blocks = ["S1", "S2"], [["X1"], ["X2"]]
    assert abs(i_min(d, target, blocks) - 1) <= 1e-9
    assert abs(i_i(d, target, blocks) - 1) <= 1e-9
    dec = bivariate_decomposition(MEASURES["imin"], d, target, "X1", "X2")
    assert all(abs(x - y) <= 1e-9 for x, y in zip(dec.as_tuple(), (1, 0, 0, 1)))
    sc = load_scenario(datafiles.builtin_path("sec8"))
    e = sc.events["E"]
    assert shared_knowledge(sc.model, ["X1", "X2"], e) == frozenset({"(0,0,00)"})
    assert common_knowledge(sc.model, ["X1", "X2"], e) == frozenset()
    return "decomposition (1,0,0,1); SK={(0,0,00)}, CK={}"


# 6 --------------------------------------------------------------------------------

N_RANDOM = 1000


def _random_models(rng, count):
    for _ in range(count):
        states = list(range(rng.randint(1, 12)))
        parts = {}
        for i in range(rng.randint(1, 3)):
            k = rng.randint(1, len(states))
            cells = {}
            for s in states:
                cells.setdefault(rng.randrange(k), set()).add(s)
            parts[f"A{i}"] = tuple(frozenset(c) for c in cells.values())
        yield KnowledgeModel(tuple(states), parts)


@criterion(6, "property suites over seeded random inputs")
def test_property_suites():
    rng = random.Random("acceptance-properties")
    failures = []
    checked = 0
    for trial in range(N_RANDOM):
        n = rng.randint(1, 3)
        names = ["S"] + [f"X{i + 1}" for i in range(n)]
        d = seeded_dist(rng, names, max_arity=3)
        checked += 1
        for m in ("imin", "ii"):
            for v in audit(m, d, ["GP", "S0", "I", "M"], target=["S"], tol=1e-7):
                if v.status == FAIL:
                    failures.append(f"trial {trial} {m} {v.line()}")
        for table in (evaluate_lattice(d, ["S"], get_measure("imin")),):
            lo = table.i_cap
            hi = evaluate_lattice(d, ["S"], get_measure("ii")).i_cap
            if any(lo[a] > hi[a] + 1e-9 for a in lo):
                failures.append(f"trial {trial} I_min > I_I")
            partial = mobius_inverse(table.lattice, lo)
            back = cumulate(table.lattice, partial)
            if any(abs(back[a] - lo[a]) > 1e-9 for a in lo):
                failures.append(f"trial {trial} Möbius round trip")
        if n >= 2:
            config = build_configuration(d, ["S"], [[x] for x in names[1:]])
            for t in config.tuples:
                prev = None
                for k in range(1, len(t.posteriors) + 1):
                    sp = shared_posterior(t.posteriors[:k], config.prior)
                    if prev is not None and sp.kl > prev + 1e-7:
                        failures.append(f"trial {trial} shrinkage at k={k}")
                    if not verify_hull_lemma(sp, t.posteriors[:k], tol=1e-7).ok:
                        failures.append(f"trial {trial} hull lemma at k={k}")
                    prev = sp.kl

    models = 0
    for model in _random_models(rng, N_RANDOM):
        models += 1
        agents = list(model.agents)
        e = frozenset(s for s in model.states if rng.random() < 0.6)
        for a in agents:
            ka = knows(model, a, e)
            if not ka <= e or knows(model, a, ka) != ka:
                failures.append(f"model {models} K law for {a}")
        sk = shared_knowledge(model, agents, e)
        ck = common_knowledge(model, agents, e)
        meet = oracles.meet_partition(model.states, [model.partitions[a] for a in agents])
        ck_oracle = frozenset().union(*[c for c in meet if c <= e])
        if not (ck <= sk <= e) or shared_knowledge(model, agents, ck) != ck or ck != ck_oracle:
            failures.append(f"model {models} SK/CK")
    assert not failures, failures[:5]
    return f"{checked} distributions, {models} partition models, 0 failures"


# 7 --------------------------------------------------------------------------------

@criterion(7, "violation search regression")
def test_violation_search():
    config = SearchConfig("imin", "LM", seed=0, budget=100_000)
    res = search_violations(config)
    assert res.found and res.trial < 100_000
    text = res.witness_text(config)
    _, verdicts, directives = replay(text)
    gaps = [v.gap for v in verdicts if v.axiom == "LM" and v.status == FAIL]
    assert gaps and gaps[0] > 1e-5
    assert float(directives["gap"]) == gaps[0] == res.gap
    _, verdicts2, _ = replay(text)
    assert [v.gap for v in verdicts2] == [v.gap for v in verdicts]
    return f"trial {res.trial}, {len(res.case.dist)} support rows, gap {res.gap!r} replayed identically"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
