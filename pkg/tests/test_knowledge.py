import random

import pytest

from sharedinfo import JointDistribution, datafiles
from sharedinfo.errors import ParseError
from sharedinfo.knowledge import (
    KnowledgeModel,
    common_knowledge,
    common_knowledge_trace,
    format_event,
    knows,
    load_scenario,
    model_from_distribution,
    parse_scenario,
    possibility_reduction_bits,
    shared_knowledge,
)

import oracles


@pytest.fixture
def scenario():
    return load_scenario(datafiles.builtin_path("sec8"))


def test_scenario_sk_and_ck(scenario):
    model, e = scenario.model, scenario.events["E"]
    assert knows(model, "X1", e) == {"(0,0,00)", "(0,1,01)"}
    assert knows(model, "X2", e) == {"(0,0,00)", "(1,0,10)"}
    assert shared_knowledge(model, ["X1", "X2"], e) == {"(0,0,00)"}
    assert common_knowledge(model, ["X1", "X2"], e) == frozenset()
    trace = common_knowledge_trace(model, ["X1", "X2"], e)
    assert trace[0] == {"(0,0,00)"} and trace[-1] == frozenset()
    assert format_event(model, trace[0]) == "{(0,0,00)}"


def test_scenario_from_distribution_matches_file(scenario):
    d = JointDistribution.uniform(["X1", "X2"], [(0, 0), (0, 1), (1, 0), (1, 1)])
    model = model_from_distribution(d, {"X1": ["X1"], "X2": ["X2"]})
    e = {(0, 0), (0, 1), (1, 0)}
    assert shared_knowledge(model, ["X1", "X2"], e) == {(0, 0)}
    assert common_knowledge(model, ["X1", "X2"], e) == frozenset()
    assert format_event(model, {(0, 1)}) == "{(0,1)}"


def test_possibility_reduction():
    d = JointDistribution.uniform(["X1", "X2"], [(0, 0), (0, 1), (1, 0), (1, 1)])
    model = model_from_distribution(d, [["X1"]])
    assert possibility_reduction_bits(model, {(0, 0)}) == 2.0
    assert possibility_reduction_bits(model, set()) == float("inf")


def test_model_validation():
    with pytest.raises(ValueError):
        KnowledgeModel(("a", "b"), {"A": (frozenset({"a"}),)})
    with pytest.raises(ValueError):
        KnowledgeModel(("a", "b"), {"A": (frozenset({"a", "b"}), frozenset({"b"}))})
    with pytest.raises(ValueError):
        KnowledgeModel(("a", "a"), {})
    m = KnowledgeModel(("a", "b"), {"A": (frozenset({"a", "b"}),)})
    with pytest.raises(ValueError):
        knows(m, "B", {"a"})
    with pytest.raises(ValueError):
        knows(m, "A", {"c"})
    with pytest.raises(ValueError):
        shared_knowledge(m, [], {"a"})


@pytest.mark.parametrize(
    "text",
    [
        "agent A: {a}\nevent E: a\n",
        "states: a b\nagent A: {a} b\nevent E: a\n",
        "states: a b\nagent A: {a} {b}\n",
        "states: a b\nagent A: {a}\nevent E: a\n",
        "states: a b\nfoo: a\n",
        "states: a b\nno colon here\n",
    ],
)
def test_scenario_parse_errors(text):
    with pytest.raises(ParseError):
        parse_scenario(text)


# algebraic laws over random partition models ----------------------------------

def random_model(rng, max_states=12, max_agents=3):
    states = list(range(rng.randint(1, max_states)))
    parts = {}
    for i in range(rng.randint(1, max_agents)):
        k = rng.randint(1, len(states))
        labels = [rng.randrange(k) for _ in states]
        cells = {}
        for s, lab in zip(states, labels):
            cells.setdefault(lab, set()).add(s)
        parts[f"A{i}"] = tuple(frozenset(c) for c in cells.values())
    return KnowledgeModel(tuple(states), parts)


def random_event(rng, model):
    return frozenset(s for s in model.states if rng.random() < 0.6)


def ck_from_meet(model, agents, event):
    meet = oracles.meet_partition(model.states, [model.partitions[a] for a in agents])
    return frozenset().union(*[c for c in meet if c <= event])


def test_knowledge_laws_and_meet_oracle():
    rng = random.Random(2024)
    for _ in range(400):
        model = random_model(rng)
        agents = list(model.agents)
        e = random_event(rng, model)
        f = random_event(rng, model)
        everything = frozenset(model.states)
        for a in agents:
            ka = knows(model, a, e)
            assert ka <= e  # truth
            assert knows(model, a, ka) == ka  # positive introspection
            assert knows(model, a, everything) == everything
            assert knows(model, a, e & f) == ka & knows(model, a, f)
            if e <= f:
                assert ka <= knows(model, a, f)
            # negative introspection: not knowing is known
            assert knows(model, a, everything - ka) == everything - ka
        sk = shared_knowledge(model, agents, e)
        ck = common_knowledge(model, agents, e)
        assert ck <= sk <= e
        assert shared_knowledge(model, agents, ck) == ck
        assert ck == ck_from_meet(model, agents, e)
        assert common_knowledge(model, agents, ck) == ck


def test_exhaustive_small_models():
    # every event on every pair of partitions of a 4-state set
    states = tuple(range(4))
    partitions = [
        (frozenset({0, 1, 2, 3}),),
        (frozenset({0, 1}), frozenset({2, 3})),
        (frozenset({0, 2}), frozenset({1, 3})),
        (frozenset({0}), frozenset({1, 2, 3})),
        tuple(frozenset({s}) for s in states),
    ]
    for p in partitions:
        for q in partitions:
            model = KnowledgeModel(states, {"A": p, "B": q})
            for mask in range(16):
                e = frozenset(s for s in states if mask >> s & 1)
                assert common_knowledge(model, ["A", "B"], e) == ck_from_meet(model, ["A", "B"], e)
