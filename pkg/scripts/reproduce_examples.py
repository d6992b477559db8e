"""Print every bundled worked example: lattice tables, audits, geometry and knowledge."""
import argparse

from sharedinfo import conditional_mutual_information, datafiles, evaluate_lattice, get_measure, mobius_invert
from sharedinfo.axioms import audit, theorem1_certificate
from sharedinfo.geometric import build_configuration, negative_synergy_demo
from sharedinfo.knowledge import common_knowledge, format_event, load_scenario, shared_knowledge
from sharedinfo.measures import MEASURES, bivariate_decomposition


def section(title):
    print(f"\n== {title}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--measure", default="imin", choices=sorted(MEASURES))
    args = parser.parse_args()

    section("XOR, self decomposition")
    xor = datafiles.load_dist("xor")
    table = mobius_invert(evaluate_lattice(xor, None, get_measure(args.measure), self_mode=True))
    print(table.to_text(), end="")

    section("XOR, strong-symmetry certificate")
    print("\n".join(theorem1_certificate(xor).lines()))

    section("left monotonicity")
    lm = datafiles.load_dist("left-mono")
    for name in ("imin", "ii"):
        for v in audit(name, lm, ["LM"], target=["S", "S2"], sources=["X1", "X2"]):
            print(f"{name:5s} {v.line()}")

    section("copy")
    cp = datafiles.load_dist("copy")
    for name in ("imin", "ii"):
        dec = bivariate_decomposition(MEASURES[name], cp, ["S1", "S2"], "X1", "X2")
        print(f"{name:5s} (SI, UI1, UI2, CI) = {tuple(round(x, 9) for x in dec.as_tuple())}")

    section("shared posteriors and negative synergy")
    rep = negative_synergy_demo()
    print(f"SI_KL={rep.si_kl:.6f} SI_lr={rep.si_lr:.6f} I(S:X1)={rep.mi_s_x1:.6f} "
          f"CI(SI_KL)={rep.decomposition.ci:.6f}")
    d7 = datafiles.load_dist("sec7")
    for t in build_configuration(d7, ["S"], [["X1"], ["X2"]]).tuples:
        print(f"  x={t.outcome} shared={tuple(round(v, 6) for v in t.shared.distribution)} "
              f"lambda={tuple(round(v, 6) for v in t.shared.weights)}")
    print(f"  I(S:X1|X2) = {conditional_mutual_information(d7, 'S', 'X1', 'X2'):.6f}")

    section("shared and common knowledge")
    sc = load_scenario(datafiles.builtin_path("sec8"))
    for name, e in sc.events.items():
        agents = list(sc.model.agents)
        print(f"{name}: SK = {format_event(sc.model, shared_knowledge(sc.model, agents, e))}, "
              f"CK = {format_event(sc.model, common_knowledge(sc.model, agents, e))}")


if __name__ == "__main__":
    main()
