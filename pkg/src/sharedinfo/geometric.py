"""Shared posteriors: the point of a posterior hull closest to the prior.

For every joint source outcome ``(x_1, ..., x_k)`` the posteriors
``p(S|x_i)`` span a polytope in the simplex of distributions on ``S``. The
shared posterior is the element of that polytope with the smallest KL
divergence to the prior ``p(S)``. Averaging that divergence gives ``si_kl``;
averaging the log-ratio against the joint gives ``si_lr``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import JointDistribution
from .errors import InfeasibleError

LOG2 = math.log(2.0)
POLISH_GAP = 1e-5


@dataclass(frozen=True)
class SharedPosterior:
    distribution: tuple[float, ...]
    weights: tuple[float, ...]
    kl: float
    gap: float
    iterations: int
    canonical: bool  # False when several weight vectors give the same point


def _kl(m, prior):
    mask = m > 0
    return float(np.sum(m[mask] * np.log2(m[mask] / prior[mask])))


def _grad(Q, m, prior):
    """d/dλ_i of D(λQ || prior), dropping the constant 1/ln2 term."""
    g = np.empty(Q.shape[0])
    for i, q in enumerate(Q):
        mask = q > 0
        if np.any(m[mask] <= 0):
            g[i] = -np.inf
        else:
            g[i] = float(np.sum(q[mask] * np.log2(m[mask] / prior[mask])))
    return g


def _line_search(Q, lam, d, gamma_max, prior):
    """Minimize D((lam + γ d) Q || prior) over γ in [0, gamma_max].

    The derivative along the segment is increasing, so its root is bracketed
    and found by bisection, taking a Newton step instead whenever it lands
    inside the current bracket.
    """
    dq = d @ Q
    base = lam @ Q
    nz = np.flatnonzero(dq)
    dq, base, pr = dq[nz], base[nz], prior[nz]

    def deriv(gamma):
        m = base + gamma * dq
        if np.any(m <= 0):
            # leaving the simplex face: the objective blows up on that side
            return (math.inf if np.any(dq[m <= 0] < 0) else -math.inf), 0.0
        return float(dq @ np.log2(m / pr)), float(np.sum(dq * dq / m)) / LOG2

    if deriv(gamma_max)[0] <= 0:
        return gamma_max
    if deriv(0.0)[0] >= 0:
        return 0.0
    lo, hi = 0.0, gamma_max
    gamma = 0.5 * gamma_max
    for _ in range(200):
        g1, g2 = deriv(gamma)
        if g1 > 0:
            hi = gamma
        else:
            lo = gamma
        if g1 == 0 or hi - lo <= 1e-14 * gamma_max:
            break
        step = gamma - g1 / g2 if g2 > 0 and math.isfinite(g1) else -1.0
        if lo < step < hi:
            if abs(step - gamma) <= 1e-16 * gamma_max:
                gamma = step
                break
            gamma = step
        else:
            gamma = 0.5 * (lo + hi)
    return gamma


def shared_posterior(posteriors, prior, *, tol: float = 1e-10, max_iter: int = 10_000) -> SharedPosterior:
    """Convex combination of ``posteriors`` closest to ``prior`` in KL divergence.

    Away-step Frank-Wolfe over the weight simplex with exact line search,
    started from the barycenter. Stops when the Frank-Wolfe gap drops below
    ``tol``.
    """
    Q = np.asarray(posteriors, dtype=float)
    prior = np.asarray(prior, dtype=float)
    if Q.ndim != 2 or Q.shape[0] < 1:
        raise ValueError("need at least one posterior")
    if Q.shape[1] != prior.shape[0]:
        raise ValueError("posteriors and prior live on different outcome sets")
    admissible = np.array([np.all(prior[q > 0] > 0) for q in Q])
    if not admissible.any():
        raise InfeasibleError("every posterior puts mass where the prior has none")

    lam = np.where(admissible, 1.0, 0.0)
    lam /= lam.sum()
    canonical = _affinely_independent(Q[admissible])
    if admissible.sum() == 1:
        m = lam @ Q
        return SharedPosterior(tuple(m), tuple(lam), _kl(m, prior), 0.0, 0, True)

    gap = math.inf
    it = 0
    next_polish = 0
    for it in range(1, max_iter + 1):
        m = lam @ Q
        g = _grad(Q, m, prior)
        g[~admissible] = np.inf
        active = lam > 0
        lg = float(np.sum(lam[active] * g[active]))
        j = int(np.argmin(g))
        a = int(np.flatnonzero(active)[np.argmax(g[active])])
        gap = lg - g[j]
        if gap < tol:
            break
        if gap < POLISH_GAP and it >= next_polish:
            lam = _newton_polish(Q, lam, prior)
            next_polish = it + 10
            continue
        away_gap = g[a] - lg
        if gap >= away_gap or lam[a] >= 1.0:
            d = -lam.copy()
            d[j] += 1.0
            gamma_max = 1.0
        else:
            d = lam.copy()
            d[a] -= 1.0
            gamma_max = lam[a] / (1.0 - lam[a])
        gamma = _line_search(Q, lam, d, gamma_max, prior)
        if gamma == 0.0:
            break
        lam = lam + gamma * d
        lam[np.abs(lam) < 1e-15] = 0.0
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum()
    m = lam @ Q
    return SharedPosterior(tuple(float(x) for x in m), tuple(float(x) for x in lam),
                           _kl(m, prior), float(max(gap, 0.0)), it, canonical)


def _objective(Q, lam, prior):
    return _kl(lam @ Q, prior)


def _newton_polish(Q, lam, prior, steps: int = 30):
    """Damped Newton on the face spanned by the active vertices.

    Frank-Wolfe only pins the objective down to the gap, which leaves the
    point itself off by roughly its square root; a few Newton steps on the
    active face recover the remaining digits. Steps never leave the simplex
    and never increase the objective.
    """
    lam = lam.copy()
    for _ in range(steps):
        act = np.flatnonzero(lam > 0)
        if len(act) < 2:
            break
        Qa = Q[act]
        m = lam @ Q
        mask = m > 0
        if np.any(Qa[:, ~mask] > 0):
            break
        logs = np.log2(m[mask] / prior[mask])
        g = Qa[:, mask] @ logs
        H = (Qa[:, mask] / (m[mask] * LOG2)) @ Qa[:, mask].T
        k = len(act)
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = H
        kkt[:k, k] = kkt[k, :k] = 1.0
        rhs = np.concatenate([-g, [0.0]])
        d = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
        if not np.all(np.isfinite(d)) or np.max(np.abs(d)) < 1e-16:
            break
        t = 1.0
        neg = d < 0
        if np.any(neg):
            t = min(1.0, float(np.min(-lam[act][neg] / d[neg])))
        f0 = _objective(Q, lam, prior)
        slope = float(g @ d)
        while t > 1e-12:
            trial = lam.copy()
            trial[act] = np.clip(lam[act] + t * d, 0.0, None)
            trial /= trial.sum()
            if _objective(Q, trial, prior) <= f0 + 1e-4 * t * min(slope, 0.0):
                break
            t *= 0.5
        else:
            break
        if np.array_equal(trial, lam):
            break
        lam = trial
    return lam


def _affinely_independent(Q) -> bool:
    if len(Q) <= 1:
        return True
    diffs = Q[1:] - Q[0]
    return int(np.linalg.matrix_rank(diffs, tol=1e-12)) == len(Q) - 1


# configurations ---------------------------------------------------------------

@dataclass
class TupleGeometry:
    outcome: tuple  # one outcome tuple per source block
    weight: float  # p(x_1, ..., x_k)
    posteriors: list
    shared: SharedPosterior
    joint_with_target: dict = field(default_factory=dict)  # s -> p(s, x_1, ..., x_k)


@dataclass
class PosteriorConfiguration:
    target_outcomes: list  # outcomes of S with positive prior
    prior: np.ndarray
    tuples: list  # TupleGeometry, one per positive-probability joint source outcome

    def report(self) -> dict:
        return {
            "target_outcomes": [list(s) for s in self.target_outcomes],
            "prior": [float(x) for x in self.prior],
            "tuples": [
                {
                    "outcome": [list(x) for x in t.outcome],
                    "weight": t.weight,
                    "posteriors": [[float(v) for v in q] for q in t.posteriors],
                    "shared": list(t.shared.distribution),
                    "lambda": list(t.shared.weights),
                    "lambda_canonical": t.shared.canonical,
                    "kl": t.shared.kl,
                }
                for t in self.tuples
            ],
        }


def build_configuration(dist: JointDistribution, target, sources) -> PosteriorConfiguration:
    s_idx = dist.indices(target)
    b_idx = [dist.indices(b) for b in sources]
    if not s_idx or not b_idx or any(not b for b in b_idx):
        raise ValueError("target and every source must be nonempty")
    ps = dist._fmarginal(s_idx)
    s_list = list(ps)
    s_pos = {s: i for i, s in enumerate(s_list)}
    prior = np.array([ps[s] for s in s_list])

    post = []
    for a_idx in b_idx:
        joint = tuple(sorted(set(s_idx) | set(a_idx)))
        sp = [joint.index(i) for i in s_idx]
        ap = [joint.index(i) for i in a_idx]
        pa = dist._fmarginal(a_idx)
        table = {a: np.zeros(len(s_list)) for a in pa}
        for key, p in dist._fmarginal(joint).items():
            a = tuple(key[i] for i in ap)
            table[a][s_pos[tuple(key[i] for i in sp)]] = p / pa[a]
        post.append(table)

    union = tuple(sorted(set().union(*b_idx)))
    u_pos = [[union.index(i) for i in a] for a in b_idx]
    full = tuple(sorted(set(union) | set(s_idx)))
    f_s = [full.index(i) for i in s_idx]
    f_u = [full.index(i) for i in union]
    joint_s = {}
    for key, p in dist._fmarginal(full).items():
        u = tuple(key[i] for i in f_u)
        joint_s.setdefault(u, {})[tuple(key[i] for i in f_s)] = p

    tuples = []
    for u, pu in dist._fmarginal(union).items():
        outcome = tuple(tuple(u[i] for i in pos) for pos in u_pos)
        qs = [post[i][x] for i, x in enumerate(outcome)]
        tuples.append(TupleGeometry(outcome, pu, qs, shared_posterior(qs, prior), joint_s[u]))
    return PosteriorConfiguration(s_list, prior, tuples)


def si_kl(dist: JointDistribution, target, sources) -> float:
    config = build_configuration(dist, target, sources)
    return math.fsum(t.weight * t.shared.kl for t in config.tuples)


@dataclass(frozen=True)
class LogRatioResult:
    value: float
    infinite_at: tuple  # source outcomes whose shared posterior misses a supported s


def si_lr_detail(dist: JointDistribution, target, sources) -> LogRatioResult:
    config = build_configuration(dist, target, sources)
    terms = []
    bad = []
    for t in config.tuples:
        for s, p in t.joint_with_target.items():
            i = config.target_outcomes.index(s)
            m = t.shared.distribution[i]
            if m <= 0:
                bad.append(t.outcome)
                break
            terms.append(p * math.log2(m / config.prior[i]))
    if bad:
        return LogRatioResult(-math.inf, tuple(bad))
    return LogRatioResult(math.fsum(terms), ())


def si_lr(dist: JointDistribution, target, sources) -> float:
    return si_lr_detail(dist, target, sources).value


@dataclass
class HullLemmaReport:
    ordering_violations: list  # (s1, s2, amount) with all p(s1|x_i) <= p(s2|x_i) but shared reversed
    zero_violations: list  # (s, value) with every p(s|x_i) = 0 but shared > 0

    @property
    def ok(self) -> bool:
        return not self.ordering_violations and not self.zero_violations


def verify_hull_lemma(shared: SharedPosterior, posteriors, tol: float = 1e-9) -> HullLemmaReport:
    Q = np.asarray(posteriors, dtype=float)
    m = np.asarray(shared.distribution)
    order, zeros = [], []
    n = Q.shape[1]
    for s1 in range(n):
        if np.all(Q[:, s1] == 0) and m[s1] > tol:
            zeros.append((s1, float(m[s1])))
        for s2 in range(n):
            if s1 != s2 and np.all(Q[:, s1] <= Q[:, s2]) and m[s1] > m[s2] + tol:
                order.append((s1, s2, float(m[s1] - m[s2])))
    return HullLemmaReport(order, zeros)


@dataclass
class NegativeSynergyReport:
    decomposition: object  # BivariateDecomposition under si_kl
    si_kl: float
    si_lr: float
    mi_s_x1: float
    cmi_s_x1_given_x2: float

    @property
    def negative_synergy(self) -> bool:
        return self.decomposition.ci < -1e-9

    @property
    def si_kl_below_mi(self) -> bool:
        return self.si_kl < self.mi_s_x1 - 1e-9

    @property
    def si_lr_above_mi(self) -> bool:
        """The log-ratio value exceeds I(S:X1), which monotonicity forbids."""
        return self.si_lr > self.mi_s_x1 + 1e-9


def negative_synergy_demo(dist: JointDistribution | None = None, target="S", x1="X1", x2="X2"):
    """Decompose with ``si_kl`` where S is a function of X2, exposing negative synergy."""
    from .distribution import conditional_mutual_information, mutual_information
    from .measures import MEASURES, bivariate_decomposition
    from . import datafiles

    if dist is None:
        dist = datafiles.load_dist("sec7")
    dec = bivariate_decomposition(MEASURES["si_kl"], dist, target, x1, x2)
    return NegativeSynergyReport(
        decomposition=dec,
        si_kl=dec.si,
        si_lr=si_lr(dist, target, [x1, x2]),
        mi_s_x1=mutual_information(dist, target, x1),
        cmi_s_x1_given_x2=conditional_mutual_information(dist, target, x1, x2),
    )
