"""Property suites run by ``medul verify``.

Each suite checks a population-level identity or inequality by exact
enumeration over finite joints (or, for ``w-limit``, by comparing closed-form
fits) and reports a :class:`SuiteResult`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from medul import oracle
from medul.datasets import SyntheticConfig, gen_synthetic
from medul.estimators import fit_joint_block, fit_two_step


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def suite_objective_bound(trials=1000, seed=0, slack=-1e-12) -> SuiteResult:
    """Population objective never falls below the MSE, for random joints, f, h and w."""
    rng = np.random.default_rng(seed)
    worst, violations = np.inf, 0
    for t in range(trials):
        nx, nu, ny = rng.integers(1, 6, size=3)
        J = oracle.random_joint(
            rng, nx, nu, ny, satisfy=bool(t % 2), sparsity=0.3 if t % 3 == 0 else 0.0
        )
        f = rng.normal(scale=2.0, size=nx)
        h = rng.normal(scale=2.0, size=nu)
        w = rng.uniform(0.01, 0.99)
        gap = oracle.population_J(J, f, h, w) - oracle.population_mse(J, f)
        worst = min(worst, gap)
        violations += gap < slack
    return SuiteResult(
        "theorem1", violations == 0, f"{violations} violations in {trials} draws, min slack {worst:.3e}",
        {"violations": int(violations), "min_slack": float(worst)},
    )


def shrinkage_terms(J, f, w):
    """``(min_h J, MSE(f), regularizer, constant)`` where constant is the leftover."""
    h, val = oracle.min_h_population(J, f, w)
    fu = oracle.f_given_u(J, f)
    reg = (1.0 - w) / w * float(np.sum(J.p_xu * (np.asarray(f)[:, None] - np.nan_to_num(fu)[None, :]) ** 2))
    m = oracle.population_mse(J, f)
    return h, val, m, reg, val - m - reg


def enumerated_constant(J, w) -> float:
    """``w/(1-w) E[(Y - E[Y|U])^2]`` by a direct loop over outcomes."""
    eu = oracle.cond_means(J).y_given_u
    total = 0.0
    for i in range(J.p.shape[0]):
        for j in range(J.p.shape[1]):
            for k in range(J.p.shape[2]):
                if J.p[i, j, k] > 0:
                    total += J.p[i, j, k] * (J.ys[k] - eu[j]) ** 2
    return w / (1.0 - w) * total


def suite_shrinkage(instances=20, fs=10, seed=0, tol=1e-10) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_spread = worst_const = worst_h = 0.0
    for _ in range(instances):
        J = oracle.random_joint(rng, *rng.integers(2, 6, size=3), satisfy=True)
        w = rng.uniform(0.05, 0.95)
        consts = []
        for _ in range(fs):
            f = rng.normal(size=J.xs.shape[0])
            h, *_, c = shrinkage_terms(J, f, w)
            consts.append(c)
            worst_h = max(worst_h, float(np.max(np.abs(h - oracle.min_h_quadratic(J, f, w)))))
        consts = np.array(consts)
        worst_spread = max(worst_spread, float(consts.max() - consts.min()))
        worst_const = max(worst_const, float(np.max(np.abs(consts - enumerated_constant(J, w)))))
    ok = worst_spread <= tol and worst_const <= tol and worst_h <= tol
    return SuiteResult(
        "shrinkage", ok,
        f"constant spread {worst_spread:.2e}, constant vs enumeration {worst_const:.2e}, h vs quadratic {worst_h:.2e}",
        {"spread": worst_spread, "const_err": worst_const, "h_err": worst_h},
    )


def jensen_gap_by_enumeration(J, h_star) -> np.ndarray:
    """``E[h(U)|X=x] - h(E[U|X=x])`` summed outcome by outcome."""
    out = np.empty(J.xs.shape[0])
    for i in range(J.xs.shape[0]):
        mass = eh = 0.0
        eu = np.zeros(J.us.shape[1])
        for j in range(J.us.shape[0]):
            m = J.p[i, j].sum()
            mass += m
            eh += m * float(h_star(J.us[j]))
            eu += m * J.us[j]
        out[i] = eh / mass - float(h_star(eu / mass))
    return out


def suite_naive(seed=0, tol=1e-12) -> SuiteResult:
    J, h_star = oracle.jensen_instance()
    pop = oracle.naive_population(J, h_star)
    gap = pop.f_star - pop.f_combine
    jensen = jensen_gap_by_enumeration(J, h_star)
    under = bool(np.all(pop.f_combine < pop.f_star))
    gap_err = float(np.max(np.abs(gap - jensen)))
    integral_err = float(np.max(np.abs(pop.f_integral - pop.f_star)))
    rng = np.random.default_rng(seed)
    for _ in range(50):
        Jr = oracle.random_joint(rng, *rng.integers(1, 6, size=3), satisfy=True)
        pr = oracle.naive_population(Jr, lambda u: np.zeros(len(u)))
        integral_err = max(integral_err, float(np.max(np.abs(pr.f_integral - pr.f_star))))
    ok = under and gap_err <= tol and integral_err <= tol
    return SuiteResult(
        "naive-inconsistency", ok,
        f"under-estimates={under}, gap {gap.tolist()} vs Jensen {jensen.tolist()}, integral err {integral_err:.2e}",
        {"gap_err": gap_err, "integral_err": integral_err},
    )


def suite_lecam(cs=(0.1, 0.5, 2.0), seed=0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    problems = []
    for xs, px in (([-1.0, 1.0], [0.5, 0.5]), ([-2.0, -1.0, 1.0, 2.0], [0.25] * 4), ([-3.0, 0.0, 3.0], [0.2, 0.6, 0.2])):
        qu = rng.random(3)
        qu /= qu.sum()
        problems.append((xs, px, [[0.0], [1.0], [2.5]], qu))
    marg = gap = sep = 0.0
    for c in cs:
        for xs, px, us, qu in problems:
            pair = oracle.lecam_pair(c, xs, px, us, qu)
            marg = max(marg, float(np.max(np.abs(pair.p1.p_xu - pair.p2.p_xu))),
                       float(np.max(np.abs(pair.p1.p_uy - pair.p2.p_uy))))
            for J in (pair.p1, pair.p2):
                gap = max(gap, abs(oracle.assumption_gap(J) - c * c))
            sep = max(sep, abs(oracle.rho(pair.p1, pair.p2) - 4 * c * c))
    ok = marg <= 1e-15 and gap <= 1e-12 and sep <= 1e-12
    return SuiteResult(
        "lecam", ok, f"marginal diff {marg:.1e}, gap err {gap:.1e}, rho err {sep:.1e}",
        {"marginal_diff": marg, "gap_err": gap, "rho_err": sep},
    )


def w_limit_distances(ws=(0.9, 0.99, 0.999), lam=1e-9, seed=0, n=2000, features="poly:2"):
    """Distances from Joint-RR weights at each w to the 2Step-RR weights (same tiny lambda)."""
    S_X, S_Y, _ = gen_synthetic(SyntheticConfig(dim=1, n=n, n_prime=n, n_test=1, seed=seed))
    two = fit_two_step(S_X, S_Y, features, features, lam, lam, seed=seed)
    ref = two.theta
    d = [float(np.linalg.norm(fit_joint_block(S_X, S_Y, features, features, w, lam, seed).theta - ref)) for w in ws]
    return d, float(np.linalg.norm(ref))


def suite_w_limit(seed=0) -> SuiteResult:
    ws = (0.9, 0.99, 0.999)
    d, ref = w_limit_distances(ws, seed=seed)
    decreasing = all(b < a for a, b in zip(d, d[1:]))
    close = d[-1] <= 1e-3 * (1.0 + ref)
    return SuiteResult(
        "w-limit", decreasing and close,
        "d(w) = " + ", ".join(f"{w}: {v:.3e}" for w, v in zip(ws, d)) + f"; bound {1e-3 * (1 + ref):.3e}",
        {"distances": d, "ref_norm": ref},
    )


def suite_instance(J, trials=200, seed=0, tol=1e-10) -> SuiteResult:
    """Checks that apply to one user-supplied joint.

    The objective bound is probed with random f, h and w. When the joint
    satisfies conditional mean independence, the shrinkage constant and the
    integral estimator are checked too; otherwise the gap is only reported.
    """
    rng = np.random.default_rng(seed)
    nx, nu = J.xs.shape[0], J.us.shape[0]
    worst = np.inf
    for _ in range(trials):
        f, h, w = rng.normal(scale=2.0, size=nx), rng.normal(scale=2.0, size=nu), rng.uniform(0.01, 0.99)
        worst = min(worst, oracle.population_J(J, f, h, w) - oracle.population_mse(J, f))
    ok = worst >= -1e-12
    gap = oracle.assumption_gap(J)
    detail = f"min slack {worst:.3e} over {trials} draws, assumption gap {gap:.3e}"
    metrics = {"min_slack": float(worst), "gap": gap}
    if gap <= oracle.GAP_TOL and np.all(J.p_x > 0):
        w = 0.5
        consts = [shrinkage_terms(J, rng.normal(size=nx), w)[-1] for _ in range(10)]
        const_err = float(np.max(np.abs(np.array(consts) - enumerated_constant(J, w))))
        pop = oracle.naive_population(J, lambda u: np.zeros(len(u)))
        integral_err = float(np.max(np.abs(pop.f_integral - pop.f_star)))
        ok = ok and const_err <= tol and integral_err <= 1e-12
        detail += f", shrinkage constant err {const_err:.2e}, integral err {integral_err:.2e}"
        metrics.update(const_err=const_err, integral_err=integral_err)
    return SuiteResult("instance", bool(ok), detail, metrics)


SUITES = {
    "theorem1": suite_objective_bound,
    "shrinkage": suite_shrinkage,
    "naive-inconsistency": suite_naive,
    "lecam": suite_lecam,
    "w-limit": suite_w_limit,
}


def run_suites(names, trials=None, seed=0) -> list[SuiteResult]:
    out = []
    for name in names:
        fn = SUITES[name]
        if name == "theorem1" and trials is not None:
            out.append(fn(trials=trials, seed=seed))
        else:
            out.append(fn(seed=seed))
    return out
