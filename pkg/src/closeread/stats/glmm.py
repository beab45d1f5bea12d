"""Varying-intercept logistic regression via the Laplace approximation.

Model: y_i ~ Bernoulli(sigmoid(x_i'beta + sum_g u_g[level_g(i)])) with
u_g ~ Normal(0, sigma_g^2 I) independently per grouping factor.

Estimation mirrors the standard mixed-model recipe: an inner damped
Newton ascent finds the joint mode of (beta, u) for fixed variances, and
an outer derivative-free search maximizes the Laplace-approximated
marginal likelihood over log-sigma.  The inner problem is strictly
concave, so with damping the mode is unique and the whole procedure is
deterministic given data and tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..errors import ArgumentError, FitError
from .formula import Formula, parse_formula
from .table import Design, ObservationTable, build_design

GRAD_TOL = 1e-8
MAX_OUTER = 200
BOUNDARY_VAR = 1e-6
_VAR_FLOOR = 1e-12
_RIDGE = 1e-4


@dataclass
class ModelFit:
    formula: str
    coef_names: list
    coef: dict
    se: dict
    vcov: np.ndarray
    group_variances: dict
    group_effects: dict
    loglik: float
    aic: float
    n_obs: int
    n_groups: dict
    converged: bool
    boundary: bool
    warnings: list = field(default_factory=list)
    dropped_terms: list = field(default_factory=list)
    levels: dict = field(default_factory=dict)  # categorical levels at fit time

    def beta(self) -> np.ndarray:
        return np.asarray([self.coef[n] for n in self.coef_names])

    def odds_ratios(self) -> dict:
        return {n: math.exp(b) for n, b in self.coef.items()}


class _Joint:
    """Penalized Bernoulli log-likelihood over the stacked (beta, u)."""

    def __init__(self, X, y, z_idx, z_sizes, sigma2, ridge=0.0):
        self.X, self.y = X, y
        self.z_idx = z_idx          # list of per-row level indices
        self.z_sizes = z_sizes      # list of group sizes
        self.sigma2 = sigma2        # list of variances, aligned with z_idx
        self.ridge = ridge
        self.p = X.shape[1]
        self.m = int(sum(z_sizes))
        self.offsets = np.cumsum([0] + list(z_sizes))[:-1]

    def split(self, v):
        beta = v[: self.p]
        us = [v[self.p + o : self.p + o + s]
              for o, s in zip(self.offsets, self.z_sizes)]
        return beta, us

    def eta(self, v):
        beta, us = self.split(v)
        eta = self.X @ beta
        for idx, u in zip(self.z_idx, us):
            eta = eta + u[idx]
        return eta

    def value(self, v):
        eta = self.eta(v)
        ll = float(self.y @ eta - np.sum(np.logaddexp(0.0, eta)))
        beta, us = self.split(v)
        for u, s2 in zip(us, self.sigma2):
            ll -= 0.5 * float(u @ u) / s2
        if self.ridge:
            ll -= 0.5 * self.ridge * float(beta @ beta)
        return ll

    def grad_hess(self, v):
        eta = self.eta(v)
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        r = self.y - mu
        beta, us = self.split(v)

        g = np.empty(self.p + self.m)
        g[: self.p] = self.X.T @ r - self.ridge * beta
        for k, (idx, u, s2, o, s) in enumerate(zip(
                self.z_idx, us, self.sigma2, self.offsets, self.z_sizes)):
            g[self.p + o : self.p + o + s] = (
                np.bincount(idx, weights=r, minlength=s) - u / s2)

        H = np.zeros((self.p + self.m, self.p + self.m))
        Xw = self.X * w[:, None]
        H[: self.p, : self.p] = self.X.T @ Xw + self.ridge * np.eye(self.p)
        for idx, s2, o, s in zip(self.z_idx, self.sigma2, self.offsets,
                                 self.z_sizes):
            a, b = self.p + o, self.p + o + s
            for j in range(self.p):
                H[j, a:b] = np.bincount(idx, weights=Xw[:, j], minlength=s)
            H[a:b, : self.p] = H[: self.p, a:b].T
            H[a:b, a:b] += np.diag(
                np.bincount(idx, weights=w, minlength=s) + 1.0 / s2)
        # cross-factor blocks
        for k1 in range(len(self.z_idx)):
            for k2 in range(k1 + 1, len(self.z_idx)):
                o1, s1 = self.offsets[k1], self.z_sizes[k1]
                o2, s2_ = self.offsets[k2], self.z_sizes[k2]
                block = np.zeros((s1, s2_))
                np.add.at(block, (self.z_idx[k1], self.z_idx[k2]), w)
                H[self.p + o1 : self.p + o1 + s1,
                  self.p + o2 : self.p + o2 + s2_] = block
                H[self.p + o2 : self.p + o2 + s2_,
                  self.p + o1 : self.p + o1 + s1] = block.T
        return g, H, w

    def zwz_logdet_term(self, w):
        """log det(I_m + S^{1/2} Z'WZ S^{1/2}) for the Laplace correction."""
        if self.m == 0:
            return 0.0
        ZWZ = np.zeros((self.m, self.m))
        for k, (idx, o, s) in enumerate(zip(self.z_idx, self.offsets,
                                            self.z_sizes)):
            ZWZ[o : o + s, o : o + s] = np.diag(
                np.bincount(idx, weights=w, minlength=s))
        for k1 in range(len(self.z_idx)):
            for k2 in range(k1 + 1, len(self.z_idx)):
                o1, s1 = self.offsets[k1], self.z_sizes[k1]
                o2, s2_ = self.offsets[k2], self.z_sizes[k2]
                block = np.zeros((s1, s2_))
                np.add.at(block, (self.z_idx[k1], self.z_idx[k2]), w)
                ZWZ[o1 : o1 + s1, o2 : o2 + s2_] = block
                ZWZ[o2 : o2 + s2_, o1 : o1 + s1] = block.T
        root = np.concatenate([np.full(s, math.sqrt(s2))
                               for s, s2 in zip(self.z_sizes, self.sigma2)])
        M = np.eye(self.m) + root[:, None] * ZWZ * root[None, :]
        sign, logdet = np.linalg.slogdet(M)
        if sign <= 0:
            raise FitError("Laplace correction matrix not positive definite")
        return logdet


def _newton_mode(joint: _Joint, v0, grad_tol: float, max_iter: int = 100):
    """Damped Newton ascent to the unique joint mode."""
    v = v0.copy()
    val = joint.value(v)
    converged = False
    w = None
    for _ in range(max_iter):
        g, H, w = joint.grad_hess(v)
        if np.max(np.abs(g)) < grad_tol:
            converged = True
            break
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        # near the mode, per-step gains sink below the float resolution of
        # the objective; the acceptance margin must scale with |value|
        margin = 1e-11 * (1.0 + abs(val))
        t = 1.0
        for _ in range(60):
            cand = v + t * step
            cand_val = joint.value(cand)
            if cand_val > val - margin:
                v, val = cand, cand_val
                break
            t *= 0.5
        else:
            break  # no uphill step found; report unconverged
    if w is None:
        _, _, w = joint.grad_hess(v)
    return v, val, w, converged


def _laplace_loglik(joint: _Joint, v0, grad_tol):
    v, val, w, converged = _newton_mode(joint, v0, grad_tol)
    ll = val - 0.5 * joint.zwz_logdet_term(w)
    return ll, v, converged


def fit_logit_varying_intercepts(
        data, formula, pinned_variances: dict | None = None,
        reference: dict | None = None, grad_tol: float = GRAD_TOL,
        max_outer: int = MAX_OUTER) -> ModelFit:
    """Fit the varying-intercept logistic model described by the formula.

    data: ObservationTable or an iterable of row dicts.
    pinned_variances: group name -> fixed variance; pinning 0 removes the
        factor's intercepts entirely (fixed-effects mode when all are 0).
    """
    if isinstance(formula, str):
        formula = parse_formula(formula)
    if not isinstance(data, ObservationTable):
        data = ObservationTable.from_rows(data, reference=reference)
    pinned = dict(pinned_variances or {})
    for g in pinned:
        if g not in formula.groups:
            raise ArgumentError(f"pinned variance for unknown factor {g!r}")

    y = data.outcome(formula.response)
    if y.min() == y.max():
        raise ArgumentError("outcomes are all identical; nothing to fit")
    design = build_design(data, formula)
    warnings: list[str] = []
    dropped: list[str] = []

    # constant non-intercept columns can't be estimated; drop with a warning
    keep = [0] + [j for j in range(1, design.X.shape[1])
                  if np.ptp(design.X[:, j]) > 0]
    if len(keep) < design.X.shape[1]:
        dropped = [design.names[j] for j in range(design.X.shape[1])
                   if j not in keep]
        warnings.append(f"dropped constant term(s): {', '.join(dropped)}")
    X = design.X[:, keep]
    names = [design.names[j] for j in keep]
    scale = design.scale[keep]
    p = X.shape[1]

    active, frozen = [], {}
    for g in formula.groups:
        sizes = design.n_groups[g]
        if sizes < 2:
            raise ArgumentError(f"grouping factor {g!r} needs >= 2 levels")
        if g in pinned and pinned[g] <= 0.0:
            frozen[g] = 0.0
        else:
            active.append(g)
    z_idx = [design.z_index[g] for g in active]
    z_sizes = [design.n_groups[g] for g in active]
    free = [g for g in active if g not in pinned]

    def make_joint(sigma2, ridge=0.0):
        return _Joint(X, y, z_idx, z_sizes, sigma2, ridge)

    def sigma2_for(theta):
        out = []
        it = iter(theta)
        for g in active:
            if g in pinned:
                out.append(max(pinned[g], _VAR_FLOOR))
            else:
                out.append(max(math.exp(2.0 * next(it)), _VAR_FLOOR))
        return out

    m_total = int(sum(z_sizes))
    v_warm = np.zeros(p + m_total)
    outer_converged = True

    if free:
        state = {"v": v_warm}

        def objective(theta):
            joint = make_joint(sigma2_for(theta))
            ll, v, _ = _laplace_loglik(joint, state["v"], grad_tol)
            state["v"] = v
            return -ll

        theta0 = np.zeros(len(free))
        res = optimize.minimize(
            objective, theta0, method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-9,
                     "maxiter": max_outer * max(len(free), 1),
                     "maxfev": 4 * max_outer * max(len(free), 1)})
        theta_hat = res.x
        outer_converged = bool(res.success)
        if not res.success:
            warnings.append(f"variance search stopped early: {res.message}")
        v_warm = state["v"]
    else:
        theta_hat = np.zeros(0)

    sigma2 = sigma2_for(theta_hat)
    joint = make_joint(sigma2)
    v_hat, val, w, inner_converged = _newton_mode(joint, v_warm, grad_tol)

    ridge_used = False
    beta_int, us = joint.split(v_hat)
    if (not inner_converged) or np.max(np.abs(beta_int)) > 50.0:
        ridge_used = True
        warnings.append(
            "possible separation; refit with a small ridge penalty")
        joint = make_joint(sigma2, ridge=_RIDGE)
        v_hat, val, w, inner_converged = _newton_mode(
            joint, np.zeros(p + m_total), grad_tol)
        beta_int, us = joint.split(v_hat)

    loglik = val - 0.5 * joint.zwz_logdet_term(w)

    # covariance of beta: Schur complement of the u-block in the joint Hessian
    _, H, _ = joint.grad_hess(v_hat)
    Hbb = H[:p, :p]
    if m_total:
        Hbu = H[:p, p:]
        Huu = H[p:, p:]
        S = Hbb - Hbu @ np.linalg.solve(Huu, Hbu.T)
    else:
        S = Hbb
    try:
        vcov_int = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        raise FitError("singular information matrix; model not identifiable")

    # map back from the internally scaled columns to the caller's units
    beta = beta_int / scale
    vcov = vcov_int / np.outer(scale, scale)
    se = np.sqrt(np.clip(np.diag(vcov), 0.0, None))

    group_variances = {}
    group_effects = {}
    boundary = False
    for g, s2 in zip(active, sigma2):
        if g in pinned:
            group_variances[g] = float(pinned[g])
        else:
            group_variances[g] = 0.0 if s2 <= _VAR_FLOOR else float(s2)
            if group_variances[g] < BOUNDARY_VAR:
                boundary = True
    for g in frozen:
        group_variances[g] = 0.0
    for g, u in zip(active, us):
        group_effects[g] = {lv: float(val_)
                            for lv, val_ in zip(design.z_levels[g], u)}
    for g in frozen:
        group_effects[g] = {lv: 0.0 for lv in design.z_levels[g]}

    n_params = p + len(free)
    converged = inner_converged and outer_converged and not ridge_used
    if not converged and not warnings:
        warnings.append("fit did not converge to the requested tolerance")

    return ModelFit(
        formula=formula.text,
        coef_names=names,
        coef={n: float(b) for n, b in zip(names, beta)},
        se={n: float(s) for n, s in zip(names, se)},
        vcov=vcov,
        group_variances=group_variances,
        group_effects=group_effects,
        loglik=float(loglik),
        aic=float(-2.0 * loglik + 2.0 * n_params),
        n_obs=len(y),
        n_groups=design.n_groups,
        converged=converged,
        boundary=boundary,
        warnings=warnings,
        dropped_terms=dropped,
        levels=dict(data.levels),
    )


def predict_probability(fit: ModelFit, rows, table_levels: dict | None = None,
                        formula: str | None = None) -> np.ndarray:
    """Population-level predicted probabilities (random effects at zero).

    rows must carry every fixed-effect variable; grouping columns are
    ignored.  Categorical levels must match those seen during fitting.
    """
    f = parse_formula(formula or fit.formula)
    rows = list(rows)
    cols = {k: [r[k] for r in rows] for k in rows[0]}
    cols[f.response] = [0] * len(rows)  # placeholder outcome
    for g in f.groups:
        cols.setdefault(g, ["_"] * len(rows))
    table = ObservationTable(cols, dict(table_levels or fit.levels), len(rows))
    for k, vals in cols.items():
        if k not in table.levels and any(isinstance(v, str) for v in vals):
            table.levels[k] = sorted(set(vals))
    fixed_vars = {v for t in f.fixed for v in t.variables}
    for var in fixed_vars & set(table.levels):
        if var not in table.columns:
            continue        # build_design reports the missing column
        unseen = set(table.columns[var]) - set(table.levels[var])
        if unseen:
            raise ArgumentError(
                f"unseen level(s) {sorted(unseen)} for {var!r}")
    design = build_design(table, f)
    beta = np.zeros(design.X.shape[1])
    missing = [n for n in fit.coef_names if n not in design.names]
    if missing:
        raise ArgumentError(f"prediction rows lack term(s): {missing}")
    for j, name in enumerate(design.names):
        if name in fit.coef:
            beta[j] = fit.coef[name] * design.scale[j]
    eta = design.X @ beta
    return 1.0 / (1.0 + np.exp(-eta))
