"""
Linear Mixed Effects Model for Synoptic Change

Fits scenario fixed effects with nested random effects for climate model
and ensemble member:

    y = iota + gamma_j + delta_k + zeta_k(l) + eps
    delta_k ~ N(0, tau_delta^2), zeta_k(l) ~ N(0, tau_zeta^2), eps ~ N(0, tau_eps^2)

SSP126 (j = 1) is the reference category. Observations are collapsed to
(scenario, model, ensemble) cells: cell mean, count and within-cell sum of
squares are sufficient, so fitting cost depends on the number of cells
rather than the number of draws. The fixed effects and tau_eps are profiled
out by generalized least squares; the two variance ratios are optimized by
bounded L-BFGS-B from several starting points.

Usage:
    from src.stats.lmm import lmm_fit

    fit = lmm_fit(frame)   # columns: value, scenario, gcm, ensemble
    fit.table_row()
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, optimize

from src.core.errors import (
    InvalidParameterError,
    UndefinedStatisticError,
    UnidentifiableComponentError,
)
from src.models.identifiers import ScenarioId
from src.models.synoptic import LmmFit

logger = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))
OBSERVATION_COLUMNS = ("value", "scenario", "gcm", "ensemble")
RATIO_BOUND = 1e3
RATIO_STARTS = (0.0, 0.5, 2.0)
CRITERIA = ("ml", "reml")


# ============================================================================
# Input normalization
# ============================================================================

def _scenario_index(value) -> int:
    if isinstance(value, ScenarioId):
        return value.index
    if isinstance(value, (int, np.integer)):
        return ScenarioId.from_index(int(value)).index
    return ScenarioId(str(value)).index


def prepare_observations(frame: pd.DataFrame) -> pd.DataFrame:
    """
    Validate observation records and map scenarios to indices 1..3.

    Raises:
        InvalidParameterError: missing columns, empty input, non-finite values
            or absent reference scenario
    """
    missing = [c for c in OBSERVATION_COLUMNS if c not in frame.columns]
    if missing:
        raise InvalidParameterError("observations are missing columns", columns=",".join(missing))
    if frame.empty:
        raise InvalidParameterError("no observations to fit")

    out = frame.loc[:, list(OBSERVATION_COLUMNS)].copy()
    out["value"] = out["value"].astype(float)
    if not np.all(np.isfinite(out["value"].to_numpy())):
        raise InvalidParameterError("observations must be finite")
    try:
        out["scenario"] = [_scenario_index(s) for s in out["scenario"]]
    except ValueError as e:
        raise InvalidParameterError(f"unknown scenario: {e}") from e
    out["gcm"] = out["gcm"].astype(str)
    out["ensemble"] = out["ensemble"].astype(str)

    if 1 not in set(out["scenario"]):
        raise InvalidParameterError("reference scenario SSP126 must be present")
    return out


def _fixed_design(scenarios: np.ndarray, levels: Sequence[int]) -> np.ndarray:
    """Intercept plus one indicator per non-reference scenario level present."""
    columns = [np.ones(scenarios.size)]
    columns += [(scenarios == j).astype(float) for j in levels if j != 1]
    return np.column_stack(columns)


def _coefficients(beta: np.ndarray, levels: Sequence[int]) -> Tuple[float, Optional[float], Optional[float]]:
    named = {1: float(beta[0])}
    for j, b in zip([j for j in levels if j != 1], beta[1:]):
        named[j] = float(b)
    return named[1], named.get(2), named.get(3)


# ============================================================================
# Fixed-effects-only fit
# ============================================================================

@dataclass(frozen=True)
class FeFit:
    """Ordinary least squares on scenario indicators."""

    intercept_plus_g1: float
    g2_minus_g1: Optional[float]
    g3_minus_g1: Optional[float]
    tau_FE: float
    tau_R: float
    log_likelihood: float
    n_obs: int

    @property
    def coefficients(self) -> Tuple[float, Optional[float], Optional[float]]:
        return self.intercept_plus_g1, self.g2_minus_g1, self.g3_minus_g1


def _gaussian_ml_log_likelihood(rss: float, n: int) -> float:
    if rss <= 0:
        return float("inf")
    return -0.5 * n * (LOG_2PI + np.log(rss / n) + 1.0)


def fe_only_fit(frame: pd.DataFrame) -> FeFit:
    """
    Scenario-means fit; tau_FE and tau_R use the maximum-likelihood scale 1/N.

    Scenario levels absent from the data leave their coefficient as None.
    """
    obs = prepare_observations(frame)
    y = obs["value"].to_numpy()
    n = y.size

    means = obs.groupby("scenario")["value"].mean()
    fitted = obs["scenario"].map(means).to_numpy()
    rss = float(np.sum((y - fitted) ** 2))
    tss = float(np.sum((y - y.mean()) ** 2))

    reference = float(means.loc[1])
    diffs = {j: float(means.loc[j]) - reference for j in means.index if j != 1}
    return FeFit(
        intercept_plus_g1=reference,
        g2_minus_g1=diffs.get(2),
        g3_minus_g1=diffs.get(3),
        tau_FE=float(np.sqrt(rss / n)),
        tau_R=float(np.sqrt(tss / n)),
        log_likelihood=_gaussian_ml_log_likelihood(rss, n),
        n_obs=n,
    )


def r_squared(tau_R: float, tau_FE: float, tau_eps: float) -> Tuple[float, float]:
    """
    Proportions of variance explained by the fixed effects and the full model.

    Raises:
        UndefinedStatisticError: tau_R == 0
        InvalidParameterError: negative standard deviation
    """
    if min(tau_R, tau_FE, tau_eps) < 0:
        raise InvalidParameterError("standard deviations must be non-negative")
    if tau_R == 0:
        raise UndefinedStatisticError("R^2 is undefined when tau_R = 0")
    return 1.0 - (tau_FE / tau_R) ** 2, 1.0 - (tau_eps / tau_R) ** 2


# ============================================================================
# Cell-collapsed mixed model likelihood
# ============================================================================

@dataclass(frozen=True)
class _ModelBlock:
    counts: np.ndarray       # n_c per cell
    means: np.ndarray        # cell means
    design: np.ndarray       # fixed-effect rows per cell
    membership: np.ndarray   # cells x ensembles indicator


@dataclass(frozen=True)
class _CellDesign:
    blocks: Tuple[_ModelBlock, ...]
    within_ss: float
    n_obs: int
    n_fixed: int
    log_counts: float


def _collapse(obs: pd.DataFrame, levels: Sequence[int]) -> _CellDesign:
    cells = (
        obs.groupby(["gcm", "ensemble", "scenario"], sort=True)["value"]
        .agg(n="count", mean="mean", var=lambda v: float(np.var(v)))
        .reset_index()
    )
    within_ss = float((cells["n"] * cells["var"]).sum())

    blocks: List[_ModelBlock] = []
    for _, block in cells.groupby("gcm", sort=True):
        ensembles = sorted(block["ensemble"].unique())
        membership = np.array(
            [[1.0 if e == ens else 0.0 for ens in ensembles] for e in block["ensemble"]]
        )
        blocks.append(_ModelBlock(
            counts=block["n"].to_numpy(dtype=float),
            means=block["mean"].to_numpy(dtype=float),
            design=_fixed_design(block["scenario"].to_numpy(), levels),
            membership=membership,
        ))
    return _CellDesign(
        blocks=tuple(blocks),
        within_ss=within_ss,
        n_obs=int(cells["n"].sum()),
        n_fixed=1 + sum(1 for j in levels if j != 1),
        log_counts=float(np.log(cells["n"].to_numpy(dtype=float)).sum()),
    )


@dataclass(frozen=True)
class _Profile:
    log_likelihood: float
    beta: np.ndarray
    sigma2: float


def _profile(ratios: np.ndarray, cells: _CellDesign, criterion: str) -> _Profile:
    """Profiled log-likelihood at variance ratios (tau_delta/tau_eps, tau_zeta/tau_eps)."""
    lam_delta, lam_zeta = float(ratios[0]) ** 2, float(ratios[1]) ** 2
    p = cells.n_fixed
    xtmx = np.zeros((p, p))
    xtmy = np.zeros(p)
    log_det = 0.0
    factors = []
    for block in cells.blocks:
        m = (
            np.diag(1.0 / block.counts)
            + lam_zeta * block.membership @ block.membership.T
            + lam_delta
        )
        factor = linalg.cho_factor(m, lower=True)
        log_det += 2.0 * float(np.log(np.diag(factor[0])).sum())
        xtmx += block.design.T @ linalg.cho_solve(factor, block.design)
        xtmy += block.design.T @ linalg.cho_solve(factor, block.means)
        factors.append(factor)

    beta = linalg.solve(xtmx, xtmy, assume_a="pos")
    quad = cells.within_ss
    for block, factor in zip(cells.blocks, factors):
        r = block.means - block.design @ beta
        quad += float(r @ linalg.cho_solve(factor, r))

    dof = cells.n_obs if criterion == "ml" else cells.n_obs - p
    sigma2 = quad / dof
    if sigma2 <= 0:
        return _Profile(log_likelihood=float("inf"), beta=beta, sigma2=0.0)
    ll = dof * (LOG_2PI + np.log(sigma2)) + cells.log_counts + log_det + dof
    if criterion == "reml":
        ll += float(np.linalg.slogdet(xtmx)[1])
    return _Profile(log_likelihood=-0.5 * float(ll), beta=beta, sigma2=sigma2)


def _optimize_ratios(cells: _CellDesign, free: Tuple[bool, bool], criterion: str) -> np.ndarray:
    """Best variance ratios over a grid of L-BFGS-B starts; pinned ratios stay at 0."""
    free_idx = [i for i, f in enumerate(free) if f]

    def expand(x: np.ndarray) -> np.ndarray:
        ratios = np.zeros(2)
        ratios[free_idx] = x
        return ratios

    def objective(x: np.ndarray) -> float:
        value = -_profile(expand(x), cells, criterion).log_likelihood
        return value if np.isfinite(value) else 1e300

    if not free_idx:
        return np.zeros(2)

    best_x, best_value = None, np.inf
    for start in itertools.product(RATIO_STARTS, repeat=len(free_idx)):
        x0 = np.array(start, dtype=float)
        result = optimize.minimize(
            objective, x0, method="L-BFGS-B",
            bounds=[(0.0, RATIO_BOUND)] * len(free_idx),
        )
        candidates = [(float(result.fun), result.x), (objective(x0), x0)]
        for value, x in candidates:
            if value < best_value:
                best_x, best_value = np.asarray(x, dtype=float), value
    logger.debug(f"LMM ratios {expand(best_x)} with objective {best_value:.6g}")
    return expand(best_x)


def _identifiable_components(obs: pd.DataFrame) -> Tuple[bool, bool, Tuple[str, ...]]:
    n_models = obs["gcm"].nunique()
    per_model = obs.groupby("gcm")["ensemble"].nunique()
    if n_models == 1 and int(per_model.iloc[0]) == 1:
        raise UnidentifiableComponentError(
            "tau_delta", "a single model with a single ensemble member cannot separate model effects",
        )
    fixed = []
    if n_models == 1:
        logger.warning("Only one climate model present; tau_delta fixed at 0")
        fixed.append("tau_delta")
    if int(per_model.max()) == 1:
        logger.warning("Every model has one ensemble member; tau_zeta fixed at 0")
        fixed.append("tau_zeta")
    return "tau_delta" not in fixed, "tau_zeta" not in fixed, tuple(fixed)


def lmm_fit(frame: pd.DataFrame, criterion: str = "ml") -> LmmFit:
    """
    Fit the nested mixed model to observation records.

    Args:
        frame: DataFrame with columns value, scenario, gcm, ensemble
        criterion: "ml" (default) or "reml"

    Returns:
        LmmFit with tau_R and tau_FE on the 1/N scale

    Raises:
        InvalidParameterError: malformed input or missing reference scenario
        UnidentifiableComponentError: single model with a single ensemble member
    """
    if criterion not in CRITERIA:
        raise InvalidParameterError(f"unknown criterion {criterion!r}", choices=",".join(CRITERIA))
    obs = prepare_observations(frame)
    free_delta, free_zeta, fixed = _identifiable_components(obs)
    levels = sorted(set(obs["scenario"]))

    fe = fe_only_fit(obs)
    n_models = int(obs["gcm"].nunique())
    n_ensembles = int(obs.groupby(["gcm", "ensemble"]).ngroups)
    common = dict(
        criterion=criterion,
        fe_log_likelihood=fe.log_likelihood,
        n_obs=fe.n_obs,
        n_models=n_models,
        n_ensembles=n_ensembles,
        fixed_components=fixed,
    )

    y = obs["value"].to_numpy()
    if fe.tau_FE ** 2 <= 1e-24 * max(1.0, float(np.mean(y ** 2))):
        # scenario means explain everything: no variance left to apportion
        r2 = (None, None) if fe.tau_R == 0 else (1.0, 1.0)
        return LmmFit(
            intercept_plus_g1=fe.intercept_plus_g1,
            g2_minus_g1=fe.g2_minus_g1,
            g3_minus_g1=fe.g3_minus_g1,
            tau_delta=0.0, tau_zeta=0.0, tau_eps=0.0,
            tau_R=fe.tau_R, tau_FE=0.0,
            r2_fe=r2[0], r2_me=r2[1],
            log_likelihood=float("inf"),
            **common,
        )

    cells = _collapse(obs, levels)
    ratios = _optimize_ratios(cells, (free_delta, free_zeta), criterion)
    profile = _profile(ratios, cells, criterion)

    tau_eps = float(np.sqrt(profile.sigma2))
    g1, g2, g3 = _coefficients(profile.beta, levels)
    try:
        r2_fe, r2_me = r_squared(fe.tau_R, fe.tau_FE, tau_eps)
    except UndefinedStatisticError:
        r2_fe = r2_me = None

    fit = LmmFit(
        intercept_plus_g1=g1,
        g2_minus_g1=g2,
        g3_minus_g1=g3,
        tau_delta=float(ratios[0]) * tau_eps,
        tau_zeta=float(ratios[1]) * tau_eps,
        tau_eps=tau_eps,
        tau_R=fe.tau_R,
        tau_FE=fe.tau_FE,
        r2_fe=r2_fe,
        r2_me=r2_me,
        log_likelihood=profile.log_likelihood,
        **common,
    )
    logger.info(
        f"LMM ({criterion}) on {fit.n_obs} obs, {n_models} models: "
        f"tau_delta={fit.tau_delta:.4g} tau_zeta={fit.tau_zeta:.4g} tau_eps={fit.tau_eps:.4g}"
    )
    return fit


def fixed_effect_standard_errors(frame: pd.DataFrame, fit: LmmFit) -> np.ndarray:
    """
    GLS standard errors of the fixed effects at the fitted variance components.

    Used for recovery checks only; no significance testing is derived from them.
    """
    obs = prepare_observations(frame)
    levels = sorted(set(obs["scenario"]))
    cells = _collapse(obs, levels)
    sigma2 = fit.tau_eps ** 2
    if sigma2 == 0:
        return np.zeros(cells.n_fixed)
    ratios = np.array([fit.tau_delta, fit.tau_zeta]) / fit.tau_eps
    lam_delta, lam_zeta = ratios ** 2
    xtmx = np.zeros((cells.n_fixed, cells.n_fixed))
    for block in cells.blocks:
        m = np.diag(1.0 / block.counts) + lam_zeta * block.membership @ block.membership.T + lam_delta
        xtmx += block.design.T @ linalg.cho_solve(linalg.cho_factor(m, lower=True), block.design)
    return np.sqrt(np.diag(sigma2 * np.linalg.inv(xtmx)))
