"""
Adaptive Metropolis-Hastings Engine

Posterior sampling for the regression families under flat priors restricted
to their support. The proposal has two phases:

    k <= n_S : theta + N(0, s^2 I)                        (s = fixed_step_sd)
    k >  n_S : (1 - beta) N(theta, (2.38^2/d) Sigma_k)     adaptive
               + beta     N(theta, (s^2/d) I)              small step

where Sigma_k is the running covariance of the whole chain history. The
literal-proposal switch drops the 1/d factors (the small step then uses
s^2/4). A chain runs n_B + n_I iterations and keeps the last n_I states,
rejected steps repeating the current state.

Usage:
    from src.stats.mcmc import run_chain

    chain = run_chain(series, "gevr", settings.chain_config(seed=42))
    rate = acceptance_rate(chain, Phase.ADAPTIVE)
"""

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import (
    ClimdeltaError,
    EmptyResultError,
    InitializationError,
    InvalidExtrapolationError,
    InvalidParameterError,
)
from src.core.rng import stream
from src.models.chain import ChainConfig, FunctionalDraws, Phase, PosteriorChain, ProposalBranch
from src.models.series import AnnualSeries
from src.stats.covariance import RunningCovariance
from src.stats.trend import RegressionModel, get_model
from src.utils.helpers import AttemptsExhausted, retry_until_valid

logger = logging.getLogger(__name__)

ADAPTIVE_SCALE = 2.38 ** 2
LITERAL_SMALL_STEP_DIVISOR = 4.0

ModelLike = Union[str, RegressionModel]


def _resolve_model(model: ModelLike) -> RegressionModel:
    return get_model(model) if isinstance(model, str) else model


# ============================================================================
# Building blocks
# ============================================================================

class _NoValidStart(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def init_state(
    x: np.ndarray,
    model: ModelLike,
    rng: np.random.Generator,
    fractions: Optional[np.ndarray] = None,
    max_retries: int = 1000,
) -> Tuple[np.ndarray, float]:
    """
    Random starting vector with finite log posterior.

    Returns:
        (theta, log_likelihood)

    Raises:
        InitializationError: degenerate data or no valid start within max_retries
    """
    model = _resolve_model(model)
    x = np.asarray(x, dtype=float)
    if fractions is None:
        fractions = np.linspace(0.0, 1.0, x.size)
    if x.size < 2 or not np.all(np.isfinite(x)) or not np.std(x) > 0:
        raise InitializationError(
            "data have zero spread or non-finite values; the scale estimate is degenerate",
            n=int(x.size),
        )

    def attempt() -> Tuple[np.ndarray, float]:
        theta = model.initial_guess(x, rng)
        violation = model.support_violation(theta)
        if violation is not None:
            raise _NoValidStart(f"prior support of {violation}")
        ll = model.log_likelihood(theta, x, fractions)
        if not np.isfinite(ll):
            raise _NoValidStart("observations outside the likelihood support")
        return theta, ll

    try:
        return retry_until_valid(attempt, max_retries, _NoValidStart)
    except AttemptsExhausted as e:
        reason = e.last_error.reason if isinstance(e.last_error, _NoValidStart) else str(e.last_error)
        raise InitializationError(
            f"no valid {model.name} starting point after {e.attempts} attempts (last: {reason})",
            attempts=e.attempts,
            last_reason=reason,
            mean=float(np.mean(x)),
            sd=float(np.std(x, ddof=1)),
        ) from None


def propose(
    current: np.ndarray,
    k: int,
    cov: Optional[np.ndarray],
    cfg: ChainConfig,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, ProposalBranch]:
    """
    Candidate for iteration ``k`` (1-based) and the branch that produced it.

    The number of random variates consumed does not depend on the branch, so
    chains stay aligned whatever the covariance looks like.
    """
    d = current.size
    if k <= cfg.n_adapt_start:
        return current + cfg.fixed_step_sd * rng.standard_normal(d), ProposalBranch.FIXED

    u = rng.random()
    z = rng.standard_normal(d)
    divisor = LITERAL_SMALL_STEP_DIVISOR if cfg.literal_proposal else d
    small_sd = np.sqrt(cfg.fixed_step_sd ** 2 / divisor)
    if u < cfg.beta_mix or cov is None:
        return current + small_sd * z, ProposalBranch.SMALL_STEP

    scale = ADAPTIVE_SCALE if cfg.literal_proposal else ADAPTIVE_SCALE / d
    try:
        chol = np.linalg.cholesky(scale * cov)
    except np.linalg.LinAlgError:
        logger.debug("covariance not positive definite at iteration %d; using small step", k)
        return current + small_sd * z, ProposalBranch.SMALL_STEP
    return current + chol @ z, ProposalBranch.ADAPTIVE


def mh_accept(log_current: float, log_candidate: float, rng: np.random.Generator) -> bool:
    """Accept with probability min(1, exp(log_candidate - log_current)); -inf is never accepted."""
    u = rng.random()
    if not np.isfinite(log_candidate):
        return False
    delta = log_candidate - log_current
    return bool(u < np.exp(min(delta, 0.0)))


# ============================================================================
# Chains
# ============================================================================

def run_chain(
    series: AnnualSeries,
    model: ModelLike,
    cfg: ChainConfig,
    rng: Optional[np.random.Generator] = None,
    negated: bool = False,
) -> PosteriorChain:
    """
    Run one adaptive MH chain.

    Args:
        series: Observations (already negated for minima)
        model: Family name or RegressionModel instance
        cfg: Schedule and tuning; cfg.seed fixes the stream
        rng: Override the default stream(cfg.seed, series slug)
        negated: Record that the data are negated minima

    Returns:
        PosteriorChain with exactly cfg.n_draws retained states
    """
    model = _resolve_model(model)
    rng = rng if rng is not None else stream(cfg.seed, series.key.slug())
    x = series.to_array()
    window = series.window
    fractions = window.fractions()

    theta, ll = init_state(x, model, rng, fractions, cfg.max_init_retries)
    d = model.dim
    history = RunningCovariance(d)
    history.update(theta)

    draws = np.empty((cfg.n_draws, d))
    log_likelihood = np.empty(cfg.n_draws)
    accepted = {Phase.FIXED: 0, Phase.ADAPTIVE: 0}
    proposed = {Phase.FIXED: 0, Phase.ADAPTIVE: 0}
    branches: Counter = Counter()

    for k in range(1, cfg.n_iterations + 1):
        phase = Phase.FIXED if k <= cfg.n_adapt_start else Phase.ADAPTIVE
        cov = history.regularized(cfg.covariance_jitter) if phase == Phase.ADAPTIVE else None
        candidate, branch = propose(theta, k, cov, cfg, rng)
        ll_candidate = model.log_target(candidate, x, fractions)
        proposed[phase] += 1
        branches[branch.value] += 1
        if mh_accept(ll, ll_candidate, rng):
            theta, ll = candidate, ll_candidate
            accepted[phase] += 1
        history.update(theta)
        if k > cfg.n_burnin:
            draws[k - cfg.n_burnin - 1] = theta
            log_likelihood[k - cfg.n_burnin - 1] = ll

    chain = PosteriorChain(
        model=model.name,
        param_names=model.param_names,
        draws=draws,
        log_likelihood=log_likelihood,
        accepted=accepted,
        proposed=proposed,
        config=cfg,
        window=window,
        key=series.key,
        negated=negated,
        require_positive_mean=getattr(model, "require_positive_mean", True),
        branch_counts=dict(sorted(branches.items())),
    )
    logger.debug("chain %s: acceptance fixed=%.3f adaptive=%.3f", series.key.slug(),
                 _rate(accepted, proposed, Phase.FIXED), _rate(accepted, proposed, Phase.ADAPTIVE))
    return chain


def _rate(accepted, proposed, phase: Phase) -> float:
    return accepted[phase] / proposed[phase] if proposed[phase] else float("nan")


def acceptance_rate(chain: PosteriorChain, phase: Union[Phase, str]) -> float:
    """Accepted / proposed for one phase."""
    phase = Phase(phase)
    total = chain.proposed.get(phase, 0)
    if total == 0:
        raise InvalidParameterError(f"phase {phase.value} ran no iterations", phase=phase.value)
    return chain.accepted.get(phase, 0) / total


def posterior_functional(
    chain: PosteriorChain,
    f: Callable[[np.ndarray], float],
) -> FunctionalDraws:
    """
    Apply ``f`` to every retained draw.

    Draws for which ``f`` raises InvalidExtrapolationError are excluded and
    counted per offending parameter.

    Raises:
        EmptyResultError: every draw was excluded
    """
    values: List[float] = []
    excluded_by: Counter = Counter()
    for theta in chain.draws:
        try:
            values.append(float(f(theta)))
        except InvalidExtrapolationError as e:
            excluded_by[e.parameter] += 1
    excluded = sum(excluded_by.values())
    if not values:
        raise EmptyResultError(
            f"all {chain.n_draws} draws were excluded from the functional",
            excluded=excluded,
        )
    if excluded:
        logger.info("excluded %d of %d draws (%s)", excluded, chain.n_draws, dict(excluded_by))
    return FunctionalDraws(
        values=np.asarray(values),
        excluded_count=excluded,
        excluded_by=dict(sorted(excluded_by.items())),
    )


def effective_sample_size(x: np.ndarray) -> float:
    """
    Effective sample size by Geyer's initial positive sequence.

    Autocorrelations come from an FFT; consecutive pairs are summed until the
    first non-positive pair.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        return float(n)
    centred = x - x.mean()
    if not np.any(centred):
        return float(n)
    spectrum = np.fft.rfft(centred, n=2 * n)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), n=2 * n)[:n] / n
    rho = acov / acov[0]
    tau = -1.0
    for m in range(0, n - 1, 2):
        pair = rho[m] + rho[m + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(n / max(tau, 1.0 / n))


def chain_metadata(chain: PosteriorChain) -> dict:
    """JSON-ready sidecar content for a chain."""
    rates = {
        phase.value: (acceptance_rate(chain, phase) if chain.proposed.get(phase) else None)
        for phase in Phase
    }
    return {
        "model": chain.model,
        "param_names": list(chain.param_names),
        "key": chain.key.to_record() if chain.key else None,
        "slug": chain.key.slug() if chain.key else None,
        "negated": chain.negated,
        "require_positive_mean": chain.require_positive_mean,
        "window": chain.window.model_dump(),
        "config": chain.config.model_dump(),
        "seed": chain.config.seed,
        "n_draws": chain.n_draws,
        "accepted": {p.value: chain.accepted.get(p, 0) for p in Phase},
        "proposed": {p.value: chain.proposed.get(p, 0) for p in Phase},
        "acceptance_rates": rates,
        "branch_counts": dict(chain.branch_counts),
        "effective_sample_size": {
            name: effective_sample_size(chain.draws[:, j]) for j, name in enumerate(chain.param_names)
        },
    }


# ============================================================================
# Batches
# ============================================================================

def _fit_task(args) -> Union[PosteriorChain, ClimdeltaError]:
    series, model, cfg, negated = args
    try:
        return run_chain(series, model, cfg, negated=negated)
    except ClimdeltaError as e:
        return e


def fit_many(
    series: Sequence[AnnualSeries],
    model: Union[ModelLike, Sequence[ModelLike]],
    cfg: ChainConfig,
    jobs: int = 1,
    negated: Union[bool, Sequence[bool]] = False,
) -> List[Union[PosteriorChain, ClimdeltaError]]:
    """
    Fit independent chains, one per series, in input order.

    Each chain draws from stream(cfg.seed, slug), so results do not depend on
    ``jobs`` or scheduling. Domain errors are returned in place of the chain
    instead of aborting the batch.
    """
    n = len(series)
    models = list(model) if isinstance(model, (list, tuple)) else [model] * n
    flags = list(negated) if isinstance(negated, (list, tuple)) else [negated] * n
    tasks = [(s, m, cfg, neg) for s, m, neg in zip(series, models, flags)]
    if jobs <= 1 or n <= 1:
        return [_fit_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_fit_task, tasks))
