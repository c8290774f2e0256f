"""
Synoptic Summaries Across Climate Models

Pools posterior change draws for one (variable, zone, scenario) group with
equal weight per climate model, and each ensemble member weighted equally
within its model:

    w = (1 / G) * (1 / E_g) / n_draws

No resampling is involved, so pooled summaries are deterministic.

Usage:
    from src.stats.synoptic import pool_equal_weight, expected_change, prob_positive

    pooled = pool_equal_weight(deltas)
    expected_change(pooled), prob_positive(pooled)
"""

import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src.core.errors import InvalidParameterError
from src.models.synoptic import DeltaDraws, PooledDraws, QuantileSummary
from src.stats.weighted import weighted_fraction_positive, weighted_mean, weighted_quantile

logger = logging.getLogger(__name__)

SUMMARY_PROBABILITIES = (0.025, 0.25, 0.5, 0.75, 0.975)


def pool_equal_weight(groups: Sequence[DeltaDraws]) -> PooledDraws:
    """
    Concatenate draws with equal total mass per GCM and per ensemble within a GCM.

    Raises:
        InvalidParameterError: no groups, or groups from different (variable, zone, scenario, measure)
    """
    if not groups:
        raise InvalidParameterError("no change draws to pool")
    signatures = {(g.group, g.measure) for g in groups}
    if len(signatures) > 1:
        raise InvalidParameterError(
            "pooled draws must share variable, zone, scenario and measure",
            groups=str(sorted(str(s) for s in signatures)),
        )

    by_gcm: Dict[str, List[DeltaDraws]] = defaultdict(list)
    for g in groups:
        by_gcm[g.key.gcm].append(g)

    n_gcm = len(by_gcm)
    values, weights = [], []
    for gcm in sorted(by_gcm):
        members = by_gcm[gcm]
        for member in members:
            n = member.draws.size
            values.append(member.draws)
            weights.append(np.full(n, 1.0 / (n_gcm * len(members) * n)))
    values = np.concatenate(values)
    weights = np.concatenate(weights)
    return PooledDraws(values=values, weights=weights / weights.sum())


def expected_change(pooled: PooledDraws) -> float:
    """Weighted mean of the pooled draws."""
    return weighted_mean(pooled.values, pooled.weights)


def prob_positive(pooled: PooledDraws) -> float:
    """Weighted probability of a strictly positive change."""
    return weighted_fraction_positive(pooled.values, pooled.weights)


def quantile_summary(pooled: PooledDraws) -> QuantileSummary:
    """Weighted mean plus the 2.5/25/50/75/97.5% type-7 quantiles."""
    q = weighted_quantile(pooled.values, SUMMARY_PROBABILITIES, pooled.weights)
    mean = expected_change(pooled)
    return QuantileSummary(
        mean=mean, q025=float(q[0]), q25=float(q[1]), median=float(q[2]),
        q75=float(q[3]), q975=float(q[4]),
    )


def unweighted(draws: DeltaDraws) -> PooledDraws:
    """Single dataset as pooled draws with equal weights."""
    n = draws.draws.size
    return PooledDraws(values=draws.draws, weights=np.full(n, 1.0 / n))


def group_by_signature(
    deltas: Iterable[DeltaDraws],
) -> Dict[Tuple[str, str, str, str], List[DeltaDraws]]:
    """Group change draws by (variable, zone, scenario, measure), sorted for stable output."""
    grouped: Dict[Tuple[str, str, str, str], List[DeltaDraws]] = defaultdict(list)
    for d in deltas:
        grouped[(*d.group, d.measure)].append(d)
    for members in grouped.values():
        members.sort(key=lambda d: d.key.slug())
    return dict(sorted(grouped.items()))


def summary_rows(deltas: Iterable[DeltaDraws]) -> List[dict]:
    """Rows of the expected-change table: variable, zone, scenario, E_delta, P_positive."""
    rows = []
    for (variable, zone, scenario, measure), members in group_by_signature(deltas).items():
        pooled = pool_equal_weight(members)
        rows.append({
            "variable": variable,
            "zone": zone,
            "scenario": scenario,
            "measure": measure,
            "E_delta": expected_change(pooled),
            "P_positive": prob_positive(pooled),
            "n_gcms": len({m.key.gcm for m in members}),
            "n_datasets": len(members),
        })
    return rows


def box_whisker_rows(deltas: Iterable[DeltaDraws]) -> List[dict]:
    """QuantileSummary per (variable, zone, gcm, scenario), ensembles pooled within the GCM."""
    by_gcm: Dict[Tuple[str, str, str, str, str], List[DeltaDraws]] = defaultdict(list)
    for d in deltas:
        variable, zone, scenario = d.group
        by_gcm[(variable, zone, d.key.gcm, scenario, d.measure)].append(d)
    rows = []
    for (variable, zone, gcm, scenario, measure), members in sorted(by_gcm.items()):
        summary = quantile_summary(pool_equal_weight(sorted(members, key=lambda d: d.key.slug())))
        rows.append({
            "variable": variable, "zone": zone, "gcm": gcm, "scenario": scenario, "measure": measure,
            **summary.model_dump(),
        })
    return rows
