"""Exact expected mean-squared errors for every federation scheme.

Mean estimation and linear regression share one structure: a variance term
with per-player multiplier (1/n_i for means, d/(n_i-d-1) for regression
under zero-mean multivariate-normal inputs) plus a bias term whose
coefficient is sigma_sq (means) or sigma_bias_sq (regression).

All formulas are rational in the sample counts and the distribution
parameters, so they evaluate exactly when called with Fraction parameters
(see ``model.exact_config``).  Expressions are ordered so that integer
subterms are multiplied by a parameter before any division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .model import (
    Coalition,
    CoarseOptimal,
    Coarse,
    FederationScheme,
    Fine,
    FineOptimal,
    GameConfig,
    Local,
    Number,
    Partition,
    ROW_SUM_TOL,
    TwoSizeGame,
    Uniform,
    ValidationError,
    scheme_name,
)

LINREG_OPTIMAL_NOTE = (
    "optimal weights for linear regression use the many-samples "
    "mean-estimation approximation (mu_e' = d*mu_e, bias = sigma_bias_sq)"
)


@dataclass(frozen=True)
class ErrorReport:
    """Per-player expected MSE for one partition under one scheme."""

    values: Mapping[int, Number]
    note: str | None = None


def _check_member(j: int, coalition: Coalition) -> None:
    if j not in coalition:
        raise ValidationError(f"player {j} is not a member of coalition {coalition.members}")


def _check_player(j: int, config: GameConfig) -> None:
    if not 0 <= j < len(config.players):
        raise ValidationError(f"player index {j} out of range for {len(config.players)} players")


def _bias_coef(config: GameConfig) -> Number:
    return config.sigma_sq if config.linreg is None else config.linreg.sigma_bias_sq


def _variance_term(config: GameConfig, n: int) -> Number:
    """mu_e times the per-player variance multiplier."""
    if config.linreg is None:
        return config.mu_e / n
    d = config.linreg.d
    if n <= d + 1:
        raise ValidationError(f"linear regression needs n > d+1 (n={n}, d={d})")
    return config.mu_e * d / (n - d - 1)


def _bias_parts(j: int, coalition: Coalition, config: GameConfig) -> tuple[int, int]:
    """(N, B_j) with N the coalition sample total and B_j the bias integer."""
    ns = config.players
    total = sum(ns[i] for i in coalition)
    b = sum(ns[i] * ns[i] for i in coalition if i != j) + (total - ns[j]) ** 2
    return total, b


def _check_linreg_members(coalition: Coalition, config: GameConfig) -> None:
    if config.linreg is None:
        return
    d = config.linreg.d
    for i in coalition:
        if config.players[i] <= d + 1:
            raise ValidationError(
                f"linear regression needs n > d+1 (n={config.players[i]}, d={d})"
            )


def mse_local(j: int, config: GameConfig) -> Number:
    """Expected MSE of local estimation: mu_e/n_j, or mu_e*d/(n_j-d-1)."""
    _check_player(j, config)
    return _variance_term(config, config.players[j])


def mse_uniform(j: int, coalition: Coalition, config: GameConfig) -> Number:
    """Expected MSE of player j under the single sample-weighted model."""
    _check_member(j, coalition)
    _check_player(j, config)
    _check_linreg_members(coalition, config)
    if len(coalition) == 1:
        return mse_local(j, config)
    ns = config.players
    total, b = _bias_parts(j, coalition, config)
    if config.linreg is None:
        variance = config.mu_e / total
    else:
        d = config.linreg.d
        variance = sum(
            config.mu_e * ns[i] * ns[i] * d / ((ns[i] - d - 1) * total * total)
            for i in coalition
        )
    return variance + _bias_coef(config) * b / (total * total)


def mse_coarse(j: int, coalition: Coalition, w: Number, config: GameConfig) -> Number:
    """Expected MSE of player j blending global and local models with w."""
    if not (0 <= w <= 1):
        raise ValidationError(f"coarse weight outside [0,1]: {w!r}")
    _check_member(j, coalition)
    _check_player(j, config)
    _check_linreg_members(coalition, config)
    if len(coalition) == 1:
        return mse_local(j, config)
    ns = config.players
    n_j = ns[j]
    total, b = _bias_parts(j, coalition, config)
    if config.linreg is None:
        variance = config.mu_e * (w * w / n_j) + config.mu_e * (1 - w * w) / total
    else:
        d = config.linreg.d
        global_var = sum(
            config.mu_e * ns[i] * ns[i] * d / ((ns[i] - d - 1) * total * total)
            for i in coalition
        )
        variance = (1 - w) ** 2 * global_var + config.mu_e * (
            w * w + (1 - w) * w * 2 * n_j / total
        ) * d / (n_j - d - 1)
    return variance + _bias_coef(config) * b * (1 - w) ** 2 / (total * total)


def _row_bias_sums(j: int, row: Mapping[int, Number]) -> tuple[Number, Number]:
    off = sum((v for i, v in row.items() if i != j), start=0)
    off_sq = sum((v * v for i, v in row.items() if i != j), start=0)
    return off, off_sq


def _fine_mean_mse(
    sample_counts: Mapping[int, int],
    j: int,
    row: Mapping[int, Number],
    mu_e: Number,
    bias_coef: Number,
) -> Number:
    """Mean-estimation fine-grained MSE for arbitrary (mu_e, bias) parameters."""
    variance = sum(mu_e * v * v / sample_counts[i] for i, v in row.items())
    off, off_sq = _row_bias_sums(j, row)
    return variance + bias_coef * (off_sq + off * off)


def _check_row(row: Mapping[int, Number], coalition: Coalition) -> None:
    if set(row) != set(coalition.members):
        raise ValidationError(
            f"weight row keys {sorted(row)} do not match coalition {coalition.members}"
        )
    total = sum(row.values())
    if abs(total - 1) > ROW_SUM_TOL:
        raise ValidationError(f"weight row sums to {total!r}, expected 1")


def mse_fine(
    j: int, coalition: Coalition, row: Mapping[int, Number], config: GameConfig
) -> Number:
    """Expected MSE of player j combining member models with weight row."""
    _check_member(j, coalition)
    _check_player(j, config)
    _check_linreg_members(coalition, config)
    _check_row(row, coalition)
    if len(coalition) == 1:
        return mse_local(j, config)
    ns = config.players
    if config.linreg is None:
        counts = {i: ns[i] for i in coalition}
        return _fine_mean_mse(counts, j, row, config.mu_e, config.sigma_sq)
    d = config.linreg.d
    variance = sum(
        config.mu_e * v * v * d / (ns[i] - d - 1) for i, v in row.items()
    )
    off, off_sq = _row_bias_sums(j, row)
    return variance + _bias_coef(config) * (off_sq + off * off)


def mse_linreg(
    j: int, coalition: Coalition, scheme: FederationScheme, config: GameConfig
) -> Number:
    """Linear-regression MSE for a fully weighted scheme (no optimal variants)."""
    if config.linreg is None:
        raise ValidationError("mse_linreg: config has no linreg spec")
    if isinstance(scheme, Local):
        return mse_local(j, config)
    if isinstance(scheme, Uniform):
        return mse_uniform(j, coalition, config)
    if isinstance(scheme, Coarse):
        if j not in scheme.weights:
            raise ValidationError(f"coarse scheme has no weight for player {j}")
        return mse_coarse(j, coalition, scheme.weights[j], config)
    if isinstance(scheme, Fine):
        if j not in scheme.rows:
            raise ValidationError(f"fine scheme has no row for player {j}")
        return mse_fine(j, coalition, scheme.rows[j], config)
    raise ValidationError(
        f"mse_linreg needs explicit weights, got {scheme_name(scheme)}"
    )


def coalition_member_mse(
    j: int, coalition: Coalition, scheme: FederationScheme, config: GameConfig
) -> Number:
    """Expected MSE of player j inside its coalition under any scheme."""
    if isinstance(scheme, Local):
        _check_member(j, coalition)
        return mse_local(j, config)
    if isinstance(scheme, Uniform):
        return mse_uniform(j, coalition, config)
    if isinstance(scheme, Coarse):
        if j not in scheme.weights:
            raise ValidationError(f"coarse scheme has no weight for player {j}")
        return mse_coarse(j, coalition, scheme.weights[j], config)
    if isinstance(scheme, Fine):
        if j not in scheme.rows:
            raise ValidationError(f"fine scheme has no row for player {j}")
        return mse_fine(j, coalition, scheme.rows[j], config)

    from . import weights  # deferred: weights builds on this module

    if isinstance(scheme, CoarseOptimal):
        return weights.optimal_coarse_mse(j, coalition, config)
    if isinstance(scheme, FineOptimal):
        return weights.optimal_fine_mse(j, coalition, config)
    raise ValidationError(f"unknown federation scheme {scheme!r}")


def player_errors(
    partition: Partition, scheme: FederationScheme, config: GameConfig
) -> ErrorReport:
    """Evaluate every player within its own coalition of the partition."""
    if partition.player_count != len(config.players):
        raise ValidationError(
            f"partition covers {partition.player_count} players, "
            f"config has {len(config.players)}"
        )
    values: dict[int, Number] = {}
    for coalition in partition.coalitions:
        for j in coalition:
            err = coalition_member_mse(j, coalition, scheme, config)
            if err < 0 or not math.isfinite(float(err)):
                raise ValidationError(f"player {j}: computed MSE {err!r} is not usable")
            values[j] = err
    note = None
    if config.linreg is not None and isinstance(scheme, (CoarseOptimal, FineOptimal)):
        note = LINREG_OPTIMAL_NOTE
    return ErrorReport(values=dict(sorted(values.items())), note=note)


# --- two-size (count-symmetric) profile errors -------------------------------


def _coarse_optimal_parts(n_j: int, total: int, b: int, mu_e: Number, bias: Number) -> Number:
    """Optimal-coarse closed form from (n_j, N, B); singleton degenerates to local."""
    if total == n_j:
        return mu_e / n_j
    num = mu_e * mu_e * (total - n_j) + mu_e * bias * b
    den = mu_e * total * (total - n_j) + bias * n_j * b
    return num / den


def two_size_errors(
    game: TwoSizeGame,
    small_count: int,
    large_count: int,
    mu_e: Number,
    sigma_sq: Number,
    scheme: FederationScheme,
) -> tuple[Number | None, Number | None]:
    """(small-member error, large-member error) for a coalition profile.

    The profile is hypothetical: counts need not fit inside game.S/game.L,
    which lets grid property checks range freely.  A missing role returns
    None.  Supported schemes: Uniform and CoarseOptimal (mean estimation).
    """
    if small_count < 0 or large_count < 0 or small_count + large_count < 1:
        raise ValidationError(
            f"profile ({small_count},{large_count}) must be non-negative and non-empty"
        )
    if not isinstance(scheme, (Uniform, CoarseOptimal)):
        raise ValidationError(
            "two-size analysis supports uniform and optimal coarse-grained "
            f"federation, not {scheme_name(scheme)}"
        )
    total = small_count * game.n_s + large_count * game.n_l

    def member_error(n_j: int, s_other: int, l_other: int) -> Number:
        b = s_other * game.n_s**2 + l_other * game.n_l**2 + (total - n_j) ** 2
        if isinstance(scheme, Uniform):
            if total == n_j:
                return mu_e / n_j
            return mu_e / total + sigma_sq * b / (total * total)
        return _coarse_optimal_parts(n_j, total, b, mu_e, sigma_sq)

    err_small = (
        member_error(game.n_s, small_count - 1, large_count) if small_count else None
    )
    err_large = (
        member_error(game.n_l, small_count, large_count - 1) if large_count else None
    )
    return err_small, err_large
