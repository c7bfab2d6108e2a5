"""Closed-form optimal personalization weights and the resulting errors.

For mean estimation the formulas are exact.  For linear regression the
optimal-weight derivations only exist in the many-samples limit, where the
problem maps onto mean estimation with mu_e' = d*mu_e and bias coefficient
sigma_bias_sq; this module applies that substitution and callers surface
the approximation note from ``errors.LINREG_OPTIMAL_NOTE``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import (
    _coarse_optimal_parts,
    _check_member,
    _check_player,
    _check_row,
    _fine_mean_mse,
    mse_local,
)
from .model import (
    Coalition,
    Coarse,
    CoarseOptimal,
    FederationScheme,
    Fine,
    FineOptimal,
    GameConfig,
    Local,
    Number,
    Uniform,
    ValidationError,
    scheme_name,
)


@dataclass(frozen=True)
class FineWeights:
    """Optimal combination row for one target player over one coalition."""

    player: int
    row: Mapping[int, Number]

    def __post_init__(self) -> None:
        total = sum(self.row.values())
        if abs(total - 1) > 1e-12:
            raise ValidationError(f"fine weight row sums to {total!r}, expected 1")
        if self.player not in self.row:
            raise ValidationError("fine weight row is missing its own player")


def effective_mean_params(config: GameConfig) -> tuple[Number, Number, bool]:
    """(mu, bias, is_approximation) for the weight formulas.

    Mean estimation passes through; linear regression substitutes
    mu_e' = d*mu_e and bias = sigma_bias_sq (valid when n_i >> d).
    """
    if config.linreg is None:
        return config.mu_e, config.sigma_sq, False
    return config.mu_e * config.linreg.d, config.linreg.sigma_bias_sq, True


def _coalition_parts(j: int, coalition: Coalition, config: GameConfig) -> tuple[int, int, int]:
    ns = config.players
    total = sum(ns[i] for i in coalition)
    b = sum(ns[i] * ns[i] for i in coalition if i != j) + (total - ns[j]) ** 2
    return ns[j], total, b


def optimal_w(j: int, coalition: Coalition, config: GameConfig) -> Number:
    """Error-minimizing coarse weight w* for player j.

    Alone, every weight yields the same estimator; 1 ("all local") is
    returned as the honest degenerate value.
    """
    _check_member(j, coalition)
    _check_player(j, config)
    if len(coalition) == 1:
        return 1
    mu, bias, _ = effective_mean_params(config)
    n_j, total, b = _coalition_parts(j, coalition, config)
    num = bias * b * n_j
    return num / (mu * total * (total - n_j) + num)


def optimal_coarse_mse(j: int, coalition: Coalition, config: GameConfig) -> Number:
    """Expected MSE of player j at the optimal coarse weight (closed form)."""
    _check_member(j, coalition)
    _check_player(j, config)
    if len(coalition) == 1:
        return mse_local(j, config)
    mu, bias, _ = effective_mean_params(config)
    n_j, total, b = _coalition_parts(j, coalition, config)
    return _coarse_optimal_parts(n_j, total, b, mu, bias)


def optimal_v(j: int, coalition: Coalition, config: GameConfig) -> FineWeights:
    """Error-minimizing fine-grained weight row for player j.

    Built from V_i = bias + mu/n_i; every entry is strictly inside (0,1)
    whenever the coalition has at least two members.
    """
    _check_member(j, coalition)
    _check_player(j, config)
    if len(coalition) == 1:
        return FineWeights(player=j, row={j: 1})
    mu, bias, _ = effective_mean_params(config)
    ns = config.players
    v_of = {i: bias + mu / ns[i] for i in coalition}
    inv_sum = sum(1 / v_of[i] for i in coalition if i != j)
    den = 1 + v_of[j] * inv_sum
    row: dict[int, Number] = {j: (1 + bias * inv_sum) / den}
    for k in coalition:
        if k != j:
            row[k] = (v_of[j] - bias) / (v_of[k] * den)
    return FineWeights(player=j, row=row)


def optimal_fine_mse(j: int, coalition: Coalition, config: GameConfig) -> Number:
    """Expected MSE of player j at its optimal fine-grained row."""
    if len(coalition) == 1:
        _check_member(j, coalition)
        return mse_local(j, config)
    mu, bias, _ = effective_mean_params(config)
    row = optimal_v(j, coalition, config).row
    counts = {i: config.players[i] for i in coalition}
    return _fine_mean_mse(counts, j, row, mu, bias)


def coarse_row(j: int, coalition: Coalition, w: Number, config: GameConfig) -> dict[int, Number]:
    """Fine-grained row equivalent to coarse blending with weight w."""
    if len(coalition) == 1:
        return {j: 1}
    ns = config.players
    total = sum(ns[i] for i in coalition)
    row: dict[int, Number] = {
        i: (1 - w) * ns[i] / total for i in coalition if i != j
    }
    row[j] = w + (1 - w) * ns[j] / total
    return row


def explicit_row(
    j: int, coalition: Coalition, scheme: FederationScheme, config: GameConfig
) -> dict[int, Number]:
    """Resolve any scheme to the explicit combination row of player j."""
    _check_member(j, coalition)
    if isinstance(scheme, Local):
        return {j: 1}
    if isinstance(scheme, Uniform):
        if len(coalition) == 1:
            return {j: 1}
        ns = config.players
        total = sum(ns[i] for i in coalition)
        return {i: ns[i] / total for i in coalition}
    if isinstance(scheme, Coarse):
        if j not in scheme.weights:
            raise ValidationError(f"coarse scheme has no weight for player {j}")
        return coarse_row(j, coalition, scheme.weights[j], config)
    if isinstance(scheme, CoarseOptimal):
        return coarse_row(j, coalition, optimal_w(j, coalition, config), config)
    if isinstance(scheme, Fine):
        if j not in scheme.rows:
            raise ValidationError(f"fine scheme has no row for player {j}")
        row = dict(scheme.rows[j])
        _check_row(row, coalition)
        return row
    if isinstance(scheme, FineOptimal):
        return dict(optimal_v(j, coalition, config).row)
    raise ValidationError(f"unknown federation scheme {scheme_name(scheme)}")
