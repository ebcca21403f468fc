"""Sum-capacity computations: optimization over product message
distributions, exact classical capacity by vertex enumeration, the
subset-partition classical upper bound, pseudo-telepathy exact values,
and η sweeps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .channels import MacChannel, type_i, type_ii
from .correlations import (
    DEFAULT_ENUMERATION_CAP,
    CorrelationBox,
    Encoder,
    EnumerationCapExceeded,
    boxes_from_csv,
    box_win_probabilities,
    e_star,
    magic_square_box,
    mpp_box,
    pr_box,
    support_marginal_uniformity_error,
    tsirelson_box,
)
from .games import NonlocalGame, pack_tuple
from .infotheory import ProductDistribution, entropy, sum_rate


@dataclass(frozen=True)
class OptimizerConfig:
    grid_step: float | None = None  # None -> 0.05 for d=2, 0.1 otherwise
    restarts: int = 20
    tolerance: float = 1e-7
    max_iterations: int = 4000
    seed: int = 0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    def step_for(self, d: int) -> float:
        if self.grid_step is not None:
            return self.grid_step
        return 0.05 if d == 2 else 0.1


@dataclass
class CapacityResult:
    value: float
    kind: str  # exact | lower-bound | upper-bound
    resource: str  # L | Q | NS | any | user label
    argmax_pi: ProductDistribution | None = None
    argmax_encoder: str | None = None
    diagnostics: dict = field(default_factory=dict)


def simplex_grid(d: int, step: float) -> list[np.ndarray]:
    """Lattice points on the (d-1)-simplex with spacing ~step, in
    deterministic lexicographic order."""
    k = max(1, round(1.0 / step))

    def rec(remaining, parts):
        if len(parts) == d - 1:
            yield parts + [remaining]
            return
        for i in range(remaining + 1):
            yield from rec(remaining - i, parts + [i])

    return [np.array(p, dtype=float) / k for p in rec(k, [])]


def _project_blocks(v: np.ndarray, n: int, d: int) -> list[np.ndarray]:
    factors = []
    for k in range(n):
        block = np.clip(v[k * d : (k + 1) * d], 1e-12, None)
        factors.append(block / block.sum())
    return factors


def maximize_over_pi(
    objective: Callable[[ProductDistribution], float],
    n: int,
    d: int,
    cfg: OptimizerConfig | None = None,
) -> tuple[float, ProductDistribution, dict]:
    """Coarse grid plus multi-start Nelder-Mead over the product of simplices.

    Deterministic under a fixed cfg.seed and never returns less than the
    best grid point.  The result is a certified lower bound on the true
    maximum unless the caller knows the objective is concave.
    """
    cfg = cfg or OptimizerConfig()
    per = simplex_grid(d, cfg.step_for(d))
    best_val = -np.inf
    best_factors: tuple[np.ndarray, ...] | None = None
    for combo in product(per, repeat=n):
        val = objective(ProductDistribution(combo))
        if val > best_val + 1e-15:
            best_val = val
            best_factors = combo
    grid_best = best_val

    def neg(v):
        return -objective(ProductDistribution(tuple(_project_blocks(v, n, d))))

    rng = np.random.default_rng(cfg.seed)
    starts = [np.concatenate(best_factors)]
    for _ in range(cfg.restarts - 1):
        starts.append(np.concatenate([rng.dirichlet(np.ones(d)) for _ in range(n)]))
    iterations = 0
    for s in starts:
        res = minimize(
            neg,
            s,
            method="Nelder-Mead",
            options={
                "fatol": cfg.tolerance,
                "xatol": 1e-9,
                "maxiter": cfg.max_iterations,
            },
        )
        iterations += res.nit
        if -res.fun > best_val:
            best_val = -res.fun
            best_factors = tuple(_project_blocks(res.x, n, d))
    diagnostics = {
        "grid_points": len(per) ** n,
        "grid_best": grid_best,
        "restarts": cfg.restarts,
        "iterations": iterations,
    }
    return best_val, ProductDistribution(best_factors), diagnostics


def _xlog2x(a: np.ndarray) -> np.ndarray:
    return np.where(a > 0, a * np.log2(np.where(a > 0, a, 1.0)), 0.0)


def _batch_mi(joints: np.ndarray) -> np.ndarray:
    """Mutual information of a batch of 2D joints, shape (..., A, B)."""
    pa = joints.sum(axis=-1)
    pb = joints.sum(axis=-2)
    h_a = -_xlog2x(pa).sum(axis=-1)
    h_b = -_xlog2x(pb).sum(axis=-1)
    h_ab = -_xlog2x(joints).sum(axis=(-2, -1))
    return h_a + h_b - h_ab


def _kernel_mi_objective(kernel: np.ndarray) -> Callable[[ProductDistribution], float]:
    def objective(pi: ProductDistribution) -> float:
        joint = pi.joint()[:, None] * kernel
        return float(_batch_mi(joint))

    return objective


def sum_rate_objective(enc: Encoder, ch: MacChannel) -> Callable[[ProductDistribution], float]:
    """I(M;Y) as a function of pi, with the x axis pre-summed."""
    return _kernel_mi_objective(enc.table @ ch.matrix)


# ---------------------------------------------------------------------------
# classical capacity (exact, via local polytope vertices)
# ---------------------------------------------------------------------------


def _vertex_strategies(d: int, dD: int):
    """Per-sender deterministic encoder maps m_k -> channel symbol."""
    return list(product(range(dD), repeat=d))


def vertex_count(game: NonlocalGame) -> int:
    dD = game.d * game.D
    return (dD**game.d) ** game.n


def _vertex_kernels(ch: MacChannel) -> np.ndarray:
    """P(y|m) for every deterministic encoder vertex, shape (V, Δ, Δ)."""
    game = ch.game
    n, d = game.n, game.d
    dD = d * game.D
    per = _vertex_strategies(d, dD)
    messages = list(product(range(d), repeat=n))
    kernels = np.empty((len(per) ** n, d**n, d**n))
    for vi, strategies in enumerate(product(per, repeat=n)):
        rows = [
            pack_tuple(tuple(strategies[k][m[k]] for k in range(n)), dD)
            for m in messages
        ]
        kernels[vi] = ch.matrix[rows]
    return kernels


def _grid_pms(n: int, d: int, step: float) -> np.ndarray:
    per = simplex_grid(d, step)
    pms = []
    for combo in product(per, repeat=n):
        pm = combo[0]
        for f in combo[1:]:
            pm = np.outer(pm, f).ravel()
        pms.append(pm)
    return np.array(pms)


def _batch_grid_values(kernels: np.ndarray, pms: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Best grid value per vertex: max_g MI(pm_g ⊙ K_v)."""
    out = np.empty(kernels.shape[0])
    for lo in range(0, kernels.shape[0], chunk):
        part = kernels[lo : lo + chunk]  # (C, Δ, Δ)
        joints = pms[None, :, :, None] * part[:, None, :, :]
        out[lo : lo + chunk] = _batch_mi(joints).max(axis=1)
    return out


def classical_capacity_exact(
    ch: MacChannel,
    cfg: OptimizerConfig | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> CapacityResult:
    """Exact classical sum-capacity by enumerating deterministic encoders.

    Uses I(X;Y) = I(M;Y) for deterministic encoders, so each vertex only
    needs its Δ x Δ message-output kernel.  Vertices are prefiltered on a
    coarse grid, then the leading candidates get the full optimizer.
    """
    cfg = cfg or OptimizerConfig()
    game = ch.game
    count = vertex_count(game)
    if count > cap:
        raise EnumerationCapExceeded(
            f"{game.name} encoding scenario has {count} deterministic encoder "
            f"vertices, over the cap of {cap}; use classical_upper_bound instead"
        )
    n, d = game.n, game.d
    kernels = _vertex_kernels(ch)

    coarse_step = 0.25 if d == 2 else 0.2
    coarse = _batch_grid_values(kernels, _grid_pms(n, d, coarse_step))
    order = np.argsort(-coarse, kind="stable")
    threshold = coarse[order[0]] - 0.1
    candidates = [int(v) for v in order if coarse[v] >= threshold][:128]

    fine = _batch_grid_values(kernels[candidates], _grid_pms(n, d, cfg.step_for(d)))
    fine_order = np.argsort(-fine, kind="stable")
    finalists = [candidates[int(i)] for i in fine_order[:8]]

    best = None
    for vi in sorted(finalists):
        val, pi, diag = maximize_over_pi(_kernel_mi_objective(kernels[vi]), n, d, cfg)
        if best is None or val > best[0] + 1e-12:
            best = (val, pi, vi, diag)
    val, pi, vi, diag = best
    diag = dict(diag, vertices=count, candidates=len(candidates))
    return CapacityResult(
        value=val,
        kind="exact",
        resource="L",
        argmax_pi=pi,
        argmax_encoder=f"vertex:{vi}",
        diagnostics=diag,
    )


def best_vertex_rate_at_pi(ch: MacChannel, pi: ProductDistribution, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Best deterministic-encoder sum rate at a fixed message distribution."""
    count = vertex_count(ch.game)
    if count > cap:
        raise EnumerationCapExceeded(f"{count} vertices over the cap of {cap}")
    kernels = _vertex_kernels(ch)
    pm = pi.joint()
    vals = _batch_mi(pm[None, :, None] * kernels)
    return float(vals.max())


# ---------------------------------------------------------------------------
# game values and bounds
# ---------------------------------------------------------------------------


def bruteforce_classical_game_value(
    game: NonlocalGame, cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[float, tuple[tuple[int, ...], ...]]:
    """Best uniform-question win probability over deterministic strategies.

    Returns (omega, strategies) with one optimal per-player answer map.
    """
    n, d, D = game.n, game.d, game.D
    count = (D**d) ** n
    if count > cap:
        raise EnumerationCapExceeded(
            f"{game.name} has {count} deterministic strategy tuples, over the cap of {cap}"
        )
    table = game.win_table()
    per = np.array(list(product(range(D), repeat=d)))  # (S, d)
    if n == 2:
        w = table.reshape(d, d, D, D)
        counts = np.zeros((len(per), len(per)))
        for q1 in range(d):
            for q2 in range(d):
                counts += w[q1, q2][np.ix_(per[:, q1], per[:, q2])]
        idx = np.unravel_index(np.argmax(counts), counts.shape)
        best = counts[idx] / d**2
        return float(best), (tuple(per[idx[0]]), tuple(per[idx[1]]))
    questions = list(product(range(d), repeat=n))
    best, best_strats = -1.0, None
    for strategies in product(map(tuple, per), repeat=n):
        wins = sum(
            table[pack_tuple(q, d), pack_tuple(tuple(strategies[k][q[k]] for k in range(n)), D)]
            for q in questions
        )
        if wins > best:
            best, best_strats = wins, strategies
    return float(best) / d**n, best_strats


def _bound_result(
    ch: MacChannel,
    max_omega: float | Callable[[np.ndarray], float],
    cfg: OptimizerConfig | None,
    resource: str,
) -> CapacityResult:
    spread = ch.f_l - ch.f_w

    def objective(pi: ProductDistribution) -> float:
        pm = pi.joint()
        omega = max_omega(pm) if callable(max_omega) else max_omega
        return entropy(pm) + spread * omega - ch.f_l

    val, pi, diag = maximize_over_pi(objective, ch.game.n, ch.game.d, cfg)
    return CapacityResult(
        value=val, kind="upper-bound", resource=resource, argmax_pi=pi, diagnostics=diag
    )


def resource_dependent_bound(
    ch: MacChannel,
    max_omega: float | Callable[[np.ndarray], float],
    cfg: OptimizerConfig | None = None,
) -> float:
    """max_pi { H(M) + (f_l - f_w) * max_omega } - f_l, in bits.

    max_omega is either a constant (the resource's best win probability)
    or a callable of the joint message distribution; the classical
    subset-partition bound is this formula with the sorted-subset callable.
    """
    return _bound_result(ch, max_omega, cfg, resource="R").value


def classical_upper_bound(
    ch: MacChannel,
    omega_star_local: float,
    cfg: OptimizerConfig | None = None,
) -> CapacityResult:
    """Subset-partition upper bound on the classical sum-capacity.

    r_max = round(omega_star_local * Δ) message tuples can at most land
    in the winning set under any deterministic encoder, so the win
    probability is bounded by the r_max largest message masses.
    """
    if not 0.0 < omega_star_local <= 1.0:
        raise ValueError(f"omega_star_local must lie in (0, 1], got {omega_star_local}")
    r_max = round(omega_star_local * ch.delta)

    def subset_mass(pm: np.ndarray) -> float:
        return float(np.sort(pm)[::-1][:r_max].sum())

    result = _bound_result(ch, subset_mass, cfg, resource="L")
    result.diagnostics["r_max"] = r_max
    return result


# ---------------------------------------------------------------------------
# pseudo-telepathy and quantum paths
# ---------------------------------------------------------------------------

PT_WIN_TOL = 1e-10
PT_UNIFORMITY_TOL = 1e-10
PT_CROSS_CHECK_TOL = 1e-9

_BOX_RESOURCE = {"pr": "NS", "tsirelson": "Q", "magic-square": "Q"}


def _box_resource(box: CorrelationBox) -> str:
    if box.name.startswith("mpp:"):
        return "Q"
    return _BOX_RESOURCE.get(box.name, "NS")


class PseudoTelepathyHypothesisError(ValueError):
    """The supplied box fails a hypothesis of the exact-capacity formula."""


def pseudo_telepathy_capacity(
    ch: MacChannel, box: CorrelationBox, resource: str | None = None
) -> CapacityResult:
    """Exact sum-capacity log2(Δ) - f_w for a perfect, output-uniform box.

    Verifies both hypotheses (win probability 1 on every question tuple,
    output marginals uniform over their support) and cross-checks the
    closed form against the direct sum rate at uniform messages.
    """
    game = ch.game
    wins = box_win_probabilities(box, game)
    worst = float(np.abs(wins - 1.0).max())
    if worst > PT_WIN_TOL:
        raise PseudoTelepathyHypothesisError(
            f"box {box.name!r} does not win {game.name} on every question tuple "
            f"(max deviation {worst})"
        )
    uni_err = support_marginal_uniformity_error(box)
    if uni_err > PT_UNIFORMITY_TOL:
        raise PseudoTelepathyHypothesisError(
            f"box {box.name!r} output marginals deviate from uniform-over-support "
            f"by {uni_err}"
        )
    value = float(np.log2(ch.delta)) - ch.f_w
    pi = ProductDistribution.uniform(game.n, game.d)
    direct = sum_rate(pi, e_star(box), ch)
    if abs(direct - value) > PT_CROSS_CHECK_TOL:
        raise PseudoTelepathyHypothesisError(
            f"closed form {value} disagrees with direct sum rate {direct}"
        )
    return CapacityResult(
        value=value,
        kind="exact",
        resource=resource or _box_resource(box),
        argmax_pi=pi,
        argmax_encoder=f"e*({box.name})",
        diagnostics={"direct_sum_rate": direct, "win_deviation": worst},
    )


def quantum_lower_bound_chsh(ch: MacChannel, cfg: OptimizerConfig | None = None) -> CapacityResult:
    """Lower bound on the quantum sum-capacity via the Tsirelson-box encoder."""
    if ch.game.name != "chsh":
        raise ValueError(f"quantum lower bound is defined for CHSH channels, got {ch.game.name}")
    enc = e_star(tsirelson_box())
    val, pi, diag = maximize_over_pi(sum_rate_objective(enc, ch), ch.game.n, ch.game.d, cfg)
    return CapacityResult(
        value=val,
        kind="lower-bound",
        resource="Q",
        argmax_pi=pi,
        argmax_encoder=enc.name,
        diagnostics=diag,
    )


def vertex_file_bound(
    ch: MacChannel,
    vertex_csv_path,
    cfg: OptimizerConfig | None = None,
    resource: str = "file",
) -> CapacityResult:
    """Max sum rate over user-supplied correlation-box vertices via E*."""
    boxes = boxes_from_csv(vertex_csv_path)
    game = ch.game
    best = None
    for i, box in enumerate(boxes):
        if (box.n, box.d, box.D) != (game.n, game.d, game.D):
            raise ValueError(
                f"vertex {i} has scenario ({box.n},{box.d},{box.D}), channel "
                f"needs ({game.n},{game.d},{game.D})"
            )
        enc = e_star(box)
        val, pi, diag = maximize_over_pi(sum_rate_objective(enc, ch), game.n, game.d, cfg)
        if best is None or val > best[0] + 1e-12:
            best = (val, pi, i, diag)
    val, pi, i, diag = best
    return CapacityResult(
        value=val,
        kind="upper-bound",
        resource=resource,
        argmax_pi=pi,
        argmax_encoder=f"vertex-file:{i}",
        diagnostics=dict(diag, boxes=len(boxes)),
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

# large enough that the clamped branch entropy is strictly inside (0, log2 delta)
# in double precision; f(delta, eta) differs from log2(delta) only at order eta^2
_ETA_CLAMP = 1e-6


def pseudo_telepathy_box(game: NonlocalGame) -> CorrelationBox:
    """The built-in perfect box for a game, if one exists."""
    if game.name == "chsh":
        return pr_box()
    if game.name == "magic-square":
        return magic_square_box()
    if game.name.startswith("mpp:"):
        return mpp_box(game.n)
    raise ValueError(f"no built-in pseudo-telepathy box for {game.name}")


def channel_for(game: NonlocalGame, channel_type: int, eta: float) -> MacChannel:
    """Type-I/II constructor with degenerate endpoints clamped."""
    if channel_type == 1:
        if eta >= 1.0:
            warnings.warn(f"type-I eta={eta} clamped below 1 (degenerate f_w = f_l)")
            eta = 1.0 - _ETA_CLAMP
        return type_i(game, eta)
    if channel_type == 2:
        if eta <= 0.0:
            warnings.warn(f"type-II eta={eta} clamped above 0 (degenerate f_w = f_l)")
            eta = _ETA_CLAMP
        return type_ii(game, eta)
    raise ValueError(f"channel type must be 1 or 2, got {channel_type}")


@dataclass
class SweepRow:
    eta: float
    resource: str
    kind: str
    value: float
    diagnostic: str = ""


def sweep(
    game: NonlocalGame,
    channel_type: int,
    etas,
    resources: list[str],
    cfg: OptimizerConfig | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> list[SweepRow]:
    """Capacity table over an η grid; one row per (η, resource)."""
    cfg = cfg or OptimizerConfig()
    rows: list[SweepRow] = []
    omega_star: float | None = None
    pt_box: CorrelationBox | None = None
    for eta in etas:
        ch = channel_for(game, channel_type, float(eta))
        for res in resources:
            if res == "L-exact":
                r = classical_capacity_exact(ch, cfg, cap=cap)
                diag = r.argmax_encoder or ""
            elif res == "L-bound":
                if omega_star is None:
                    omega_star, _ = bruteforce_classical_game_value(game, cap=cap)
                r = classical_upper_bound(ch, omega_star, cfg)
                diag = f"omega*={omega_star:.10g}"
            elif res == "Q-lower":
                r = quantum_lower_bound_chsh(ch, cfg)
                diag = r.argmax_encoder or ""
            elif res in ("Q-exact", "NS-exact"):
                if pt_box is None:
                    pt_box = pseudo_telepathy_box(game)
                if res == "Q-exact" and _box_resource(pt_box) != "Q":
                    raise ValueError(
                        f"{game.name} has no built-in quantum pseudo-telepathy box"
                    )
                label = "Q" if res == "Q-exact" else "NS"
                r = pseudo_telepathy_capacity(ch, pt_box, resource=label)
                diag = r.argmax_encoder or ""
            elif res.startswith("vertex-file:"):
                path = res.split(":", 1)[1]
                r = vertex_file_bound(ch, path, cfg)
                diag = r.argmax_encoder or ""
            else:
                raise ValueError(f"unknown resource {res!r}")
            rows.append(
                SweepRow(eta=float(eta), resource=res, kind=r.kind, value=r.value, diagnostic=diag)
            )
    return rows
