"""Two-branch MACs built from nonlocal games.

The channel maps x = ((q_1,a_1),...,(q_n,a_n)) to y in {0..d-1}^n and
behaves as one noisy channel when x wins the game and another when it
loses.  Conditional output entropy is constant within each branch
(f_w on winning rows, f_l on losing rows), with f_w < f_l required.
All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import NonlocalGame, input_win_mask, question_index_of_input

_ROW_TOL = 1e-12


def noise_f(delta: int, eta: float) -> float:
    """Conditional output entropy of a delta-ary depolarizing branch.

    The branch outputs the echoed symbol with weight eta + (1-eta)/delta
    and each other symbol with weight (1-eta)/delta.
    """
    if delta < 2:
        raise ValueError(f"delta must be >= 2, got {delta}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    peak = (1 + (delta - 1) * eta) / delta
    rest = (1 - eta) / delta
    out = 0.0
    if peak > 0:
        out -= peak * np.log2(peak)
    if rest > 0:
        out -= (delta - 1) * rest * np.log2(rest)
    return float(out)


@dataclass(frozen=True)
class MacChannel:
    game: NonlocalGame
    matrix: np.ndarray  # shape ((d*D)^n, d^n): P(y | x)
    f_w: float
    f_l: float
    eta_w: float | None = None
    eta_l: float | None = None
    name: str = "mac"

    def __post_init__(self):
        dD = self.game.d * self.game.D
        expected = (dD**self.game.n, self.game.d**self.game.n)
        if self.matrix.shape != expected:
            raise ValueError(f"channel matrix shape {self.matrix.shape}, expected {expected}")
        err = np.abs(self.matrix.sum(axis=1) - 1.0).max()
        if err > _ROW_TOL or self.matrix.min() < -_ROW_TOL:
            raise ValueError(f"channel rows are not stochastic (err {err})")
        if not self.f_w < self.f_l:
            raise ValueError(
                f"winning branch must be less noisy: f_w={self.f_w} >= f_l={self.f_l}"
            )
        self.matrix.setflags(write=False)

    @property
    def delta(self) -> int:
        return self.game.d**self.game.n

    def row_entropies(self) -> np.ndarray:
        m = self.matrix
        terms = np.where(m > 0, m * np.log2(np.where(m > 0, m, 1.0)), 0.0)
        return -terms.sum(axis=1)

    def branch_entropy_error(self) -> float:
        """Max |H(Y|X=x) - f_branch| over all rows."""
        ent = self.row_entropies()
        win = input_win_mask(self.game)
        err_w = np.abs(ent[win] - self.f_w).max() if win.any() else 0.0
        err_l = np.abs(ent[~win] - self.f_l).max() if (~win).any() else 0.0
        return float(max(err_w, err_l))


def two_branch_mac(game: NonlocalGame, win_profile, lose_profile, name: str = "two-branch") -> MacChannel:
    """Generic two-branch channel from per-branch noise profiles.

    Each profile is a distribution of length Delta = d^n over the cyclic
    offset from the echoed question tuple: profile[0] is the probability
    of outputting the question part of x, profile[j] that of the symbol
    j steps later (mod Delta).  This keeps the conditional entropy
    constant within a branch for arbitrary noise shapes.
    """
    delta = game.d**game.n
    win_profile = np.asarray(win_profile, dtype=float)
    lose_profile = np.asarray(lose_profile, dtype=float)
    for prof, label in ((win_profile, "win"), (lose_profile, "lose")):
        if prof.shape != (delta,):
            raise ValueError(f"{label} profile must have length {delta}")
        if abs(prof.sum() - 1.0) > _ROW_TOL or prof.min() < 0:
            raise ValueError(f"{label} profile is not a distribution")

    def prof_entropy(p):
        nz = p[p > 0]
        return float(-(nz * np.log2(nz)).sum())

    f_w = prof_entropy(win_profile)
    f_l = prof_entropy(lose_profile)
    dD = game.d * game.D
    win = input_win_mask(game)
    matrix = np.zeros((dD**game.n, delta))
    for xi in range(dD**game.n):
        peak = question_index_of_input(game, xi)
        prof = win_profile if win[xi] else lose_profile
        matrix[xi] = np.roll(prof, peak)
    return MacChannel(game, matrix, f_w=f_w, f_l=f_l, name=name)


def depolarizing_mac(game: NonlocalGame, eta_w: float, eta_l: float) -> MacChannel:
    """Depolarizing two-branch channel: echo with probability eta, else uniform."""
    if not (0.0 <= eta_l < eta_w <= 1.0):
        raise ValueError(f"need 0 <= eta_l < eta_w <= 1, got ({eta_w}, {eta_l})")
    delta = game.d**game.n

    def profile(eta):
        p = np.full(delta, (1 - eta) / delta)
        p[0] += eta
        return p

    ch = two_branch_mac(
        game,
        profile(eta_w),
        profile(eta_l),
        name=f"{game.name}({eta_w:g},{eta_l:g})",
    )
    return MacChannel(
        game,
        ch.matrix,
        f_w=noise_f(delta, eta_w),
        f_l=noise_f(delta, eta_l),
        eta_w=eta_w,
        eta_l=eta_l,
        name=ch.name,
    )


def type_i(game: NonlocalGame, eta: float) -> MacChannel:
    """Noiseless on winning, depolarizing with parameter eta on losing."""
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"type-I needs 0 <= eta < 1, got {eta}")
    return depolarizing_mac(game, 1.0, eta)


def type_ii(game: NonlocalGame, eta: float) -> MacChannel:
    """Depolarizing with parameter eta on winning, fully noisy on losing."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"type-II needs 0 < eta <= 1, got {eta}")
    return depolarizing_mac(game, eta, 0.0)


def channel_to_csv(ch: MacChannel, path) -> None:
    """Write nonzero entries as `x-index,y-index,probability` rows."""
    with open(path, "w") as fh:
        fh.write("x,y,p\n")
        for xi in range(ch.matrix.shape[0]):
            for yi in range(ch.matrix.shape[1]):
                p = ch.matrix[xi, yi]
                if p != 0.0:
                    fh.write(f"{xi},{yi},{p:.17g}\n")
