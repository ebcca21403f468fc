"""Nonlocal games as plain data: alphabet sizes plus a total winning predicate.

A game has n players, d questions per player, and D answers per player.
Question/answer tuples are encoded as dense integers 0..d-1 / 0..D-1.
Flattened tuple indices are big-endian with player 1 in the most
significant position.
"""

from __future__ import annotations

from itertools import product
from typing import Callable, Sequence

import numpy as np

Predicate = Callable[[Sequence[int], Sequence[int]], bool]


def pack_tuple(values: Sequence[int], base: int) -> int:
    """Flatten a tuple to an integer, player 1 as the high-order digit."""
    idx = 0
    for v in values:
        idx = idx * base + v
    return idx


def unpack_index(idx: int, base: int, n: int) -> tuple[int, ...]:
    """Inverse of pack_tuple."""
    out = []
    for _ in range(n):
        out.append(idx % base)
        idx //= base
    return tuple(reversed(out))


class NonlocalGame:
    """An (n, d, D) nonlocal game with a total winning predicate.

    The predicate must be defined on every question/answer tuple; there
    are no promise restrictions.  Multi-bit answers (magic square) are
    packed as integers with bit j holding the j-th answer bit.
    """

    def __init__(self, name: str, n: int, d: int, D: int, wins: Predicate):
        if n < 2 or d < 2 or D < 2:
            raise ValueError(f"invalid game dimensions n={n}, d={d}, D={D}")
        self.name = name
        self.n = n
        self.d = d
        self.D = D
        self._wins = wins
        self._table: np.ndarray | None = None

    def wins(self, questions: Sequence[int], answers: Sequence[int]) -> bool:
        return bool(self._wins(questions, answers))

    def question_tuples(self):
        return product(range(self.d), repeat=self.n)

    def answer_tuples(self):
        return product(range(self.D), repeat=self.n)

    def win_table(self) -> np.ndarray:
        """Boolean array of shape (d^n, D^n): win_table[q_idx, a_idx]."""
        if self._table is None:
            t = np.zeros((self.d**self.n, self.D**self.n), dtype=bool)
            for q in self.question_tuples():
                qi = pack_tuple(q, self.d)
                for a in self.answer_tuples():
                    t[qi, pack_tuple(a, self.D)] = self._wins(q, a)
            self._table = t
        return self._table

    def __repr__(self):
        return f"NonlocalGame({self.name!r}, n={self.n}, d={self.d}, D={self.D})"


def chsh_game() -> NonlocalGame:
    """CHSH: win iff a1 XOR a2 = q1 AND q2."""

    def wins(q, a):
        return (a[0] ^ a[1]) == (q[0] & q[1])

    return NonlocalGame("chsh", n=2, d=2, D=2, wins=wins)


def magic_square_game() -> NonlocalGame:
    """Mermin-Peres magic square as a (2, 3, 8) game.

    Player 1 fills row q1 (even parity), player 2 fills column q2 (odd
    parity), and the entries must agree at the overlap cell: player 1's
    bit at position q2 equals player 2's bit at position q1.  Answers are
    packed with bit j = j-th entry of the row/column.
    """

    def wins(q, a):
        b1 = [(a[0] >> j) & 1 for j in range(3)]
        b2 = [(a[1] >> j) & 1 for j in range(3)]
        return (
            sum(b1) % 2 == 0
            and sum(b2) % 2 == 1
            and b1[q[1]] == b2[q[0]]
        )

    return NonlocalGame("magic-square", n=2, d=3, D=8, wins=wins)


def mpp_game(n: int) -> NonlocalGame:
    """Multi-player parity game on n >= 2 players.

    Odd question parity always wins; with even parity the answer parity
    must be 0 when the question sum is divisible by 4, else 1.
    """
    if n < 2:
        raise ValueError(f"mpp game needs n >= 2, got {n}")

    def wins(q, a):
        sq = sum(q)
        if sq % 2 == 1:
            return True
        return sum(a) % 2 == (0 if sq % 4 == 0 else 1)

    return NonlocalGame(f"mpp:{n}", n=n, d=2, D=2, wins=wins)


def game_by_name(name: str) -> NonlocalGame:
    """Resolve "chsh", "magic-square", or "mpp:<n>"."""
    if name == "chsh":
        return chsh_game()
    if name == "magic-square":
        return magic_square_game()
    if name.startswith("mpp:"):
        return mpp_game(int(name.split(":", 1)[1]))
    raise ValueError(f"unknown game {name!r}")


def input_win_mask(game: NonlocalGame) -> np.ndarray:
    """Win membership of channel inputs x = ((q_1,a_1),...,(q_n,a_n)).

    x is flattened big-endian with per-player symbol q_k*D + a_k; the
    returned boolean vector has length (d*D)^n.
    """
    d, D, n = game.d, game.D, game.n
    dD = d * D
    table = game.win_table()
    mask = np.zeros(dD**n, dtype=bool)
    for xi in range(dD**n):
        syms = unpack_index(xi, dD, n)
        q = tuple(s // D for s in syms)
        a = tuple(s % D for s in syms)
        mask[xi] = table[pack_tuple(q, d), pack_tuple(a, D)]
    return mask


def question_index_of_input(game: NonlocalGame, x_index: int) -> int:
    """Flattened question-tuple index carried by a channel input."""
    d, D, n = game.d, game.D, game.n
    syms = unpack_index(x_index, d * D, n)
    return pack_tuple(tuple(s // D for s in syms), d)
