"""Correlation boxes for (n, d, D) Bell scenarios and the E* encoder lift.

A box stores the dense table P(a_1..a_n | q_1..q_n) with flattened
big-endian tuple indices (see games.pack_tuple).  An encoder stores
P(x | m) in the (n, d, d*D) encoding scenario, with per-player channel
symbols q_k*D + a_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import qkernel
from .games import NonlocalGame, pack_tuple, unpack_index

NORMALIZATION_TOL = 1e-12
NO_SIGNALING_TOL = 1e-10

DEFAULT_ENUMERATION_CAP = 10**7


class EnumerationCapExceeded(RuntimeError):
    """Raised instead of silently truncating a vertex enumeration."""


@dataclass(frozen=True)
class CorrelationBox:
    n: int
    d: int
    D: int
    table: np.ndarray  # shape (d^n, D^n)
    name: str = "box"
    deterministic: bool = False

    def __post_init__(self):
        expected = (self.d**self.n, self.D**self.n)
        if self.table.shape != expected:
            raise ValueError(f"box table shape {self.table.shape}, expected {expected}")
        self.table.setflags(write=False)

    def normalization_error(self) -> float:
        neg = max(0.0, float(-self.table.min()))
        rows = float(np.abs(self.table.sum(axis=1) - 1.0).max())
        return max(neg, rows)

    def no_signaling_error(self) -> float:
        """Max deviation of any party's answer marginal across other questions.

        For each party k, the marginal P(a_k | q) must not depend on the
        other parties' questions.
        """
        shape_q = (self.d,) * self.n
        shape_a = (self.D,) * self.n
        t = self.table.reshape(shape_q + shape_a)
        worst = 0.0
        for k in range(self.n):
            other_a = tuple(self.n + j for j in range(self.n) if j != k)
            marg = t.sum(axis=other_a)  # (d,)*n + (D,) with party k's answer last
            other_q = tuple(j for j in range(self.n) if j != k)
            spread = marg.max(axis=other_q) - marg.min(axis=other_q)
            worst = max(worst, float(spread.max()))
        return worst


@dataclass(frozen=True)
class Encoder:
    n: int
    d: int
    D: int
    table: np.ndarray  # shape (d^n, (d*D)^n): P(x | m)
    deterministic: bool = False
    name: str = "encoder"

    def __post_init__(self):
        dD = self.d * self.D
        expected = (self.d**self.n, dD**self.n)
        if self.table.shape != expected:
            raise ValueError(f"encoder table shape {self.table.shape}, expected {expected}")
        err = np.abs(self.table.sum(axis=1) - 1.0).max()
        if err > NORMALIZATION_TOL or self.table.min() < -NORMALIZATION_TOL:
            raise ValueError(f"encoder rows are not stochastic (err {err})")
        self.table.setflags(write=False)


@dataclass
class ValidationReport:
    normalization_error: float | None = None
    no_signaling_error: float | None = None

    def ok(self, norm_tol: float = NORMALIZATION_TOL, ns_tol: float = NO_SIGNALING_TOL) -> bool:
        if self.normalization_error is not None and self.normalization_error > norm_tol:
            return False
        if self.no_signaling_error is not None and self.no_signaling_error > ns_tol:
            return False
        return True


def validate_box(box: CorrelationBox, mode: str = "both") -> ValidationReport:
    """Report max violation magnitudes; never mutates the box."""
    report = ValidationReport()
    if mode in ("normalization", "both"):
        report.normalization_error = box.normalization_error()
    if mode in ("no-signaling", "both"):
        report.no_signaling_error = box.no_signaling_error()
    if mode not in ("normalization", "no-signaling", "both"):
        raise ValueError(f"unknown validation mode {mode!r}")
    return report


def deterministic_box(n: int, d: int, D: int, strategies) -> CorrelationBox:
    """Box from per-party answer functions a_k = g_k(q_k), given as tuples."""
    table = np.zeros((d**n, D**n))
    for q in product(range(d), repeat=n):
        a = tuple(strategies[k][q[k]] for k in range(n))
        table[pack_tuple(q, d), pack_tuple(a, D)] = 1.0
    return CorrelationBox(n, d, D, table, name="deterministic", deterministic=True)


def local_deterministic_count(n: int, d: int, D: int) -> int:
    return (D**d) ** n


def local_deterministic_boxes(n: int, d: int, D: int, cap: int = DEFAULT_ENUMERATION_CAP):
    """Yield all (D^d)^n local deterministic boxes, or refuse loudly."""
    count = local_deterministic_count(n, d, D)
    if count > cap:
        raise EnumerationCapExceeded(
            f"({n},{d},{D}) scenario has {count} local deterministic boxes, "
            f"over the cap of {cap}"
        )
    per_party = list(product(range(D), repeat=d))
    for strategies in product(per_party, repeat=n):
        yield deterministic_box(n, d, D, strategies)


def pr_box() -> CorrelationBox:
    """The extremal no-signaling (2,2,2) box: a1 XOR a2 = q1 AND q2, uniform."""
    table = np.zeros((4, 4))
    for q1, q2, a1, a2 in product(range(2), repeat=4):
        if (a1 ^ a2) == (q1 & q2):
            table[q1 * 2 + q2, a1 * 2 + a2] = 0.5
    return CorrelationBox(2, 2, 2, table, name="pr")


def tsirelson_box() -> CorrelationBox:
    """Quantum (2,2,2) box at the maximal CHSH win probability cos²(π/8).

    Maximally entangled state; party 1 measures σ_z / σ_x, party 2
    measures -(σ_z+σ_x)/√2 / (-σ_z+σ_x)/√2.  Party 2's outcome labels
    are flipped relative to the raw +1->0 convention; with the raw
    labels the box wins with probability sin²(π/8) instead.
    """
    phi = qkernel.state_vector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    obs_a = [qkernel.PAULI_Z, qkernel.PAULI_X]
    s2 = np.sqrt(2)
    obs_b = [-(qkernel.PAULI_Z + qkernel.PAULI_X) / s2, (-qkernel.PAULI_Z + qkernel.PAULI_X) / s2]
    table = np.zeros((4, 4))
    for q1 in range(2):
        for q2 in range(2):
            joint = qkernel.projective_binary_measurement(phi, obs_a[q1], obs_b[q2])
            for a1 in range(2):
                for a2 in range(2):
                    table[q1 * 2 + q2, a1 * 2 + a2] = joint[a1, 1 - a2]
    return CorrelationBox(2, 2, 2, table, name="tsirelson")


_MS_SQRT2 = 1 / np.sqrt(2)
_MS_U = [
    _MS_SQRT2 * np.array([[1j, 0, 0, 1], [0, -1j, 1, 0], [0, 1j, 1, 0], [1, 0, 0, 1j]]),
    0.5 * np.array([[1j, 1, 1, 1j], [-1j, 1, -1, 1j], [1j, 1, -1, -1j], [-1j, 1, 1, -1j]]),
    0.5 * np.array([[-1, -1, -1, 1], [1, 1, -1, 1], [1, -1, 1, 1], [1, -1, -1, -1]]),
]
_MS_V = [
    0.5 * np.array([[1j, -1j, 1, 1], [-1j, -1j, 1, -1], [1, 1, -1j, 1j], [-1j, 1j, 1, 1]]),
    0.5 * np.array([[-1, 1j, 1, 1j], [1, 1j, 1, -1j], [1, -1j, 1, 1j], [-1, -1j, 1, -1j]]),
    _MS_SQRT2 * np.array([[1, 0, 0, 1], [-1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0]]),
]


def _ms_shared_state() -> np.ndarray:
    # (|00>|11> - |01>|10> - |10>|01> + |11>|00>)/2, party 1 on high qubits
    psi = np.zeros(16, dtype=complex)
    psi[0b0011] = 0.5
    psi[0b0110] = -0.5
    psi[0b1001] = -0.5
    psi[0b1100] = 0.5
    return qkernel.state_vector(psi)


def magic_square_box() -> CorrelationBox:
    """Quantum (2,3,8) box winning the magic square game with probability 1.

    Both parties rotate their two qubits of the shared four-qubit state
    with the question-indexed unitaries and measure in the computational
    basis; the two measured bits become (a^0, a^1), in qubit order, and
    a^2 completes the parity (even for party 1, odd for party 2).
    """
    psi = _ms_shared_state()
    us = [qkernel.unitary(u) for u in _MS_U]
    vs = [qkernel.unitary(v) for v in _MS_V]
    table = np.zeros((9, 64))
    for q1 in range(3):
        for q2 in range(3):
            rotated = qkernel.apply_local_unitary(psi, us[q1], 0, 2)
            rotated = qkernel.apply_local_unitary(rotated, vs[q2], 2, 2)
            probs = qkernel.measurement_distribution(rotated, [2, 2])
            for o1 in range(4):
                for o2 in range(4):
                    b0_1, b1_1 = (o1 >> 1) & 1, o1 & 1
                    b0_2, b1_2 = (o2 >> 1) & 1, o2 & 1
                    a1 = b0_1 | (b1_1 << 1) | ((b0_1 ^ b1_1) << 2)
                    a2 = b0_2 | (b1_2 << 1) | ((1 ^ b0_2 ^ b1_2) << 2)
                    table[q1 * 3 + q2, a1 * 8 + a2] += probs[o1, o2]
    return CorrelationBox(2, 3, 8, table, name="magic-square")


def mpp_box(n: int) -> CorrelationBox:
    """Quantum (n,2,2) box from the GHZ state winning the MPP game.

    Each player phases |1> by e^{iπ q_k/2}, applies Hadamard, and
    measures; see mpp_game for the predicate this wins with certainty.
    """
    if n < 2:
        raise ValueError(f"mpp box needs n >= 2, got {n}")
    ghz = np.zeros(2**n, dtype=complex)
    ghz[0] = ghz[-1] = _MS_SQRT2
    ghz = qkernel.state_vector(ghz)
    table = np.zeros((2**n, 2**n))
    for qi, q in enumerate(product(range(2), repeat=n)):
        state = ghz
        for k in range(n):
            phase = np.diag([1.0, np.exp(1j * np.pi * q[k] / 2)])
            state = qkernel.apply_local_unitary(state, qkernel.HADAMARD @ phase, k, 1)
        table[qi] = np.abs(state) ** 2
    return CorrelationBox(n, 2, 2, table, name=f"mpp:{n}")


def e_star(box: CorrelationBox) -> Encoder:
    """Lift a box into an encoder: play the game with the message as question.

    P(x | m) = box(a | m) when the question part of x echoes m, else 0.
    """
    n, d, D = box.n, box.d, box.D
    dD = d * D
    table = np.zeros((d**n, dD**n))
    for mi in range(d**n):
        m = unpack_index(mi, d, n)
        for ai in range(D**n):
            p = box.table[mi, ai]
            if p == 0.0:
                continue
            a = unpack_index(ai, D, n)
            xi = pack_tuple(tuple(m[k] * D + a[k] for k in range(n)), dD)
            table[mi, xi] = p
    return Encoder(n, d, D, table, deterministic=box.deterministic, name=f"e*({box.name})")


def box_win_probabilities(box: CorrelationBox, game: NonlocalGame) -> np.ndarray:
    """Per-question win probability of the box's answers."""
    if (box.n, box.d, box.D) != (game.n, game.d, game.D):
        raise ValueError("box and game scenarios differ")
    return (box.table * game.win_table()).sum(axis=1)


def support_marginal_uniformity_error(box: CorrelationBox) -> float:
    """Max deviation of each party's answer marginal from uniform-over-support.

    The support is taken per (party, question tuple); entries below 1e-12
    are treated as impossible answers.
    """
    worst = 0.0
    t = box.table.reshape((box.d,) * box.n + (box.D,) * box.n)
    for k in range(box.n):
        other_a = tuple(box.n + j for j in range(box.n) if j != k)
        marg = t.sum(axis=other_a)  # question axes + party k answer axis
        flat = marg.reshape(-1, box.D)
        for row in flat:
            support = row > 1e-12
            if not support.any():
                continue
            target = 1.0 / support.sum()
            worst = max(worst, float(np.abs(row[support] - target).max()))
    return worst


def box_to_csv(box: CorrelationBox, path) -> None:
    """Write the box as CSV: header `n,d,D`, rows `q_1..q_n,a_1..a_n,p`."""
    with open(path, "w") as fh:
        fh.write(f"{box.n},{box.d},{box.D}\n")
        for qi in range(box.d**box.n):
            q = unpack_index(qi, box.d, box.n)
            for ai in range(box.D**box.n):
                p = box.table[qi, ai]
                if p == 0.0:
                    continue
                a = unpack_index(ai, box.D, box.n)
                cells = list(q) + list(a) + [f"{p:.17g}"]
                fh.write(",".join(str(c) for c in cells) + "\n")


def boxes_from_csv(path) -> list[CorrelationBox]:
    """Read one or more boxes; each block starts with its own `n,d,D` header."""
    boxes: list[CorrelationBox] = []
    current: tuple[int, int, int] | None = None
    table: np.ndarray | None = None

    def flush():
        nonlocal table
        if current is not None and table is not None:
            n, d, D = current
            boxes.append(CorrelationBox(n, d, D, table, name="csv"))
        table = None

    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) == 3:
                flush()
                current = (int(cells[0]), int(cells[1]), int(cells[2]))
                n, d, D = current
                table = np.zeros((d**n, D**n))
                continue
            if current is None:
                raise ValueError(f"{path}:{lineno}: data row before n,d,D header")
            n, d, D = current
            if len(cells) != 2 * n + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {2 * n + 1} cells for n={n}, got {len(cells)}"
                )
            q = tuple(int(c) for c in cells[:n])
            a = tuple(int(c) for c in cells[n : 2 * n])
            table[pack_tuple(q, d), pack_tuple(a, D)] = float(cells[2 * n])
    flush()
    if not boxes:
        raise ValueError(f"{path}: no boxes found")
    return boxes


def box_from_csv(path) -> CorrelationBox:
    boxes = boxes_from_csv(path)
    if len(boxes) != 1:
        raise ValueError(f"{path}: expected one box, found {len(boxes)}")
    return boxes[0]
