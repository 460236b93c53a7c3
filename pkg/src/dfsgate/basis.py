"""Product and coupled bases for two three-spin qubits.

Six spin-1/2 sites are ordered (z_A, t_A, n_A, z_B, t_B, n_B); site k
is bit k of the product-basis index, bit value 0 meaning m = +1/2, so
the all-up state is index 0.  The coupled basis follows the tree

    (z (x) t) -> jzt,   (jzt (x) n) -> jztn        per qubit,
    jztn_A (x) jztn_B -> (J, m)                     between qubits,

with Condon-Shortley Clebsch-Gordan coefficients at every node.  States
are ordered by (J, m, jztn_A, jztn_B, jzt_A, jzt_B), which puts the
four encoded states (jztn_A = jztn_B = 1/2) at the head of each (J, m)
block in logical order |00>, |01>, |10>, |11>, where the logical bit of
a qubit is its pair spin jzt.

All amplitudes are real, so the basis transform is orthogonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angular import HalfInt, clebsch_gordan

__all__ = [
    "CoupledState",
    "JUNCTION_SLOTS",
    "SLOTS",
    "block_indices",
    "build_transform",
    "coupled_exchange",
    "encoded_indices",
    "enumerate_coupled_basis",
    "product_exchange",
]

N_SPINS = 6
DIM = 64

#: site index of each named spin
SLOTS = {"z_A": 0, "t_A": 1, "n_A": 2, "z_B": 3, "t_B": 4, "n_B": 5}

#: intra-qubit junction name -> pair of site indices
JUNCTION_SLOTS = {
    "zt_A": (0, 1),
    "tn_A": (1, 2),
    "zn_A": (0, 2),
    "zt_B": (3, 4),
    "tn_B": (4, 5),
    "zn_B": (3, 5),
}

_HALF = HalfInt(0.5)


@dataclass(frozen=True)
class CoupledState:
    """One coupled-basis state of the six-spin system."""

    jzt_a: HalfInt
    jztn_a: HalfInt
    jzt_b: HalfInt
    jztn_b: HalfInt
    j: HalfInt
    m: HalfInt

    @property
    def is_encoded(self) -> bool:
        """True when both qubits sit in their lowest (spin-1/2) multiplets."""
        return self.jztn_a == _HALF and self.jztn_b == _HALF

    @property
    def logical_pair(self) -> tuple[int, int]:
        """(jzt_A, jzt_B) as plain ints; the logical bit labels."""
        return (int(self.jzt_a), int(self.jzt_b))

    def sort_key(self):
        return (
            self.j.twice,
            self.m.twice,
            self.jztn_a.twice,
            self.jztn_b.twice,
            self.jzt_a.twice,
            self.jzt_b.twice,
        )


def _qubit_multiplets():
    """(jzt, jztn) pairs of one qubit: (0,1/2), (1,1/2), (1,3/2)."""
    out = []
    for tjzt in (0, 2):
        jzt = HalfInt.from_twice(tjzt)
        for tjztn in range(abs(tjzt - 1), tjzt + 2, 2):
            out.append((jzt, HalfInt.from_twice(tjztn)))
    return out


@lru_cache(maxsize=1)
def enumerate_coupled_basis() -> tuple[CoupledState, ...]:
    """All 64 coupled states in canonical order."""
    states = []
    for jzt_a, jztn_a in _qubit_multiplets():
        for jzt_b, jztn_b in _qubit_multiplets():
            tmin = abs(jztn_a.twice - jztn_b.twice)
            tmax = jztn_a.twice + jztn_b.twice
            for tj in range(tmin, tmax + 1, 2):
                for tm in range(-tj, tj + 1, 2):
                    states.append(
                        CoupledState(
                            jzt_a,
                            jztn_a,
                            jzt_b,
                            jztn_b,
                            HalfInt.from_twice(tj),
                            HalfInt.from_twice(tm),
                        )
                    )
    states.sort(key=CoupledState.sort_key)
    if len(states) != DIM:
        raise RuntimeError(f"coupled basis has {len(states)} states, expected {DIM}")
    return tuple(states)


def _single_spin_vec(tm: int) -> np.ndarray:
    v = np.zeros(2)
    v[0 if tm == 1 else 1] = 1.0
    return v


@lru_cache(maxsize=None)
def _three_spin_state(tjzt: int, tjztn: int, tm: int) -> np.ndarray:
    """|jzt, jztn, m> of one qubit as an 8-vector over (z, t, n) sites.

    Site z is the least significant bit of the 8-dim index.
    """
    h = HalfInt.from_twice
    out = np.zeros(8)
    for tmzt in range(-tjzt, tjzt + 1, 2):
        for tmn in (-1, 1):
            c1 = clebsch_gordan(h(tjzt), h(tmzt), _HALF, h(tmn), h(tjztn), h(tm))
            if c1 == 0.0:
                continue
            for tmz in (-1, 1):
                tmt = tmzt - tmz
                if abs(tmt) != 1:
                    continue
                c0 = clebsch_gordan(_HALF, h(tmz), _HALF, h(tmt), h(tjzt), h(tmzt))
                if c0 == 0.0:
                    continue
                # z least significant within the qubit
                pair = np.kron(_single_spin_vec(tmt), _single_spin_vec(tmz))
                out += c1 * c0 * np.kron(_single_spin_vec(tmn), pair)
    return out


@lru_cache(maxsize=1)
def build_transform() -> np.ndarray:
    """Orthogonal (64, 64) matrix T with T[c, p] = <coupled c|product p>."""
    states = enumerate_coupled_basis()
    T = np.zeros((DIM, DIM))
    h = HalfInt.from_twice
    for row, s in enumerate(states):
        vec = np.zeros(DIM)
        for tma in range(-s.jztn_a.twice, s.jztn_a.twice + 1, 2):
            tmb = s.m.twice - tma
            if abs(tmb) > s.jztn_b.twice:
                continue
            c = clebsch_gordan(
                s.jztn_a, h(tma), s.jztn_b, h(tmb), s.j, s.m
            )
            if c == 0.0:
                continue
            va = _three_spin_state(s.jzt_a.twice, s.jztn_a.twice, tma)
            vb = _three_spin_state(s.jzt_b.twice, s.jztn_b.twice, tmb)
            # qubit A occupies the low three bits
            vec += c * np.kron(vb, va)
        T[row] = vec
    return T


@lru_cache(maxsize=None)
def product_exchange(i: int, j: int) -> np.ndarray:
    """S_i . S_j in the product basis, as a dense (64, 64) array.

    Uses S_i . S_j = (SWAP_ij - 1/2) / 2, which is exact in floats.
    """
    if not (0 <= i < N_SPINS and 0 <= j < N_SPINS and i != j):
        raise ValueError(f"need two distinct sites in [0, {N_SPINS}), got {(i, j)}")
    op = np.zeros((DIM, DIM))
    for p in range(DIM):
        bi, bj = (p >> i) & 1, (p >> j) & 1
        if bi == bj:
            op[p, p] += 0.25
        else:
            op[p, p] -= 0.25
            q = p ^ ((1 << i) | (1 << j))
            op[q, p] += 0.5
    return op


@lru_cache(maxsize=None)
def coupled_exchange(i: int, j: int) -> np.ndarray:
    """S_i . S_j rotated to the coupled basis: T op T^T."""
    T = build_transform()
    return T @ product_exchange(i, j) @ T.T


@lru_cache(maxsize=None)
def block_indices(j, m) -> tuple[int, ...]:
    """Coupled-basis indices of the (J, m) block, in canonical order."""
    j, m = HalfInt(j), HalfInt(m)
    idx = tuple(
        k for k, s in enumerate(enumerate_coupled_basis()) if s.j == j and s.m == m
    )
    if not idx:
        raise ValueError(f"no states with J={j}, m={m}")
    return idx


@lru_cache(maxsize=None)
def encoded_indices(j, m) -> tuple[int, ...]:
    """Indices of the encoded |00>, |01>, |10>, |11> states in block (J, m)."""
    j, m = HalfInt(j), HalfInt(m)
    states = enumerate_coupled_basis()
    found = {}
    for k in block_indices(j, m):
        s = states[k]
        if s.is_encoded:
            found[s.logical_pair] = k
    if len(found) != 4:
        raise ValueError(f"block (J={j}, m={m}) holds no complete logical subspace")
    return tuple(found[pair] for pair in ((0, 0), (0, 1), (1, 0), (1, 1)))
