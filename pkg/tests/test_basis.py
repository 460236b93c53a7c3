"""Tests for the coupled-basis construction and exchange operators.

The product-basis oracle here is built independently from Pauli
matrices and np.kron chains, so agreement with the module's bit-twiddled
operators is a genuine two-route check.
"""

import math

import numpy as np
import pytest

from dfsgate.angular import HalfInt, reduced_spin_element, wigner_6j
from dfsgate.basis import (
    DIM,
    JUNCTION_SLOTS,
    SLOTS,
    CoupledState,
    block_indices,
    build_transform,
    coupled_exchange,
    encoded_indices,
    enumerate_coupled_basis,
    product_exchange,
)

SX = np.array([[0, 1], [1, 0]], dtype=float) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=float) / 2


def kron_site_op(op, site):
    """Embed a single-site operator at the given site (site 0 = LSB)."""
    out = np.eye(1)
    for k in range(6):
        out = np.kron(op if k == site else np.eye(2), out)
    return out


def oracle_exchange(i, j):
    """S_i . S_j assembled from explicit Pauli tensor products."""
    tot = np.zeros((DIM, DIM), dtype=complex)
    for comp in (SX, SY, SZ):
        tot += kron_site_op(comp, i) @ kron_site_op(comp, j)
    assert np.abs(tot.imag).max() < 1e-15
    return tot.real


ALL_PAIRS = [(i, j) for i in range(6) for j in range(i + 1, 6)]


class TestProductExchange:
    def test_matches_pauli_oracle(self):
        for i, j in ALL_PAIRS:
            got = product_exchange(i, j)
            want = oracle_exchange(i, j)
            assert np.abs(got - want).max() < 1e-15

    def test_spectrum(self):
        w = np.linalg.eigvalsh(product_exchange(0, 3))
        assert np.sum(np.isclose(w, 0.25)) == 48
        assert np.sum(np.isclose(w, -0.75)) == 16

    def test_bad_sites(self):
        with pytest.raises(ValueError):
            product_exchange(0, 0)
        with pytest.raises(ValueError):
            product_exchange(0, 6)


class TestCoupledBasis:
    def test_dimension_bookkeeping(self):
        states = enumerate_coupled_basis()
        assert len(states) == 64
        by_j = {}
        for s in states:
            by_j.setdefault(int(s.j), []).append(s)
        # multiplicity of each J, counting one state per m
        per_m = {j: len(v) // (2 * j + 1) for j, v in by_j.items()}
        assert per_m == {0: 5, 1: 9, 2: 5, 3: 1}
        m0 = [s for s in states if s.m == 0]
        assert len(m0) == 20

    def test_transform_orthogonal(self):
        T = build_transform()
        assert np.abs(T @ T.T - np.eye(DIM)).max() < 1e-12

    def test_stretched_state(self):
        # all spins up lives entirely in the J=3, m=3 multiplet
        T = build_transform()
        states = enumerate_coupled_basis()
        (k,) = [i for i, s in enumerate(states) if s.j == 3 and s.m == 3]
        col = T[:, 0]
        assert col[k] == pytest.approx(1.0, abs=1e-12)
        assert np.abs(np.delete(col, k)).max() < 1e-12

    def test_encoded_ordering(self):
        for j in (0, 1):
            idx = encoded_indices(j, 0)
            states = enumerate_coupled_basis()
            pairs = [states[k].logical_pair for k in idx]
            assert pairs == [(0, 0), (0, 1), (1, 0), (1, 1)]
            # canonical order puts them at the head of the block
            assert list(idx) == list(block_indices(j, 0))[:4]

    def test_block_lookup_errors(self):
        with pytest.raises(ValueError):
            block_indices(0, 1)
        with pytest.raises(ValueError):
            encoded_indices(3, 0)


class TestCoupledExchange:
    def test_equals_conjugated_oracle(self):
        T = build_transform()
        for i, j in ALL_PAIRS:
            got = coupled_exchange(i, j)
            want = T @ oracle_exchange(i, j) @ T.T
            assert np.abs(got - want).max() < 1e-12

    def test_block_diagonal(self):
        states = enumerate_coupled_basis()
        labels = [(s.j.twice, s.m.twice) for s in states]
        for i, j in ALL_PAIRS:
            op = coupled_exchange(i, j)
            for a in range(DIM):
                for b in range(DIM):
                    if labels[a] != labels[b]:
                        assert abs(op[a, b]) < 1e-12

    def test_gauge_invariance_of_j1_blocks(self):
        # J=1 blocks at m = -1, 0, +1 are identical matrices
        for i, j in ALL_PAIRS:
            op = coupled_exchange(i, j)
            blocks = []
            for tm in (-2, 0, 2):
                idx = block_indices(1, HalfInt.from_twice(tm))
                blocks.append(op[np.ix_(idx, idx)])
            assert np.abs(blocks[0] - blocks[1]).max() < 1e-12
            assert np.abs(blocks[1] - blocks[2]).max() < 1e-12

    def test_intra_qubit_pair_exchange_diagonal(self):
        # z.t exchange resolves the pair spin: eigenvalue 1/4 - delta(jzt,0)
        op = coupled_exchange(*JUNCTION_SLOTS["zt_A"])
        states = enumerate_coupled_basis()
        for k, s in enumerate(states):
            want = 0.25 - (1.0 if s.jzt_a == 0 else 0.0)
            assert op[k, k] == pytest.approx(want, abs=1e-12)
        row = np.abs(op - np.diag(np.diag(op))).max()
        assert row < 1e-12

    def test_leaked_multiplet_sees_quarter(self):
        # within a qubit's jztn=3/2 quartet every intra exchange is 1/4
        states = enumerate_coupled_basis()
        for name in ("zt_A", "tn_A", "zn_A"):
            op = coupled_exchange(*JUNCTION_SLOTS[name])
            for k, s in enumerate(states):
                if s.jztn_a == 1.5:
                    assert op[k, k] == pytest.approx(0.25, abs=1e-12)

    def test_encoded_tn_block(self):
        # the t.n exchange acts on the logical qubit as a pi rotation
        # generator about an axis tipped 120 degrees from z
        op = coupled_exchange(*JUNCTION_SLOTS["tn_A"])
        idx = encoded_indices(1, 0)
        blk = op[np.ix_(idx, idx)]
        s3 = math.sqrt(3) / 4
        want_a = np.array([[0, s3], [s3, -0.5]])
        # acting on qubit A only: block = M_A (x) I_B in logical order
        want = np.kron(want_a, np.eye(2))
        assert np.abs(blk - want).max() < 1e-12


class TestWignerEckartFactorization:
    def test_inter_qubit_encoded_blocks_factor(self):
        # every cross-qubit exchange, restricted to the encoded states of
        # a (J, m) block, is the 6j-weighted outer product of one-qubit
        # reduced matrix elements
        roles = {"z": 0, "t": 1, "n": 2}
        states = enumerate_coupled_basis()
        for ra, sa in roles.items():
            for rb, sb in roles.items():
                op = coupled_exchange(sa, 3 + sb)
                for j in (0, 1):
                    for tm in range(-2 * j, 2 * j + 1, 2):
                        m = HalfInt.from_twice(tm)
                        idx = encoded_indices(j, m)
                        blk = op[np.ix_(idx, idx)]
                        pref = (-1) ** (j + 1) * wigner_6j(
                            0.5, 1, 0.5, 0.5, j, 0.5
                        )
                        for a, ka in enumerate(idx):
                            for b, kb in enumerate(idx):
                                pa = states[ka].logical_pair
                                pb = states[kb].logical_pair
                                want = (
                                    pref
                                    * reduced_spin_element(ra, pa[0], pb[0])
                                    * reduced_spin_element(rb, pa[1], pb[1])
                                )
                                assert blk[a, b] == pytest.approx(
                                    want, abs=1e-12
                                ), (ra, rb, j, tm, pa, pb)

    def test_j0_to_j1_ratio(self):
        # encoded coupling strengths differ by a factor -3 between the
        # two gauge sectors
        op = coupled_exchange(SLOTS["z_A"], SLOTS["z_B"])
        b0 = op[np.ix_(encoded_indices(0, 0), encoded_indices(0, 0))]
        b1 = op[np.ix_(encoded_indices(1, 0), encoded_indices(1, 0))]
        nz = np.abs(b1) > 1e-13
        assert np.allclose(b0[nz] / b1[nz], -3.0, atol=1e-11)

    def test_perturbed_reduced_element_breaks_factorization(self):
        # sanity hook: shifting one tabulated reduced element by 1e-6
        # must be detected by the factorization residual
        op = coupled_exchange(SLOTS["z_A"], SLOTS["z_B"])
        idx = encoded_indices(1, 0)
        blk = op[np.ix_(idx, idx)]
        states = enumerate_coupled_basis()
        pref = (-1) ** 2 * wigner_6j(0.5, 1, 0.5, 0.5, 1, 0.5)

        def residual(perturb):
            r = 0.0
            for a, ka in enumerate(idx):
                for b, kb in enumerate(idx):
                    pa, pb = states[ka].logical_pair, states[kb].logical_pair
                    ma = reduced_spin_element("z", pa[0], pb[0])
                    if perturb and (pa[0], pb[0]) == (1, 1):
                        ma += 1e-6
                    mb = reduced_spin_element("z", pa[1], pb[1])
                    r = max(r, abs(blk[a, b] - pref * ma * mb))
            return r

        assert residual(False) < 1e-12
        assert residual(True) > 1e-8
