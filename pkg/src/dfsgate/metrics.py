"""Logical-block extraction and the gate's two figures of merit.

The composite gate lives in a 64-dim coupled space, but all the logic
happens in the 4-dim encoded corner of each (J, m) block.  This module
cuts that corner out, moves it to the dressed basis the protocol
computes in (stripping the ideal preparation frame R, which is where
the gate starts and ends), optionally removes the ideal echo rotation,
and scores what is left against the target entangling gate with the
trace-distance figure

    D = 1/2 + |Tr(U~^dag U~)|^2 / 32 - |Tr(U_t^dag U~)|^2 / 16

and the leakage 1 - |Tr(U~^dag U~)|^2 / 16.  Both are insensitive to
global phase; D compares against exp(-i pi Z^A Z^B / 4) for both gauge
sectors (their entangling phases differ by a sign convention that is a
global phase after the echo accounting).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import basis, model
from .engine import ECHO_ETA
from .model import BiasConfig

__all__ = [
    "CZ_TARGET",
    "GateReport",
    "LogicalBlock",
    "cz_target",
    "encoded_block",
    "leakage",
    "local_z_minimized_D",
    "logical_block",
    "trace_distance_D",
]

_Z = np.array([1.0, -1.0])

#: exp(-i pi/4 Z^A Z^B), the entangling target in the dressed basis
CZ_TARGET = np.diag(np.exp(-1j * np.pi / 4.0 * np.kron(_Z, _Z)))


def cz_target() -> np.ndarray:
    """A fresh copy of the target gate matrix."""
    return CZ_TARGET.copy()


@dataclass
class LogicalBlock:
    """The encoded 4x4 action of a 64-dim evolution in one gauge block.

    Rows and columns follow the logical product order |00>, |01>, |10>,
    |11> (qubit A slow).  The entries live in the dressed basis, so a
    perfect composite gate is exp(-i pi ZZ/4) up to global phase.  The
    block of a unitary evolution is a contraction; singular values
    above 1 indicate an extraction bug, not physics.
    """

    j: int
    block: np.ndarray

    def __post_init__(self):
        self.block = np.asarray(self.block, dtype=complex)
        if self.block.shape != (4, 4):
            raise ValueError("logical block must be 4x4")
        top = np.linalg.svd(self.block, compute_uv=False).max()
        if top > 1.0 + 1e-10:
            raise ValueError(f"block has singular value {top:.6f} > 1; not a contraction")


def _as_matrix(block) -> np.ndarray:
    return block.block if isinstance(block, LogicalBlock) else np.asarray(block)


def encoded_block(u: np.ndarray, j: int, m=0) -> np.ndarray:
    """Raw 4x4 encoded submatrix of u, no frame change."""
    idx = basis.encoded_indices(j, m)
    return u[np.ix_(idx, idx)]


def _check_block_diagonal(u: np.ndarray, j: int, m, tol: float) -> None:
    rows = np.zeros(basis.DIM, dtype=bool)
    rows[list(basis.block_indices(j, m))] = True
    spill = max(
        np.abs(u[np.ix_(rows, ~rows)]).max(initial=0.0),
        np.abs(u[np.ix_(~rows, rows)]).max(initial=0.0),
    )
    if spill > tol:
        raise ValueError(
            f"evolution leaks out of the (J={j}, m={m}) block by {spill:.2e}; "
            "inhomogeneous terms present?"
        )


def _echo_xi(eig) -> np.ndarray:
    """The ideal encoded echo seen from the dressed basis of one qubit."""
    pi_enc = np.exp(1j * ECHO_ETA) * np.array([[0.0, 1.0], [-1.0, 0.0]])
    return eig.V @ pi_enc @ eig.V.T


def logical_block(
    u: np.ndarray,
    j: int,
    m=0,
    bias: BiasConfig | None = None,
    strip_echo: bool = True,
    block_tol: float = 1e-9,
) -> LogicalBlock:
    """Extract and frame-strip the encoded action of a 64-dim unitary.

    The preparation frame R maps the logical basis onto the dressed
    states, so stripping it is a conjugation by the bias eigenvectors
    (R's internal phases cancel between the two sides).  With
    strip_echo the ideal echo rotation is divided out on the left,
    which is the right accounting for a composite U Pi U; pass
    strip_echo=False for evolutions that contain no echo.
    """
    bias = bias if bias is not None else BiasConfig()
    _check_block_diagonal(u, j, m, block_tol)
    eig_a = model.bias_eigensystem(*bias.qubit("A"))
    eig_b = model.bias_eigensystem(*bias.qubit("B"))
    w = np.kron(eig_a.V, eig_b.V)
    blk = w @ encoded_block(u, j, m) @ w.T
    if strip_echo:
        blk = np.kron(_echo_xi(eig_a), _echo_xi(eig_b)).conj().T @ blk
    return LogicalBlock(j=j, block=blk)


def leakage(block) -> float:
    """Population lost from the encoded subspace: 1 - |Tr(U~^dag U~)|^2/16."""
    b = _as_matrix(block)
    val = 1.0 - abs(np.trace(b.conj().T @ b)) ** 2 / 16.0
    return max(float(val), 0.0)


def trace_distance_D(block, target: np.ndarray = CZ_TARGET) -> float:
    """Distance to the target gate, global-phase insensitive."""
    b = _as_matrix(block)
    t1 = abs(np.trace(b.conj().T @ b)) ** 2
    t2 = abs(np.trace(np.asarray(target).conj().T @ b)) ** 2
    return max(float(0.5 + t1 / 32.0 - t2 / 16.0), 0.0)


def local_z_minimized_D(block, target: np.ndarray = CZ_TARGET) -> float:
    """Diagnostic variant of D minimized over local Z phases.

    The composite's echo already cancels the deterministic single-qubit
    phases, so the fixed-frame D is the production figure; this one
    answers "how much of a bad D is mere local dephasing?" when
    debugging.  Minimization is over exp(i theta_a Z) x exp(i theta_b Z)
    applied after the gate.
    """
    from scipy.optimize import minimize

    b = _as_matrix(block)

    def cost(theta):
        za = np.exp(1j * theta[0] * _Z)
        zb = np.exp(1j * theta[1] * _Z)
        return trace_distance_D(np.kron(np.diag(za), np.diag(zb)) @ b, target)

    best = None
    for start in ([0.0, 0.0], [np.pi / 2, 0.0], [0.0, np.pi / 2], [np.pi / 4, -np.pi / 4]):
        res = minimize(cost, start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        if best is None or res.fun < best:
            best = res.fun
    return float(best)


@dataclass
class GateReport:
    """Everything a calibrated (and optionally noise-averaged) gate run
    produced, ready for serialization."""

    sigma_t: float
    amplitude: float
    mode: str
    window: float = 5.0
    leakage: dict = field(default_factory=dict)
    distance: dict = field(default_factory=dict)
    noisy_mean: dict = field(default_factory=dict)
    noisy_std: dict = field(default_factory=dict)
    trials: int = 0

    def __post_init__(self):
        for name, table in (("leakage", self.leakage), ("distance", self.distance)):
            for j, val in table.items():
                if not 0.0 <= val <= 1.0:
                    raise ValueError(f"{name}[{j}] = {val} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "sigma_t": self.sigma_t,
            "amplitude": self.amplitude,
            "mode": self.mode,
            "window": self.window,
            "leakage": {str(k): v for k, v in self.leakage.items()},
            "distance": {str(k): v for k, v in self.distance.items()},
            "noisy_mean": {str(k): v for k, v in self.noisy_mean.items()},
            "noisy_std": {str(k): v for k, v in self.noisy_std.items()},
            "trials": self.trials,
        }
