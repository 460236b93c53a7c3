"""Static model of the biased double-qubit system.

Everything in here is first-order/analytic: the always-on intra-qubit
exchange biases, their encoded eigensystem (the xi levels), the
structure factors that set how strongly each dressed level couples
through a given cross-qubit junction, and the resulting first-order
phase and entangling-area predictions.  Time evolution lives in
`engine`; this module never integrates anything.

Conventions: energies are measured in units of the qubit-A bias, and
the encoded 2x2 blocks are written in the (jzt=0, jzt=1) logical basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import basis
from .angular import HalfInt, reduced_spin_element, wigner_6j

__all__ = [
    "BiasConfig",
    "BiasEigensystem",
    "DegeneracyError",
    "PhasePrediction",
    "StructureFactors",
    "bias_eigensystem",
    "bias_hamiltonian",
    "check_degeneracy",
    "degeneracy_min_gap",
    "encoded_exchange_block",
    "entangling_area",
    "first_order_phases",
    "structure_factors",
    "swap_rotation_R",
    "xi_energies",
]

_S3_4 = math.sqrt(3.0) / 4.0

# Encoded 2x2 blocks of the three intra-qubit exchanges, basis (jzt=0, jzt=1).
# The z-t exchange resolves the pair spin; the two junctions that touch
# spin n generate rotations about axes tipped +-120 degrees from z.
_ENCODED_BLOCKS = {
    "zt": np.array([[-0.75, 0.0], [0.0, 0.25]]),
    "tn": np.array([[0.0, _S3_4], [_S3_4, -0.5]]),
    "zn": np.array([[0.0, -_S3_4], [-_S3_4, -0.5]]),
}

#: exchange eigenvalue of any intra-qubit junction on the leaked quartet
_LEAK_PER_UNIT = 0.25


class DegeneracyError(ValueError):
    """Raised when a drive overlaps the dressed-level splittings."""


@dataclass(frozen=True)
class BiasConfig:
    """Always-on intra-qubit exchange amplitudes, qubit A units.

    The default is the linear-layout working point: each qubit has its
    two neighbor junctions on at equal strength and the non-adjacent
    z-n junction off, with qubit B run 1.7x harder so the two qubits'
    dressed splittings stay apart.
    """

    omega_zt_a: float = 1.0
    omega_tn_a: float = 1.0
    omega_zn_a: float = 0.0
    omega_zt_b: float = 1.7
    omega_tn_b: float = 1.7
    omega_zn_b: float = 0.0

    @classmethod
    def linear(cls, omega_a: float = 1.0, omega_b: float = 1.7) -> "BiasConfig":
        return cls(omega_a, omega_a, 0.0, omega_b, omega_b, 0.0)

    def qubit(self, which: str) -> tuple[float, float, float]:
        """(omega_zt, omega_tn, omega_zn) of qubit "A" or "B"."""
        if which == "A":
            return (self.omega_zt_a, self.omega_tn_a, self.omega_zn_a)
        if which == "B":
            return (self.omega_zt_b, self.omega_tn_b, self.omega_zn_b)
        raise ValueError(f"qubit must be 'A' or 'B', got {which!r}")

    def junction_amplitudes(self) -> dict[str, float]:
        return {
            "zt_A": self.omega_zt_a,
            "tn_A": self.omega_tn_a,
            "zn_A": self.omega_zn_a,
            "zt_B": self.omega_zt_b,
            "tn_B": self.omega_tn_b,
            "zn_B": self.omega_zn_b,
        }


@dataclass(frozen=True)
class BiasEigensystem:
    """Dressed encoded levels of one biased qubit.

    xi_plus/xi_minus are the encoded eigenvalues measured from the
    leaked quartet's level, xi_plus being the upper one.  V holds the
    eigenvectors as rows in the (jzt=0, jzt=1) basis, row 0 = xi_plus;
    each row's largest-magnitude component is made positive, which for
    the linear layout reproduces (1/2, sqrt(3)/2) and (sqrt(3)/2, -1/2).
    """

    xi_plus: float
    xi_minus: float
    V: np.ndarray
    leak_level: float
    omegas: tuple[float, float, float]

    @property
    def splitting(self) -> float:
        return self.xi_plus - self.xi_minus


def xi_energies(omega_zt: float, omega_tn: float, omega_zn: float):
    """Closed-form encoded levels (relative to the leaked quartet).

    xi_pm = [-(sum) +- sqrt(sum of squares - sum of pair products)] / 2.
    """
    s = omega_zt + omega_tn + omega_zn
    disc = (
        omega_zt**2
        + omega_tn**2
        + omega_zn**2
        - (omega_zt * omega_tn + omega_tn * omega_zn + omega_zt * omega_zn)
    )
    root = math.sqrt(max(disc, 0.0))
    return (-s + root) / 2.0, (-s - root) / 2.0


def encoded_exchange_block(junction: str) -> np.ndarray:
    """Encoded 2x2 block of one intra-qubit exchange, (jzt=0, jzt=1) basis."""
    try:
        return _ENCODED_BLOCKS[junction].copy()
    except KeyError:
        raise ValueError(f"junction must be zt, tn or zn; got {junction!r}") from None


def bias_eigensystem(
    omega_zt: float, omega_tn: float, omega_zn: float
) -> BiasEigensystem:
    """Diagonalize one qubit's encoded bias block."""
    h = (
        omega_zt * _ENCODED_BLOCKS["zt"]
        + omega_tn * _ENCODED_BLOCKS["tn"]
        + omega_zn * _ENCODED_BLOCKS["zn"]
    )
    leak = _LEAK_PER_UNIT * (omega_zt + omega_tn + omega_zn)
    w, v = np.linalg.eigh(h)
    # eigh sorts ascending; present xi_plus first
    order = [1, 0]
    V = v[:, order].T.copy()
    for row in V:
        k = np.argmax(np.abs(row))
        if row[k] < 0:
            row *= -1.0
    return BiasEigensystem(
        xi_plus=float(w[1] - leak),
        xi_minus=float(w[0] - leak),
        V=V,
        leak_level=float(leak),
        omegas=(omega_zt, omega_tn, omega_zn),
    )


def bias_hamiltonian(config: BiasConfig) -> np.ndarray:
    """Static six-spin bias Hamiltonian in the coupled basis (64 x 64)."""
    h = np.zeros((basis.DIM, basis.DIM))
    for name, amp in config.junction_amplitudes().items():
        if amp != 0.0:
            h += amp * basis.coupled_exchange(*basis.JUNCTION_SLOTS[name])
    return h


def swap_rotation_R(qubit: str) -> np.ndarray:
    """exp(-i pi S_t . S_n) on one qubit, as a 64 x 64 unitary.

    This is the preparation pulse mapping the logical basis onto the
    dressed xi basis of the linear layout.  Exact through the projector
    decomposition of the exchange (eigenvalues 1/4 and -3/4 only).
    """
    junction = {"A": "tn_A", "B": "tn_B"}[qubit]
    ex = basis.coupled_exchange(*basis.JUNCTION_SLOTS[junction])
    return exchange_exponential(ex, math.pi)


def exchange_exponential(exchange: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i angle S.S) for a bare exchange operator, exactly.

    Any pair exchange satisfies (S.S - 1/4)(S.S + 3/4) = 0, so the
    exponential is a two-projector sum and needs no diagonalization.
    """
    p_singlet = 0.25 * np.eye(exchange.shape[0]) - exchange
    p_triplet = np.eye(exchange.shape[0]) - p_singlet
    return np.exp(-0.25j * angle) * p_triplet + np.exp(0.75j * angle) * p_singlet


@dataclass(frozen=True)
class StructureFactors:
    """How strongly each dressed level of one qubit radiates through a
    cross junction attached at the given spin role."""

    role: str
    lam_plus: float
    lam_minus: float

    @property
    def contrast(self) -> float:
        return self.lam_plus - self.lam_minus


def structure_factors(eig: BiasEigensystem, role: str) -> StructureFactors:
    """Lambda_s = <xi_s| M_role |xi_s> with M the reduced-element table."""
    m = np.array(
        [[reduced_spin_element(role, a, b) for b in (0, 1)] for a in (0, 1)]
    )
    lam = [float(v @ m @ v) for v in eig.V]
    return StructureFactors(role=role, lam_plus=lam[0], lam_minus=lam[1])


@dataclass(frozen=True)
class PhasePrediction:
    """First-order phases of one Gaussian cross pulse of area phi.

    phases[(s, r)] with s, r in "+-" are the four dressed-state phases;
    the c coefficients are their Walsh-Hadamard combinations, i.e. the
    identity, Z_A, Z_B and Z_A Z_B parts of the diagonal logical action.
    """

    j: int
    phi: float
    duration: float
    phases: dict = field(repr=False, default_factory=dict)
    c00: float = 0.0
    c01: float = 0.0
    c10: float = 0.0
    c11: float = 0.0


def first_order_phases(
    eig_a: BiasEigensystem,
    eig_b: BiasEigensystem,
    sf_a: StructureFactors,
    sf_b: StructureFactors,
    phi: float,
    duration: float,
    j: int,
) -> PhasePrediction:
    """Accumulated phases phi_sr = (xi_s + xi_r) T + w6j-weighted cross term.

    The J dependence enters only through (-1)^(J+1) {1/2 1 1/2; 1/2 J 1/2},
    evaluated through the angular module so there is a single code path
    for this factor.
    """
    if j not in (0, 1):
        raise ValueError("encoded blocks exist only for J = 0 or 1")
    pref = (-1) ** (j + 1) * wigner_6j(0.5, 1, 0.5, 0.5, j, 0.5)
    xi = {"A": (eig_a.xi_plus, eig_a.xi_minus), "B": (eig_b.xi_plus, eig_b.xi_minus)}
    lam_a = {"+": sf_a.lam_plus, "-": sf_a.lam_minus}
    lam_b = {"+": sf_b.lam_plus, "-": sf_b.lam_minus}
    phases = {}
    for s, xs in zip("+-", xi["A"]):
        for r, xr in zip("+-", xi["B"]):
            phases[(s, r)] = (xs + xr) * duration + pref * phi * lam_a[s] * lam_b[r]
    pp, pm, mp, mm = (
        phases[("+", "+")],
        phases[("+", "-")],
        phases[("-", "+")],
        phases[("-", "-")],
    )
    return PhasePrediction(
        j=j,
        phi=phi,
        duration=duration,
        phases=phases,
        c00=(pp + pm + mp + mm) / 4.0,
        c01=(pp - pm + mp - mm) / 4.0,
        c10=(pp + pm - mp - mm) / 4.0,
        c11=(pp - pm - mp + mm) / 4.0,
    )


def entangling_area(
    sf_a: StructureFactors, sf_b: StructureFactors, composite: bool = True
) -> float:
    """Pulse area that makes the two-qubit phase a quarter-pi ZZ.

    For the echoed composite this is the area of EACH of the two equal
    halves (3 pi condition); a single un-echoed pulse needs twice that
    (6 pi condition).  Raises DegeneracyError when either qubit's level
    contrast vanishes, since then no area can entangle.
    """
    denom = sf_a.contrast * sf_b.contrast
    if abs(denom) < 1e-12:
        raise DegeneracyError(
            f"no entangling power through roles ({sf_a.role}, {sf_b.role}): "
            "structure-factor contrast vanishes"
        )
    target = 3.0 * math.pi if composite else 6.0 * math.pi
    return target / abs(denom)


def degeneracy_min_gap(eig_a: BiasEigensystem, eig_b: BiasEigensystem) -> float:
    """Smallest spacing between distinct dressed two-qubit levels."""
    levels = [
        xa + xb
        for xa in (eig_a.xi_plus, eig_a.xi_minus)
        for xb in (eig_b.xi_plus, eig_b.xi_minus)
    ]
    gaps = [
        abs(a - b) for i, a in enumerate(levels) for b in levels[i + 1 :]
    ]
    return min(gaps)


def check_degeneracy(
    eig_a: BiasEigensystem,
    eig_b: BiasEigensystem,
    peak_amplitude: float,
    margin: float = 1.0,
) -> float:
    """Require peak drive * margin below every dressed-level gap.

    margin=1 is the hard physical bound enforced by the engine; the
    perturbative regime proper wants margin ~ 10, which callers can
    check separately and report as a diagnostic.  Returns the minimum
    gap for convenience.
    """
    gap = degeneracy_min_gap(eig_a, eig_b)
    if peak_amplitude * margin >= gap:
        raise DegeneracyError(
            f"peak cross amplitude {peak_amplitude:.4g} x margin {margin:g} "
            f"reaches the smallest dressed-level gap {gap:.4g}"
        )
    return gap


def role_slot(role: str, qubit: str) -> int:
    """Site index of a named spin role on a qubit."""
    key = f"{role}_{qubit}"
    if key not in basis.SLOTS:
        raise ValueError(f"unknown spin role {role!r} on qubit {qubit!r}")
    return basis.SLOTS[key]


def cross_exchange(role_a: str, role_b: str) -> np.ndarray:
    """Coupled-basis exchange operator for one cross-qubit junction."""
    return basis.coupled_exchange(role_slot(role_a, "A"), role_slot(role_b, "B"))
