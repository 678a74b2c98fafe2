"""Discretized phonon-frame Hamiltonian of the 1D optical polaron.

After the frame transformation that eliminates the electron coordinate,
the Hamiltonian acts on phonon Fock space alone, parametrized by the
conserved total momentum.  Modes live on a symmetric grid of M odd
momenta k = 2*pi*j/L, j = -(M-1)/2 .. (M-1)/2, and every quantity is
dimensionless: energies in units of the phonon frequency, lengths in
units of l0 = sqrt(hbar / 2 m omega).

A Fock state is a `bytes` object of length M holding the occupation of
each mode in ascending-momentum order, which makes the 8-bit occupation
cap structural: occupations simply cannot exceed 255.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

__all__ = [
    "FockState",
    "ModelParams",
    "OffDiagonal",
    "OccupancyOverflowError",
    "vacuum_state",
    "single_phonon_state",
    "state_to_text",
    "state_from_text",
    "parity_reflect",
    "mode_grid",
    "total_phonons",
    "momentum_index",
    "diagonal_energy",
    "offdiagonals",
    "continuum_threshold_state",
]

FockState = bytes

MAX_OCCUPATION = 255


class OccupancyOverflowError(OverflowError):
    """A phonon creation would push a mode occupation past 255."""


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless definition of the discretized polaron Hamiltonian.

    Parameters
    ----------
    alpha : float
        Coupling constant, >= 0.
    box_length : float
        Periodic box size L in units of l0.
    num_modes : int
        Number of phonon modes M; must be odd so the grid contains k = 0.
    total_momentum : float
        Conserved total momentum in units of hbar/l0.
    """

    alpha: float
    box_length: float
    num_modes: int
    total_momentum: float = 0.0

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.box_length <= 0.0:
            raise ValueError(f"box_length must be > 0, got {self.box_length}")
        if self.num_modes < 1 or self.num_modes % 2 == 0:
            raise ValueError(
                f"num_modes must be an odd positive integer, got {self.num_modes}")

    @classmethod
    def from_cutoff(cls, alpha, box_length, cutoff, total_momentum=0.0):
        """Build from a momentum cutoff k_c instead of a mode count.

        M = k_c L / pi + 1 must come out an odd integer.
        """
        m_exact = cutoff * box_length / math.pi + 1.0
        num_modes = round(m_exact)
        if abs(m_exact - num_modes) > 1e-9:
            raise ValueError(
                f"cutoff {cutoff} and box_length {box_length} give a "
                f"non-integer mode count {m_exact}")
        return cls(alpha, box_length, num_modes, total_momentum)

    @property
    def cutoff(self) -> float:
        """Momentum cutoff k_c = pi (M - 1) / L in units of 1/l0."""
        return math.pi * (self.num_modes - 1) / self.box_length

    @property
    def coupling(self) -> float:
        """Interaction amplitude g = sqrt(2 alpha / L)."""
        return math.sqrt(2.0 * self.alpha / self.box_length)

    @property
    def momentum_step(self) -> float:
        """Grid spacing 2 pi / L."""
        return 2.0 * math.pi / self.box_length

    def mode_offsets(self) -> range:
        """Integer mode indices j = -(M-1)/2 .. (M-1)/2."""
        half = (self.num_modes - 1) // 2
        return range(-half, half + 1)


class OffDiagonal(NamedTuple):
    """One Hamiltonian connection: target state and matrix element."""

    target: FockState
    amplitude: float


def vacuum_state(num_modes: int) -> FockState:
    return bytes(num_modes)


def single_phonon_state(num_modes: int, offset: int = 0) -> FockState:
    """One phonon in the mode with integer index `offset`."""
    occ = bytearray(num_modes)
    occ[(num_modes - 1) // 2 + offset] = 1
    return bytes(occ)


def state_to_text(state: FockState) -> str:
    """Comma-separated occupations in mode order, e.g. "0,0,1,0,0"."""
    return ",".join(str(n) for n in state)


def state_from_text(text: str) -> FockState:
    values = [int(part) for part in text.split(",")]
    if any(v < 0 or v > MAX_OCCUPATION for v in values):
        raise ValueError(f"occupations must be in 0..{MAX_OCCUPATION}: {text!r}")
    return bytes(values)


def parity_reflect(state: FockState) -> FockState:
    """Mirror the occupations j -> -j."""
    return state[::-1]


def mode_grid(params: ModelParams) -> np.ndarray:
    """Dimensionless mode momenta 2 pi j / L, ascending."""
    offsets = np.arange(-(params.num_modes - 1) // 2, (params.num_modes + 1) // 2)
    return params.momentum_step * offsets


def total_phonons(state: FockState) -> int:
    return sum(state)


def momentum_index(state: FockState) -> int:
    """Total phonon momentum in units of 2 pi / L (an exact integer)."""
    half = (len(state) - 1) // 2
    return sum((i - half) * n for i, n in enumerate(state) if n)


def diagonal_energy(state: FockState, params: ModelParams) -> float:
    """<s|H|s> = sum_k n_k + (P - sum_k k n_k)^2."""
    if len(state) != params.num_modes:
        raise ValueError(
            f"state has {len(state)} modes, model has {params.num_modes}")
    mom = params.momentum_step * momentum_index(state)
    diff = params.total_momentum - mom
    return total_phonons(state) + diff * diff


def offdiagonals(state: FockState, params: ModelParams) -> list[OffDiagonal]:
    """All states reachable by one phonon creation or annihilation.

    Creation targets come first in mode order, then annihilation targets
    from every occupied mode.  Amplitudes are -g sqrt(n+1) and -g sqrt(n)
    and never positive.
    """
    if len(state) != params.num_modes:
        raise ValueError(
            f"state has {len(state)} modes, model has {params.num_modes}")
    g = params.coupling
    connections: list[OffDiagonal] = []
    occ = bytearray(state)
    for mode, n in enumerate(state):
        if n >= MAX_OCCUPATION:
            raise OccupancyOverflowError(
                f"creation in mode {mode} would exceed {MAX_OCCUPATION} phonons")
        occ[mode] = n + 1
        connections.append(OffDiagonal(bytes(occ), -g * math.sqrt(n + 1.0)))
        occ[mode] = n
    for mode, n in enumerate(state):
        if n > 0:
            occ[mode] = n - 1
            connections.append(OffDiagonal(bytes(occ), -g * math.sqrt(n)))
            occ[mode] = n
    return connections


def continuum_threshold_state(
    ground: Mapping[FockState, float], params: ModelParams,
) -> dict[FockState, float]:
    """Apply (a0^dag - g) to a ground-state vector.

    The result is an exact eigenstate one phonon quantum above the ground
    state, sitting at the bottom of the scattering continuum.  Input and
    output are unnormalized state -> coefficient maps.
    """
    g = params.coupling
    center = (params.num_modes - 1) // 2
    out: dict[FockState, float] = {}
    for state, coeff in ground.items():
        n0 = state[center]
        if n0 >= MAX_OCCUPATION:
            raise OccupancyOverflowError(
                f"creation in the k=0 mode would exceed {MAX_OCCUPATION} phonons")
        raised = bytearray(state)
        raised[center] = n0 + 1
        raised = bytes(raised)
        out[raised] = out.get(raised, 0.0) + math.sqrt(n0 + 1.0) * coeff
        out[state] = out.get(state, 0.0) - g * coeff
    return {s: c for s, c in out.items() if c != 0.0}
