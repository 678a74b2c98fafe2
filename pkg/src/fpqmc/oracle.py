"""Brute-force eigensolver on a truncated Fock space.

Truncating both the total phonon number and the per-mode occupation
makes the Hilbert space finite, so the lowest eigenpairs can be computed
with a sparse iterative solver (dense below a small cutoff) and used to
validate every stochastic result at desk scale.  This is a validation
tool, not a production solver: the stochastic engine needs no total
phonon cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .model import (
    MAX_OCCUPATION,
    FockState,
    ModelParams,
    mode_grid,
)
from .observables import SpectrumPoint

__all__ = [
    "Truncation",
    "BasisTooLargeError",
    "NoConvergenceError",
    "OracleSolution",
    "basis_size",
    "build_basis",
    "assemble_hamiltonian",
    "solve",
    "spectrum_scan",
]

DENSE_CUTOFF = 2000


class BasisTooLargeError(RuntimeError):
    """The requested truncation exceeds the enumeration bound."""


class NoConvergenceError(RuntimeError):
    """The iterative eigensolver failed to reach the residual target."""


@dataclass(frozen=True)
class Truncation:
    """Finite-basis cutoffs: total phonon number and per-mode occupation."""

    max_total_phonons: int
    max_per_mode: int = MAX_OCCUPATION

    def __post_init__(self):
        if self.max_total_phonons < 0:
            raise ValueError("max_total_phonons must be >= 0")
        if not 0 <= self.max_per_mode <= MAX_OCCUPATION:
            raise ValueError(f"max_per_mode must be in 0..{MAX_OCCUPATION}")


def basis_size(num_modes: int, trunc: Truncation) -> int:
    """Number of occupation arrays meeting both truncation bounds."""
    cap = min(trunc.max_per_mode, trunc.max_total_phonons)
    counts = [1] + [0] * trunc.max_total_phonons  # ways to reach each total
    for _ in range(num_modes):
        new = [0] * (trunc.max_total_phonons + 1)
        for total, ways in enumerate(counts):
            if ways:
                for n in range(0, min(cap, trunc.max_total_phonons - total) + 1):
                    new[total + n] += ways
        counts = new
    return sum(counts)


def build_basis(params: ModelParams, trunc: Truncation,
                limit: int = 10_000_000) -> np.ndarray:
    """All truncated Fock states as a (size, M) uint8 array.

    Rows are in lexicographic occupation order, which is also the order
    eigenvector components refer to.
    """
    size = basis_size(params.num_modes, trunc)
    if size > limit:
        raise BasisTooLargeError(
            f"truncated basis has {size} states, exceeding the bound {limit}")
    num_modes = params.num_modes
    cap = trunc.max_per_mode
    basis = np.zeros((size, num_modes), dtype=np.uint8)
    occ = bytearray(num_modes)
    row = 0

    def fill(mode: int, budget: int):
        nonlocal row
        if mode == num_modes:
            basis[row] = occ
            row += 1
            return
        for n in range(0, min(cap, budget) + 1):
            occ[mode] = n
            fill(mode + 1, budget - n)
        occ[mode] = 0

    fill(0, trunc.max_total_phonons)
    assert row == size
    return basis


def _row_view(basis: np.ndarray) -> np.ndarray:
    """1D void view so rows compare lexicographically for searchsorted."""
    b = np.ascontiguousarray(basis)
    return b.view(np.dtype((np.void, b.shape[1]))).ravel()


def diagonal_energies(params: ModelParams, basis: np.ndarray) -> np.ndarray:
    offsets = np.arange(-(params.num_modes - 1) // 2,
                        (params.num_modes + 1) // 2, dtype=np.int64)
    totals = basis.sum(axis=1, dtype=np.int64)
    moment = basis.astype(np.int64) @ offsets
    diff = params.total_momentum - params.momentum_step * moment
    return totals + diff * diff


def assemble_hamiltonian(params: ModelParams,
                         basis: np.ndarray,
                         trunc: Truncation) -> scipy.sparse.csr_matrix:
    """Sparse Hamiltonian on the truncated basis.

    Creations leading out of the basis are dropped; that is what the
    truncation means.  Only the upper creation block is generated and the
    transpose supplies the annihilations, so hermiticity is structural.
    """
    size = len(basis)
    view = _row_view(basis)
    g = params.coupling
    totals = basis.sum(axis=1, dtype=np.int64)
    rows, cols, vals = [], [], []
    within_budget = totals < trunc.max_total_phonons
    for mode in range(params.num_modes):
        allowed = within_budget & (basis[:, mode] < trunc.max_per_mode)
        if not allowed.any():
            continue
        src = np.nonzero(allowed)[0]
        child = basis[src].copy()
        child[:, mode] += 1
        idx = np.searchsorted(view, _row_view(child))
        found = (idx < size) & (view[np.minimum(idx, size - 1)] == _row_view(child))
        src = src[found]
        if src.size == 0:
            continue
        rows.append(src)
        cols.append(idx[found])
        vals.append(-g * np.sqrt(basis[src, mode].astype(float) + 1.0))
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
    else:
        rows = np.empty(0, dtype=np.int64)
        cols = np.empty(0, dtype=np.int64)
        vals = np.empty(0, dtype=float)
    creation = scipy.sparse.coo_matrix((vals, (cols, rows)), shape=(size, size))
    diagonal = scipy.sparse.diags(diagonal_energies(params, basis))
    return (diagonal + creation + creation.T).tocsr()


def _reflection_permutation(basis: np.ndarray) -> np.ndarray:
    view = _row_view(basis)
    mirrored = _row_view(np.ascontiguousarray(basis[:, ::-1]))
    perm = np.searchsorted(view, mirrored)
    if not np.array_equal(view[perm], mirrored):
        raise RuntimeError("basis is not closed under parity reflection")
    return perm


def _rotate_to_definite_parity(energies, vectors, perm, tol=1e-7):
    """Rotate degenerate subspaces so every column is a parity eigenvector."""
    vectors = vectors.copy()
    start = 0
    k = len(energies)
    while start < k:
        stop = start + 1
        while stop < k and abs(energies[stop] - energies[start]) < tol:
            stop += 1
        block = vectors[:, start:stop]
        overlap = block.T @ block[perm]
        overlap = 0.5 * (overlap + overlap.T)
        _, u = np.linalg.eigh(overlap)
        vectors[:, start:stop] = block @ u
        start = stop
    return vectors


@dataclass
class OracleSolution:
    """Lowest eigenpairs of a truncated polaron Hamiltonian."""

    params: ModelParams
    truncation: Truncation
    basis: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray  # (basis size, k), parity-rotated
    residuals: np.ndarray

    def state_index(self, state: FockState) -> int:
        view = _row_view(self.basis)
        key = np.frombuffer(state, dtype=np.uint8).reshape(1, -1)
        idx = int(np.searchsorted(view, _row_view(key)[0]))
        if idx >= len(view) or self.basis[idx].tobytes() != state:
            raise KeyError(f"state not in truncated basis: {state!r}")
        return idx

    def as_dict(self, j: int = 0, cutoff: float = 0.0) -> dict[FockState, float]:
        """Eigenvector j as a state -> coefficient map."""
        vec = self.vectors[:, j]
        keep = np.abs(vec) > cutoff
        return {self.basis[i].tobytes(): float(vec[i]) for i in np.nonzero(keep)[0]}

    def density(self, j: int = 0) -> np.ndarray:
        """Per-mode phonon density <j|n_k|j> (vector is normalized)."""
        vec = self.vectors[:, j]
        weights = vec * vec
        return weights @ self.basis.astype(float)

    def spectral_weight(self, j: int = 0) -> float:
        vac = self.state_index(bytes(self.params.num_modes))
        return float(self.vectors[vac, j] ** 2)

    def parity_overlap(self, j: int = 0) -> float:
        perm = _reflection_permutation(self.basis)
        vec = self.vectors[:, j]
        return float(vec @ vec[perm])

    def excitation(self, j: int) -> float:
        return float(self.energies[j] - self.energies[0])


def solve(params: ModelParams, trunc: Truncation, k: int = 1,
          dense_cutoff: int = DENSE_CUTOFF, force_dense: bool | None = None,
          residual_tol: float = 1e-9) -> OracleSolution:
    """Lowest-k eigenpairs of the truncated Hamiltonian.

    The iterative (Lanczos/ARPACK) path is used above `dense_cutoff`
    states, a dense solver below; `force_dense` overrides.  Residuals
    ||H v - E v|| are checked against `residual_tol` * ||v||.
    """
    if k < 1:
        raise ValueError("need at least one eigenpair")
    basis = build_basis(params, trunc)
    size = len(basis)
    if k >= size:
        raise ValueError(f"asked for {k} eigenpairs of a {size}-state basis")
    ham = assemble_hamiltonian(params, basis, trunc)
    use_dense = size <= dense_cutoff if force_dense is None else force_dense
    if use_dense:
        energies, vectors = np.linalg.eigh(ham.toarray())
        energies, vectors = energies[:k], vectors[:, :k]
    else:
        ncv = min(size, max(4 * k + 20, 40))
        try:
            energies, vectors = scipy.sparse.linalg.eigsh(
                ham, k=k, which="SA", ncv=ncv, maxiter=size * 20, tol=0)
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise NoConvergenceError(str(exc)) from exc
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
    perm = _reflection_permutation(basis)
    vectors = _rotate_to_definite_parity(energies, vectors, perm)
    residuals = np.linalg.norm(ham @ vectors - vectors * energies, axis=0)
    scale = np.maximum(1.0, np.abs(energies))
    if np.any(residuals > residual_tol * scale * np.linalg.norm(vectors, axis=0)):
        raise NoConvergenceError(
            f"eigenpair residuals {residuals} exceed tolerance {residual_tol}")
    return OracleSolution(params=params, truncation=trunc, basis=basis,
                          energies=energies, vectors=vectors, residuals=residuals)


def spectrum_scan(alphas, box_length: float, num_modes: int, trunc: Truncation,
                  k: int = 6, total_momentum: float = 0.0,
                  parity_threshold: float = 0.99) -> list[list[SpectrumPoint]]:
    """Exact low spectra over a coupling grid, for locating level crossings."""
    out = []
    for alpha in alphas:
        params = ModelParams(float(alpha), box_length, num_modes, total_momentum)
        sol = solve(params, trunc, k=k)
        points = []
        for j in range(k):
            overlap = sol.parity_overlap(j)
            if overlap > parity_threshold:
                parity = "even"
            elif overlap < -parity_threshold:
                parity = "odd"
            else:
                parity = "mixed"
            exc = sol.excitation(j)
            points.append(SpectrumPoint(
                index=j, energy=float(sol.energies[j]), energy_error=0.0,
                excitation=exc, excitation_error=0.0, parity=parity,
                bound=bool(0.0 < exc < 1.0)))
        out.append(points)
    return out
