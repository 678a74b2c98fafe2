"""Estimators computed from converged walker vectors.

Energies come from mean shifts with blocking error bars; diagonal
observables (mode densities, spectral weights) use products of two
independent replicas of the same eigenstate so the estimator is free of
the square bias a single stochastic vector would carry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Mapping, Sequence

import numpy as np

from .model import FockState, parity_reflect

__all__ = [
    "BlockingResult",
    "SeriesTooShortError",
    "DegenerateOverlapError",
    "SpectrumPoint",
    "DensityProfile",
    "SpectralWeight",
    "blocking_error",
    "ratio_estimate",
    "replica_diagonal_expectation",
    "spectral_weight",
    "classify_parity",
    "write_summary",
    "write_tsv",
]


class SeriesTooShortError(ValueError):
    """Blocking analysis needs at least 32 samples."""


class DegenerateOverlapError(RuntimeError):
    """The replica overlap is consistent with zero."""


@dataclass(frozen=True)
class BlockingResult:
    """Mean and autocorrelation-aware error of a time series."""

    mean: float
    error: float
    plateau_found: bool
    # rows of (block level, number of blocks, error estimate)
    table: tuple[tuple[int, int, float], ...] = ()

    def __iter__(self):
        return iter((self.mean, self.error))


def _within_ten_percent(a: float, b: float) -> bool:
    return abs(a - b) <= 0.1 * max(a, b)


def blocking_error(series) -> BlockingResult:
    """Mean and standard error by recursive pair averaging.

    The error estimate at each blocking level is sqrt(var/n).  The quoted
    error comes from the first level whose estimate agrees with the next
    two levels within 10%; if no such plateau exists the largest estimate
    is used and the result is flagged.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 32:
        raise SeriesTooShortError(
            f"need a 1D series of at least 32 samples, got {x.shape}")
    mean = float(x.mean())
    table = []
    level = 0
    while x.size >= 8:
        err = math.sqrt(float(x.var(ddof=1)) / x.size)
        table.append((level, int(x.size), err))
        if x.size % 2:
            x = x[:-1]
        x = 0.5 * (x[0::2] + x[1::2])
        level += 1
    errors = [row[2] for row in table]
    plateau = None
    for k in range(len(errors) - 2):
        if (_within_ten_percent(errors[k], errors[k + 1])
                and _within_ten_percent(errors[k], errors[k + 2])):
            plateau = k
            break
    if plateau is None:
        return BlockingResult(mean, max(errors), False, tuple(table))
    return BlockingResult(mean, errors[plateau], True, tuple(table))


@dataclass(frozen=True)
class SpectrumPoint:
    """One eigenstate energy with its excitation above the ground state."""

    index: int
    energy: float
    energy_error: float
    excitation: float
    excitation_error: float
    parity: str = "unknown"
    bound: bool = False

    def __post_init__(self):
        if self.index == 0 and self.excitation != 0.0:
            raise ValueError("the ground state entry must have zero excitation")


@dataclass(frozen=True)
class DensityProfile:
    """Per-mode phonon number expectation of one eigenstate."""

    state_index: int
    momenta: tuple[float, ...]
    values: tuple[float, ...]
    errors: tuple[float, ...]

    def __post_init__(self):
        if not len(self.momenta) == len(self.values) == len(self.errors):
            raise ValueError("momenta, values and errors must align")


@dataclass(frozen=True)
class SpectralWeight:
    """Squared vacuum overlap Z = |<vac|j>|^2 of one eigenstate."""

    state_index: int
    value: float
    error: float
    momentum: float = 0.0


def ratio_estimate(numerators, denominators) -> tuple[float, float]:
    """Mean and blocking error of a ratio sampled over snapshots.

    The value is (sum of numerators)/(sum of denominators); the error
    comes from blocking the per-snapshot ratio series.  Raises
    :class:`DegenerateOverlapError` when the denominator mean is
    indistinguishable from zero.
    """
    num = np.asarray(numerators, dtype=float)
    den = np.asarray(denominators, dtype=float)
    if num.shape != den.shape or num.ndim != 1:
        raise ValueError("numerator and denominator series must align")
    den_mean = den.mean()
    den_scale = den.std(ddof=1) / math.sqrt(den.size) if den.size > 1 else 0.0
    if abs(den_mean) <= 3.0 * den_scale or den_mean == 0.0:
        raise DegenerateOverlapError(
            f"replica overlap {den_mean:.3g} +- {den_scale:.3g} is consistent with 0")
    value = float(num.sum() / den.sum())
    if num.size >= 32:
        error = blocking_error(num / den).error
    else:
        error = 0.0
    return value, error


def _overlap_sums(v1: Mapping[FockState, float], v2: Mapping[FockState, float],
                  observable: Callable[[FockState], float]):
    if len(v2) < len(v1):
        v1, v2 = v2, v1
    num = 0.0
    den = 0.0
    for state, c1 in v1.items():
        c2 = v2.get(state)
        if c2 is not None:
            den += c1 * c2
            num += observable(state) * c1 * c2
    return num, den


def replica_diagonal_expectation(
    v1: Mapping[FockState, float],
    v2: Mapping[FockState, float],
    observable: Callable[[FockState], float],
) -> float:
    """<O> = sum_i O(i) c1_i c2_i / sum_i c1_i c2_i for a diagonal O.

    This is the single-snapshot form; stochastic error bars come from
    feeding per-snapshot sums to :func:`ratio_estimate`.
    """
    num, den = _overlap_sums(v1, v2, observable)
    if den == 0.0:
        raise DegenerateOverlapError("replica overlap is exactly zero")
    return num / den


def spectral_weight(
    v1: Mapping[FockState, float],
    v2: Mapping[FockState, float],
    momentum: float = 0.0,
    state_index: int = 0,
) -> SpectralWeight:
    """Vacuum weight Z = c1_vac c2_vac / sum_i c1_i c2_i (single snapshot)."""
    if not v1 or not v2:
        raise DegenerateOverlapError("empty vector")
    num_modes = len(next(iter(v1)))
    vac = bytes(num_modes)
    _, den = _overlap_sums(v1, v2, lambda s: 0.0)
    if den == 0.0:
        raise DegenerateOverlapError("replica overlap is exactly zero")
    value = v1.get(vac, 0.0) * v2.get(vac, 0.0) / den
    return SpectralWeight(state_index=state_index, value=value, error=0.0,
                          momentum=momentum)


def classify_parity(v: Mapping[FockState, float], threshold: float = 0.9) -> str:
    """Label a vector even/odd/mixed from its overlap with its reflection."""
    norm = 0.0
    cross = 0.0
    for state, c in v.items():
        norm += c * c
        mirrored = v.get(parity_reflect(state))
        if mirrored is not None:
            cross += c * mirrored
    if norm == 0.0:
        return "mixed"
    ratio = cross / norm
    if ratio > threshold:
        return "even"
    if ratio < -threshold:
        return "odd"
    return "mixed"


def _plain(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return _plain(asdict(obj))
    return obj


def write_summary(path, payload: dict) -> None:
    """Write one UTF-8 JSON summary document."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_tsv(path, columns: Sequence[str], rows, header_comment: str = "") -> None:
    """Write a UTF-8 TSV table with a header line."""
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_format_cell(c) for c in row) + "\n")


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    return str(value)
