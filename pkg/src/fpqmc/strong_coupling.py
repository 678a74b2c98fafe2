"""Analytic large-coupling results for the 1D optical polaron.

The semiclassical product state gives a classical energy of -alpha^2/3.
Harmonic fluctuations of the phonon field around that state have
alpha-independent frequencies omega_j < 1: the even-parity branch comes
from integer-order Legendre polynomials, the odd branch from roots of a
digamma/tangent equation.  Together they fix the zero-point correction to
the ground state energy and the excitation energies in the large-alpha
limit.  A weak-coupling polynomial for the ground state energy is included
for the opposite limit.

Everything here is closed-form or a 1D root find; no external special
function libraries are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "EULER_GAMMA",
    "HessianMode",
    "PekarSolution",
    "digamma",
    "odd_mode_root",
    "hessian_frequency",
    "hessian_spectrum",
    "zero_point_sum",
    "energy_strong",
    "energy_weak",
]

EULER_GAMMA = 0.57721566490153286061

# B_{2k}/(2k) for k = 1..7, coefficients of the asymptotic series
_ASYMPTOTIC_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma function psi(x) = Gamma'(x)/Gamma(x) for x > 0.

    Uses the recurrence psi(x+1) = psi(x) + 1/x to push the argument above
    10, then the Bernoulli asymptotic series.  Accurate to ~1e-14.
    """
    if not x > 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    result = math.log(x) - 0.5 * inv
    power = inv2
    for coeff in _ASYMPTOTIC_COEFFS:
        result -= coeff * power
        power *= inv2
    return acc + result


def _odd_mode_equation(n: float) -> float:
    return digamma(n + 1.0) + EULER_GAMMA - 0.5 * math.pi * math.tan(0.5 * math.pi * n)


@lru_cache(maxsize=None)
def odd_mode_root(j: int) -> float:
    """Legendre order n_j for the odd fluctuation mode of odd index j >= 1.

    n_j is the unique root of  psi(n+1) + gamma = (pi/2) tan(n pi/2)  in
    the open interval (j+1, j+2).  Bisection on a bracket shrunk away from
    the tangent poles, followed by a secant polish.
    """
    if j < 1 or j % 2 == 0:
        raise ValueError(f"odd mode index must be odd and >= 1, got {j}")
    lo = (j + 1) + 1e-6
    hi = (j + 2) - 1e-6
    flo = _odd_mode_equation(lo)
    fhi = _odd_mode_equation(hi)
    if not (flo > 0.0 > fhi):
        raise RuntimeError(f"root bracket failed for odd mode j={j}")
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        fmid = _odd_mode_equation(mid)
        if fmid > 0.0:
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    # secant polish inside the bisection bracket
    a, fa = lo, flo
    b, fb = hi, fhi
    for _ in range(8):
        if fb == fa:
            break
        c = b - fb * (b - a) / (fb - fa)
        if not (lo <= c <= hi):
            break
        fc = _odd_mode_equation(c)
        a, fa = b, fb
        b, fb = c, fc
        if abs(b - a) < 1e-14:
            break
    return b


def _frequency_from_order(n: float) -> float:
    omega_sq = 1.0 - 4.0 / ((n + 2.0) * (n - 1.0))
    return math.sqrt(max(omega_sq, 0.0))


@dataclass(frozen=True)
class HessianMode:
    """One harmonic fluctuation mode around the semiclassical state."""

    index: int
    parity: str  # "even" or "odd"
    legendre_order: float
    frequency: float


def hessian_frequency(j: int) -> HessianMode:
    """Fluctuation mode of index j >= 0.

    Even j: Legendre order n = j + 2, so omega^2 = 1 - 4/((j+4)(j+1)).
    Odd j: non-integer order from :func:`odd_mode_root`.
    """
    if j < 0:
        raise ValueError(f"mode index must be >= 0, got {j}")
    if j % 2 == 0:
        n = float(j + 2)
        parity = "even"
    else:
        n = odd_mode_root(j)
        parity = "odd"
    return HessianMode(index=j, parity=parity, legendre_order=n,
                       frequency=_frequency_from_order(n))


def hessian_spectrum(count: int) -> list[HessianMode]:
    """The first `count` fluctuation modes, ascending in frequency."""
    return [hessian_frequency(j) for j in range(count)]


def zero_point_sum(max_modes: int = 200, tail: bool = True) -> float:
    """Zero-point energy correction (1/2) sum_j (omega_j - 1).

    Sums modes explicitly up to index `max_modes`.  With `tail`, the
    remainder is added from the large-j law omega_j - 1 ~ -2/n_j^2 with
    n_j ~ j + 2, whose sum telescopes to
    (1/3)(1/(J+2) + 1/(J+3) + 1/(J+4)).  Converges to about -0.955.
    """
    if max_modes < 0:
        raise ValueError("max_modes must be >= 0")
    total = 0.0
    for j in range(max_modes + 1):
        total += 0.5 * (hessian_frequency(j).frequency - 1.0)
    if tail:
        J = max_modes
        total -= (1.0 / (J + 2) + 1.0 / (J + 3) + 1.0 / (J + 4)) / 3.0
    return total


def energy_strong(alpha: float, j: int = 0, max_modes: int = 200) -> float:
    """Large-alpha energy of the j-th discrete state at zero total momentum.

    E_j = -alpha^2/3 + (1/2) sum_i (omega_i - 1) + omega_j.  For j = 0 the
    zero mode contributes nothing and this is the ground state energy,
    approximately -alpha^2/3 - 0.955.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive in the strong-coupling expansion")
    if j < 0:
        raise ValueError(f"state index must be >= 0, got {j}")
    return (-alpha * alpha / 3.0
            + zero_point_sum(max_modes, tail=True)
            + hessian_frequency(j).frequency)


def energy_weak(alpha: float) -> float:
    """Weak-coupling ground state energy, exact through third order."""
    if alpha < 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return -alpha - 0.06066 * alpha**2 - 0.00844 * alpha**3


@dataclass(frozen=True)
class PekarSolution:
    """Closed-form minimizer of the semiclassical energy functional."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")

    @property
    def classical_energy(self) -> float:
        return -self.alpha**2 / 3.0

    def electron_profile(self, x):
        """Normalized electron wave function sqrt(alpha/2) sech(alpha x)."""
        return np.sqrt(self.alpha / 2.0) / np.cosh(self.alpha * np.asarray(x))

    def field_profile(self, x):
        """Classical polarization field sqrt(2 alpha) psi(x)^2."""
        return np.sqrt(2.0 * self.alpha) * self.electron_profile(x) ** 2
