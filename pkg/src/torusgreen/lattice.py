"""Flat torus bookkeeping.

A torus is the quotient of the plane by the lattice spanned by 1 and a
modulus tau in the upper half plane.  Points are tracked either as complex
numbers or as lattice coordinates (t, s) with z = t + s*tau; the canonical
cell is the half open square [-1/2, 1/2)^2 in (t, s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveImaginaryPart


@dataclass(frozen=True)
class Torus:
    """Normalized flat torus with periods 1 and tau."""

    tau: complex

    @property
    def b(self) -> float:
        return self.tau.imag

    @property
    def area(self) -> float:
        return self.tau.imag

    @property
    def half_periods(self) -> tuple[complex, complex, complex]:
        return (0.5, self.tau / 2.0, (1.0 + self.tau) / 2.0)


@dataclass(frozen=True)
class LatticeCoords:
    """Coordinates (t, s) of a point z = t + s*tau, each in [-1/2, 1/2)."""

    t: float
    s: float

    def z(self, torus: Torus) -> complex:
        return self.t + self.s * torus.tau


def make_torus(tau: complex) -> Torus:
    tau = complex(tau)
    if not (tau.imag > 0.0) or not math.isfinite(tau.imag) or not math.isfinite(tau.real):
        raise NonPositiveImaginaryPart(f"modulus {tau!r} is not in the upper half plane")
    return Torus(tau)


def wrap_unit(x):
    """Wrap real values into [-1/2, 1/2); also returns the integer part removed."""
    x = np.asarray(x, dtype=float)
    k = np.floor(x + 0.5)
    return x - k, k


def split_coords(z, tau: complex):
    """Decompose z = (t + s*tau) + (m + n*tau) with t, s in [-1/2, 1/2).

    Vectorized; returns (t, s, m, n) as float arrays (m, n integral).
    """
    z = np.asarray(z, dtype=complex)
    s_raw = z.imag / tau.imag
    t_raw = z.real - s_raw * tau.real
    t, m = wrap_unit(t_raw)
    s, n = wrap_unit(s_raw)
    return t, s, m, n


def wrap_point(z: complex, torus: Torus) -> LatticeCoords:
    """Reduce a point to its canonical cell representative."""
    t, s, _, _ = split_coords(complex(z), torus.tau)
    return LatticeCoords(float(t), float(s))


def reduce_modulus(tau: complex) -> tuple[complex, tuple[tuple[int, int], tuple[int, int]]]:
    """Map tau to the standard fundamental domain |Re| <= 1/2, |tau| >= 1.

    Returns the reduced modulus and the unimodular matrix ((a, b), (c, d)),
    meaning tau_reduced = (a*tau + b) / (c*tau + d).  Boundary ties are
    broken toward Re in [0, 1/2].
    """
    tau = complex(tau)
    if not tau.imag > 0.0:
        raise NonPositiveImaginaryPart(f"modulus {tau!r} is not in the upper half plane")
    a, b, c, d = 1, 0, 0, 1
    for _ in range(512):
        n = math.floor(tau.real + 0.5)
        if n != 0:
            tau -= n
            a, b = a - n * c, b - n * d
        if abs(tau) < 1.0 - 1e-15:
            tau = -1.0 / tau
            a, b, c, d = -c, -d, a, b
        else:
            break
    else:  # pragma: no cover - the generator walk always terminates
        raise RuntimeError("modulus reduction did not terminate")
    # tie breaking on the boundary of the domain
    if tau.real < -0.5 + 1e-15:
        tau += 1.0
        a, b = a + c, b + d
    if abs(abs(tau) - 1.0) < 1e-15 and tau.real < -1e-15:
        tau = -1.0 / tau
        a, b, c, d = -c, -d, a, b
    assert a * d - b * c == 1
    return tau, ((a, b), (c, d))


def apply_transform(tau: complex, mat: tuple[tuple[int, int], tuple[int, int]]) -> complex:
    """Evaluate the fractional linear action of an integer matrix on tau."""
    (a, b), (c, d) = mat
    return (a * tau + b) / (c * tau + d)


def random_tori(count: int, seed: int, b_range=(0.3, 2.5)) -> list[Torus]:
    """Deterministic sample of tori with Re tau in [-1/2, 1/2)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a = rng.uniform(-0.5, 0.5)
        b = math.exp(rng.uniform(math.log(b_range[0]), math.log(b_range[1])))
        out.append(make_torus(complex(a, b)))
    return out
