"""Weierstrass layer, derived entirely from theta1.

eta1 comes from the third logarithmic derivative of theta1 at the origin,
eta2 from the Legendre relation, and the half period values e_i from
p(z) = -(log theta1)''(z) - eta1.  The classical lattice sum is kept out of
the library on purpose: at the accuracy this package works to it converges
hopelessly slowly, and it survives only as an independent oracle in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import theta
from .errors import HalfPeriodInput, PoleAtLattice, Unconverged
from .lattice import Torus
from .theta import LogComplex, _eval, _scalarize

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class EllipticInvariants:
    """Half period values, quasi periods and derived invariants.

    lam is the modular lambda in the convention (e3 - e2) / (e1 - e2),
    which sends the square torus to 1/2.
    """

    e1: complex
    e2: complex
    e3: complex
    eta1: complex
    eta2: complex
    g2: complex
    g3: complex
    lam: complex


@lru_cache(maxsize=512)
def _invariants_cached(tau: complex) -> EllipticInvariants:
    torus = Torus(tau)
    sp = theta.theta_specials(torus)
    eta1 = -sp.th1ppp_0 / (3.0 * sp.th1p_0)
    eta2 = eta1 * tau - TWO_PI_I
    halves = (0.5 + 0j, tau / 2.0, (1.0 + tau) / 2.0)
    zs = np.array(halves, dtype=complex)
    _, _, _, L2, _ = _eval(zs, tau)
    e1, e2, e3 = (-L2 - eta1).tolist()
    scale = max(abs(e1), abs(e2), abs(e3))
    if abs(e1 + e2 + e3) > 1e-11 * scale:
        raise Unconverged(
            f"half period values at tau = {tau} do not sum to zero: "
            f"{abs(e1 + e2 + e3):.3e} vs scale {scale:.3e}"
        )
    g2 = -4.0 * (e1 * e2 + e2 * e3 + e3 * e1)
    g3 = 4.0 * e1 * e2 * e3
    lam = (e3 - e2) / (e1 - e2)
    return EllipticInvariants(e1, e2, e3, eta1, eta2, g2, g3, lam)


def invariants(torus: Torus) -> EllipticInvariants:
    """Invariants of the torus, cached per modulus."""
    return _invariants_cached(torus.tau)


def _guard_pole(lm, what: str):
    if np.any(np.isneginf(lm)):
        raise PoleAtLattice(f"{what} requested at a lattice point")


def zeta(z, torus: Torus):
    """Weierstrass zeta via zeta(z) = (log theta1)'(z) + eta1 * z.

    The identity already carries the right quasi periods, so it holds for
    unreduced z as well.
    """
    inv = invariants(torus)
    lm, _, L1, _, _ = _eval(z, torus.tau)
    _guard_pole(lm, "zeta")
    return _scalarize(L1 + inv.eta1 * np.asarray(z, dtype=complex))


def wp(z, torus: Torus, order: int = 0):
    """Weierstrass p (order 0), p' (order 1) or p'' (order 2)."""
    inv = invariants(torus)
    lm, _, _, L2, L3 = _eval(z, torus.tau)
    _guard_pole(lm, "wp")
    if order == 0:
        return _scalarize(-L2 - inv.eta1)
    if order == 1:
        return _scalarize(-L3)
    if order == 2:
        p = -L2 - inv.eta1
        return _scalarize(6.0 * p * p - inv.g2 / 2.0)
    raise ValueError(f"order must be 0, 1 or 2, got {order}")


def sigma(z, torus: Torus) -> LogComplex:
    """Weierstrass sigma in log form: e^(eta1 z^2 / 2) theta1(z) / theta1'(0).

    Zeros at lattice points surface as the log_mag = -inf sentinel.
    """
    inv = invariants(torus)
    sp = theta.theta_specials(torus)
    z = np.asarray(z, dtype=complex)
    lt = theta.theta1(z, torus)
    quad = 0.5 * inv.eta1 * z * z
    lp = np.log(complex(sp.th1p_0))
    lm = np.asarray(lt.log_mag) + np.asarray(quad).real - lp.real
    ar = np.asarray(lt.arg) + np.asarray(quad).imag - lp.imag
    return LogComplex(_scalarize(lm), _scalarize(ar))


def addition_zeta_residual(z, torus: Torus) -> float:
    """|zeta(2z) - 2 zeta(z) - p''(z) / (2 p'(z))|, the duplication check.

    Rejects inputs too close to half periods, where p' vanishes and the
    quotient blows up.
    """
    z = complex(z)
    pz = wp(z, torus, order=0)
    p1 = wp(z, torus, order=1)
    if abs(p1) < 1e-8 * (1.0 + abs(pz) ** 1.5):
        raise HalfPeriodInput(f"p'({z}) is numerically zero; duplication degenerates")
    p2 = wp(z, torus, order=2)
    return float(abs(zeta(2.0 * z, torus) - 2.0 * zeta(z, torus) - p2 / (2.0 * p1)))
