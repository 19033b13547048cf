"""Green function of the flat torus.

The mean zero Green function of -Laplace on C/(Z + Z tau) splits as

    G(z) = -(1/2 pi) log|theta1(z)| + y^2/(2 b) + C(tau),

with y the height of the canonical cell representative and b = Im tau.
This module evaluates the z dependent part (green_rel), its gradient and
Hessian, the critical point residual used by the solver, the period
integrals attached to a point, and the constant C(tau).

Everything is expressed through logarithmic derivatives of theta1: with
L1 = (log theta1)_z and L2 = (log theta1)_zz at the canonical
representative z = t + s*tau,

    2 pi G_x = -Re L1            2 pi G_y = Im L1 + 2 pi s
    2 pi G_xx = -Re L2           2 pi G_xy = Im L2
    2 pi G_yy = Re L2 + 2 pi/b

and the critical point residual zeta(z) - t eta1 - s eta2 collapses to
L1 + 2 pi i s by the Legendre relation, so no quasi period values are
needed in the solver loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import theta, weier
from .errors import PoleAtLattice, QuadratureNotConverged
from .lattice import Torus, make_torus, split_coords, wrap_unit

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class Hessian2:
    """Symmetric Hessian of G in Cartesian (x, y) coordinates."""

    xx: float
    xy: float
    yy: float
    det: float

    @property
    def trace(self) -> float:
        return self.xx + self.yy


@dataclass(frozen=True)
class GreenEval:
    """Value, gradient and Hessian of G - C(tau) at one point."""

    value_rel: float
    grad: tuple[float, float]
    hessian: Hessian2

    @property
    def det_hessian(self) -> float:
        return self.hessian.det


def _canonical(z, tau: complex):
    t, s, _, _ = split_coords(z, tau)
    return t + s * tau, t, s


def green_rel(z, torus: Torus):
    """G(z) - C(tau), doubly periodic by construction.

    Both log|theta1| and the y^2/(2b) term are taken at the canonical cell
    representative, so translates of z give bitwise identical values.
    """
    zc, _, s = _canonical(z, torus.tau)
    lc = theta.theta1(zc, torus)
    if np.any(lc.is_zero):
        raise PoleAtLattice("Green function diverges at lattice points")
    b = torus.b
    out = -np.asarray(lc.log_mag) / (2.0 * np.pi) + np.asarray(s) ** 2 * (b / 2.0)
    return theta._scalarize(out)


def green_grad(z, torus: Torus):
    """(G_x, G_y) at z; zero exactly at critical points."""
    zc, _, s = _canonical(z, torus.tau)
    L1 = theta.theta1_logderiv_z(zc, torus, 1)
    L1 = np.asarray(L1)
    gx = -L1.real / (2.0 * np.pi)
    gy = L1.imag / (2.0 * np.pi) + s
    return theta._scalarize(gx), theta._scalarize(gy)


def green_hessian(z, torus: Torus) -> Hessian2:
    """Hessian entries and determinant from (log theta1)_zz.

    The determinant uses the closed form
        4 pi^2 det = -(|L2 + pi/b|^2 - (pi/b)^2),
    algebraically identical to xx*yy - xy^2 but cheaper and stabler.
    """
    zc, _, _ = _canonical(z, torus.tau)
    L2 = np.asarray(theta.theta1_logderiv_z(zc, torus, 2))
    b = torus.b
    gxx = -L2.real / (2.0 * np.pi)
    gxy = L2.imag / (2.0 * np.pi)
    gyy = L2.real / (2.0 * np.pi) + 1.0 / b
    pb = np.pi / b
    det = -(np.abs(L2 + pb) ** 2 - pb * pb) / (4.0 * np.pi**2)
    s = theta._scalarize
    return Hessian2(s(gxx), s(gxy), s(gyy), s(det))


def critical_residual(t, s, torus: Torus):
    """zeta(t + s tau) - t eta1 - s eta2; zero iff (t, s) is critical.

    Invariant under integer shifts of (t, s), so both arguments are
    wrapped first; equals (log theta1)_z + 2 pi i s on the canonical cell.
    """
    tw, _ = wrap_unit(t)
    sw, _ = wrap_unit(s)
    z = tw + sw * torus.tau
    L1 = theta.theta1_logderiv_z(z, torus, 1)
    return theta._scalarize(np.asarray(L1) + (2j * np.pi) * sw)


def residual_and_jacobian(t, s, torus: Torus):
    """Vectorized critical residual plus its (t, s) Jacobian.

    Returns (r, dr_dt, dr_ds) with dr_dt = L2 and dr_ds = L2*tau + 2 pi i.
    Lattice hits yield non finite entries rather than an exception; the
    Newton driver treats those as rejected steps.
    """
    tw, _ = wrap_unit(t)
    sw, _ = wrap_unit(s)
    z = tw + sw * torus.tau
    L1, L2 = theta.theta1_logderivs(z, torus)
    L1 = np.asarray(L1)
    L2 = np.asarray(L2)
    r = L1 + (2j * np.pi) * sw
    return r, L2, L2 * torus.tau + 2j * np.pi


def period_integrals(z, torus: Torus):
    """The pair F1 = 2(zeta(z) - eta1 z), F2 = 2(tau zeta(z) - eta2 z).

    Evaluated at the canonical representative; at a critical point t + s*tau
    they collapse to F1 = -4 pi i s and F2 = 4 pi i t, both purely imaginary.
    """
    zc, _, _ = _canonical(z, torus.tau)
    inv = weier.invariants(torus)
    zv = weier.zeta(zc, torus)
    f1 = 2.0 * (zv - inv.eta1 * zc)
    f2 = 2.0 * (torus.tau * zv - inv.eta2 * zc)
    return f1, f2


def evaluate(z, torus: Torus) -> GreenEval:
    """Bundle of value, gradient and Hessian at one point."""
    return GreenEval(
        value_rel=float(green_rel(z, torus)),
        grad=green_grad(z, torus),
        hessian=green_hessian(z, torus),
    )


# ---------------------------------------------------------------------------
# the additive constant C(tau)


@dataclass(frozen=True)
class GreenConstantDetail:
    """C(tau) plus the observed quadrature error bound."""

    value: float
    error_bound: float
    nodes: int


def _log_abs_sin_pi(z):
    """log |sin(pi z)|, overflow safe for any |Im z|."""
    x = np.asarray(z).real
    y = np.asarray(z).imag
    w = np.pi * np.abs(y)
    u = np.exp(-2.0 * w)
    return w - _LOG2 + 0.5 * np.log1p(u * (u - 2.0 * np.cos(2.0 * np.pi * x)))


def _mean_smooth_part(tau: complex, n: int) -> float:
    """Mean over the cell of -(1/2 pi) log|theta1(z)/sin(pi z)|.

    The ratio theta1/sin has neither zeros nor poles on the closed cell, so
    its log modulus is smooth and tensor Gauss-Legendre converges
    geometrically.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * x
    w = 0.5 * w
    torus = make_torus(tau)
    zz = x[:, None] + x[None, :] * tau
    lc = theta.theta1(zz, torus)
    psi = -(np.asarray(lc.log_mag) - _log_abs_sin_pi(zz)) / (2.0 * np.pi)
    return float(w @ psi @ w)


@lru_cache(maxsize=256)
def _constant_cached(tau: complex) -> GreenConstantDetail:
    # mean of green_rel = mean(psi) + the split off pieces, both exact:
    #   mean(-(1/2 pi) log|sin pi z|) = -(1/2 pi)(pi b/4 - log 2)   (strip integral
    #       int_0^1 log|sin pi(t + i c)| dt = pi |c| - log 2, averaged in s)
    #   mean(s^2 b / 2) = b/24
    # so C = -mean(psi) + b/8 - log2/(2 pi) - b/24 = -mean(psi) + b/12 - log2/(2 pi).
    coarse = _mean_smooth_part(tau, 128)
    fine = _mean_smooth_part(tau, 256)
    err = abs(fine - coarse)
    if err > 1e-10:
        raise QuadratureNotConverged(
            f"cell quadrature for C(tau) stalled at {err:.3e} for tau = {tau}"
        )
    b = tau.imag
    value = -fine + b / 12.0 - _LOG2 / (2.0 * np.pi)
    return GreenConstantDetail(value=value, error_bound=err, nodes=256)


def green_constant_detail(torus: Torus) -> GreenConstantDetail:
    """C(tau) with its quadrature error bound, cached per modulus."""
    return _constant_cached(torus.tau)


def green_constant(torus: Torus) -> float:
    """The constant making the cell average of G vanish."""
    return _constant_cached(torus.tau).value
