"""Independent reference implementations used to freeze expected values.

Nothing in here imports the package's theta or Weierstrass kernels: the
theta reference goes through mpmath at 40 digits, the wp reference is a
row grouped lattice sum over cotangent rows, the Green constant
reference is direct two dimensional quadrature with an analytic disk
patch over the singularity, and the developing map reference integrates
the logarithmic derivative along an adaptive contour.  Tests compare the
fast float kernels against these and against values frozen from them.
"""

from __future__ import annotations

import cmath
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def mp_theta1(z: complex, tau: complex):
    """theta1(z; tau) as an mpmath complex, same convention as the package:
    2 sum (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z) with q = e^{i pi tau}."""
    q = mp.exp(1j * mp.pi * mp.mpc(tau))
    return mp.jtheta(1, mp.pi * mp.mpc(z), q)


def mp_theta1_dz(z: complex, tau: complex, order: int = 1):
    """d^k/dz^k theta1(z; tau); mpmath differentiates in w = pi z."""
    q = mp.exp(1j * mp.pi * mp.mpc(tau))
    return mp.jtheta(1, mp.pi * mp.mpc(z), q, derivative=order) * mp.pi ** order


def mp_log_theta1(z: complex, tau: complex) -> tuple[float, float]:
    """(log|theta1|, arg theta1) via mpmath."""
    v = mp_theta1(z, tau)
    return float(mp.log(abs(v))), float(mp.arg(v))


def mp_theta1_logderiv(z: complex, tau: complex, order: int = 1) -> complex:
    """(log theta1)' or (log theta1)'' at z, from mpmath derivatives."""
    t0 = mp_theta1(z, tau)
    t1 = mp_theta1_dz(z, tau, 1)
    if order == 1:
        return complex(t1 / t0)
    t2 = mp_theta1_dz(z, tau, 2)
    return complex(t2 / t0 - (t1 / t0) ** 2)


def mp_eta1(tau: complex) -> complex:
    """Quasi period eta1 = -theta1'''(0) / (3 theta1'(0)), mpmath route."""
    return complex(-mp_theta1_dz(0.0, tau, 3) / (3 * mp_theta1_dz(0.0, tau, 1)))


def wp_rowsum(z: complex, tau: complex, n_rows: int = 0) -> complex:
    """Weierstrass p by row grouped lattice summation.

    Each horizontal lattice row sums in closed form to pi^2/sin^2, so
    p(z) = pi^2/sin^2(pi z) - pi^2/3
           + sum_{n != 0} [pi^2/sin^2(pi(z - n tau)) - pi^2/sin^2(pi n tau)].
    The tail decays like e^{-2 pi b |n|}; no theta function involved.
    """
    b = tau.imag
    if n_rows == 0:
        n_rows = max(6, int(40.0 / (2.0 * math.pi * b)) + 3)
    pi = mp.pi
    zz = mp.mpc(z)
    tt = mp.mpc(tau)

    def row(w):
        s = mp.sin(pi * w)
        return pi ** 2 / (s * s)

    total = row(zz) - pi ** 2 / 3
    for n in range(1, n_rows + 1):
        total += row(zz - n * tt) - row(n * tt)
        total += row(zz + n * tt) - row(-n * tt)
    return complex(total)


def wp_prime_rowsum(z: complex, tau: complex, h: float = 1e-6) -> complex:
    """p'(z) by high order central differences of the row sum."""
    vals = [wp_rowsum(z + k * h, tau) for k in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


def green_value_slow(z: complex, tau: complex) -> float:
    """G(z) - C up to the additive constant: -(1/2pi) log|theta1| + b s^2 / 2,
    computed through mpmath so the fast kernel has a second opinion."""
    b = tau.imag
    s = z.imag / b
    s -= math.floor(s + 0.5)
    t = z.real - (z.imag / b) * tau.real
    t -= math.floor(t + 0.5)
    zc = t + s * tau
    lm, _ = mp_log_theta1(zc, tau)
    return -lm / (2.0 * math.pi) + b * s * s / 2.0


def green_constant_quadrature(tau: complex, n: int = 400, r_disk: float = 0.05) -> float:
    """C(tau) = -mean of G_rel over the cell, by midpoint quadrature with
    an analytic patch over the log singularity.

    Inside the disk |z| < r the singular part -(1/2pi) log|z| integrates
    to (r^2/2)(1/2 - log r); the smooth remainder of G_rel is extended
    by its average over the disk boundary.  Accuracy is a few times 1e-4
    at the default resolution, plenty to pin the sign and magnitude.
    """
    from torusgreen import green, lattice

    torus = lattice.make_torus(tau)
    b = tau.imag
    area = b
    gg = (np.arange(n) + 0.5) / n - 0.5
    total = 0.0
    n_disk = 0
    disk_smooth = []
    for s in gg:
        zrow = gg + s * tau
        d = np.abs(zrow)
        for mm in (-1, 1):
            d = np.minimum(d, np.abs(zrow + mm))
            d = np.minimum(d, np.abs(zrow + mm * tau))
        d = np.minimum(d, np.abs(zrow + 1 + tau))
        d = np.minimum(d, np.abs(zrow - 1 - tau))
        inside = d < r_disk
        out = ~inside
        vals = np.asarray(green.green_rel(zrow[out], torus))
        total += float(np.sum(vals))
        n_disk += int(np.sum(inside))
    cell = area / (n * n)
    # analytic integral of the singular part over the disk, plus the
    # smooth remainder sampled on a ring of radius r/2
    ring = r_disk * 0.5 * np.exp(2j * math.pi * (np.arange(64) + 0.5) / 64)
    smooth_ring = (np.asarray(green.green_rel(ring, torus))
                   + np.log(np.abs(ring)) / (2.0 * math.pi))
    smooth_avg = float(np.mean(smooth_ring))
    disk_area = math.pi * r_disk ** 2
    sing_int = (r_disk ** 2 / 2.0) * (0.5 - math.log(r_disk)) * 2.0 * math.pi / (2.0 * math.pi)
    integral = total * cell + sing_int + smooth_avg * disk_area
    return -integral / area


def contour_developing_map(z: complex, z0: complex, tau: complex,
                           wp_z0: complex, wp_prime_z0: complex,
                           torus) -> complex:
    """f(z) = exp(integral_0^z gamma) with gamma = wp'(z0)/(wp(w) - wp(z0)),
    integrated along an adaptive polyline that detours around the poles
    of gamma at +-z0 (mod lattice).

    Independent of the sigma route: only the package's wp enters, and the
    normalization f(0) = 1 is automatic.
    """
    from torusgreen import weier

    def gamma(w):
        return wp_prime_z0 / (np.asarray(weier.wp(w, torus)) - wp_z0)

    def too_close(a, b_):
        """Does segment a -> b_ pass near a pole of gamma?"""
        for mm in range(-2, 3):
            for nn in range(-2, 3):
                for sign in (1.0, -1.0):
                    p = sign * z0 + mm + nn * tau
                    ab = b_ - a
                    denom = abs(ab) ** 2
                    if denom == 0.0:
                        continue
                    u = ((p - a).real * ab.real + (p - a).imag * ab.imag) / denom
                    u = min(1.0, max(0.0, u))
                    if abs(a + u * ab - p) < 0.08:
                        return p
        return None

    def gauss(a, b_, nn=32):
        x, w = np.polynomial.legendre.leggauss(nn)
        mid = 0.5 * (a + b_)
        half = 0.5 * (b_ - a)
        return complex(half * np.sum(w * gamma(mid + half * x)))

    def integrate(a, b_, depth=0):
        pole = too_close(a, b_)
        if pole is not None and depth < 8:
            # push the midpoint away from the pole, perpendicular offset
            mid = 0.5 * (a + b_)
            away = mid - pole
            if abs(away) < 1e-9:
                away = 1j * (b_ - a)
            away = away / abs(away) * 0.18
            via = pole + away
            return integrate(a, via, depth + 1) + integrate(via, b_, depth + 1)
        coarse = gauss(a, b_, 32)
        fine = gauss(a, 0.5 * (a + b_), 32) + gauss(0.5 * (a + b_), b_, 32)
        if abs(coarse - fine) > 1e-12 and depth < 12:
            return (integrate(a, 0.5 * (a + b_), depth + 1)
                    + integrate(0.5 * (a + b_), b_, depth + 1))
        return fine

    return cmath.exp(integrate(0.0 + 0.0j, complex(z)))


def fd_gradient(fun, x: float, y: float, h: float = 1e-6) -> tuple[float, float]:
    gx = (fun(x + h, y) - fun(x - h, y)) / (2 * h)
    gy = (fun(x, y + h) - fun(x, y - h)) / (2 * h)
    return gx, gy


def fd_hessian(fun, x: float, y: float, h: float = 1e-4):
    fxx = (fun(x + h, y) - 2 * fun(x, y) + fun(x - h, y)) / (h * h)
    fyy = (fun(x, y + h) - 2 * fun(x, y) + fun(x, y - h)) / (h * h)
    fxy = (fun(x + h, y + h) - fun(x + h, y - h)
           - fun(x - h, y + h) + fun(x - h, y - h)) / (4 * h * h)
    return fxx, fxy, fyy
