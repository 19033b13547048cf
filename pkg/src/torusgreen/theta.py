"""First Jacobi theta function and companions, overflow safe.

Everything downstream (Weierstrass layer, Green function, mean field
solutions) funnels through the evaluations here.  Values travel as
LogComplex, a (log magnitude, argument) pair, because the quasi period
factors overflow doubles long before the geometry gets interesting.

theta1 is summed in exponential form,

    theta1(z; tau) = -i * sum_n (-1)^n q^((n+1/2)^2) e^((2n+1) pi i z),
    q = e^(pi i tau),

after reducing z modulo the lattice so |Im z| <= Im(tau)/2; the discarded
translation comes back as an exact log space factor.  Term exponents are
assembled before exponentiation, so no intermediate under- or overflows.
For Im tau < 1/2 the evaluation is routed through the imaginary
transformation (one T shift plus one S inversion) where the effective nome
is small again.  Derivative series are termwise derivatives of the sum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonPositiveImaginaryPart, PoleAtLattice, Unconverged
from .lattice import Torus, split_coords

TERM_CAP = 64
# Im tau below this routes through the imaginary transformation
JACOBI_CUTOFF = 0.5


@dataclass(frozen=True)
class LogComplex:
    """A complex value exp(log_mag + i*arg); arg is not normalized.

    log_mag == -inf is the sentinel for an exact zero (theta1 at a lattice
    point, sigma at a lattice point); both fields are finite otherwise.
    """

    log_mag: float
    arg: float

    @property
    def value(self) -> complex:
        return cmath.exp(complex(self.log_mag, 0.0)) * cmath.exp(1j * self.arg) \
            if np.isscalar(self.log_mag) or np.ndim(self.log_mag) == 0 \
            else np.exp(self.log_mag + 1j * np.asarray(self.arg))

    @property
    def is_zero(self):
        return np.isneginf(self.log_mag)


@dataclass(frozen=True)
class ThetaSpecials:
    """Null values: theta2/3/4 at z = 0 plus theta1' and theta1''' at 0."""

    th2_0: complex
    th3_0: complex
    th4_0: complex
    th1p_0: complex
    th1ppp_0: complex


def _term_count_z(b: float) -> int:
    """Terms needed by the z series at the worst reduced argument |Im z| = b/2."""
    n = math.sqrt(0.25 + 43.8 / (math.pi * b)) + 0.5
    return int(min(TERM_CAP, max(6, math.ceil(n) + 2)))


def _term_count_null(b: float) -> int:
    """Terms needed by the q-only series at z = 0."""
    n = math.sqrt(43.8 / (math.pi * b))
    return int(min(TERM_CAP, max(6, math.ceil(n) + 2)))


def _series(z0, tau: complex, nterms: int):
    """theta1 and its first three z derivatives at reduced arguments.

    z0 is an array with |Im z0| <= Im(tau)/2.  Returns (th0, th1, th2, th3).
    """
    n = np.arange(-nterms, nterms)
    half = n + 0.5
    w = (2 * n + 1) * (1j * np.pi)
    z0 = np.asarray(z0, dtype=complex)
    expo = (1j * np.pi * tau) * half * half + w * z0[..., None]
    amp = np.exp(expo)
    amp *= np.where(n & 1, -1.0, 1.0)
    th0 = -1j * amp.sum(axis=-1)
    amp = amp * w
    th1 = -1j * amp.sum(axis=-1)
    amp = amp * w
    th2 = -1j * amp.sum(axis=-1)
    amp = amp * w
    th3 = -1j * amp.sum(axis=-1)
    return th0, th1, th2, th3


def _eval_direct(z, tau: complex):
    """Wrap z, run the series, reattach the translation factor in log space.

    Returns (log_mag, arg, L1, L2, L3) where Lk is the k-th logarithmic
    z derivative of theta1 at z.  Arrays follow the shape of z.
    """
    b = tau.imag
    t, s, m, n = split_coords(z, tau)
    z0 = t + s * tau
    th0, th1, th2, th3 = _series(z0, tau, _term_count_z(b))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = np.log(np.abs(th0)) + (np.pi * b) * n * n + (2.0 * np.pi) * n * (s * b)
        arg = (
            np.angle(th0)
            + np.pi * (m + n)
            - (np.pi * tau.real) * n * n
            - (2.0 * np.pi) * n * z0.real
        )
        r1 = th1 / th0
        r2 = th2 / th0
        r3 = th3 / th0
        L1 = r1 - (2j * np.pi) * n
        L2 = r2 - r1 * r1
        L3 = r3 - 3.0 * r2 * r1 + 2.0 * r1 * r1 * r1
    hit = (t == 0.0) & (s == 0.0)
    if np.any(hit):
        # exactly reduced lattice points: the sum is an exact zero in theory
        # but roundoff leaves ~1e-16 debris, so snap to the sentinel
        log_mag = np.where(hit, -np.inf, log_mag)
        arg = np.where(hit, 0.0, arg)
        L1 = np.where(hit, complex(np.nan, np.nan), L1)
        L2 = np.where(hit, complex(np.nan, np.nan), L2)
        L3 = np.where(hit, complex(np.nan, np.nan), L3)
    return log_mag, arg, L1, L2, L3


def _eval_jacobi(z, tau: complex):
    """Same contract as _eval_direct, through the imaginary transformation."""
    k = math.floor(tau.real + 0.5)
    tau_r = tau - k
    tp = -1.0 / tau_r
    z = np.asarray(z, dtype=complex)
    lm_i, ar_i, L1i, L2i, L3i = _eval_direct(z * tp, tp)
    # prefactor -i * sqrt(-i*tau'); the radicand has positive real part for
    # any tau' in the upper half plane, so the principal branch never jumps
    pref = 0.5 * cmath.log(-1j * tp)
    quad = (1j * np.pi * tp) * z * z
    log_mag = lm_i + pref.real + quad.real
    arg = ar_i + pref.imag + quad.imag + k * np.pi / 4.0 - np.pi / 2.0
    L1 = (2j * np.pi * tp) * z + tp * L1i
    L2 = (2j * np.pi * tp) + (tp * tp) * L2i
    L3 = (tp * tp * tp) * L3i
    return log_mag, arg, L1, L2, L3


def _eval(z, tau: complex):
    if tau.imag >= JACOBI_CUTOFF:
        return _eval_direct(z, tau)
    return _eval_jacobi(z, tau)


def _check_tau(tau: complex) -> complex:
    tau = complex(tau)
    if not tau.imag > 0.0:
        raise NonPositiveImaginaryPart(f"modulus {tau!r} is not in the upper half plane")
    return tau


def _scalarize(x):
    arr = np.asarray(x)
    return arr.item() if arr.ndim == 0 else arr


def theta1(z, torus: Torus) -> LogComplex:
    """theta1(z; tau) in log form; exact zeros become the -inf sentinel."""
    lm, ar, *_ = _eval(z, torus.tau)
    return LogComplex(_scalarize(lm), _scalarize(np.where(np.isneginf(lm), 0.0, ar)))


def theta1_logderiv_z(z, torus: Torus, order: int = 1):
    """(log theta1)' or (log theta1)'' at z.

    The first derivative picks up -2 pi i per tau translation, the second
    is fully elliptic; both corrections are handled here.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    lm, _, L1, L2, L3 = _eval(z, torus.tau)
    if np.any(np.isneginf(lm)):
        raise PoleAtLattice("logarithmic derivative of theta1 at a lattice point")
    out = {1: L1, 2: L2, 3: L3}[order]
    return _scalarize(out)


def theta1_logderivs(z, torus: Torus):
    """(log theta1)' and (log theta1)'' from one series pass.

    Hot path for the critical point solver: no pole check, lattice hits
    simply produce non finite entries, which the solver treats as a
    rejected step.
    """
    _, _, L1, L2, _ = _eval(z, torus.tau)
    return _scalarize(L1), _scalarize(L2)


def jacobi_imaginary(z, tau: complex) -> LogComplex:
    """theta1(z; tau) evaluated through tau' = -1/tau with the principal
    square root branch.  Public mostly so the two routes can be compared."""
    tau = _check_tau(tau)
    lm, ar, *_ = _eval_jacobi(z, tau)
    return LogComplex(_scalarize(lm), _scalarize(np.where(np.isneginf(lm), 0.0, ar)))


@lru_cache(maxsize=512)
def _specials_cached(tau: complex) -> ThetaSpecials:
    b = tau.imag
    nt = _term_count_null(b)
    n = np.arange(0, nt)
    sgn = np.where(n & 1, -1.0, 1.0)
    a14 = np.exp((1j * np.pi * tau) * (n + 0.5) ** 2)
    odd = (2 * n + 1).astype(float)
    th1p = 2.0 * np.pi * np.sum(sgn * odd * a14)
    th1ppp = -2.0 * np.sum(sgn * (odd * np.pi) ** 3 * a14)
    th2 = 2.0 * np.sum(a14)
    mm = np.arange(1, nt)
    qm2 = np.exp((1j * np.pi * tau) * mm ** 2)
    th3 = 1.0 + 2.0 * np.sum(qm2)
    th4 = 1.0 + 2.0 * np.sum(np.where(mm & 1, -1.0, 1.0) * qm2)
    triple = np.pi * th2 * th3 * th4
    if abs(th1p - triple) > 1e-12 * abs(th1p):
        raise Unconverged(
            f"triple product residual {abs(th1p - triple):.3e} at tau = {tau}"
        )
    return ThetaSpecials(
        th2_0=complex(th2),
        th3_0=complex(th3),
        th4_0=complex(th4),
        th1p_0=complex(th1p),
        th1ppp_0=complex(th1ppp),
    )


def theta_specials(torus: Torus) -> ThetaSpecials:
    """Null values from the direct q series, cached per modulus."""
    return _specials_cached(torus.tau)


def log_theta1_b_derivs(z: float, b: float) -> tuple[float, float]:
    """d/db and d^2/db^2 of log |theta1(z; 1/2 + i b)| for real z.

    On the rhombic line Re tau = 1/2 the function e^(-i pi/8) theta1(z) is
    real for real z, with the fast real series

        T(z, b) = 2 sum_n (-1)^(n + n(n+1)/2) e^(-pi b (n+1/2)^2) sin((2n+1) pi z),

    so both b derivatives are termwise.  Raises Unconverged when the
    alternating sum cancels too catastrophically, which happens only for
    b far below anything the moduli scans touch.
    """
    if not b > 0.0:
        raise NonPositiveImaginaryPart(f"b = {b} must be positive")
    z = float(z)
    nt = _term_count_z(b) + 4
    n = np.arange(0, min(nt, 2 * TERM_CAP))
    tri = (n * (n + 1)) // 2
    sgn = np.where((n + tri) & 1, -1.0, 1.0)
    lam = np.pi * (n + 0.5) ** 2
    p = np.exp(-b * lam)
    sin = np.sin((2 * n + 1) * np.pi * z)
    terms = 2.0 * sgn * p * sin
    total = terms.sum()
    gross = np.abs(terms).sum()
    if total == 0.0 or gross > 1e12 * abs(total):
        raise Unconverged(f"cancellation too severe at z = {z}, b = {b}")
    d1 = (-lam * terms).sum() / total
    d2 = (lam * lam * terms).sum() / total - d1 * d1
    return float(d1), float(d2)


def log_theta3_b_derivs(b: float) -> tuple[float, float]:
    """d/db and d^2/db^2 of log |theta3(0; 1/2 + i b)|.

    On the rhombic line theta3(0) = A + iB with A the even-index and B the
    odd-index part of the null series in r = e^(-pi b); |theta3|^2 = A^2 + B^2
    differentiates termwise.
    """
    if not b > 0.0:
        raise NonPositiveImaginaryPart(f"b = {b} must be positive")
    nt = _term_count_null(b) + 4
    j = np.arange(1, nt)
    ja = 4.0 * j * j            # exponents of the even part
    a_t = np.exp(-np.pi * b * ja)
    k = np.arange(0, nt)
    kb = (2.0 * k + 1.0) ** 2   # exponents of the odd part
    b_t = np.exp(-np.pi * b * kb)
    A = 1.0 + 2.0 * a_t.sum()
    A1 = 2.0 * (-np.pi * ja * a_t).sum()
    A2 = 2.0 * ((np.pi * ja) ** 2 * a_t).sum()
    B = 2.0 * b_t.sum()
    B1 = 2.0 * (-np.pi * kb * b_t).sum()
    B2 = 2.0 * ((np.pi * kb) ** 2 * b_t).sum()
    sq = A * A + B * B
    d1 = (A * A1 + B * B1) / sq
    d2 = (A1 * A1 + A * A2 + B1 * B1 + B * B2) / sq - 2.0 * d1 * d1
    return float(d1), float(d2)
