"""Explicit mean field equation solutions on the torus.

Delta u + rho e^u = rho delta_0 admits closed form solutions through a
developing map f: u = c1 + log(|f'|^2 / (1 + |f|^2)^2) with rho e^{c1} = 8.
At rho = 8 pi the map is built from an extra (non half period) critical
point z0 of the Green function and carries the one parameter scaling
family f -> e^lambda f.  At rho = 4 pi the map lives on the doubled torus
C/(Z + 2 tau Z) and the solution is unique, with no free parameter.

All u evaluators work in log magnitudes end to end so the zeros and poles
of f never overflow.  Evaluators do not wrap their argument: the formulas
are evaluated as written, which makes the double periodicity of u a
measurable property instead of an artifact of reduction.  u(z) is -inf on
the source lattice and finite elsewhere.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import green, weier
from .errors import (
    ConstructionInconsistent,
    HalfPeriodBranch,
    NoExtraCriticalPoint,
    NotACriticalPoint,
)
from .lattice import Torus, make_torus, split_coords

RHO_8PI = 8.0 * math.pi
RHO_4PI = 4.0 * math.pi
_CRIT_RESIDUAL_TOL = 1e-6
_LATTICE_HIT_TOL = 1e-11


def _log_abs(values) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values))


def _polar(log_mag: float, arg: float) -> complex:
    return math.exp(log_mag) * complex(math.cos(arg), math.sin(arg))


def _sigma_logmag(z, torus: Torus) -> np.ndarray:
    return np.asarray(weier.sigma(z, torus).log_mag, dtype=float)


def _lattice_gap(z, tau: complex) -> np.ndarray:
    """Euclidean distance from z to the nearest point of Z + tau Z."""
    t, s, _, _ = split_coords(z, tau)
    zc = np.asarray(t) + np.asarray(s) * tau
    d = np.full(zc.shape, np.inf)
    for m in (-1, 0, 1):
        for n in (-1, 0, 1):
            d = np.minimum(d, np.abs(zc - (m + n * tau)))
    return d


@dataclass(frozen=True)
class DevelopingMap8pi:
    """The map f(z) = e^{2 zeta(z0) z} sigma(z0 - z) / sigma(z0 + z).

    f(0) = 1, f has zeros on z0 + lattice and poles on -z0 + lattice, and
    picks up the multipliers multiplier_1 and multiplier_tau across the
    two periods.  At a critical z0 both multipliers are unit modulus,
    which is exactly what makes |f| (and hence u) doubly periodic.
    """

    torus: Torus
    z0: complex
    zeta_z0: complex
    wp_z0: complex
    wp_prime_z0: complex
    multiplier_1: complex
    multiplier_tau: complex

    def log_abs_f(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (2.0 * (self.zeta_z0 * z).real
                + _sigma_logmag(self.z0 - z, self.torus)
                - _sigma_logmag(self.z0 + z, self.torus))

    def f(self, z):
        z = np.asarray(z, dtype=complex)
        num = weier.sigma(self.z0 - z, self.torus)
        den = weier.sigma(self.z0 + z, self.torus)
        log_mag = 2.0 * (self.zeta_z0 * z).real + np.asarray(num.log_mag) - np.asarray(den.log_mag)
        arg = 2.0 * (self.zeta_z0 * z).imag + np.asarray(num.arg) - np.asarray(den.arg)
        out = np.exp(log_mag + 1j * arg)
        if out.ndim == 0:
            return complex(out)
        return out

    def gamma(self, z):
        """f'/f = wp'(z0) / (wp(z) - wp(z0)).

        Vanishes on the lattice of 0, where wp has its pole; the poles of
        gamma sit on the lattices of +-z0.
        """
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        on_lattice = _lattice_gap(flat, self.torus.tau) < _LATTICE_HIT_TOL
        out = np.zeros(flat.shape, dtype=complex)
        if np.any(~on_lattice):
            p = np.atleast_1d(weier.wp(flat[~on_lattice], self.torus))
            with np.errstate(divide="ignore", invalid="ignore"):
                out[~on_lattice] = self.wp_prime_z0 / (p - self.wp_z0)
        out = out.reshape(np.atleast_1d(z).shape)
        if z.ndim == 0:
            return complex(out[0])
        return out

    def f_prime(self, z):
        return self.gamma(z) * self.f(z)


def _polish_z0(torus: Torus, z0: complex) -> complex:
    t, s, _, _ = split_coords(z0, torus.tau)
    t, s = float(t), float(s)
    for _ in range(8):
        r, rt, rs = green.residual_and_jacobian(np.array([t]), np.array([s]), torus)
        r, rt, rs = complex(r[0]), complex(rt[0]), complex(rs[0])
        if abs(r) < 1e-13:
            break
        det = rt.real * rs.imag - rs.real * rt.imag
        if det == 0.0 or not math.isfinite(det):
            break
        t -= (r.real * rs.imag - rs.real * r.imag) / det
        s -= (rt.real * r.imag - r.real * rt.imag) / det
    return t + s * torus.tau


def developing_map_8pi(torus: Torus, z0: complex) -> DevelopingMap8pi:
    """Developing map seeded at an extra critical point of the Green function.

    z0 is validated against the critical equation and rejected when it is
    a half period, where wp' vanishes and the map degenerates.  The input
    is polished by a short Newton run so the downstream identities hold to
    machine precision even for hand entered z0.
    """
    t, s, _, _ = split_coords(z0, torus.tau)
    r = green.critical_residual(float(t), float(s), torus)
    if abs(r) > _CRIT_RESIDUAL_TOL:
        raise NotACriticalPoint(
            f"z0 = {z0} has critical residual {abs(r):.3e} on tau = {torus.tau}"
        )
    z0 = _polish_z0(torus, z0)
    wp_prime = complex(weier.wp(z0, torus, order=1))
    if abs(wp_prime) < 1e-8:
        raise HalfPeriodBranch(
            f"wp'(z0) = {abs(wp_prime):.3e} at z0 = {z0}: a half period "
            "cannot seed the developing map"
        )
    zeta_z0 = complex(weier.zeta(z0, torus))
    inv = weier.invariants(torus)
    # quasi period combinations 2(zeta(z0) - eta_j z0); purely imaginary
    # exactly when z0 is critical, so the multipliers land on the circle
    f1 = 2.0 * (zeta_z0 - inv.eta1 * z0)
    f2 = 2.0 * (torus.tau * zeta_z0 - inv.eta2 * z0)
    return DevelopingMap8pi(
        torus=torus,
        z0=z0,
        zeta_z0=zeta_z0,
        wp_z0=complex(weier.wp(z0, torus)),
        wp_prime_z0=wp_prime,
        multiplier_1=complex(np.exp(f1)),
        multiplier_tau=complex(np.exp(f2)),
    )


@dataclass(frozen=True)
class MfeSolution:
    """A constructed solution u of Delta u + rho e^u = rho delta_0.

    lam is the scaling parameter (serialized under the key "lambda");
    branch holds z0 for the 8 pi family and None at 4 pi.  evaluator maps
    z (scalar or array) to u(z) and returns -inf on the source lattice.
    """

    rho: float
    torus: Torus
    branch: complex | None
    lam: float
    c1: float
    evaluator: Callable


def _u_from_logs(c1: float, lam: float, log_abs_fp, log_abs_f) -> np.ndarray:
    return (c1 + 2.0 * lam + 2.0 * np.asarray(log_abs_fp)
            - 2.0 * np.logaddexp(0.0, 2.0 * lam + 2.0 * np.asarray(log_abs_f)))


def solution_8pi(torus: Torus, z0: complex, lam: float = 0.0) -> MfeSolution:
    """The scaling family member u_lambda for rho = 8 pi.

    c1 = log(8 / rho) = -log(pi).  u blows up like 4 log|z| at the source
    and, as lam grows, concentrates its mass near z0 while staying exactly
    doubly periodic for every lam.
    """
    dm = developing_map_8pi(torus, z0)
    c1 = math.log(8.0 / RHO_8PI)
    z0p = dm.z0
    tau = torus.tau
    log_wp_prime = math.log(abs(dm.wp_prime_z0))
    # u on the branch lattice (z = +-z0, where f has its zero or pole):
    # log|f| and log|gamma| diverge oppositely but f' stays finite at the
    # zero, f'(z0) = -e^{2 zeta(z0) z0} / sigma(2 z0), and evenness of u
    # transfers the value to -z0
    u_branch = (c1 + 2.0 * lam
                + 2.0 * (2.0 * (dm.zeta_z0 * z0p).real - float(_sigma_logmag(2.0 * z0p, torus))))

    def evaluator(z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        flat = np.atleast_1d(z).ravel()
        u = np.empty(flat.shape, dtype=float)
        on_source = _lattice_gap(flat, tau) < _LATTICE_HIT_TOL
        on_branch = (_lattice_gap(flat - z0p, tau) < 1e-9) | (
            _lattice_gap(flat + z0p, tau) < 1e-9)
        u[on_source] = -np.inf
        u[on_branch] = u_branch
        rest = ~(on_source | on_branch)
        if np.any(rest):
            zr = flat[rest]
            la_f = dm.log_abs_f(zr)
            p = np.atleast_1d(weier.wp(zr, torus))
            la_gamma = log_wp_prime - _log_abs(p - dm.wp_z0)
            u[rest] = _u_from_logs(c1, lam, la_gamma + la_f, la_f)
        u = u.reshape(np.atleast_1d(z).shape)
        if scalar:
            return float(u[0])
        return u

    return MfeSolution(rho=RHO_8PI, torus=torus, branch=z0p, lam=float(lam),
                       c1=c1, evaluator=evaluator)


def extra_branch_point(torus: Torus) -> complex:
    """The representative extra critical point, or NoExtraCriticalPoint."""
    from . import critical as _critical

    cs = _critical.find_critical_points(torus)
    extra = cs.extra
    if extra is None:
        raise NoExtraCriticalPoint(
            f"tau = {torus.tau} has only the three half period critical points"
        )
    return extra.z


def _gauss_segment(fun, a: complex, b: complex, n: int = 48) -> complex:
    x, w = np.polynomial.legendre.leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return complex(half * np.sum(w * np.atleast_1d(fun(mid + half * x))))


def _integral_g_over_period(g, radius: float = 0.25) -> complex:
    """Integral of g from 0 to 1, detouring over the pole at 1/2 along a
    semicircle through the upper half plane."""
    total = _gauss_segment(g, 0.0, 0.5 - radius)
    x, w = np.polynomial.legendre.leggauss(64)
    ang = 0.5 * math.pi * (1.0 - x)    # [-1, 1] -> [pi, 0]
    pts = 0.5 + radius * np.exp(1j * ang)
    dz = -0.5 * math.pi * radius * 1j * np.exp(1j * ang)
    total += complex(np.sum(w * np.atleast_1d(g(pts)) * dz))
    total += _gauss_segment(g, 0.5 + radius, 1.0)
    return total


@dataclass(frozen=True)
class FourPiDiagnostics:
    """Cross check values from the rho = 4 pi construction.

    period_integral is the contour integral of g over one horizontal
    period (must be +-pi i); c_prime is the period-1 multiplier of f
    computed independently from sigma shifts (must be -1); c_tau is the
    tau multiplier after normalization (unit modulus).
    """

    period_integral: complex
    c_prime: complex
    c_tau: complex
    kappa: complex


def solution_4pi(torus: Torus) -> MfeSolution:
    """The unique solution at rho = 4 pi, via the doubled torus.

    On C/(Z + 2 tau Z) the logarithmic derivative g of the map is a
    difference of two zeta functions with residues -1 at a = -1/2 and +1
    at b = 1/2 + tau, shifted by the constant kappa that makes f change
    sign across the period 1.  Three internal cross checks guard the
    construction: the period integral of g must be +-pi i, the period-1
    multiplier computed independently from sigma shifts must be exactly
    -1, and the tau multiplier must be constant in z (its modulus is then
    normalized to 1, which is what makes u doubly periodic).
    """
    sol, _ = _construct_4pi(torus)
    return sol


def four_pi_diagnostics(torus: Torus) -> FourPiDiagnostics:
    """The rho = 4 pi cross check values, without keeping the solution."""
    _, diag = _construct_4pi(torus)
    return diag


def _construct_4pi(torus: Torus) -> tuple[MfeSolution, FourPiDiagnostics]:
    tau = torus.tau
    doubled = make_torus(2.0 * tau)
    a = -0.5
    bp = 0.5 + tau
    eta1_d = 2.0 * complex(weier.zeta(0.5, doubled))
    eta2_d = 2.0 * complex(weier.zeta(tau, doubled))
    kappa = eta1_d + 0.5 * eta2_d

    def g(z):
        z = np.asarray(z, dtype=complex)
        return (-np.atleast_1d(weier.zeta(z - a, doubled))
                + np.atleast_1d(weier.zeta(z - bp, doubled))
                + kappa).reshape(np.atleast_1d(z).shape)

    period_integral = _integral_g_over_period(g)
    dev = min(abs(period_integral - 1j * math.pi), abs(period_integral + 1j * math.pi))
    if dev > 1e-8:
        raise ConstructionInconsistent(
            f"integral of g over one period is {period_integral}, not +-pi i "
            f"(off by {dev:.3e}) at tau = {tau}"
        )

    def log_f_parts(z):
        """(log|f|, arg f) before the f0 normalization."""
        z = np.asarray(z, dtype=complex)
        num = weier.sigma(z - bp, doubled)
        den = weier.sigma(z - a, doubled)
        log_mag = (kappa * z).real + np.asarray(num.log_mag) - np.asarray(den.log_mag)
        arg = (kappa * z).imag + np.asarray(num.arg) - np.asarray(den.arg)
        return log_mag, arg

    # normalize the tau multiplier c = f(z + tau) f(z) to the unit circle
    probe = 0.231 + 0.413 * tau
    lm1, ar1 = log_f_parts(probe)
    lm2, ar2 = log_f_parts(probe + tau)
    log_f0 = -0.5 * float(lm1 + lm2)
    c_mult = _polar(float(lm1 + lm2) + 2.0 * log_f0, float(ar1 + ar2))
    # z independence of c, checked at a second probe point
    probe2 = -0.127 + 0.291 * tau
    lm3, ar3 = log_f_parts(probe2)
    lm4, ar4 = log_f_parts(probe2 + tau)
    c_check = _polar(float(lm3 + lm4) + 2.0 * log_f0, float(ar3 + ar4))
    if abs(c_mult - c_check) > 1e-9:
        raise ConstructionInconsistent(
            f"tau multiplier is not constant in z: {c_mult} vs {c_check} at tau = {tau}"
        )
    # period-1 multiplier, from sigma shifts; independent of f0
    lm5, ar5 = log_f_parts(probe + 1.0)
    c_prime = _polar(float(lm5 - lm1), float(ar5 - ar1))
    if abs(c_prime + 1.0) > 1e-10:
        raise ConstructionInconsistent(
            f"period-1 multiplier is {c_prime}, not -1, at tau = {tau}"
        )

    c1 = math.log(8.0 / RHO_4PI)
    pole_classes = (a, bp)

    def core(flat):
        la_f, _ = log_f_parts(flat)
        la_f = np.atleast_1d(la_f) + log_f0
        gv = np.atleast_1d(g(flat))
        la_fp = _log_abs(gv) + la_f
        return _u_from_logs(c1, 0.0, la_fp, la_f)

    def evaluator(z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        flat = np.atleast_1d(z).ravel()
        # exact hits on the pole and zero classes of f (both lie over the
        # half period omega_1/2 of the base torus, where u is smooth) are
        # displaced symmetrically; the average cancels the linear term
        hit = np.zeros(flat.shape, dtype=bool)
        for cls in pole_classes:
            hit |= _lattice_gap(flat - cls, 2.0 * tau) < _LATTICE_HIT_TOL
        u = np.empty(flat.shape, dtype=float)
        if np.any(~hit):
            u[~hit] = core(flat[~hit])
        if np.any(hit):
            delta = 1e-7
            u[hit] = 0.5 * (core(flat[hit] + delta) + core(flat[hit] - delta))
        u = u.reshape(np.atleast_1d(z).shape)
        if scalar:
            return float(u[0])
        return u

    sol = MfeSolution(rho=RHO_4PI, torus=torus, branch=None, lam=0.0,
                      c1=c1, evaluator=evaluator)
    diag = FourPiDiagnostics(period_integral=period_integral, c_prime=c_prime,
                             c_tau=c_mult, kappa=kappa)
    return sol, diag


@dataclass(frozen=True)
class ResidualReport:
    """Numerical verification of one solution on a grid.

    max_residual and mean_residual use the compensated stencil described
    in verify_solution; literal_max_residual is the raw five point
    stencil on u itself, reported as a diagnostic of how much the log
    singularity pollutes a naive check.
    """

    max_residual: float
    mean_residual: float
    literal_max_residual: float
    periodicity_1: float
    periodicity_tau: float
    total_mass: float
    grid_n: int
    h: float
    excl_radius: float
    n_points: int


def _verify_threads() -> int:
    raw = os.environ.get("TORUS_GREEN_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, n)


def verify_solution(sol: MfeSolution, grid_n: int = 64,
                    excl_radius: float = 0.05) -> ResidualReport:
    """Five point stencil check of Delta u + rho e^u = 0 away from 0.

    The PDE residual is evaluated in compensated form: the stencil is
    applied to w = u + rho G_rel, whose Laplacian away from the lattice
    is exactly rho/area - rho e^u, so the truncation error involves the
    fourth derivatives of the smooth field w instead of those of the
    singular u.  The literal stencil on u is reported alongside; inside
    a few h of the exclusion disks it is dominated by the log singularity.

    Periodicity deviations are honest measurements: the evaluators never
    wrap, so u(z + 1) - u(z) and u(z + tau) - u(z) probe the multiplier
    structure of the developing map rather than any reduction code.
    Total mass integrates rho e^u over the full cell by the midpoint rule
    (the integrand vanishes polynomially at the source, so no exclusion
    is needed) and should come out near rho.
    """
    if grid_n < 32:
        raise ValueError(f"grid_n {grid_n} below 32")
    if excl_radius < 0.02:
        raise ValueError(f"excl_radius {excl_radius} below 0.02")
    torus = sol.torus
    tau = torus.tau
    area = torus.area
    rho = sol.rho
    u = sol.evaluator
    h = 1.0 / (64.0 * grid_n)
    gg = (np.arange(grid_n) + 0.5) / grid_n - 0.5
    rows = [gg + s * tau for s in gg]

    def row_stats(row_z):
        u_full = u(row_z)
        mass_sum = float(np.sum(np.exp(u_full)))
        keep = _lattice_gap(row_z, tau) > excl_radius
        z = row_z[keep]
        if z.size == 0:
            return (0.0, 0.0, 0, 0.0, 0.0, 0.0, mass_sum)
        uc = u_full[keep]
        offsets = np.concatenate([z + h, z - h, z + 1j * h, z - 1j * h])
        u_off = u(offsets).reshape(4, z.size)
        g_off = np.asarray(green.green_rel(offsets, torus)).reshape(4, z.size)
        g_c = np.asarray(green.green_rel(z, torus))
        w_off = u_off + rho * g_off
        w_c = uc + rho * g_c
        lap_w = (np.sum(w_off, axis=0) - 4.0 * w_c) / (h * h)
        res = np.abs(lap_w - rho / area + rho * np.exp(uc))
        lap_u = (np.sum(u_off, axis=0) - 4.0 * uc) / (h * h)
        lit = np.abs(lap_u + rho * np.exp(uc))
        shifted = u(np.concatenate([z + 1.0, z + tau])).reshape(2, z.size)
        per1 = float(np.max(np.abs(shifted[0] - uc)))
        pert = float(np.max(np.abs(shifted[1] - uc)))
        return (float(np.max(res)), float(np.sum(res)), int(res.size),
                float(np.max(lit)), per1, pert, mass_sum)

    with ThreadPoolExecutor(max_workers=_verify_threads()) as pool:
        stats = list(pool.map(row_stats, rows))
    n_pts = sum(s[2] for s in stats)
    cell = area / (grid_n * grid_n)
    return ResidualReport(
        max_residual=max(s[0] for s in stats),
        mean_residual=sum(s[1] for s in stats) / max(n_pts, 1),
        literal_max_residual=max(s[3] for s in stats),
        periodicity_1=max(s[4] for s in stats),
        periodicity_tau=max(s[5] for s in stats),
        total_mass=rho * cell * sum(s[6] for s in stats),
        grid_n=grid_n,
        h=h,
        excl_radius=excl_radius,
        n_points=n_pts,
    )
