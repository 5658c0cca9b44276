"""Coefficient functions of the separated angular and radial operators, and
the tortoise-coordinate maps.

The angular operator acts on two-component functions of theta in the measure
dtheta / sqrt(Delta_theta); its potential matrix M(theta) is symmetric with
M22 = -M11. The radial Hamiltonian acts on two-component functions of the
tortoise coordinate; its potential V tends to phi_plus * I at the horizon.

Near-horizon quantities are evaluated through the factored form of Delta_r,
Delta_r = (r - r_plus)(r - r_minus) q2(r) / l^2, which is free of the
cancellation the monomial quartic suffers at small r - r_plus.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import OutsideExterior, delta_r_prime, find_horizons


class DomainError(ValueError):
    """Raised when a coordinate sits outside the open domain of a coefficient
    function (e.g. theta at an endpoint)."""


class QuadratureFailure(Exception):
    """Raised when adaptive quadrature for the tortoise map exceeds budget."""


@dataclass(frozen=True)
class ModeContext:
    """One partial wave: field mass mu, field charge e, half-integer wave
    number k, frequency omega, and the gauge parameter gauge_b (default 0).

    2k must be an odd integer. The magnetic coupling d = q_m e / xi is never
    stored; it is recomputed from a parameter set via dirac_d."""

    mu: float
    e: float
    k: float
    omega: float = 0.0
    gauge_b: float = 0.0

    def __post_init__(self):
        two_k = 2.0 * self.k
        if abs(two_k - round(two_k)) > 1e-12 or round(two_k) % 2 == 0:
            raise ValueError("2k must be an odd integer")

    @property
    def n(self):
        """Integer index with k = n + 1/2."""
        return int(round(self.k - 0.5))

    def with_omega(self, omega):
        return ModeContext(self.mu, self.e, self.k, omega, self.gauge_b)


def dirac_d(p, ctx):
    """Magnetic coupling d = q_m e / xi. Integer d is the quantization
    condition for essential self-adjointness of every angular partial wave."""
    return p.q_m * ctx.e / p.xi


def sigma_function(p, ctx, theta):
    """sigma_b(theta) = d (cos(theta) - b) - k; the b shift implements the
    gauge replacement q_m cos(theta) -> q_m (cos(theta) - b)."""
    d = dirac_d(p, ctx)
    return d * (np.cos(theta) - ctx.gauge_b) - ctx.k


def _angular_entries(p, ctx, theta):
    """(M11, M12) of the angular potential matrix, vectorized over theta."""
    theta = np.asarray(theta, dtype=float)
    dth = 1.0 - (p.a / p.l) ** 2 * np.cos(theta) ** 2
    sq = np.sqrt(dth)
    m11 = p.xi * sigma_function(p, ctx, theta) / (sq * np.sin(theta)) + (
        p.a * ctx.omega * np.sin(theta) / sq
    )
    m12 = -ctx.mu * p.a * np.cos(theta)
    return m11, m12 + np.zeros_like(m11)


def angular_matrix(p, ctx, theta):
    """Symmetric 2x2 potential matrix M(theta) of the angular operator,
    frequency term included:

        M11 = xi sigma_b / (sqrt(Delta_theta) sin(theta))
              + a omega sin(theta) / sqrt(Delta_theta)
        M22 = -M11,   M12 = M21 = -mu a cos(theta).

    theta must lie strictly inside (0, pi)."""
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie in the open interval (0, pi)")
    m11, m12 = _angular_entries(p, ctx, theta)
    m11 = float(m11)
    m12 = float(m12)
    return np.array([[m11, m12], [m12, -m11]])


def _p_function(p, ctx, r):
    """P(r) = a xi k + e (q_e r + b q_m a); enters the radial diagonal."""
    return p.a * p.xi * ctx.k + ctx.e * (p.q_e * r + ctx.gauge_b * p.q_m * p.a)


def phi_plus(p, ctx):
    """Horizon asymptotic potential level P(r_plus) / (r_plus^2 + a^2)."""
    hd = find_horizons(p)
    return _p_function(p, ctx, hd.r_plus) / (hd.r_plus**2 + p.a**2)


def _factored_quartic_terms(p):
    """(r_plus, r_minus, q2 coefficients) with Delta_r =
    (r-r_plus)(r-r_minus) q2(r) / l^2 and q2(r) = r^2 + c1 r + c0."""
    hd = find_horizons(p)
    rp = hd.r_plus
    rm = hd.r_minus if hd.r_minus is not None else 0.0
    c1 = rp + rm
    c0 = rp * rp + rm * rm + rp * rm + p.a**2 + p.l**2
    return rp, rm, c1, c0


def sqrt_delta_r_from_u(p, u):
    """sqrt(Delta_r) at r = r_plus + u, via the factored quartic; exact at
    u = 0 and stable for tiny u, vectorized."""
    rp, rm, c1, c0 = _factored_quartic_terms(p)
    u = np.asarray(u, dtype=float)
    r = rp + u
    q2 = (r + c1) * r + c0
    return np.sqrt(u * (u + (rp - rm)) * q2) / p.l


def radial_potential_from_u(p, ctx, lam, u):
    """Entries (V11, V22, V12) of the radial potential at r = r_plus + u,
    vectorized and cancellation-free near the horizon:

        V11 = (P + mu r sqrt(Delta_r)) / (r^2 + a^2)
        V22 = (P - mu r sqrt(Delta_r)) / (r^2 + a^2)
        V12 = lambda sqrt(Delta_r) / (r^2 + a^2)."""
    rp = find_horizons(p).r_plus
    u = np.asarray(u, dtype=float)
    r = rp + u
    r2a2 = r * r + p.a**2
    sq = sqrt_delta_r_from_u(p, u)
    pr = _p_function(p, ctx, r)
    diag = pr / r2a2
    conf = ctx.mu * r * sq / r2a2
    off = lam * sq / r2a2
    return diag + conf, diag - conf, off


def radial_potential(p, ctx, lam, r):
    """Symmetric 2x2 radial potential V(r) in the tortoise form, for a single
    exterior radius r > r_plus. lam is the angular eigenvalue of the partial
    wave (a plain parameter here)."""
    hd = find_horizons(p)
    if r < hd.r_plus:
        raise OutsideExterior("radial potential is defined on r > r_plus")
    v11, v22, v12 = radial_potential_from_u(p, ctx, lam, r - hd.r_plus)
    return np.array([[float(v11), float(v12)], [float(v12), float(v22)]])


def confinement_density(p, ctx, r):
    """mu r / sqrt(Delta_r): the diagonal growth responsible for the discrete
    spectrum of the confined radial operator. Its integral over [r0, R)
    diverges like mu l log R, and r * density -> mu l."""
    r = np.asarray(r, dtype=float)
    return ctx.mu * r / np.sqrt(delta_r_vec(p, r))


def delta_r_vec(p, r):
    """Vectorized Delta_r through the factored form (positive on the
    exterior)."""
    rp, rm, c1, c0 = _factored_quartic_terms(p)
    r = np.asarray(r, dtype=float)
    return (r - rp) * (r - rm) * ((r + c1) * r + c0) / p.l**2


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _tail_integral(p, r):
    """y contribution of [r, infinity): substitute v = 1/t, giving the
    analytic integrand (1 + a^2 v^2) / W(v) with
    W(v) = (1 + a^2 v^2)(1 + l^2 v^2)/l^2 - 2 m v^3 + z^2 v^4."""
    r = np.asarray(r, dtype=float)
    half = 0.5 / r
    v = half[..., None] * (_GAUSS_NODES + 1.0)
    w = (
        (1.0 + (p.a * v) ** 2) * (1.0 + (p.l * v) ** 2) / p.l**2
        - 2.0 * p.m * v**3
        + p.z2 * v**4
    )
    g = (1.0 + (p.a * v) ** 2) / w
    return (g @ _GAUSS_WEIGHTS) * half


class TortoiseMap:
    """Monotone map between exterior radius and the tortoise coordinates.

    y(r) = integral_r^infinity (t^2 + a^2) / Delta_t dt is strictly
    decreasing with y -> infinity at the horizon and y -> 0+ at infinity;
    x = -y. Built once per parameter set: a dense ODE solution in
    s = log(r - r_plus) spans the bulk, a closed quadrature covers the far
    tail, and asymptotic branches extend both ends (exponential approach for
    a non-extremal horizon, 1/y approach for an extremal one).
    """

    def __init__(self, p, n_init=4000):
        hd = find_horizons(p)
        self.p = p
        self.r_plus = hd.r_plus
        self.extremal = hd.extremal
        rp, rm, c1, c0 = _factored_quartic_terms(p)
        self._rm, self._c1, self._c0 = rm, c1, c0

        self.r_big = 50.0 * max(self.r_plus, p.l)
        s_hi = math.log(self.r_big - self.r_plus)
        u_lo = 1e-12 * max(self.r_plus, p.l)
        s_lo = math.log(u_lo)
        y_big = float(_tail_integral(p, self.r_big))

        def dyds(s, _y):
            u = math.exp(s)
            r = self.r_plus + u
            q2 = (r + c1) * r + c0
            return -(p.l**2) * (r * r + p.a**2) / ((u + (rp - rm)) * q2)

        if self.extremal:
            # Stop the log-range at a moderate u and hand over to v = 1/u.
            s_lo = math.log(0.25 * self.r_plus)
        sol = solve_ivp(
            dyds,
            (s_hi, s_lo),
            [y_big],
            method="DOP853",
            rtol=1e-12,
            atol=1e-15,
            dense_output=True,
        )
        if not sol.success:
            raise QuadratureFailure(sol.message)
        self._sol = sol.sol
        self.s_lo, self.s_hi = s_lo, s_hi
        ss = np.linspace(s_hi, s_lo, n_init)
        ys = self._sol(ss)[0]
        # y ascends as s descends; keep that order so np.interp sees an
        # increasing abscissa.
        self._s_samples = ss
        self._logy_samples = np.log(ys)
        self.y_at_s_lo = float(ys[-1])
        self.y_at_s_hi = y_big
        # Horizon-side asymptotics.
        if not self.extremal:
            self.slope = (self.r_plus**2 + p.a**2) / delta_r_prime(p, self.r_plus)
        else:
            q2e = (self.r_plus + c1) * self.r_plus + c0
            self._a_inf = p.l**2 * (self.r_plus**2 + p.a**2) / q2e
            v_mid = math.exp(-s_lo)
            v_hi = v_mid * 1e15

            def dydv(v, _y):
                r = self.r_plus + 1.0 / v
                q2 = (r + c1) * r + c0
                return p.l**2 * (r * r + p.a**2) / q2

            solv = solve_ivp(
                dydv,
                (v_mid, v_hi),
                [self.y_at_s_lo],
                method="DOP853",
                rtol=1e-12,
                atol=1e-15,
                dense_output=True,
            )
            if not solv.success:
                raise QuadratureFailure(solv.message)
            self._solv = solv.sol
            self.v_mid, self.v_hi = v_mid, v_hi
            vv = np.geomspace(v_mid, v_hi, n_init)
            self._v_samples = vv
            self._logy_v_samples = np.log(solv.sol(vv)[0])
            self.y_at_v_hi = float(solv.sol(v_hi)[0])

    # -- forward map ------------------------------------------------------

    def _dyds(self, s):
        u = np.exp(s)
        r = self.r_plus + u
        q2 = (r + self._c1) * r + self._c0
        rp_minus_rm = self.r_plus - self._rm
        return -(self.p.l**2) * (r * r + self.p.a**2) / ((u + rp_minus_rm) * q2)

    def y(self, r):
        """Tortoise coordinate y(r), scalar or array, for r > r_plus."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= self.r_plus):
            raise OutsideExterior("tortoise map is defined on r > r_plus")
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        far = r >= self.r_big
        if far.any():
            out[far] = _tail_integral(self.p, r[far])
        near = ~far
        if near.any():
            s = np.log(r[near] - self.r_plus)
            inside = s >= self.s_lo
            vals = np.empty_like(s)
            if inside.any():
                vals[inside] = self._sol(s[inside])[0]
            if (~inside).any():
                if not self.extremal:
                    vals[~inside] = self.y_at_s_lo + self.slope * (
                        self.s_lo - s[~inside]
                    )
                else:
                    v = np.exp(-s[~inside])
                    vals[~inside] = self._solv(np.minimum(v, self.v_hi))[0]
                    over = v > self.v_hi
                    if over.any():
                        vals[~inside][over] = self.y_at_v_hi + self._a_inf * (
                            v[over] - self.v_hi
                        )
            out[near] = vals
        return float(out[0]) if scalar else out

    def x(self, r):
        """Infinity-compactified coordinate x(r) = -y(r), in (-infinity, 0)."""
        return -self.y(r)

    # -- inverse map ------------------------------------------------------

    def log_u_of_y(self, y):
        """log(r - r_plus) as a function of y; exact even where r - r_plus
        underflows. Vectorized."""
        y = np.asarray(y, dtype=float)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        if np.any(y <= 0.0):
            raise ValueError("y must be positive")
        out = np.empty_like(y)
        lo = y <= self.y_at_s_hi
        if lo.any():
            # r >= r_big: Newton on the tail quadrature, init r ~ l^2 / y.
            r = np.maximum(self.p.l**2 / y[lo], self.r_big)
            for _ in range(60):
                f = _tail_integral(self.p, r) - y[lo]
                df = -(r * r + self.p.a**2) / delta_r_vec(self.p, r)
                step = f / df
                r = np.maximum(r - step, self.r_big)
                if np.max(np.abs(step) / r) < 1e-15:
                    break
            out[lo] = np.log(r - self.r_plus)
        hi = ~lo
        if hi.any():
            yh = y[hi]
            res = np.empty_like(yh)
            in_spline = yh <= self.y_at_s_lo
            if in_spline.any():
                s = np.interp(
                    np.log(yh[in_spline]), self._logy_samples, self._s_samples
                )
                for _ in range(60):
                    f = self._sol(s)[0] - yh[in_spline]
                    step = f / self._dyds(s)
                    s = np.clip(s - step, self.s_lo, self.s_hi)
                    if np.max(np.abs(step)) < 1e-14:
                        break
                res[in_spline] = s
            deep = ~in_spline
            if deep.any():
                if not self.extremal:
                    res[deep] = self.s_lo - (yh[deep] - self.y_at_s_lo) / self.slope
                else:
                    yd = yh[deep]
                    v = np.interp(
                        np.log(yd), self._logy_v_samples, np.log(self._v_samples)
                    )
                    v = np.exp(v)
                    over = yd > self.y_at_v_hi
                    v[over] = self.v_hi + (yd[over] - self.y_at_v_hi) / self._a_inf
                    for _ in range(60):
                        inside = ~over
                        if not inside.any():
                            break
                        f = self._solv(v[inside])[0] - yd[inside]
                        r = self.r_plus + 1.0 / v[inside]
                        q2 = (r + self._c1) * r + self._c0
                        dydv = self.p.l**2 * (r * r + self.p.a**2) / q2
                        step = f / dydv
                        v[inside] = np.clip(v[inside] - step, self.v_mid, self.v_hi)
                        if np.max(np.abs(step / v[inside])) < 1e-15:
                            break
                    res[deep] = -np.log(v)
            out[hi] = res
        return float(out[0]) if scalar else out

    def u_of_y(self, y):
        """r - r_plus as a function of y; underflows gracefully to 0 deep in
        the non-extremal horizon region (where the potential is exactly at
        its limit to machine precision)."""
        with np.errstate(under="ignore"):
            return np.exp(self.log_u_of_y(y))

    def r_of_y(self, y):
        return self.r_plus + self.u_of_y(y)

    def r_of_x(self, x):
        return self.r_of_y(-np.asarray(x, dtype=float))


@lru_cache(maxsize=64)
def tortoise_map(p):
    """Cached per-parameter-set TortoiseMap (one-time build, read-only use)."""
    return TortoiseMap(p)


def tortoise_y(p, r):
    """y(r): horizon-compactifying tortoise coordinate (y -> infinity at the
    horizon, y -> 0+ at infinity)."""
    return tortoise_map(p).y(r)


def tortoise_x(p, r):
    """x(r) = -y(r): infinity-compactifying coordinate on (-infinity, 0)."""
    return tortoise_map(p).x(r)
