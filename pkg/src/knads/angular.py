"""Angular eigenvalues by Prüfer-phase shooting.

The two-component angular system is integrated as a phase/log-amplitude pair
from both poles toward a matching point c. Near each pole the phase equation
has an attracting fixed point selecting the recessive (power-law bounded)
solution, so shooting away from the poles is well conditioned; integration
runs in log(distance-to-pole) so the coefficient singularity becomes a smooth
bounded term. Eigenvalues are the roots of the matching defect
eta_left(c) - eta_right(c) = m*pi, which is strictly increasing in lambda;
the integer m doubles as a global mode label.
"""

from dataclasses import dataclass
import math

import numpy as np

from .classify import classify_angular
from .operators import _angular_entries, dirac_d
from .rk import IntegratorStall, bisect_batched, integrate

__all__ = [
    "PruferTrace",
    "SpectrumWindow",
    "NotLimitPoint",
    "WindowTooWide",
    "IntegratorStall",
    "prufer_rhs",
    "shoot_angular",
    "angular_eigenvalues",
    "eigenvalues_by_label",
    "amplitude_weight",
]

DEFAULT_EPSILON = 1e-6 * math.pi
DEFAULT_MATCHING_POINT = math.pi / 2
_RTOL = 1e-11
_ATOL = 1e-12


class NotLimitPoint(Exception):
    """An angular endpoint is limit circle and no boundary parameter beta was
    supplied; shooting refuses rather than picking an extension silently."""


class WindowTooWide(Exception):
    """More than 1e3 eigenvalues requested in a single window."""


@dataclass(frozen=True)
class PruferTrace:
    """One shooting trace: theta samples, phase, log amplitude, plus the
    endpoint initialization actually used."""

    thetas: np.ndarray
    etas: np.ndarray
    log_rhos: np.ndarray
    winding: int
    frobenius_eta0: float
    epsilon: float
    tol_achieved: float
    side: str

    def max_jump(self):
        return float(np.max(np.abs(np.diff(self.etas)))) if len(self.etas) > 1 else 0.0


@dataclass(frozen=True)
class SpectrumWindow:
    """Sorted eigenvalues in [lam_lo, lam_hi] with matching-defect residuals
    and signed mode labels (ordered by value, positive labels above lambda=0)."""

    lam_lo: float
    lam_hi: float
    eigenvalues: tuple
    residuals: tuple
    labels: tuple
    count: int
    oracle_deltas: tuple = None


def prufer_rhs(p, ctx, theta, eta, lam):
    """Phase derivative in the printed form

        H = lambda/sqrt(Delta_theta) + (2 a mu cos(theta)) sin(eta) cos(eta)
            + [xi sigma_b/(sqrt(Delta_theta) sin(theta))
               + a omega sin(theta)/sqrt(Delta_theta)] (sin^2(eta) - cos^2(eta)).

    Exposed for direct evaluation and tests; the shooting integrator uses the
    equivalent exact phase equation of the first-order system (the two forms
    coincide when a = 0)."""
    d = dirac_d(p, ctx)
    dth = 1.0 - (p.a / p.l) ** 2 * math.cos(theta) ** 2
    sq = math.sqrt(dth)
    sig = d * (math.cos(theta) - ctx.gauge_b) - ctx.k
    s, c = math.sin(eta), math.cos(eta)
    return (
        lam / sq
        + (2.0 * p.a * ctx.mu * math.cos(theta)) * s * c
        + (p.xi * sig / (sq * math.sin(theta)) + p.a * ctx.omega * math.sin(theta) / sq)
        * (s * s - c * c)
    )


def _frobenius_init(exponent, lam, mu_a, xi, eps):
    """Recessive-direction phase at offset eps from a pole, with the
    first-order inhomogeneous correction. exponent is nu at theta=0 (or rho0
    in the reflected variable at theta=pi)."""
    eta0 = math.copysign(math.pi / 4.0, exponent)
    c1 = (lam + math.copysign(mu_a, exponent)) / math.sqrt(xi)
    return eta0 + c1 * eps / (1.0 + 2.0 * abs(exponent))


def _left_rhs(p, ctx, lam, domega=None):
    """d(eta, log rho)/d tau with tau = log(theta); smooth up to the pole.

    domega optionally gives each batch member its own frequency offset from
    ctx.omega (the offset enters only through the a*omega*sin(theta) term)."""
    dw = None if domega is None else np.asarray(domega, dtype=float)

    def f(tau, state):
        theta = math.exp(tau)
        m11, m12 = _angular_entries(p, ctx, theta)
        sq = math.sqrt(1.0 - (p.a / p.l) ** 2 * math.cos(theta) ** 2)
        if dw is not None:
            m11 = m11 + p.a * dw * math.sin(theta) / sq
        eta = state[:, 0]
        c2, s2 = np.cos(2.0 * eta), np.sin(2.0 * eta)
        out = np.empty_like(state)
        out[:, 0] = theta * (lam - m11 * c2 - m12 * s2) / sq
        out[:, 1] = theta * (m12 * c2 - m11 * s2) / sq
        return out

    return f


def _right_rhs(p, ctx, lam, domega=None):
    """Same in sigma = log(alpha), alpha = pi - theta (integrating away from
    the theta=pi pole means decreasing theta, hence the sign)."""
    dw = None if domega is None else np.asarray(domega, dtype=float)

    def f(sig, state):
        alpha = math.exp(sig)
        theta = math.pi - alpha
        m11, m12 = _angular_entries(p, ctx, theta)
        sq = math.sqrt(1.0 - (p.a / p.l) ** 2 * math.cos(theta) ** 2)
        if dw is not None:
            m11 = m11 + p.a * dw * math.sin(theta) / sq
        eta = state[:, 0]
        c2, s2 = np.cos(2.0 * eta), np.sin(2.0 * eta)
        out = np.empty_like(state)
        out[:, 0] = -alpha * (lam - m11 * c2 - m12 * s2) / sq
        out[:, 1] = -alpha * (m12 * c2 - m11 * s2) / sq
        return out

    return f


def _exponents(p, ctx):
    d = dirac_d(p, ctx)
    nu = ctx.k - d + ctx.gauge_b * d
    rho0 = ctx.k + d + ctx.gauge_b * d
    return nu, rho0


def _shoot_batch(
    p,
    ctx,
    lams,
    c=DEFAULT_MATCHING_POINT,
    eps=DEFAULT_EPSILON,
    record=False,
    beta_left=None,
    beta_right=None,
    domega=None,
):
    """Integrate both sides for a whole array of lambda values at once.

    Returns (eta_left(c), eta_right(c), logrho_left, logrho_right) arrays,
    plus the recorded (ts, states) pairs when record is set. domega gives
    optional per-member frequency offsets (the recessive initialization is
    frequency independent since the omega term vanishes to first order at
    the fixed points)."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    nu, rho0 = _exponents(p, ctx)
    mu_a = ctx.mu * p.a

    yl = np.empty((lams.size, 2))
    if beta_left is None:
        yl[:, 0] = [_frobenius_init(nu, la, mu_a, p.xi, eps) for la in lams]
    else:
        yl[:, 0] = beta_left
    yl[:, 1] = 0.0
    left, lts, lys = integrate(
        _left_rhs(p, ctx, lams, domega),
        math.log(eps),
        math.log(c),
        yl,
        rtol=_RTOL,
        atol=_ATOL,
        max_step=0.25,
        phase_cap=math.pi / 2,
        record=record,
    )

    yr = np.empty((lams.size, 2))
    if beta_right is None:
        yr[:, 0] = [-_frobenius_init(rho0, la, mu_a, p.xi, eps) for la in lams]
    else:
        yr[:, 0] = beta_right
    yr[:, 1] = 0.0
    right, rts, rys = integrate(
        _right_rhs(p, ctx, lams, domega),
        math.log(eps),
        math.log(math.pi - c),
        yr,
        rtol=_RTOL,
        atol=_ATOL,
        max_step=0.25,
        phase_cap=math.pi / 2,
        record=record,
    )
    return left, right, (lts, lys), (rts, rys)


def _require_limit_point(p, ctx, beta_left, beta_right):
    at0, atpi = classify_angular(p, ctx)
    if not at0.limit_point and beta_left is None:
        raise NotLimitPoint(
            f"theta=0 is limit circle (nu={at0.exponent}); supply beta_left"
        )
    if not atpi.limit_point and beta_right is None:
        raise NotLimitPoint(
            f"theta=pi is limit circle (rho0={atpi.exponent}); supply beta_right"
        )


def shoot_angular(
    p,
    ctx,
    lam,
    c=DEFAULT_MATCHING_POINT,
    eps=DEFAULT_EPSILON,
    beta_left=None,
    beta_right=None,
):
    """Shoot from both poles to the matching point c for one lambda.

    Returns (eta_left(c), eta_right(c), (left_trace, right_trace)). The
    recessive initialization is applied at theta = eps and theta = pi - eps,
    with the phase measured in the theta picture on both sides."""
    _require_limit_point(p, ctx, beta_left, beta_right)
    nu, rho0 = _exponents(p, ctx)
    left, right, (lts, lys), (rts, rys) = _shoot_batch(
        p,
        ctx,
        [lam],
        c=c,
        eps=eps,
        record=True,
        beta_left=beta_left,
        beta_right=beta_right,
    )
    ltrace = PruferTrace(
        thetas=np.exp(lts),
        etas=lys[:, 0, 0],
        log_rhos=lys[:, 0, 1],
        winding=int(math.floor((lys[-1, 0, 0] - lys[0, 0, 0]) / math.pi)),
        frobenius_eta0=math.copysign(math.pi / 4, nu) if beta_left is None else beta_left,
        epsilon=eps,
        tol_achieved=_RTOL,
        side="left",
    )
    rtrace = PruferTrace(
        thetas=math.pi - np.exp(rts),
        etas=rys[:, 0, 0],
        log_rhos=rys[:, 0, 1],
        winding=int(math.floor((rys[-1, 0, 0] - rys[0, 0, 0]) / math.pi)),
        frobenius_eta0=-math.copysign(math.pi / 4, rho0)
        if beta_right is None
        else beta_right,
        epsilon=eps,
        tol_achieved=_RTOL,
        side="right",
    )
    return float(left[0, 0]), float(right[0, 0]), (ltrace, rtrace)


def _defect(p, ctx, lams, c, eps, beta_left, beta_right, domega=None):
    left, right, _, _ = _shoot_batch(
        p,
        ctx,
        lams,
        c=c,
        eps=eps,
        beta_left=beta_left,
        beta_right=beta_right,
        domega=domega,
    )
    return left[:, 0] - right[:, 0]


def angular_eigenvalues(
    p,
    ctx,
    window,
    c=DEFAULT_MATCHING_POINT,
    eps=DEFAULT_EPSILON,
    beta_left=None,
    beta_right=None,
    tol=1e-10,
):
    """All eigenvalues in the window, found by winding-count bracketing of the
    matching defect D(lambda) = eta_left(c) - eta_right(c) followed by
    batched bisection on D(lambda) - m*pi.

    D is strictly increasing, so the eigenvalue count in the window equals
    the number of multiples of pi crossed; each is bracketed in a segment of
    width <= 0.5 before bisection. Labels are signed indices ordered by
    value, anchored so the first eigenvalue above lambda=0 gets +1."""
    _require_limit_point(p, ctx, beta_left, beta_right)
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("window must satisfy lam_lo < lam_hi")

    nseg = max(2, int(math.ceil((hi - lo) / 0.5)))
    grid = np.linspace(lo, hi, nseg + 1)
    probe = np.concatenate([grid, [0.0]])
    dvals = _defect(p, ctx, probe, c, eps, beta_left, beta_right)
    dgrid, d0 = dvals[:-1], dvals[-1]
    if (dgrid[-1] - dgrid[0]) / math.pi > 1e3:
        raise WindowTooWide("window holds more than 1e3 eigenvalues")

    m_lo = math.floor(dgrid[0] / math.pi)
    m_hi = math.floor(dgrid[-1] / math.pi)
    targets = np.arange(m_lo + 1, m_hi + 1)
    if targets.size == 0:
        return SpectrumWindow(lo, hi, (), (), (), 0)

    # Locate the bracketing segment of each target by the grid defect values.
    seg_of = np.searchsorted(dgrid, targets * math.pi) - 1
    seg_of = np.clip(seg_of, 0, nseg - 1)
    blo = grid[seg_of]
    bhi = grid[seg_of + 1]

    def resid(lams):
        return _defect(p, ctx, lams, c, eps, beta_left, beta_right) - targets * math.pi

    niter = max(40, int(math.ceil(math.log2(max(1.0, (hi - lo)) / tol))) + 2)
    roots = bisect_batched(resid, blo, bhi, n_iter=niter, tol=tol * 0.5)
    residuals = np.abs(resid(roots))

    anchor = math.floor(d0 / math.pi)
    labels = targets - anchor
    labels = np.where(labels <= 0, labels - 1, labels)
    order = np.argsort(roots)
    return SpectrumWindow(
        lam_lo=lo,
        lam_hi=hi,
        eigenvalues=tuple(float(r) for r in roots[order]),
        residuals=tuple(float(r) for r in residuals[order]),
        labels=tuple(int(m) for m in labels[order]),
        count=int(targets.size),
    )


def eigenvalues_by_label(p, ctx, labels, window_hint=None, c=DEFAULT_MATCHING_POINT):
    """Eigenvalues for specific signed labels, expanding the search window
    until every requested label is present. Returns {label: eigenvalue}."""
    want = set(int(j) for j in labels)
    if window_hint is None:
        w = max(abs(j) for j in want) + 2.0 + abs(ctx.k) + abs(ctx.omega) * p.a
        lo, hi = -w, w
    else:
        lo, hi = window_hint
    for _ in range(12):
        sw = angular_eigenvalues(p, ctx, (lo, hi), c=c)
        found = dict(zip(sw.labels, sw.eigenvalues))
        if want <= set(found):
            return {j: found[j] for j in sorted(want)}
        if min(want, default=0) < min(found, default=0) or not found:
            lo -= max(2.0, 0.5 * (hi - lo))
        if max(want, default=0) > max(found, default=0) or not found:
            hi += max(2.0, 0.5 * (hi - lo))
    raise WindowTooWide("could not bracket all requested labels")


def amplitude_weight(p, ctx, theta, c=DEFAULT_MATCHING_POINT):
    """Closed-form amplitude weight E(theta) = exp(F(theta) - F(c)) with

        F(t) = -(k/2) [ (a/l) log((l + a cos t)/(l - a cos t))
                        - log((1 + cos t)/(1 - cos t)) ],

    the antiderivative of p(t) = -k*xi/(Delta_theta sin t). Valid on the
    purely electric background (q_m = 0); satisfies E(c) = 1 and
    E_k = 1/E_{-k}."""
    if p.q_m != 0.0:
        raise ValueError("closed-form weight requires q_m = 0")
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= 0.0) | (theta >= math.pi)):
        raise ValueError("theta must lie in (0, pi)")

    def f_part(t):
        ct = np.cos(t)
        return -(ctx.k / 2.0) * (
            (p.a / p.l) * np.log((p.l + p.a * ct) / (p.l - p.a * ct))
            - np.log((1.0 + ct) / (1.0 - ct))
        )

    out = np.exp(f_part(theta) - f_part(c))
    return float(out) if out.ndim == 0 else out
