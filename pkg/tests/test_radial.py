import math

import numpy as np
import pytest

from knads.angular import NotLimitPoint
from knads.geometry import BlackHoleParams, find_horizons, reparameterize
from knads.operators import ModeContext, phi_plus, tortoise_map
from knads.radial import (
    NotConfining,
    TooCloseToPhiPlus,
    confinement_certificate,
    default_r0,
    hinf_eigenvalues,
    horizon_ac_certificate,
    horizon_continuation_evidence,
    horizon_oscillation,
    infinity_growth_exponents,
    levinson_phi_plus,
)

P0 = BlackHoleParams(m=1.0, a=0.3, q_e=0.2, q_m=0.0, l=1.0)
CTX = ModeContext(mu=1.0, e=0.1, k=0.5)
LAM = 1.0


def extremal_params(r0=0.6, a=0.3, l=1.0):
    m, z2 = reparameterize(r0, r0, a, l)
    return BlackHoleParams(m=m, a=a, q_e=math.sqrt(z2), q_m=0.0, l=l)


@pytest.fixture(scope="module")
def wide_sw():
    # level spacing here is ~ pi / |x(r0)| ~ 10, so +-25 holds several
    return hinf_eigenvalues(P0, CTX, LAM, window=(-25.0, 25.0))


def test_hinf_window_labels_residuals(wide_sw):
    sw = wide_sw
    assert sw.count == len(sw.eigenvalues) > 2
    ev = np.array(sw.eigenvalues)
    assert np.all(np.diff(ev) > 0)
    assert 0 not in sw.labels and list(sw.labels) == sorted(sw.labels)
    assert max(sw.residuals) < 1e-8
    # positive labels start at the first eigenvalue above zero
    pos = [lam for lam, j in zip(sw.eigenvalues, sw.labels) if j == 1]
    assert pos and pos[0] > 0.0
    assert all(lam < 0 for lam, j in zip(sw.eigenvalues, sw.labels) if j < 0)


def test_hinf_against_fixture_value():
    # independently discretized value for the same confined problem
    sw = hinf_eigenvalues(P0, CTX, LAM, window=(0.5, 1.5))
    assert sw.count == 1
    assert sw.eigenvalues[0] == pytest.approx(1.0346836026292294, abs=1e-4)


def test_constant_shift_moves_spectrum_exactly():
    s = 0.7
    base = hinf_eigenvalues(P0, CTX, LAM, window=(-3.0, 3.0))
    shifted = hinf_eigenvalues(
        P0, CTX, LAM, window=(-3.0 + s, 3.0 + s), potential_shift=s
    )
    assert shifted.count == base.count
    d = np.array(shifted.eigenvalues) - np.array(base.eigenvalues)
    assert np.max(np.abs(d - s)) < 1e-9


def test_infinity_offset_robustness():
    a = hinf_eigenvalues(P0, CTX, LAM, window=(-2.0, 2.0), delta=1e-5)
    b = hinf_eigenvalues(P0, CTX, LAM, window=(-2.0, 2.0), delta=1e-6)
    assert a.count == b.count
    assert np.max(np.abs(np.array(a.eigenvalues) - b.eigenvalues)) < 1e-8


def test_empty_window(wide_sw):
    gaps = np.diff(wide_sw.eigenvalues)
    i = int(np.argmax(gaps))
    lo = wide_sw.eigenvalues[i] + 0.2 * gaps[i]
    hi = wide_sw.eigenvalues[i + 1] - 0.2 * gaps[i]
    empty = hinf_eigenvalues(P0, CTX, LAM, window=(lo, hi))
    assert empty.count == 0 and empty.eigenvalues == ()


def test_refusals():
    with pytest.raises(NotConfining):
        hinf_eigenvalues(P0, ModeContext(mu=0.0, e=0.1, k=0.5), LAM)
    light = ModeContext(mu=0.4, e=0.1, k=0.5)
    with pytest.raises(NotLimitPoint):
        hinf_eigenvalues(P0, light, LAM)
    sw = hinf_eigenvalues(P0, light, LAM, beta_infinity=math.pi / 4)
    assert sw.count > 0
    with pytest.raises(ValueError):
        hinf_eigenvalues(P0, CTX, LAM, r0=1e8)


def test_horizon_ac_certificate_nonextremal():
    cert = horizon_ac_certificate(P0, CTX, LAM)
    assert cert.kind == "Hor_AC_L1"
    assert cert.passed
    assert cert.evidence["tail_ratio"] < 0.05
    ints = cert.evidence["integral_Y"]
    # exponential decay toward the horizon: the integral has fully converged
    # by Y = 1e2 (tails vanish at double precision)
    assert 0.0 < ints[1e2] <= ints[1e3] <= ints[1e4]
    assert ints[1e4] - ints[1e3] <= ints[1e3] - ints[1e2]


def test_horizon_ac_certificate_extremal():
    p = extremal_params()
    ctx = ModeContext(mu=1.0, e=0.1, k=0.5)
    cert = horizon_ac_certificate(p, ctx, LAM)
    assert cert.kind == "Extremal_Cesaro"
    assert cert.passed
    assert cert.evidence["l1_diverges"]
    ces = cert.evidence["cesaro_Y"]
    assert ces[1e4] < ces[1e3] < ces[1e2]
    # deviation ~ 1/y: Cesaro mean falls off almost like 1/Y
    assert cert.evidence["decay_rate"] < -0.5


def test_levinson_certificate():
    cert = levinson_phi_plus(P0, CTX, LAM)
    assert cert.kind == "Levinson_phi_plus"
    assert cert.passed
    assert max(cert.evidence["asymptotic_rel_change"]) < 1e-4
    assert cert.evidence["min_norm_over_traces"] > 0.5
    assert cert.evidence["rbar_l1_cauchy_tail"] < 0.05
    final = np.array(cert.evidence["final_vectors"])
    assert np.linalg.norm(final, axis=1).min() > 0.5
    with pytest.raises(ValueError):
        levinson_phi_plus(extremal_params(), CTX, LAM)


def test_oscillation_slopes_antisymmetric():
    ph = phi_plus(P0, CTX)
    up = horizon_oscillation(P0, CTX, LAM, ph + 0.5)
    dn = horizon_oscillation(P0, CTX, LAM, ph - 0.5)
    for rep, want in ((up, 0.5), (dn, -0.5)):
        assert rep.passed
        assert rep.expected == pytest.approx(want, abs=1e-14)
        assert rep.rel_err < 1e-6
        assert rep.radius_ratio < 10.0
    assert up.slope == pytest.approx(-dn.slope, rel=1e-6)


def test_oscillation_guards():
    ph = phi_plus(P0, CTX)
    with pytest.raises(TooCloseToPhiPlus):
        horizon_oscillation(P0, CTX, LAM, ph + 1e-7)
    with pytest.raises(ValueError):
        horizon_oscillation(extremal_params(), CTX, LAM, 1.0)


def test_confinement_certificate():
    cert = confinement_certificate(P0, CTX)
    assert cert.kind == "Hinf_discrete"
    assert cert.passed
    target = CTX.mu * P0.l * math.log(10.0)
    assert cert.evidence["per_decade_integrals"][-1] == pytest.approx(
        target, rel=1e-2
    )
    assert cert.evidence["r_times_density_at_far"] == pytest.approx(
        CTX.mu * P0.l, rel=1e-2
    )
    with pytest.raises(NotConfining):
        confinement_certificate(P0, ModeContext(mu=0.0, e=0.1, k=0.5))


def test_infinity_growth_exponents():
    mul = CTX.mu * P0.l
    for lam, omega in ((1.0, 0.3), (-0.7, 1.1)):
        plus, minus = infinity_growth_exponents(P0, CTX, lam, omega)
        assert plus == pytest.approx(mul, rel=1e-2)
        assert minus == pytest.approx(-mul, rel=1e-2)


def test_horizon_continuation_evidence_batch():
    ph = phi_plus(P0, CTX)
    lams = np.array([1.0, 1.0, -0.5])
    omegas = ph + np.array([0.8, -1.1, 0.4])
    slopes, amps, decays, got_ph = horizon_continuation_evidence(
        P0, CTX, lams, omegas
    )
    assert got_ph == pytest.approx(ph)
    assert np.max(np.abs(slopes - (omegas - ph)) / np.abs(omegas - ph)) < 1e-3
    # oscillatory continuation: amplitude never collapses at the horizon
    assert np.all(amps > 1e-3)
    # recessive branch decays like t^(mu l) toward infinity
    assert np.max(np.abs(decays - CTX.mu * P0.l)) < 0.05


def test_default_r0():
    assert default_r0(P0) == pytest.approx(find_horizons(P0).r_plus + P0.l)
    tm = tortoise_map(P0)
    assert tm.x(default_r0(P0)) < -0.1
