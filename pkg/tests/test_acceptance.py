"""The fourteen acceptance criteria, each at its stated tolerance and time budget.

Every test prints one ``criterion NN PASS|FAIL`` line (also collected in the
terminal summary).  Two criteria are expected to fail on the numbers: the
stated constant of the exotic eigenfunction identity and the gap band near
t = 100.  They are kept as plain failures.
"""

import math
import time

import numpy as np

from heegnerspec.analysis import (
    dt_da,
    dtau_da,
    interleave_check,
    pair_correlation_fraction,
    spacing_corollary_scan,
    track_constant_term_zero,
    track_eigen_root,
)
from heegnerspec.eisenstein import (
    eisenstein_direct_sum,
    eisenstein_value,
    maass_selberg_norm,
    truncated_norm_2d,
    truncation_jump,
)
from heegnerspec.heegner import ThetaCombination, heegner_set, theta_coefficient
from heegnerspec.specialfns import default_branch, dirichlet_l, riemann_zeta, scattering_c, xi_completed
from heegnerspec.spectral import (
    QuadratureSpec,
    determinant_FG,
    eta_u_quad,
    eta_v_closed,
    eta_v_quad,
    heegner_correction,
    j_online,
    kernel_pairing,
    theta_u_online_limit,
    theta_v_closed,
    theta_v_quad,
)
from heegnerspec.zeros import constant_term_zeros, eigenvalue_parameters

TH7 = ThetaCombination.single(-7)
Q = QuadratureSpec()


def test_criterion_01_scattering_identities(acceptance):
    start = time.perf_counter()
    grid = [complex(x, y) for x in np.linspace(-0.8, 1.8, 10) for y in np.linspace(1.0, 40.0, 10)]
    prod = max(abs(scattering_c(s) * scattering_c(1 - s) - 1) for s in grid)
    xi = max(abs(xi_completed(s, reflect=False) - xi_completed(1 - s, reflect=False))
             / max(1.0, abs(xi_completed(s))) for s in grid)
    forms = max(abs(scattering_c(s, "gamma") - scattering_c(s, "xi")) / max(1.0, abs(scattering_c(s))) for s in grid)
    ok = prod < 1e-10 and xi < 1e-10 and forms < 1e-9
    acceptance(1, "scattering identities", ok,
               f"max|c_s c_(1-s) - 1| = {prod:.1e}, max xi reflection {xi:.1e}, forms {forms:.1e}",
               time.perf_counter() - start, 10)


def test_criterion_02_residue(acceptance):
    start = time.perf_counter()
    hs = np.array([10.0**-k for k in (3, 4, 5)])
    vals = np.array([h * complex(eisenstein_value(1j, 1 + h)).real for h in hs])
    limit = float(np.polyval(np.polyfit(hs, vals, 2), 0.0))
    err = abs(limit - 3 / math.pi)
    acceptance(2, "residue of E_s(i) at s = 1", err < 1e-4, f"extrapolated {limit:.8f} vs 3/pi, error {err:.1e}",
               time.perf_counter() - start, 5)


def test_criterion_03_heegner_identity(acceptance):
    start = time.perf_counter()
    s = 2.5
    closed = (math.sqrt(7) / 2) ** s * riemann_zeta(s) * dirichlet_l(s, -7) / riemann_zeta(2 * s)
    pts = [complex(x, y) for x, y in heegner_set(-7).points]
    fourier = sum(eisenstein_value(z, s) for z in pts)
    lattice = sum(eisenstein_direct_sum(z, s, 600)[0] for z in pts)
    e1, e2 = abs(fourier - closed), abs(lattice - closed)
    acceptance(3, "Heegner identity d = -7, s = 2.5", e1 < 1e-7 and e2 < 1e-7,
               f"Fourier route {e1:.1e}, lattice route {e2:.1e}", time.perf_counter() - start, 5)


def test_criterion_04_closed_forms_vs_quadrature(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(20240611)
    y7 = math.sqrt(7) / 2
    worst = {"eta_v": 0.0, "theta_v": 0.0, "reciprocity": 0.0}
    corrections = 0
    for _ in range(5):
        w = complex(rng.uniform(0.6, 0.95), rng.uniform(0.5, 12.0) * rng.choice([-1, 1]))
        a = rng.uniform(1.05, 3.0)
        a_low = rng.uniform(1.02, y7 - 0.02)
        worst["eta_v"] = max(worst["eta_v"], abs(eta_v_closed(w, a) - eta_v_quad(w, a, Q).value))
        corrections += heegner_correction(TH7, w, a_low) != 0
        worst["theta_v"] = max(worst["theta_v"], abs(theta_v_closed(TH7, w, a_low) - theta_v_quad(TH7, w, a_low, Q).value))
        a_rec = a if abs(a - y7) > 0.02 else a + 0.05
        # the two spectral integrands coincide on the line, so also compare with the closed form
        eta_u = eta_u_quad(TH7, w, a_rec, Q).value
        worst["reciprocity"] = max(worst["reciprocity"], abs(eta_u - theta_v_quad(TH7, w, a_rec, Q).value),
                                   abs(eta_u - theta_v_closed(TH7, w, a_rec)))
    ok = all(v < 1e-5 for v in worst.values()) and corrections == 5
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", correction term active in {corrections}/5"
    acceptance(4, "closed forms vs quadrature", ok, detail, time.perf_counter() - start, 300)


def test_criterion_05_kernel_calibration(acceptance):
    start = time.perf_counter()
    one = lambda t: np.ones_like(t, dtype=complex)
    samples = [0.8 + 2j, 0.6 + 0.3j, 0.95 + 17j, 0.7 - 5j, 1.4 + 1j, 0.65 + 33j, 0.9 + 0.1j, 0.56 + 8j, 2.0 + 0j, 0.75 + 60j]
    worst = max(abs(kernel_pairing(one, one, 0.0, w, Q).value - 1 / (2 * (2 * w - 1))) for w in samples)
    acceptance(5, "kernel calibration", worst < 1e-6, f"max error {worst:.1e} over 10 samples",
               time.perf_counter() - start, 60)


def test_criterion_06_functional_equation_of_g(acceptance):
    start = time.perf_counter()
    a = 3.0
    near = [0.52 + 8j, 0.51 + 3.3j, 0.53 + 14j, 0.56 + 6j]
    fe = max(abs(determinant_FG(TH7, a, w, Q)[1] - determinant_FG(TH7, a, 1 - w, Q)[1]) for w in near)
    gmin = min(abs(determinant_FG(TH7, a, complex(x, y), Q)[1])
               for x in np.linspace(0.55, 0.9, 20) for y in np.linspace(2.0, 10.0, 20))
    acceptance(6, "G(w) = G(1 - w) and G off the line", fe < 1e-5 and gmin > 0,
               f"max|G(w) - G(1-w)| = {fe:.1e}, min|G| on 20x20 grid = {gmin:.4f}",
               time.perf_counter() - start, 600)


def test_criterion_07_on_line_structure(acceptance):
    start = time.perf_counter()
    worst_re = worst_im = 0.0
    for tau in (5.3, 9.0, 13.7, 17.2, 22.4):
        lim = theta_u_online_limit(TH7, tau, Q)
        w = complex(0.5, tau)
        n = complex(theta_coefficient(TH7, 1 - w) * theta_coefficient(TH7, w))
        worst_re = max(worst_re, abs(lim.real - j_online(TH7, tau, Q)))
        worst_im = max(worst_im, abs(lim.imag + n.real / (4 * tau)))
    acceptance(7, "on-line real and imaginary parts", worst_re < 1e-4 and worst_im < 1e-4,
               f"max|Re - J| = {worst_re:.1e}, max|Im + N/(4 tau)| = {worst_im:.1e}",
               time.perf_counter() - start, 300)


def test_criterion_08_exotic_eigenfunction_identity(acceptance):
    start = time.perf_counter()
    a = 2.0
    ratios = []
    for z in constant_term_zeros(a, 5.0, 12.0)[:3]:
        w = complex(0.5, z.t)
        ratios.append(truncation_jump(w, a) / (2 * (1 - 2 * w) * a ** (w + 1)))
    worst = max(abs(r - 1) for r in ratios)
    detail = "jump / (2(1-2w) a^(w+1)) = " + ", ".join(f"{r.real:+.6f}{r.imag:+.1e}i" for r in ratios)
    acceptance(8, "exotic eigenfunction identity", worst < 1e-2, f"{detail}; relative error {worst:.2f}",
               time.perf_counter() - start, 120)


def test_criterion_09_maass_selberg(acceptance):
    start = time.perf_counter()
    a = 1.5
    t = constant_term_zeros(a, 0.5, 10.0)[0].t
    formula = maass_selberg_norm(t, a)
    direct = truncated_norm_2d(complex(0.5, t), a)
    rel = abs(direct - formula) / formula
    br = default_branch(51.0)
    norms = [maass_selberg_norm(z.t, aa, br) for aa in (1.5, 2.0, 3.0) for z in constant_term_zeros(aa, 0.5, 50.0, br)]
    ok = rel < 1e-2 and min(norms) > 0
    acceptance(9, "Maass-Selberg norm", ok,
               f"t* = {t:.6f}: formula {formula:.6f}, 2-D quadrature {direct:.6f}, rel {rel:.1e}; "
               f"min norm over {len(norms)} zeros to t = 50 is {min(norms):.3f}",
               time.perf_counter() - start, 600)


def test_criterion_10_zero_statistics(acceptance):
    start = time.perf_counter()
    br = default_branch(106.0)
    scale = 100 / math.pi * math.log(100)
    counts = {a: len(constant_term_zeros(a, br.t_min, 100.0, br)) for a in (2.0, 4.0)}
    count_ok = abs(counts[4.0] / scale - 1) <= 0.2
    zs = constant_term_zeros(2.0, 95.0, 105.0, br)
    norm = [(z1.t - z0.t) * math.log(z0.t) / math.pi for z0, z1 in zip(zs, zs[1:])]
    gaps_ok = all(0.75 <= g <= 1.25 for g in norm)
    acceptance(10, "zero statistics", count_ok and gaps_ok,
               f"count/scale {counts[4.0] / scale:.3f} at a = 4 ({counts[2.0] / scale:.3f} at a = 2); "
               f"normalised gaps in [95, 105] for a = 2 span [{min(norm):.3f}, {max(norm):.3f}], "
               f"psi'(100) = {br.psi_prime(100.0):.4f}",
               time.perf_counter() - start, 300)


def test_criterion_11_interleaving(acceptance):
    start = time.perf_counter()
    rep = interleave_check(TH7, 2.0, 15.0, 40.0, Q)
    cts = constant_term_zeros(2.0, 15.0, 40.0)
    ok = not rep.violations and len(rep.zeros) == len(cts) - 1
    acceptance(11, "interleaving on [15, 40]", ok,
               f"{len(rep.zeros)} roots in {len(cts) - 1} intervals, {len(rep.violations)} violations",
               time.perf_counter() - start, 900)


def test_criterion_12_derivatives(acceptance):
    start = time.perf_counter()
    br = default_branch(161.0)
    a, h = 2.0, 1e-5
    zs = constant_term_zeros(a, 10.0, 150.0, br)
    worst_t = 0.0
    for z in zs[:: max(1, len(zs) // 10)][:10]:
        fd = (track_constant_term_zero(z.t, a, a + h, br) - track_constant_term_zero(z.t, a, a - h, br)) / (2 * h)
        worst_t = max(worst_t, abs(fd / dt_da(z.t, a, br) - 1))
    roots = eigenvalue_parameters(TH7, a, 19.0, 24.0, Q, br)
    r = min(roots, key=lambda z: abs(z.t - 20.6))
    hh = 1e-4
    tracked = (track_eigen_root(TH7, r.t, a, a + hh, Q, br) - track_eigen_root(TH7, r.t, a, a - hh, Q, br)) / (2 * hh)
    closed = dtau_da(r.t, a, TH7, Q, br)
    rel_tau = abs(closed / tracked - 1)
    acceptance(12, "derivatives in the cut-off", worst_t < 1e-3 and rel_tau < 5e-2,
               f"dt/da max rel {worst_t:.1e} at 10 zeros; dtau/da at tau = {r.t:.4f}: "
               f"{closed:.5f} vs tracked {tracked:.5f}, rel {rel_tau:.1e}",
               time.perf_counter() - start, 600)


def test_criterion_13_pair_correlation(acceptance):
    start = time.perf_counter()
    val = pair_correlation_fraction(0.0, 0.5)
    acceptance(13, "pair correlation integral", abs(val - 0.11315) < 5e-5, f"{val:.8f}",
               time.perf_counter() - start, 1)


def test_criterion_14_spacing_corollaries(acceptance):
    start = time.perf_counter()
    rep = spacing_corollary_scan(TH7, 20.0, 60.0, Q)
    scenarios = [p for p in rep["pairs"] if p["scenario"] in ("corollary_1", "corollary_2")]
    margins = [p["margin"] for p in scenarios]
    empty = spacing_corollary_scan(TH7, 20.0, 20.5, Q)
    ok = not rep["violations"] and all(m > 0 for m in margins) and "counts" in empty
    raw = [p["raw_margin"] for p in scenarios]
    acceptance(14, "spacing corollaries on [20, 60]", ok,
               f"counts {rep['counts']}, min margin {min(margins) if margins else float('nan'):.3f} "
               f"(without the envelope {min(raw) if raw else float('nan'):+.3f}); "
               f"report for [20, 20.5] emitted with counts {empty['counts']}",
               time.perf_counter() - start, 1200)
