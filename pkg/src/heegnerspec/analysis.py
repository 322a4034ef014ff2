"""Statistics built on the zero finders: interleaving, gaps, derivatives of
spectral parameters in the cut-off a, the pair-correlation integral and the
spacing scans for consecutive zeros of theta E."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, PoleError
from .heegner import ThetaCombination, theta_coefficient
from .spectral import QuadratureSpec, j_online, j_subtracted
from .specialfns import PhaseBranch, default_branch
from .zeros import (
    ZeroRecord,
    constant_term_phase,
    constant_term_zeros,
    eigen_condition,
    eigen_roots_between,
    j_derivative,
    j_zeros,
    theta_line_zeros,
)

__all__ = [
    "SpacingReport",
    "interleave_check",
    "gap_statistics",
    "dt_da",
    "track_constant_term_zero",
    "r_function",
    "dtau_da",
    "track_eigen_root",
    "slope_inequality_margin",
    "pair_correlation_fraction",
    "pair_correlation_report",
    "spacing_envelope",
    "spacing_corollary_scan",
]


@dataclass
class SpacingReport:
    window: tuple[float, float]
    gaps: list[float]
    normalized_gaps: list[float]
    violations: list[tuple[ZeroRecord, ZeroRecord]] = field(default_factory=list)
    zeros: list[ZeroRecord] = field(default_factory=list)

    @property
    def min_normalized(self) -> float:
        return min(self.normalized_gaps)

    @property
    def max_normalized(self) -> float:
        return max(self.normalized_gaps)

    @property
    def mean_normalized(self) -> float:
        return float(np.mean(self.normalized_gaps))

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "gaps": list(self.gaps),
            "normalized_gaps": list(self.normalized_gaps),
            "violations": [[v[0].t, v[1].t] for v in self.violations],
            "zeros": [z.t for z in self.zeros],
        }


def _gaps(ts: list[float]):
    gaps = [t1 - t0 for t0, t1 in zip(ts, ts[1:])]
    norm = [g * math.log(t0) / math.pi for g, t0 in zip(gaps, ts)]
    return gaps, norm


def gap_statistics(zeros: list[ZeroRecord]) -> SpacingReport:
    """Gaps and gaps normalised by the mean spacing pi/log t."""
    if len(zeros) < 2:
        raise DomainError("gap statistics need at least two zeros")
    ts = sorted(z.t for z in zeros)
    gaps, norm = _gaps(ts)
    return SpacingReport((ts[0], ts[-1]), gaps, norm, [], list(zeros))


def interleave_check(theta: ThetaCombination, a: float, t_lo: float, t_hi: float,
                     q: QuadratureSpec | None = None, branch: PhaseBranch | None = None) -> SpacingReport:
    """Check that each interval between consecutive constant-term zeros holds
    exactly one root of the eigenvalue condition."""
    if a <= theta.max_height():
        raise DomainError("a must lie above every Heegner point of theta")
    q = q or QuadratureSpec()
    branch = branch or default_branch(t_hi + 1)
    cts = constant_term_zeros(a, t_lo, t_hi, branch)
    roots, bad = [], []
    for z0, z1 in zip(cts, cts[1:]):
        found = eigen_roots_between(theta, a, z0.t, z1.t, q, branch)
        if len(found) != 1:
            bad.append((z0, z1))
        roots.extend(found)
    gaps, norm = _gaps([r.t for r in roots])
    return SpacingReport((t_lo, t_hi), gaps, norm, bad, roots)


# ---------------------------------------------------------------------------
# Derivatives in the cut-off
# ---------------------------------------------------------------------------


def dt_da(t: float, a: float, branch: PhaseBranch | None = None) -> float:
    """d t/d a = (-t/a)/(log a + psi'(t)) along a constant-term zero."""
    branch = branch or default_branch(t + 1)
    return (-t / a) / (math.log(a) + branch.psi_prime(t))


def track_constant_term_zero(t: float, a: float, a_new: float, branch: PhaseBranch | None = None) -> float:
    """The zero for cut-off a_new on the same phase level as t for cut-off a."""
    branch = branch or default_branch(t + 2)
    level = float(constant_term_phase(t, a, branch))
    f = lambda x: float(constant_term_phase(x, a_new, branch)) - level
    step = 0.5 * math.pi / (math.log(a_new) + branch.psi_prime(t))
    return brentq(f, t - step, t + step, xtol=1e-14, rtol=1e-15)


def r_function(theta: ThetaCombination, tau: float, q: QuadratureSpec | None = None) -> float:
    """R(tau) = -4 tau J(tau)/|theta E_{1/2+i tau}|^2, so that the eigenvalue
    condition reads tan(tau log a + psi(tau)) = R(tau)."""
    n = abs(complex(theta_coefficient(theta, complex(0.5, tau)))) ** 2
    return -4 * tau * j_online(theta, tau, q) / n


def _r_and_slope(theta, tau, q, dx=1e-3):
    # R' is the derivative in x = tau log tau
    h = dx / (math.log(tau) + 1)
    r0 = r_function(theta, tau, q)
    rp = (r_function(theta, tau + h, q) - r_function(theta, tau - h, q)) / (2 * dx)
    return r0, rp


def dtau_da(tau: float, a: float, theta: ThetaCombination, q: QuadratureSpec | None = None,
            branch: PhaseBranch | None = None) -> float:
    """d tau/d a = (tau/a)(R^2 + 1)/((log tau + 1) R' - (log a + psi'(tau))(R^2 + 1))."""
    branch = branch or default_branch(tau + 1)
    r, rp = _r_and_slope(theta, tau, q)
    psi_p = branch.psi_prime(tau)
    num = (tau / a) * (r * r + 1)
    den = (math.log(tau) + 1) * rp - (math.log(a) + psi_p) * (r * r + 1)
    if abs(den) < 1e-10 * max(1.0, abs(num)):
        raise PoleError("degenerate denominator in d tau/d a")
    return num / den


def track_eigen_root(theta: ThetaCombination, tau: float, a: float, a_new: float,
                     q: QuadratureSpec | None = None, branch: PhaseBranch | None = None,
                     width: float = 0.05) -> float:
    """Root of the eigenvalue condition for a_new nearest to tau."""
    branch = branch or default_branch(tau + 1)
    f = lambda x: eigen_condition(theta, a_new, x, q, branch)
    lo, hi = tau - width, tau + width
    flo, fhi = f(lo), f(hi)
    if np.sign(flo) == np.sign(fhi):
        raise DomainError("tracked root left the search window")
    return brentq(f, lo, hi, xtol=1e-12)


def slope_inequality_margin(tau: float, a: float, theta: ThetaCombination, q: QuadratureSpec | None = None,
                            branch: PhaseBranch | None = None) -> float:
    """(log a + psi')/(log tau + 1) (R^2 + 1) - R'; non-negative when the inequality holds."""
    branch = branch or default_branch(tau + 1)
    r, rp = _r_and_slope(theta, tau, q)
    return (math.log(a) + branch.psi_prime(tau)) / (math.log(tau) + 1) * (r * r + 1) - rp


# ---------------------------------------------------------------------------
# Pair correlation
# ---------------------------------------------------------------------------


def pair_correlation_fraction(alpha: float, beta: float) -> float:
    """int_alpha^beta (1 - (sin pi u / pi u)^2) du."""
    if not 0 <= alpha <= beta:
        raise DomainError("need 0 <= alpha <= beta")
    if alpha == beta:
        return 0.0
    val, err = quad(lambda u: 1.0 - np.sinc(u) ** 2, alpha, beta, epsabs=1e-12, epsrel=1e-12, limit=200)
    return float(val)


def pair_correlation_report(beta: float = 0.5) -> dict:
    """Pair fraction within beta mean spacings and the implied exclusion count
    under the rule that each close pair rules out one of its two zeros."""
    frac = pair_correlation_fraction(0.0, beta)
    return {
        "alpha": 0.0,
        "beta": beta,
        "pair_fraction": frac,
        "excluded_fraction": frac / 2,
        "max_included_fraction": 1 - frac / 2,
    }


# ---------------------------------------------------------------------------
# Spacing scans
# ---------------------------------------------------------------------------


def spacing_envelope(t: float) -> float:
    """Concrete slack 3/log log t standing in for O(1/log log t)."""
    return 3.0 / math.log(math.log(t))


def _offline_pair(theta, tau_e, q, j_e, j_pp, t_lo, t_hi):
    """Damped Newton search for a zero of J_w in the box 1/2 < Re w < 3/4,
    t_lo < Im w < t_hi, started from the quadratic model
    J ~ J(tau_e) + J''(tau_e)((tau - tau_e)^2 - eps'^2)/2.

    Steps are halved until |J| decreases and the iterate stays in the box, so
    the search cannot wander off to an on-line zero or a neighbouring window.
    """
    def inside(z):
        return 0.5 < z.real < 0.75 and t_lo < z.imag < t_hi

    def j_at(z):
        return j_subtracted(theta, z, q).value

    w = complex(0.5 + min(math.sqrt(2 * j_e / j_pp), 0.24), tau_e)
    f = j_at(w)
    for _ in range(40):
        h = 1e-4
        df = (j_at(w + h) - j_at(w - h)) / (2 * h)
        if df == 0:
            return None
        step = f / df
        lam_ = 1.0
        for _ in range(30):
            trial = w - lam_ * step
            if inside(trial):
                f_trial = j_at(trial)
                if abs(f_trial) < abs(f):
                    break
            lam_ /= 2
        else:
            return None
        w, f = trial, f_trial
        if abs(lam_ * step) < 1e-10:
            break
    else:
        return None
    if abs(f) > 1e-8 or abs(w.real - 0.5) < 1e-8:
        return None
    return w


def spacing_corollary_scan(theta: ThetaCombination, t_lo: float, t_hi: float,
                           q: QuadratureSpec | None = None) -> dict:
    """Classify each pair of consecutive on-line zeros (t, t') of theta E.

    * corollary_1: J has exactly one on-line zero between them, with positive slope;
      bound |t' - t| log t/pi >= 1 - 3/log log t.
    * corollary_2: no on-line zero of J between them but a pair of off-line zeros
      1/2 +- eps + i tau_o with t < tau_o < t'; bound >= 1/2 - 3/log log t.
    * none: no hypothesis holds.  inconclusive: a hypothesis of the statement fails
      in a way the scan cannot settle (e.g. J vanishes at t).
    """
    q = q or QuadratureSpec()
    tz = theta_line_zeros(theta, t_lo, t_hi)
    jz = j_zeros(theta, t_lo, t_hi, q)
    jts = np.array([z.t for z in jz])
    pairs = []
    for z0, z1 in zip(tz, tz[1:]):
        t, t1 = z0.t, z1.t
        entry = {"t": t, "t_next": t1, "normalized_gap": (t1 - t) * math.log(t) / math.pi,
                 "envelope": spacing_envelope(t), "j_zeros": [], "scenario": "none"}
        inside = jts[(jts > t) & (jts < t1)]
        entry["j_zeros"] = [float(x) for x in inside]
        if min(abs(j_online(theta, t, q)), abs(j_online(theta, t1, q))) < 1e-10:
            entry["scenario"] = "inconclusive"
        elif len(inside) == 1:
            slope = j_derivative(theta, float(inside[0]), q)
            entry["j_slope"] = slope
            if slope > 0:
                entry["scenario"] = "corollary_1"
        elif len(inside) == 0:
            xs = np.linspace(t, t1, 9)[1:-1]
            js = np.array([j_online(theta, x, q) for x in xs])
            k = int(np.argmin(np.abs(js)))
            if 0 < k < len(xs) - 1:
                h = xs[1] - xs[0]
                j_pp = (js[k + 1] - 2 * js[k] + js[k - 1]) / h**2
                if js[k] * j_pp > 0:
                    w = _offline_pair(theta, float(xs[k]), q, float(js[k]), float(j_pp), t, t1)
                    if w is not None:
                        entry["scenario"] = "corollary_2"
                        entry["offline_zero"] = [w.real, w.imag]
                        entry["offline_eps"] = abs(w.real - 0.5)
        if entry["scenario"] == "corollary_1":
            entry["bound"] = 1 - entry["envelope"]
        elif entry["scenario"] == "corollary_2":
            entry["bound"] = 0.5 - entry["envelope"]
        if "bound" in entry:
            entry["margin"] = entry["normalized_gap"] - entry["bound"]
            # the same comparison without the envelope, which exceeds 1 below t ~ 5e8
            entry["raw_margin"] = entry["margin"] - entry["envelope"]
        pairs.append(entry)
    violations = [p for p in pairs if p.get("margin", 0.0) < 0]
    counts = {k: sum(p["scenario"] == k for p in pairs) for k in ("corollary_1", "corollary_2", "none", "inconclusive")}
    return {
        "window": [t_lo, t_hi],
        "envelope": "3/log log t",
        "pairs": pairs,
        "counts": counts,
        "violations": violations,
    }
