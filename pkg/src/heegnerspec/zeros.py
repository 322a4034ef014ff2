"""Zero isolation on the critical line.

Every finder scans a real function of t for sign changes and refines each
bracket.  The real functions are:

* constant term:  cos(t log a + psi(t)), the rotated y^s + c_s y^{1-s} at y = a;
* theta E:        Z_theta(t) = e^{i psi(t)} theta E_{1/2+it};
* zeta:           e^{i theta_R(t)} zeta(1/2 + it);
* J:              J_theta(1/2 + i tau);
* eigenvalue:     C(tau) = cos(phi) J(tau) + sin(phi) |theta E(tau)|^2/(4 tau),
                  phi = tau log a + psi(tau).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BranchGapError, DomainError, RealnessError
from .heegner import ThetaCombination, theta_coefficient
from .specialfns import PhaseBranch, default_branch, log_gamma, psi_decomposition, riemann_zeta
from .spectral import QuadratureSpec, j_online

__all__ = [
    "ZeroRecord",
    "KINDS",
    "scan_step",
    "scan_grid",
    "constant_term_phase",
    "constant_term_zeros",
    "z_theta",
    "theta_line_zeros",
    "riemann_siegel_theta",
    "hardy_z",
    "zeta_zeros",
    "eigen_condition",
    "tan_form_gap",
    "adjust_cutoff",
    "eigenvalue_parameters",
    "j_zeros",
    "j_derivative",
    "records_to_csv",
    "records_from_csv",
]

KINDS = ("constant_term", "theta_e", "zeta", "j_fn", "eigenvalue")
RESIDUAL_MAX = 1e-8


@dataclass(frozen=True)
class ZeroRecord:
    kind: str
    t: float
    a: float | None
    residual: float
    bracket: tuple[float, float]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown zero kind {self.kind!r}")
        lo, hi = self.bracket
        if not lo <= self.t <= hi:
            raise DomainError("bracket must contain the zero")


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------


def scan_step(t: float) -> float:
    """A quarter of the mean gap pi/log t, capped for small t."""
    return min(0.25, math.pi / (4 * math.log(max(t, 3.0))))


def scan_grid(t_lo: float, t_hi: float, refine: int = 1) -> np.ndarray:
    pts = [t_lo]
    while pts[-1] < t_hi:
        pts.append(min(t_hi, pts[-1] + scan_step(pts[-1]) / refine))
    return np.array(pts)


def _refine(f: Callable[[float], float], lo: float, hi: float, flo: float, fhi: float, xtol: float = 1e-12):
    """Root inside a sign-change bracket, plus a small bracket around it."""
    if flo == 0:
        return lo, (lo, lo)
    if fhi == 0:
        return hi, (hi, hi)
    root = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    h = max(xtol, 1e-14 * abs(root))
    for _ in range(30):
        a, b = max(lo, root - h), min(hi, root + h)
        fa, fb = f(a), f(b)
        if fa == 0 or fb == 0 or np.sign(fa) != np.sign(fb):
            return root, (a, b)
        h *= 4
    return root, (lo, hi)


def _sign_change_zeros(f: Callable[[float], float], grid: np.ndarray, values: np.ndarray, kind: str, a=None, xtol=1e-12,
                       dips: bool = False):
    """Refine every sign change on the grid.  With ``dips`` each interior local
    minimum of |f| without a sign change is also probed: the signed function is
    minimised over the two adjacent steps, and a crossing yields two zeros
    closer together than the grid could resolve."""
    out = []

    def add(lo, hi, flo, fhi):
        t, br = _refine(f, lo, hi, flo, fhi, xtol)
        out.append(ZeroRecord(kind, float(t), a, float(abs(f(t))), (float(br[0]), float(br[1]))))

    for i in range(len(grid) - 1):
        v0, v1 = values[i], values[i + 1]
        if v0 == 0 or np.sign(v0) != np.sign(v1):
            add(grid[i], grid[i + 1], v0, v1)
    if dips:
        mag = np.abs(values)
        for i in range(1, len(grid) - 1):
            sg = np.sign(values[i])
            if sg == 0 or not (mag[i] < mag[i - 1] and mag[i] < mag[i + 1]):
                continue
            if np.sign(values[i - 1]) != sg or np.sign(values[i + 1]) != sg:
                continue
            res = minimize_scalar(lambda t: sg * f(t), bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                  options={"xatol": 1e-10})
            if res.fun < 0:
                fm = f(res.x)
                add(grid[i - 1], res.x, values[i - 1], fm)
                add(res.x, grid[i + 1], fm, values[i + 1])
    return _dedupe(out)


def _dedupe(records: list[ZeroRecord]) -> list[ZeroRecord]:
    records = sorted(records, key=lambda r: r.t)
    out = []
    for r in records:
        if out and abs(r.t - out[-1].t) < 1e-9:
            continue
        out.append(r)
    return out


def _warn_if_dense(records: list[ZeroRecord], what: str) -> None:
    for r0, r1 in zip(records, records[1:]):
        if r1.t - r0.t < 2 * scan_step(r0.t):
            warnings.warn(
                f"{what}: zeros at {r0.t:.6f} and {r1.t:.6f} are closer than two grid steps",
                RuntimeWarning,
                stacklevel=3,
            )


def _branch_for(t_hi: float, branch: PhaseBranch | None) -> PhaseBranch:
    branch = branch or default_branch(t_hi + 1)
    if not branch.covers(t_hi):
        raise BranchGapError(f"phase branch ends at {branch.t_max}, below {t_hi}")
    return branch


# ---------------------------------------------------------------------------
# Constant-term zeros
# ---------------------------------------------------------------------------


def constant_term_phase(t, a: float, branch: PhaseBranch):
    """phi(t) = t log a + psi(t) on the continuous branch."""
    return np.asarray(t) * math.log(a) + branch.psi_at(t)


def constant_term_zeros(a: float, t_lo: float, t_hi: float, branch: PhaseBranch | None = None) -> list[ZeroRecord]:
    """All t in [t_lo, t_hi] with t log a + psi(t) = (k + 1/2) pi.

    Above t = 10 the phase is increasing and every half-integer level is
    crossed once.  Below 10 monotonicity is not assumed: the phase is scanned
    on a grid ten times finer than the anchors and each level crossing is
    bracketed separately.
    """
    if a <= 1:
        raise DomainError("cut-off a must exceed 1")
    if not 0 < t_lo < t_hi:
        raise DomainError("need 0 < t_lo < t_hi")
    branch = _branch_for(t_hi, branch)
    if t_lo < branch.t_min:
        raise BranchGapError(f"phase branch starts at {branch.t_min}")
    la = math.log(a)
    pieces = []
    if t_lo < 10:
        pieces.append(np.arange(t_lo, min(t_hi, 10.0), branch.step / 10))
    if t_hi > 10:
        pieces.append(np.arange(max(t_lo, 10.0), t_hi, branch.step))
    grid = np.unique(np.concatenate(pieces + [[t_hi]]))
    phase = constant_term_phase(grid, a, branch)
    diffs = np.diff(phase)
    if np.any(diffs[grid[1:] > 10] <= 0):
        raise BranchGapError("constant-term phase is not increasing above t = 10")
    levels = (phase - math.pi / 2) / math.pi
    out = []
    for i in range(len(grid) - 1):
        k0, k1 = math.floor(levels[i]), math.floor(levels[i + 1])
        if k0 == k1:
            continue
        k = max(k0, k1)
        target = (k + 0.5) * math.pi

        def f(t, target=target):
            return float(constant_term_phase(t, a, branch)) - target

        t, br = _refine(f, grid[i], grid[i + 1], phase[i] - target, phase[i + 1] - target, 1e-13)
        # one Newton polish on the phase
        t = t - f(t) / (la + branch.psi_prime(t))
        t = min(max(t, br[0]), br[1])
        resid = abs(math.cos(float(constant_term_phase(t, a, branch))))
        out.append(ZeroRecord("constant_term", float(t), a, resid, (float(br[0]), float(br[1]))))
    return _dedupe(out)


# ---------------------------------------------------------------------------
# theta E and zeta on the line
# ---------------------------------------------------------------------------


def z_theta(theta: ThetaCombination, t, check: float | None = 1e-7):
    """Z_theta(t) = e^{i psi(t)} theta E_{1/2+it}, real by the functional equation.

    Any 2 pi ambiguity in psi leaves e^{i psi} unchanged, so the principal
    decomposition is enough here.
    """
    arr = np.asarray(t, dtype=float)
    val = np.exp(1j * np.asarray(psi_decomposition(arr))) * np.asarray(theta_coefficient(theta, 0.5 + 1j * arr))
    if check is not None:
        scale = np.maximum(1.0, np.abs(val))
        if np.any(np.abs(val.imag) > check * scale):
            raise RealnessError(f"Z_theta has imaginary part {np.max(np.abs(val.imag)):.3e}")
    re = val.real
    return float(re) if re.ndim == 0 else re


def theta_line_zeros(theta: ThetaCombination, t_lo: float, t_hi: float, refine: int = 1) -> list[ZeroRecord]:
    """Zeros of Z_theta in [t_lo, t_hi] by sign change on steps pi/(4 refine log t).

    Combinations such as zeta(s) L(s, chi) can have zeros from the two factors
    much closer than the mean gap; local dips of |Z_theta| are probed for those.
    """
    if not 0 < t_lo < t_hi:
        raise DomainError("need 0 < t_lo < t_hi")
    grid = scan_grid(t_lo, t_hi, refine)
    vals = z_theta(theta, grid)
    recs = _sign_change_zeros(lambda t: z_theta(theta, t, None), grid, vals, "theta_e", dips=True)
    _warn_if_dense(recs, "theta_line_zeros")
    return recs


def riemann_siegel_theta(t):
    """Im log Gamma(1/4 + it/2) - (t/2) log pi."""
    arr = np.asarray(t, dtype=float)
    val = np.asarray(log_gamma(0.25 + 0.5j * arr)).imag - 0.5 * arr * math.log(math.pi)
    return float(val) if val.ndim == 0 else val


def hardy_z(t):
    arr = np.asarray(t, dtype=float)
    val = (np.exp(1j * np.asarray(riemann_siegel_theta(arr))) * np.asarray(riemann_zeta(0.5 + 1j * arr))).real
    return float(val) if val.ndim == 0 else val


def zeta_zeros(t_lo: float, t_hi: float, refine: int = 1) -> list[ZeroRecord]:
    """Zeros of zeta on the critical line in [t_lo, t_hi] (t_hi <= 200)."""
    if not 0 < t_lo < t_hi:
        raise DomainError("need 0 < t_lo < t_hi")
    if t_hi > 200:
        raise DomainError("zeta_zeros is limited to t <= 200")
    grid = scan_grid(t_lo, t_hi, refine)
    recs = _sign_change_zeros(hardy_z, grid, hardy_z(grid), "zeta", dips=True)
    _warn_if_dense(recs, "zeta_zeros")
    return recs


# ---------------------------------------------------------------------------
# J and the eigenvalue condition
# ---------------------------------------------------------------------------


def j_derivative(theta: ThetaCombination, tau: float, q: QuadratureSpec | None = None, h: float = 1e-3) -> float:
    return (j_online(theta, tau + h, q) - j_online(theta, tau - h, q)) / (2 * h)


def j_zeros(theta: ThetaCombination, t_lo: float, t_hi: float, q: QuadratureSpec | None = None) -> list[ZeroRecord]:
    """Sign changes of tau -> J_theta(1/2 + i tau)."""
    if not 0 < t_lo < t_hi:
        raise DomainError("need 0 < t_lo < t_hi")
    q = q or QuadratureSpec()
    grid = scan_grid(t_lo, t_hi)
    f = lambda tau: j_online(theta, tau, q)
    vals = np.array([f(x) for x in grid])
    return _sign_change_zeros(f, grid, vals, "j_fn", xtol=1e-11)


def eigen_condition(theta: ThetaCombination, a: float, tau: float, q: QuadratureSpec | None = None, branch: PhaseBranch | None = None) -> float:
    """C(tau) = cos(phi) J(tau) + sin(phi) |theta E_{1/2+i tau}|^2 / (4 tau)."""
    branch = branch or default_branch(tau + 1)
    phi = float(constant_term_phase(tau, a, branch))
    n = abs(complex(theta_coefficient(theta, complex(0.5, tau)))) ** 2
    return math.cos(phi) * j_online(theta, tau, q) + math.sin(phi) * n / (4 * tau)


def tan_form_gap(theta: ThetaCombination, a: float, tau: float, q: QuadratureSpec | None = None, branch: PhaseBranch | None = None) -> float:
    """tan(phi) - R with R = -4 tau J / |theta E|^2.

    At roots of the eigenvalue condition this vanishes: dividing C = 0 by
    cos(phi) |theta E|^2/(4 tau) gives tan(phi) = -4 tau J/|theta E|^2.
    """
    branch = branch or default_branch(tau + 1)
    phi = float(constant_term_phase(tau, a, branch))
    n = abs(complex(theta_coefficient(theta, complex(0.5, tau)))) ** 2
    return math.tan(phi) + 4 * tau * j_online(theta, tau, q) / n


def adjust_cutoff(theta: ThetaCombination, a: float, t_lo: float, t_hi: float, branch: PhaseBranch | None = None,
                  threshold: float = 1e-6, max_shift: float = 1e-3, tries: int = 11) -> float:
    """Smallest a' in a + [0, max_shift] (on a uniform ladder) with
    |Z_theta| > threshold at every constant-term zero for a'."""
    for k in range(tries):
        a_try = a + max_shift * k / (tries - 1)
        zs = constant_term_zeros(a_try, t_lo, t_hi, branch)
        if not zs or np.min(np.abs(z_theta(theta, [z.t for z in zs], None))) > threshold:
            return a_try
    raise DomainError("no admissible cut-off within the perturbation range")


def _interval_roots(f, lo: float, hi: float, n_sub: int, flo: float, fhi: float):
    xs = np.linspace(lo, hi, n_sub + 2)
    vals = np.empty(xs.size)
    vals[0], vals[-1] = flo, fhi
    vals[1:-1] = [f(x) for x in xs[1:-1]]
    roots = []
    for i in range(xs.size - 1):
        if vals[i] == 0 or np.sign(vals[i]) != np.sign(vals[i + 1]):
            roots.append((xs[i], xs[i + 1], vals[i], vals[i + 1]))
    return roots


def eigenvalue_parameters(theta: ThetaCombination, a: float, t_lo: float, t_hi: float,
                          q: QuadratureSpec | None = None, branch: PhaseBranch | None = None,
                          n_sub: int = 12, strict: bool = True) -> list[ZeroRecord]:
    """Roots of the eigenvalue condition, one expected in each open interval
    between consecutive constant-term zeros inside [t_lo, t_hi].

    With ``strict`` an interval holding other than one root raises; the
    interleaving check in the analysis module collects them instead.
    """
    if a <= theta.max_height():
        raise DomainError("a must lie above every Heegner point of theta")
    q = q or QuadratureSpec()
    branch = _branch_for(t_hi, branch)
    cts = constant_term_zeros(a, t_lo, t_hi, branch)
    out = []
    for z0, z1 in zip(cts, cts[1:]):
        roots = eigen_roots_between(theta, a, z0.t, z1.t, q, branch, n_sub)
        if strict and len(roots) != 1:
            raise DomainError(f"interleaving violation: {len(roots)} roots in ({z0.t}, {z1.t})")
        out.extend(roots)
    return out


def eigen_roots_between(theta: ThetaCombination, a: float, lo: float, hi: float,
                        q: QuadratureSpec | None = None, branch: PhaseBranch | None = None,
                        n_sub: int = 12) -> list[ZeroRecord]:
    """Roots of the eigenvalue condition strictly between lo and hi."""
    q = q or QuadratureSpec()
    branch = branch or default_branch(hi + 1)
    f = lambda tau: eigen_condition(theta, a, tau, q, branch)
    width = hi - lo
    inner_lo, inner_hi = lo + 1e-9 * width, hi - 1e-9 * width
    out = []
    for x0, x1, v0, v1 in _interval_roots(f, inner_lo, inner_hi, n_sub, f(inner_lo), f(inner_hi)):
        t, br = _refine(f, x0, x1, v0, v1, 1e-11)
        out.append(ZeroRecord("eigenvalue", float(t), a, float(abs(f(t))), (float(br[0]), float(br[1]))))
    return _dedupe(out)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

CSV_FIELDS = ("kind", "t", "a", "residual", "bracket_lo", "bracket_hi")


def _fmt(x) -> str:
    return "" if x is None else f"{x:.15g}"


def records_to_csv(records: Iterable[ZeroRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow([r.kind, _fmt(r.t), _fmt(r.a), _fmt(r.residual), _fmt(r.bracket[0]), _fmt(r.bracket[1])])
    return buf.getvalue()


def records_from_csv(text: str) -> list[ZeroRecord]:
    rows = csv.DictReader(io.StringIO(text))
    if tuple(rows.fieldnames or ()) != CSV_FIELDS:
        raise DomainError("unexpected CSV header")
    return [
        ZeroRecord(
            row["kind"],
            float(row["t"]),
            float(row["a"]) if row["a"] else None,
            float(row["residual"]),
            (float(row["bracket_lo"]), float(row["bracket_hi"])),
        )
        for row in rows
    ]
