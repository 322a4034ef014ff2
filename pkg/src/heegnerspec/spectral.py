"""Pairings of the resolvent solutions with eta_a and theta, in closed form and
as critical-line quadratures, plus the subtracted integral J and the
determinant objects F and G.

All line integrals have the shape

    (1/4 pi i) int_{Re s = 1/2} A(s) B(s) ds / (lambda_s - lambda_w)
        = (1/4 pi) int A B dt / (t^2 + (w - 1/2)^2),

with lambda_s = s(1 - s) and s = 1/2 + it.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import CacheError, DomainError, PoleError, QuadratureError, RealnessError
from .heegner import UNIT_FACTOR, ThetaCombination, theta_coefficient, theta_one
from .specialfns import default_cache_dir, kronecker_chi, psi_decomposition, scattering_c

__all__ = [
    "AREA",
    "LAMBDA_ONE",
    "QuadratureSpec",
    "PairingResult",
    "line_samples",
    "kernel_pairing",
    "eta_v_closed",
    "eta_v_quad",
    "theta_v_closed",
    "theta_v_quad",
    "theta_v_single",
    "heegner_correction",
    "rd_term",
    "rd_term_sinh",
    "rd_term_half_exponent",
    "eta_u_quad",
    "theta_u",
    "j_subtracted",
    "j_online",
    "theta_u_online_limit",
    "determinant_FG",
    "determinant_from_pairings",
    "local_l2_mass",
]

AREA = math.pi / 3  # <1, 1>, hyperbolic area of the modular surface
LAMBDA_ONE = 0.0  # eigenvalue of the constant function

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def lam(s):
    return s * (1 - s)


@dataclass(frozen=True)
class QuadratureSpec:
    t_max: float = 400.0
    nodes_per_unit: int = 64
    delta: float = 0.05
    tail_mode: str = "inverse_power_fit"

    def __post_init__(self):
        if self.t_max <= 0 or self.delta <= 0:
            raise DomainError("t_max and delta must be positive")
        if self.nodes_per_unit < 16:
            raise DomainError("nodes_per_unit must be at least 16")
        if self.tail_mode not in ("none", "inverse_power_fit"):
            raise DomainError(f"unknown tail mode {self.tail_mode!r}")

    @property
    def panel(self) -> float:
        return 16.0 / self.nodes_per_unit


@dataclass(frozen=True)
class PairingResult:
    value: complex
    tail_estimate: float
    nodes_used: int


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _BaseGrid:
    edges: np.ndarray  # symmetric panel edges on [-T, T]
    t: np.ndarray  # 16 Gauss-Legendre nodes per panel, exactly mirror-symmetric
    wts: np.ndarray

    @property
    def positive(self) -> np.ndarray:
        return self.t[self.t.size // 2:]


@lru_cache(maxsize=8)
def _base_grid(t_max: float, panel: float) -> _BaseGrid:
    n = int(math.ceil(t_max / panel))
    pos = panel * np.arange(n + 1)
    pos[-1] = t_max
    lo, hi = pos[:-1], pos[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    tp = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    wp = (half[:, None] * _GL_W[None, :]).ravel()
    edges = np.concatenate([-pos[:0:-1], pos])
    return _BaseGrid(edges, np.concatenate([-tp[::-1], tp]), np.concatenate([wp[::-1], wp]))


@dataclass(frozen=True)
class _Grid:
    t: np.ndarray
    wts: np.ndarray
    base_idx: np.ndarray  # index into the base nodes, or -1 for a fresh node
    base: _BaseGrid


def _graded(center: float, eps: float, reach: float) -> list[float]:
    pts = [center]
    r = eps
    while r < reach:
        pts += [center - r, center + r]
        r *= 2
    return pts


def _panel_nodes(lo: np.ndarray, hi: np.ndarray):
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel(), (half[:, None] * _GL_W[None, :]).ravel()


def _grid(q: QuadratureSpec, centers, eps: float) -> _Grid:
    """Base panels, with those within 2 panel widths of a centre replaced by
    panels graded geometrically (eps, 2 eps, 4 eps, ...) towards the centre."""
    base = _base_grid(q.t_max, q.panel)
    E = base.edges
    n_pan = E.size - 1
    reach = 2 * q.panel
    removed = np.zeros(n_pan, dtype=bool)
    extra = []
    for c in centers:
        if abs(c) >= q.t_max - reach:
            continue
        removed |= (E[1:] > c - reach) & (E[:-1] < c + reach)
        extra += _graded(c, eps, reach)
    if not removed.any():
        return _Grid(base.t, base.wts, np.arange(base.t.size), base)
    extra = np.array(extra)
    ts, ws, idx = [], [], []
    j = 0
    while j < n_pan:
        if not removed[j]:
            k = j
            while k < n_pan and not removed[k]:
                k += 1
            sl = slice(16 * j, 16 * k)
            ts.append(base.t[sl])
            ws.append(base.wts[sl])
            idx.append(np.arange(16 * j, 16 * k))
        else:
            k = j
            while k < n_pan and removed[k]:
                k += 1
            lo, hi = E[j], E[k]
            inner = extra[(extra > lo) & (extra < hi)]
            pts = np.unique(np.concatenate([[lo, hi], inner]))
            tt, ww = _panel_nodes(pts[:-1], pts[1:])
            ts.append(tt)
            ws.append(ww)
            idx.append(np.full(tt.size, -1))
        j = k
    return _Grid(np.concatenate(ts), np.concatenate(ws), np.concatenate(idx), base)


def _smoothstep(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        f1 = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1 - x, 1.0)), 0.0)
    return f0 / (f0 + f1)


def _bump(x: np.ndarray) -> np.ndarray:
    """Smooth weight supported on (0, 1)."""
    inside = (x > 0) & (x < 1)
    xc = np.where(inside, x, 0.5)
    return np.where(inside, np.exp(-1.0 / (xc * (1 - xc))), 0.0)


def _mean_fit(tt: np.ndarray, dens: np.ndarray, wts: np.ndarray, lo: float, hi: float, ref: float):
    """Smoothly weighted least squares of dens ~ alpha + beta log(t/ref) on [lo, hi]."""
    omega = wts * _bump((tt - lo) / (hi - lo))
    x = np.log(tt / ref)
    basis = np.stack([np.ones_like(x), x], axis=1)
    gram = basis.T @ (omega[:, None] * basis)
    rhs = basis.T @ (omega * dens)
    return np.linalg.solve(gram, rhs)


def _far_tail(coef, T: float, b2: complex) -> complex:
    # int_T^inf (alpha + beta log(t/T)) (1/t^2 - b^2/t^4) dt
    alpha, beta = coef
    return alpha / T + beta / T - b2 * (alpha / (3 * T**3) + beta / (9 * T**3))


def _integrate(values: np.ndarray, t: np.ndarray, wts: np.ndarray, q: QuadratureSpec, b2: complex):
    """Integral over the whole line from samples on [-T, T]; returns (value, tail_estimate).

    With tail_mode="none" this is the plain truncated sum.  Otherwise the
    integrand g is tapered smoothly to zero over T/2 < |t| < T, which leaves
    oscillating parts with a negligible truncation error.  The mean of the
    density g (t^2 + b^2) is modelled as alpha + beta log t by a smoothly
    weighted fit over [T/8, T], and that model supplies the part of the
    integral removed by the taper.  The estimate is the disagreement with a
    fit over [T/4, T].
    """
    if q.tail_mode == "none":
        return np.dot(values, wts), 0.0
    T = q.t_max
    at = np.abs(t)
    phi = _smoothstep((T - at) / (T / 2))
    total = np.dot(values * phi, wts)
    spread = 0.0
    for side in (1.0, -1.0):
        mask = side * t > T / 8
        tt, gv, ww = at[mask], values[mask], wts[mask]
        dens = gv * (tt * tt + b2)
        sel = tt >= T / 2
        weight = ((1.0 - phi[mask]) / (tt * tt + b2) * ww)[sel]
        preds = []
        for lo in (T / 8, T / 4):
            coef = _mean_fit(tt, dens, ww, lo, T, T)
            model = coef[0] + coef[1] * np.log(tt[sel] / T)
            preds.append(np.dot(model, weight) + _far_tail(coef, T, b2))
        total += preds[0]
        spread += abs(preds[0] - preds[1])
    if not np.isfinite(total):
        raise QuadratureError("tail model did not converge")
    return total, float(spread)


# ---------------------------------------------------------------------------
# Line samples with an in-memory memo and an on-disk cache for theta E
# ---------------------------------------------------------------------------

_MEMO: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
_MEMO_SIZE = 64
_THCF_MAGIC = b"THCF0001"


def _memo(key, compute):
    hit = _MEMO.get(key)
    if hit is not None:
        _MEMO.move_to_end(key)
        return hit
    val = compute()
    _MEMO[key] = val
    if len(_MEMO) > _MEMO_SIZE:
        _MEMO.popitem(last=False)
    return val


def _tkey(t: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(t).tobytes()).hexdigest()


def _thcf_path(cache_dir: Path, theta: ThetaCombination, t: np.ndarray) -> Path:
    tag = hashlib.sha1((theta.key() + _tkey(t)).encode()).hexdigest()[:20]
    return cache_dir / f"thcf_{tag}.bin"


def save_theta_samples(path: Path, theta: ThetaCombination, t: np.ndarray, vals: np.ndarray) -> None:
    header = json.dumps({"theta": theta.key(), "grid": _tkey(t), "count": int(t.size)}).encode()
    body = np.empty(2 * vals.size, dtype="<f8")
    body[0::2], body[1::2] = vals.real, vals.imag
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_THCF_MAGIC + struct.pack("<I", len(header)) + header + body.tobytes())
    tmp.replace(path)


def load_theta_samples(path: Path, theta: ThetaCombination | None = None, t: np.ndarray | None = None) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:8] != _THCF_MAGIC:
        raise CacheError(f"{path}: bad magic header")
    (hlen,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12:12 + hlen])
    body = np.frombuffer(data[12 + hlen:], dtype="<f8")
    if body.size != 2 * header["count"]:
        raise CacheError(f"{path}: truncated sample table")
    if theta is not None and header["theta"] != theta.key():
        raise CacheError(f"{path}: cached for a different theta")
    if t is not None and header["grid"] != _tkey(t):
        raise CacheError(f"{path}: cached for a different grid")
    return body[0::2] + 1j * body[1::2]


class _Settings:
    cache_dir: Path | None = None
    disk_cache: bool = True


settings = _Settings()


def _base_samples(tag: tuple, base: _BaseGrid, f_pos: Callable, theta: ThetaCombination | None = None) -> np.ndarray:
    """f_pos on the positive base nodes, memoised; theta E samples also go to disk."""
    tp = base.positive

    def compute():
        path = None
        if theta is not None and settings.disk_cache:
            path = _thcf_path(settings.cache_dir or default_cache_dir(), theta, tp)
            if path.exists():
                try:
                    return load_theta_samples(path, theta, tp)
                except CacheError:
                    pass
        vals = np.asarray(f_pos(tp))
        if path is not None:
            try:
                save_theta_samples(path, theta, tp, vals)
            except OSError:
                pass
        return vals

    return _memo(tag + (_tkey(tp),), compute)


def _on_grid(grid: _Grid, tag: tuple, f_pos: Callable, sym: Callable, theta=None) -> np.ndarray:
    """Samples of a function known on t > 0 and extended by ``sym`` to t < 0."""
    vals_pos = _base_samples(tag, grid.base, f_pos, theta)
    half = grid.base.t.size // 2
    out = np.empty(grid.t.size, dtype=vals_pos.dtype)
    j = grid.base_idx
    m = j >= 0
    jb = j[m]
    neg = jb < half
    picked = vals_pos[np.where(neg, half - 1 - jb, jb - half)]
    out[m] = np.where(neg, sym(picked), picked)
    fresh = ~m
    if fresh.any():
        tf = grid.t[fresh]
        vf = np.asarray(f_pos(np.abs(tf)), dtype=vals_pos.dtype)
        out[fresh] = np.where(tf < 0, sym(vf), vf)
    return out


def _theta_pos(theta: ThetaCombination) -> Callable:
    return lambda tp: np.asarray(theta_coefficient(theta, 0.5 + 1j * tp), dtype=complex)


def theta_on_grid(theta: ThetaCombination, grid: _Grid) -> np.ndarray:
    return _on_grid(grid, ("thetaE", theta.key()), _theta_pos(theta), np.conj, theta)


def psi_on_grid(grid: _Grid) -> np.ndarray:
    f = lambda tp: np.asarray(psi_decomposition(tp), dtype=float)
    return _on_grid(grid, ("psi",), f, np.negative)


def line_samples(theta: ThetaCombination, t: np.ndarray) -> np.ndarray:
    """theta E_{1/2 + it} at real t, using conj-symmetry for negative t."""
    t = np.asarray(t, dtype=float)
    vals = np.asarray(theta_coefficient(theta, 0.5 + 1j * np.abs(t)), dtype=complex)
    return np.where(t < 0, np.conj(vals), vals)


def line_c(t: np.ndarray) -> np.ndarray:
    """c_{1/2 + it} = exp(-2 i psi(t))."""
    t = np.asarray(t, dtype=float)
    return np.exp(-2j * np.sign(t) * np.asarray(psi_decomposition(np.abs(t))))


# ---------------------------------------------------------------------------
# Generic pairing
# ---------------------------------------------------------------------------


def _check_raw(w: complex, q: QuadratureSpec) -> None:
    if w.real <= 0.5:
        raise DomainError("raw pairings need Re w > 1/2")
    if w.imag == 0 and w.real <= 1:
        raise DomainError("w must avoid the segment (1/2, 1]")
    if w.real - 0.5 <= q.delta:
        raise QuadratureError("w is within delta of the critical line: use the subtracted form")


def _pairing_from_product(product: Callable, const_term: complex, w: complex, q: QuadratureSpec, principal=None):
    """``product`` maps a grid to samples of A B.  ``principal`` is an optional
    (P, exact) pair: P(t) is subtracted from the product and ``exact`` (its
    integral against the kernel) added back."""
    b2 = (w - 0.5) ** 2
    grid = _grid(q, (w.imag, -w.imag), w.real - 0.5)
    t, wts = grid.t, grid.wts
    prod = np.asarray(product(grid))
    extra = 0j
    if principal is not None:
        p_fn, extra = principal
        prod = prod - p_fn(t)
    integral, tail = _integrate(prod / (t * t + b2), t, wts, q, b2)
    value = const_term / (LAMBDA_ONE - lam(w)) + (integral + extra) / (4 * math.pi)
    return PairingResult(complex(value), tail / (4 * math.pi), int(t.size))


@lru_cache(maxsize=None)
def _dirichlet_coeffs(d: int, n_max: int) -> tuple[float, ...]:
    """Coefficients of zeta(s) L(s, chi_d) / zeta(2s), n = 1..n_max."""
    n_max = max(n_max, 1)
    zl = np.zeros(n_max + 1)
    for k in range(1, n_max + 1):
        zl[k::k] += kronecker_chi(d, k)
    mob = np.zeros(n_max + 1)
    mob[1] = 1
    for k in range(2, n_max + 1):  # Moebius by sieve
        mob[k] = -sum(mob[j] for j in range(1, k) if k % j == 0)
    out = np.zeros(n_max + 1)
    m = 1
    while m * m <= n_max:
        out[m * m::m * m] += mob[m] * zl[1:n_max // (m * m) + 1]
        m += 1
    return tuple(out[1:])


def _slow_components(theta: ThetaCombination, a: float, w: complex, both: bool, cutoff: float = 0.5):
    """Slowly oscillating part of a^{1-s} theta E_s (+ a^s theta E_{1-s} if ``both``).

    On the line, theta E_s a^{1-s} carries the almost periodic components
    b_n n^{-1/2} (sqrt|d|/2)^{1/2} a^{1/2} (sqrt|d|/(2an))^{it}.  Those with
    frequency below ``cutoff`` would defeat the taper, so they are removed
    and integrated exactly via int e^{i nu t}/(t^2 + b^2) dt = pi e^{-|nu| b}/b.
    """
    b = complex(np.sqrt(complex((w - 0.5) ** 2)))
    if b.real < 0:
        b = -b
    comps = []
    for d, nu_d in theta.terms:
        scale = nu_d * UNIT_FACTOR.get(d, 1.0) * math.sqrt(math.sqrt(-d) / 2 * a)
        n_hi = int(math.sqrt(-d) / (2 * a) * math.exp(cutoff)) + 1
        coeffs = _dirichlet_coeffs(d, n_hi)
        for n in range(1, n_hi + 1):
            freq = math.log(math.sqrt(-d) / (2 * a * n))
            if abs(freq) < cutoff and coeffs[n - 1] != 0:
                comps.append((scale * coeffs[n - 1] / math.sqrt(n), freq))
    if not comps:
        return None

    def p_fn(t):
        out = np.zeros(np.shape(t), dtype=complex)
        for amp, freq in comps:
            out += amp * np.exp(1j * freq * t)
            if both:
                out += amp * np.exp(-1j * freq * t)
        return out

    mult = 2 if both else 1
    exact = sum(mult * amp * math.pi * np.exp(-abs(freq) * b) / b for amp, freq in comps)
    return p_fn, complex(exact)


def kernel_pairing(coefA: Callable, coefB: Callable, const_term: complex, w: complex, q: QuadratureSpec | None = None) -> PairingResult:
    """const/(lambda_1 - lambda_w) + (1/4 pi i) int A(s) B(s) ds/(lambda_s - lambda_w).

    ``coefA`` and ``coefB`` take an array of ordinates t and return A and B at
    s = 1/2 + it.
    """
    q = q or QuadratureSpec()
    w = complex(w)
    _check_raw(w, q)
    return _pairing_from_product(lambda g: np.asarray(coefA(g.t)) * np.asarray(coefB(g.t)), const_term, w, q)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def eta_v_closed(w: complex, a: float) -> complex:
    """eta_a(v_{w,a}) = a^{1-w}(a^w + c_w a^{1-w})/(2w - 1)."""
    w = complex(w)
    if w == 0.5:
        raise PoleError("eta_a(v) has a pole at w = 1/2")
    la = math.log(a)
    c = scattering_c(w)
    return complex(np.exp((1 - w) * la) * (np.exp(w * la) + c * np.exp((1 - w) * la)) / (2 * w - 1))


def heegner_correction(theta: ThetaCombination, w: complex, a: float) -> complex:
    """sum over Heegner points with y > a of nu (a^{1-w} y^w - a^w y^{1-w})."""
    w = complex(w)
    total = 0j
    for _, y, nu in theta.heegner_points():
        if abs(y - a) < 1e-12:
            raise DomainError("a coincides with the height of a Heegner point")
        if y > a:
            total += nu * (a ** (1 - w) * y**w - a**w * y ** (1 - w))
    return complex(total)


def rd_term(w: complex, a: float, y: float) -> complex:
    """a^{1-w} y^w - a^w y^{1-w}."""
    w = complex(w)
    return complex(a ** (1 - w) * y**w - a**w * y ** (1 - w))


def rd_term_sinh(w: complex, a: float, y: float) -> complex:
    """2 sqrt(a y) sinh((w - 1/2) log(y/a)), algebraically equal to rd_term."""
    return complex(2 * math.sqrt(a * y) * np.sinh((complex(w) - 0.5) * math.log(y / a)))


def rd_term_half_exponent(w: complex, a: float, y: float) -> complex:
    """2 sqrt(a y) sinh((1 - w)/2 log+(y/a)): the variant with exponent (1 - w)/2,
    kept only for numerical comparison with rd_term."""
    lp = max(math.log(y / a), 0.0)
    return complex(2 * math.sqrt(a * y) * np.sinh(0.5 * (1 - complex(w)) * lp))


def theta_v_closed(theta: ThetaCombination, w: complex, a: float) -> complex:
    """theta(v_{w,a}) = (a^{1-w} theta E_w - R_w)/(2w - 1)."""
    w = complex(w)
    if w == 0.5:
        raise PoleError("theta(v) has a pole at w = 1/2")
    r = heegner_correction(theta, w, a)
    return complex((a ** (1 - w) * theta_coefficient(theta, w) - r) / (2 * w - 1))


# ---------------------------------------------------------------------------
# Quadrature pairings
# ---------------------------------------------------------------------------


def _eta_coef(a: float, t: np.ndarray, psi: np.ndarray, reflect: bool) -> np.ndarray:
    # reflect=False: a^s + c_s a^{1-s};  reflect=True: a^{1-s} + c_{1-s} a^s
    la = math.log(a)
    sgn = -1.0 if reflect else 1.0
    s = 0.5 + 1j * sgn * t
    c = np.exp(-2j * sgn * psi)
    return np.exp(s * la) + c * np.exp((1 - s) * la)


def _eta_pair(a: float, grid: _Grid):
    psi = psi_on_grid(grid)
    return _eta_coef(a, grid.t, psi, True), _eta_coef(a, grid.t, psi, False)


def eta_v_quad(w: complex, a: float, q: QuadratureSpec | None = None) -> PairingResult:
    """eta_a(v_{w,a}) from the spectral expansion of v.

    The product of the two constant-term coefficients has mean 2a on the line;
    that part is integrated exactly.
    """
    q = q or QuadratureSpec()
    w = complex(w)
    _check_raw(w, q)
    b = complex(np.sqrt(complex((w - 0.5) ** 2)))
    b = -b if b.real < 0 else b
    mean = (lambda t: np.full(np.shape(t), 2.0 * a), 2 * a * math.pi / b)
    return _pairing_from_product(
        lambda g: np.prod(_eta_pair(a, g), axis=0), 1 / AREA, w, q, mean
    )


def theta_v_quad(theta: ThetaCombination, w: complex, a: float, q: QuadratureSpec | None = None) -> PairingResult:
    """theta(v_{w,a}) from the spectral expansion of v."""
    q = q or QuadratureSpec()
    w = complex(w)
    _check_raw(w, q)
    return _pairing_from_product(
        lambda g: _eta_coef(a, g.t, psi_on_grid(g), True) * theta_on_grid(theta, g),
        theta_one(theta) / AREA,
        w,
        q,
        _slow_components(theta, a, w, both=True),
    )


def theta_v_single(theta: ThetaCombination, w: complex, a: float, q: QuadratureSpec | None = None) -> PairingResult:
    """theta(v_{w,a}) = theta(1)/(<1,1>(lambda_1 - lambda_w)) + (1/2 pi i) int a^{1-s} theta E_s ds/(lambda_s - lambda_w)."""
    q = q or QuadratureSpec()
    w = complex(w)
    _check_raw(w, q)
    la = math.log(a)
    slow = _slow_components(theta, a, w, both=False)
    if slow is not None:
        slow = (lambda t, f=slow[0]: 2 * f(t), 2 * slow[1])
    return _pairing_from_product(
        lambda g: 2 * np.exp((0.5 - 1j * g.t) * la) * theta_on_grid(theta, g),
        theta_one(theta) / AREA,
        w,
        q,
        slow,
    )


def eta_u_quad(theta: ThetaCombination, w: complex, a: float, q: QuadratureSpec | None = None) -> PairingResult:
    """eta_a(u_{theta,w}) from the spectral expansion of u."""
    q = q or QuadratureSpec()
    w = complex(w)
    _check_raw(w, q)
    return _pairing_from_product(
        lambda g: np.conj(theta_on_grid(theta, g)) * _eta_coef(a, g.t, psi_on_grid(g), False),
        theta_one(theta) / AREA,
        w,
        q,
        _slow_components(theta, a, w, both=True),
    )


def theta_u(theta: ThetaCombination, w: complex, q: QuadratureSpec | None = None) -> PairingResult:
    """theta(u_{theta,w}) = theta(1)^2/(<1,1>(lambda_1 - lambda_w)) + (1/4 pi i) int |theta E_s|^2 ds/(lambda_s - lambda_w)."""
    q = q or QuadratureSpec()
    w = complex(w)
    _check_raw(w, q)
    h = theta_one(theta)

    return _pairing_from_product(lambda g: np.abs(theta_on_grid(theta, g)) ** 2, h * h / AREA, w, q)


def _n_value(theta: ThetaCombination, w: complex) -> complex:
    """theta E_w theta E_{1-w}."""
    return complex(theta_coefficient(theta, w) * theta_coefficient(theta, 1 - w))


def j_subtracted(theta: ThetaCombination, w: complex, q: QuadratureSpec | None = None) -> PairingResult:
    """J_w = theta(1)^2/(<1,1>(lambda_1 - lambda_w))
    + (1/4 pi i) int (N(s) - N(w)) ds/(lambda_s - lambda_w), N(s) = theta E_s theta E_{1-s}.

    The integrand has removable singularities only, so this is valid on and
    near the critical line.
    """
    q = q or QuadratureSpec()
    w = complex(w)
    if w == 0.5:
        raise PoleError("J is singular at w = 1/2")
    h = theta_one(theta)
    n_w = _n_value(theta, w)
    b2 = (w - 0.5) ** 2
    eps = max(abs(w.real - 0.5), q.delta)
    grid = _grid(q, (w.imag, -w.imag), eps)
    t, wts = grid.t, grid.wts
    n_t = np.abs(theta_on_grid(theta, grid)) ** 2
    vals = (n_t - n_w) / (t * t + b2)
    integral, tail = _integrate(vals, t, wts, q, b2)
    value = h * h / AREA / (LAMBDA_ONE - lam(w)) + integral / (4 * math.pi)
    return PairingResult(complex(value), tail / (4 * math.pi), int(t.size))


def j_online(theta: ThetaCombination, tau: float, q: QuadratureSpec | None = None, tol: float = 1e-8) -> float:
    """J at w = 1/2 + i tau, which is real."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    res = j_subtracted(theta, complex(0.5, tau), q)
    if abs(res.value.imag) > tol:
        raise RealnessError(f"J has imaginary part {res.value.imag:.3e} at tau={tau}")
    return float(res.value.real)


def theta_u_online_limit(
    theta: ThetaCombination,
    tau: float,
    q: QuadratureSpec | None = None,
    eps: tuple[float, ...] = (0.002, 0.004, 0.006, 0.008, 0.010),
) -> complex:
    """Limit of theta(u_{theta,w}) as w -> 1/2 + i tau from the right.

    Raw quadratures at w = 1/2 + e + i tau are extrapolated to e = 0 with the
    interpolating polynomial through the sample offsets.
    """
    q = q or QuadratureSpec()
    fine = QuadratureSpec(q.t_max, q.nodes_per_unit, min(eps) / 2, q.tail_mode)
    vals = np.array([theta_u(theta, complex(0.5 + e, tau), fine).value for e in eps])
    x = np.asarray(eps)
    weights = np.array([np.prod([xj / (xj - xi) for xj in x if xj != xi]) for xi in x])
    return complex(np.dot(weights, vals))


def determinant_FG(theta: ThetaCombination, a: float, w: complex, q: QuadratureSpec | None = None) -> tuple[complex, complex]:
    """F(a, w) = ct_w theta(u) - a^{1-w} (theta E_w)^2/(2w - 1) and G = F/ct_w,
    with ct_w = a^w + c_w a^{1-w}.

    Away from the line (Re w > 1/2 + delta) theta(u) comes from the raw
    quadrature.  Otherwise the subtracted form
    F = ct_w J_w + N(w)(a^w - c_w a^{1-w})/(2(2w - 1)) is used, which rests on
    theta E_w = c_w theta E_{1-w}.
    """
    q = q or QuadratureSpec()
    w = complex(w)
    if a <= theta.max_height():
        raise DomainError("a must lie above every Heegner point of theta")
    la = math.log(a)
    c = scattering_c(w)
    aw, a1w = np.exp(w * la), np.exp((1 - w) * la)
    ct = complex(aw + c * a1w)
    if w.real - 0.5 > q.delta:
        tu = theta_u(theta, w, q).value
        te = theta_coefficient(theta, w)
        f = ct * tu - a1w * te * te / (2 * w - 1)
    else:
        j = j_subtracted(theta, w, q).value
        f = ct * j + _n_value(theta, w) * (aw - c * a1w) / (2 * (2 * w - 1))
    if abs(ct) == 0:
        raise PoleError("constant term vanishes: G undefined")
    return complex(f), complex(f / ct)


def determinant_from_pairings(theta: ThetaCombination, a: float, w: complex, q: QuadratureSpec | None = None) -> complex:
    """eta(v) theta(u) - eta(u) theta(v), each pairing by quadrature."""
    ev = eta_v_quad(w, a, q).value
    tu = theta_u(theta, w, q).value
    eu = eta_u_quad(theta, w, a, q).value
    tv = theta_v_quad(theta, w, a, q).value
    return complex(ev * tu - eu * tv)


def local_l2_mass(theta: ThetaCombination, tau: float, eps: float) -> float:
    """sqrt of int_{tau-eps}^{tau+eps} |theta E_{1/2+it}|^2 dt."""
    t = tau + eps * _GL_X
    vals = np.abs(np.asarray(theta_coefficient(theta, 0.5 + 1j * t))) ** 2
    return float(math.sqrt(eps * np.dot(_GL_W, vals)))
