"""Eisenstein series for SL2(Z): lattice sums, Fourier-Bessel evaluation,
constant terms, truncation and Maass-Selberg inner products."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError, PoleError
from .specialfns import (
    LOG_PI,
    PhaseBranch,
    bessel_k,
    default_branch,
    log_gamma,
    riemann_zeta,
    scattering_c,
)

__all__ = [
    "eisenstein_direct_sum",
    "eisenstein_value",
    "fourier_coefficients",
    "constant_term",
    "constant_term_derivative",
    "truncated_eisenstein",
    "reduce_to_fundamental_domain",
    "in_fundamental_domain",
    "maass_selberg",
    "maass_selberg_norm",
    "fourier_mode_count",
    "hyperbolic_laplacian_fd",
    "truncation_jump",
    "truncated_norm_2d",
]


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def in_fundamental_domain(z: complex, tol: float = 1e-12) -> bool:
    return abs(z.real) <= 0.5 + tol and abs(z) >= 1 - tol and z.imag > 0


def reduce_to_fundamental_domain(z: complex) -> complex:
    """Gamma-equivalent point in the standard fundamental domain."""
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("z must lie in the upper half-plane")
    for _ in range(1000):
        z = complex(z.real - math.floor(z.real + 0.5), z.imag)
        if abs(z) >= 1:
            return z
        z = -1 / z
    raise DomainError("reduction did not terminate")


# ---------------------------------------------------------------------------
# Lattice sum
# ---------------------------------------------------------------------------


def eisenstein_direct_sum(z: complex, s: complex, bound: int = 200) -> tuple[complex, float]:
    """(1/2) sum over coprime (c, d) with |c|, |d| <= bound of y^s/|cz + d|^{2s}.

    Returns ``(value, tail_estimate)``.  The estimate integrates the coprime
    density 6/pi^2 against |cz + d|^{-2 Re s} outside a disc inscribed in the box.
    """
    z, s = complex(z), complex(s)
    if s.real <= 1:
        raise DomainError("the lattice sum converges only for Re s > 1")
    x, y = z.real, z.imag
    log_y = math.log(y)
    total = math.exp(s.real * log_y) * complex(np.exp(1j * s.imag * log_y))
    d = np.arange(-bound, bound + 1)
    for c in range(1, bound + 1):
        dd = d[np.gcd(c, d) == 1]
        q = (c * x + dd) ** 2 + (c * y) ** 2
        total += np.sum(np.exp(s * (log_y - np.log(q))))
    # smallest eigenvalue of the form c^2|z|^2 + 2cdx + d^2
    tr, det = abs(z) ** 2 + 1, y * y
    lam = 0.5 * (tr - math.sqrt(tr * tr - 4 * det))
    sig = s.real
    tail = (3 / math.pi**2) * y**sig * lam ** (-sig) * 2 * math.pi * bound ** (2 - 2 * sig) / (2 * sig - 2)
    return complex(total), float(tail)


# ---------------------------------------------------------------------------
# Fourier-Bessel expansion
# ---------------------------------------------------------------------------


def fourier_mode_count(s: complex, y: float, target: float = 1e-9) -> int:
    """Number of non-constant modes kept at height y.

    The K-Bessel factor only starts to decay once 2 pi n y exceeds
    pi |Im s|/2, so the cutoff covers that regime as well.
    """
    base = 15 / (2 * math.pi * y) * abs(math.log(target))
    osc = (math.pi * abs(complex(s).imag) / 2 + abs(math.log(target)) + 5) / (2 * math.pi * y)
    return int(max(10, math.ceil(base), math.ceil(osc)))


@lru_cache(maxsize=4096)
def _divisor_sigma(n: int, s: complex) -> complex:
    total = 0j
    for k in range(1, math.isqrt(n) + 1):
        if n % k == 0:
            total += k ** (1 - 2 * s)
            j = n // k
            if j != k:
                total += j ** (1 - 2 * s)
    return total


@lru_cache(maxsize=65536)
def _mode_profile(s: complex, y: float, n: int) -> complex:
    """sqrt(y) n^{s-1/2} sigma_{1-2s}(n) K_{s-1/2}(2 pi n y)."""
    k = bessel_k(s - 0.5, 2 * math.pi * n * y)
    return math.sqrt(y) * complex(np.exp((s - 0.5) * math.log(n))) * _divisor_sigma(n, s) * k


def _nonconstant_scale(s: complex) -> complex:
    # 2 / xi(2s) = 2 pi^s / (Gamma(s) zeta(2s))
    return 2 * complex(np.exp(s * LOG_PI - log_gamma(s))) / riemann_zeta(2 * s)


def fourier_coefficients(s: complex, y: float, n_modes: int | None = None) -> np.ndarray:
    """Coefficients b_n(y), n = 1..N, with E_s = const + sum_n b_n(y) 2 cos(2 pi n x)."""
    s = complex(s)
    if n_modes is None:
        n_modes = fourier_mode_count(s, y)
    scale = _nonconstant_scale(s)
    y = float(y)
    return np.array([scale * _mode_profile(s, y, n) for n in range(1, n_modes + 1)])


def _check_s(s: complex) -> complex:
    s = complex(s)
    if s == 1:
        raise PoleError("E_s has a simple pole at s = 1")
    return s


def eisenstein_value(z, s: complex, n_modes: int | None = None):
    """E_s(z) from its Fourier-Bessel expansion.

    ``z`` may be a complex scalar or array; points are first moved into the
    standard fundamental domain, where y >= sqrt(3)/2.
    """
    s = _check_s(s)
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    flat = np.array([reduce_to_fundamental_domain(v) for v in arr.ravel()])
    c = scattering_c(s)
    out = np.empty(flat.shape, dtype=complex)
    ys = flat.imag
    for y in np.unique(ys):
        mask = ys == y
        coeffs = fourier_coefficients(s, y, n_modes)
        n = np.arange(1, coeffs.size + 1)
        phases = 2 * np.cos(2 * math.pi * np.outer(flat[mask].real, n))
        out[mask] = constant_term(s, y, c) + phases @ coeffs
    out = out.reshape(arr.shape)
    return complex(out) if scalar else out


def constant_term(s: complex, y, c: complex | None = None):
    """y^s + c_s y^{1-s}."""
    s = complex(s)
    c = scattering_c(s) if c is None else c
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("y must be positive")
    logy = np.log(y)
    val = np.exp(s * logy) + c * np.exp((1 - s) * logy)
    return complex(val) if val.ndim == 0 else val


def constant_term_derivative(s: complex, y: float, c: complex | None = None) -> complex:
    """d/dy (y^s + c_s y^{1-s})."""
    s = complex(s)
    c = scattering_c(s) if c is None else c
    logy = math.log(y)
    return complex(s * np.exp((s - 1) * logy) + c * (1 - s) * np.exp(-s * logy))


def truncated_eisenstein(z, s: complex, a: float, n_modes: int | None = None):
    """E_s(z) with its constant term removed where y >= a."""
    if a <= 1:
        raise DomainError("the truncation height must exceed 1")
    s = _check_s(s)
    arr = np.asarray(z, dtype=complex)
    if not all(in_fundamental_domain(v, 1e-9) for v in arr.ravel()):
        raise DomainError("truncated_eisenstein is defined on the fundamental domain only")
    val = np.asarray(eisenstein_value(arr, s, n_modes), dtype=complex)
    high = arr.imag >= a
    if np.any(high):
        val = np.where(high, val - constant_term(s, np.where(high, arr.imag, 1.0)), val)
    return complex(val) if val.ndim == 0 else val


def hyperbolic_laplacian_fd(f, z: complex, h: float = 1e-3) -> complex:
    """y^2 (f_xx + f_yy) at z on a 5-point stencil."""
    pts = np.array([z, z + h, z - h, z + 1j * h, z - 1j * h])
    v = np.asarray(f(pts))
    return z.imag**2 * (v[1] + v[2] + v[3] + v[4] - 4 * v[0]) / h**2


def truncation_jump(w: complex, a: float, h: float = 1e-3, n_x: int = 64) -> complex:
    """Strength of the point mass of (-Delta - lambda_w) acting on the x-average
    of the truncated Eisenstein series at y = a.

    The x-average at height y is sampled from truncated_eisenstein on a
    uniform x-grid.  One-sided second-order differences give d/dy just below
    and just above y = a; since -Delta = -y^2 d^2/dy^2 on x-independent
    functions, the coefficient of delta(y - a) (density in dy) is
    -a^2 (slope_above - slope_below).
    """
    xs = (np.arange(n_x) + 0.5) / n_x - 0.5

    def avg(y):
        return complex(np.mean(truncated_eisenstein(xs + 1j * y, w, a)))

    below = (3 * avg(a - 1e-12) - 4 * avg(a - h) + avg(a - 2 * h)) / (2 * h)
    above = (-3 * avg(a + 1e-12) + 4 * avg(a + h) - avg(a + 2 * h)) / (2 * h)
    return -a * a * (above - below)


# ---------------------------------------------------------------------------
# Maass-Selberg
# ---------------------------------------------------------------------------


def maass_selberg(s: complex, r: complex, a: float) -> complex:
    """Four-term closed form of <trunc_a E_s, trunc_a E_r>."""
    s, r = complex(s), complex(r)
    rb = r.conjugate()
    dens = [s + rb - 1, rb - s, s - rb, 1 - s - rb]
    if min(abs(d) for d in dens) < 1e-14:
        raise PoleError("degenerate exponent: use maass_selberg_norm for s = r on the line")
    cs, crb = scattering_c(s), scattering_c(rb)
    la = math.log(a)
    terms = [
        np.exp(dens[0] * la) / dens[0],
        cs * np.exp(dens[1] * la) / dens[1],
        crb * np.exp(dens[2] * la) / dens[2],
        cs * crb * np.exp(dens[3] * la) / dens[3],
    ]
    return complex(sum(terms))


def maass_selberg_norm(t: float, a: float, branch: PhaseBranch | None = None) -> float:
    """Limit of the Maass-Selberg form at s = r = 1/2 + it where the constant
    term vanishes at height a: 2 log a + 2 psi'(t)."""
    branch = branch or default_branch(t + 1)
    return 2 * math.log(a) + 2 * branch.psi_prime(t)


_GL16 = np.polynomial.legendre.leggauss(16)


def _gl_panels(lo: float, hi: float, width: float):
    n = max(1, math.ceil((hi - lo) / width))
    edges = np.linspace(lo, hi, n + 1)
    x, w = _GL16
    mid, half = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def truncated_norm_2d(s: complex, a: float, tol: float = 1e-10, y_extra: float = 6.0) -> float:
    """<trunc_a E_s, trunc_a E_s> by direct quadrature over the fundamental domain.

    Below y = 1 the region between the unit circle and y = 1 is integrated
    with x outer and y inner.  From y = 1 up, Parseval in x over the full
    strip reduces the x-integral to |constant term|^2 (only for y < a) plus
    2 sum |b_n(y)|^2.  Above a + y_extra the non-constant terms are below
    exp(-2 pi y_extra).
    """
    s = _check_s(s)
    if a <= 1:
        raise DomainError("the truncation height must exceed 1")
    c = scattering_c(s)

    def n_modes(y):
        return max(8, math.ceil((abs(math.log(tol)) + math.pi * abs(s.imag) / 2 + 5) / (2 * math.pi * y)))

    total = 0.0
    # lower region: 0 <= x <= 1/2, sqrt(1 - x^2) <= y <= 1, doubled by symmetry
    xs, wx = _gl_panels(0.0, 0.5, 0.5)
    gy, gw = _GL16
    for x, w_x in zip(xs, wx):
        y0 = math.sqrt(1 - x * x)
        ys = y0 + (1 - y0) * (gy + 1) / 2
        wy = (1 - y0) / 2 * gw
        vals = np.array([eisenstein_value(complex(x, y), s, n_modes(y)) for y in ys])
        total += 2 * w_x * float(np.sum(wy * np.abs(vals) ** 2 / ys**2))
    # upper region by Parseval
    for lo, hi, keep_const in ((1.0, a, True), (a, a + y_extra, False)):
        ys, wy = _gl_panels(lo, hi, 0.25)
        for y, w_y in zip(ys, wy):
            coeffs = fourier_coefficients(s, y, n_modes(y))
            dens = 2 * float(np.sum(np.abs(coeffs) ** 2))
            if keep_const:
                dens += abs(constant_term(s, y, c)) ** 2
            total += w_y * dens / y**2
    return total
