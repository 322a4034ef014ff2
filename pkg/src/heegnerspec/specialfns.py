"""Complex special functions: log Gamma, zeta, real Dirichlet L-functions, the
completed zeta function, the scattering coefficient, its phase, and K-Bessel
functions of complex order.

Everything works in double precision and accepts either scalars or numpy
arrays for the complex argument.  Scalars in give Python scalars out.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import special as sp

from .errors import BranchGapError, CacheError, DomainError, PoleError

__all__ = [
    "log_gamma",
    "hurwitz_zeta",
    "riemann_zeta",
    "is_fundamental_discriminant",
    "kronecker_chi",
    "character_table",
    "dirichlet_l",
    "xi_completed",
    "scattering_c",
    "psi_decomposition",
    "PhaseBranch",
    "default_branch",
    "psi_and_derivative",
    "bessel_k",
    "bessel_k_imag",
    "default_cache_dir",
]

LOG_PI = math.log(math.pi)

# Euler-Maclaurin correction count and the coefficients B_{2k}/(2k)!.
_EM_TERMS = 12
_EM_COEF = np.array(
    [sp.bernoulli(2 * k)[2 * k] / math.factorial(2 * k) for k in range(1, _EM_TERMS + 1)]
)
_CHUNK = 256


def _as_complex(s):
    arr = np.asarray(s, dtype=complex)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return complex(arr) if scalar else arr


def default_cache_dir() -> Path:
    """Cache directory, overridable with ``HEEGNERSPEC_CACHE``."""
    env = os.environ.get("HEEGNERSPEC_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "heegnerspec"


# ---------------------------------------------------------------------------
# Gamma and zeta
# ---------------------------------------------------------------------------


def log_gamma(s):
    """Principal branch of log Gamma (continuous off the negative real axis)."""
    arr, scalar = _as_complex(s)
    bad = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(bad):
        raise PoleError("log_gamma has poles at the non-positive integers")
    return _out(sp.loggamma(arr), scalar)


def _em_terms_needed(s: np.ndarray, alpha: float) -> int:
    # (|s + 2K| / (2 pi (N + alpha)))^(2K) stays below ~1e-15 for N ~ |s|/2.
    size = np.max(np.abs(s)) if s.size else 0.0
    return int(max(20, math.ceil(0.5 * size + 2 * _EM_TERMS - alpha)))


def _expm1_ratio(z: np.ndarray) -> np.ndarray:
    # (e^z - 1)/z, finite at z = 0
    small = np.abs(z) < 1e-8
    zz = np.where(small, 1.0, z)
    return np.where(small, 1 + z / 2, np.expm1(zz) / zz)


def _hurwitz_block(s: np.ndarray, alpha: float, regular: bool = False) -> np.ndarray:
    n_terms = _em_terms_needed(s, alpha)
    logs = np.log(np.arange(n_terms, dtype=float) + alpha)
    head = np.exp(-np.outer(s, logs)).sum(axis=1)
    x = n_terms + alpha
    logx = math.log(x)
    xs = np.exp(-s * logx)  # x^{-s}
    if regular:
        # x^{1-s}/(s-1) - 1/(s-1), which stays finite at s = 1
        pole = -logx * _expm1_ratio((1.0 - s) * logx)
    else:
        pole = x * xs / (s - 1.0)
    tail = pole + 0.5 * xs
    # k-th correction: B_2k/(2k)! * s(s+1)...(s+2k-2) * x^{-s-2k+1}
    term = s * xs / x
    for k in range(_EM_TERMS):
        tail = tail + _EM_COEF[k] * term
        term = term * (s + 2 * k + 1) * (s + 2 * k + 2) / (x * x)
    return head + tail


def hurwitz_zeta(s, alpha: float, regular: bool = False):
    """Hurwitz zeta(s, alpha) for 0 < alpha <= 1 by Euler-Maclaurin summation.

    With ``regular=True`` returns zeta(s, alpha) - 1/(s - 1), which is entire.
    """
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    arr, scalar = _as_complex(s)
    if not regular and np.any(arr == 1):
        raise PoleError("zeta(s, alpha) has a pole at s = 1")
    flat = arr.ravel()
    out = np.empty_like(flat)
    order = np.argsort(np.abs(flat))
    for start in range(0, flat.size, _CHUNK):
        idx = order[start:start + _CHUNK]
        out[idx] = _hurwitz_block(flat[idx], alpha, regular)
    return _out(out.reshape(arr.shape), scalar)


def riemann_zeta(s):
    """Riemann zeta function.  Accurate to ~1e-13 relative for moderate |s|.

    For Re s < -1/4 the Euler-Maclaurin head sum cancels badly, so those
    points go through zeta(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) zeta(1-s).
    """
    arr, scalar = _as_complex(s)
    left = (arr.real < -0.25) & (np.abs(arr.imag) < 400)
    if not np.any(left):
        return hurwitz_zeta(s, 1.0)
    out = np.asarray(hurwitz_zeta(np.where(left, 0.5, arr), 1.0), dtype=complex).copy()
    sl = arr[left]
    lf = sl * math.log(2) + (sl - 1) * LOG_PI + sp.loggamma(1 - sl)
    out[left] = np.exp(lf) * np.sin(math.pi * sl / 2) * np.asarray(hurwitz_zeta(1 - sl, 1.0))
    return _out(out, scalar)


# ---------------------------------------------------------------------------
# Characters and L-functions
# ---------------------------------------------------------------------------


def _squarefree(m: int) -> bool:
    m = abs(m)
    p = 2
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        p += 1
    return True


def is_fundamental_discriminant(d: int) -> bool:
    if d == 1 or d == 0:
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _jacobi(a: int, n: int) -> int:
    # n odd and positive
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _kronecker(d: int, n: int) -> int:
    if n == 0:
        return 1 if abs(d) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if d < 0:
            sign = -1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            sign = -sign
    if n == 1:
        return sign
    return sign * _jacobi(d, n)


def kronecker_chi(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for a fundamental discriminant d."""
    if not is_fundamental_discriminant(d):
        raise DomainError(f"{d} is not a fundamental discriminant")
    return _kronecker(d, n)


@lru_cache(maxsize=None)
def character_table(d: int) -> tuple[int, ...]:
    """Values chi_d(a) for a = 1..|d|."""
    if not is_fundamental_discriminant(d):
        raise DomainError(f"{d} is not a fundamental discriminant")
    q = abs(d)
    return tuple(_kronecker(d, a) for a in range(1, q + 1))


def dirichlet_l(s, d: int):
    """L(s, chi_d) = |d|^{-s} sum_a chi_d(a) zeta(s, a/|d|)."""
    table = character_table(d)
    q = abs(d)
    arr, scalar = _as_complex(s)
    if q == 1:
        return _out(np.asarray(riemann_zeta(arr)), scalar)
    # sum(chi) = 0, so the 1/(s-1) parts cancel and L is entire
    total = np.zeros(arr.shape, dtype=complex)
    for a, chi in enumerate(table, start=1):
        if chi:
            total = total + chi * np.asarray(hurwitz_zeta(arr, a / q, regular=True))
    return _out(total * np.exp(-arr * math.log(q)), scalar)


# ---------------------------------------------------------------------------
# Completed zeta, scattering coefficient, phase
# ---------------------------------------------------------------------------


def xi_completed(s, reflect: bool = True):
    """xi(s) = pi^{-s/2} Gamma(s/2) zeta(s), without the s(s-1)/2 factor.

    With ``reflect`` (the default) points with Re s < 1/2 are evaluated as
    xi(1 - s), which also removes the removable Gamma-pole/zeta-zero pairs at
    the negative even integers.
    """
    arr, scalar = _as_complex(s)
    if np.any((arr == 0) | (arr == 1)):
        raise PoleError("xi has poles at s = 0 and s = 1")
    if reflect:
        arr = np.where(arr.real < 0.5, 1 - arr, arr)
    val = np.exp(-0.5 * arr * LOG_PI + np.asarray(log_gamma(arr / 2))) * np.asarray(riemann_zeta(arr))
    return _out(val, scalar)


def scattering_c(s, form: str = "gamma"):
    """Scattering coefficient c_s.

    ``form="gamma"``: sqrt(pi) Gamma(s - 1/2) zeta(2s - 1) / (Gamma(s) zeta(2s)).
    ``form="xi"``: xi(2 - 2s) / xi(2s), both evaluated without reflection.
    """
    arr, scalar = _as_complex(s)
    if np.any(arr == 1):
        raise PoleError("c_s has a simple pole at s = 1 (residue 3/pi)")
    half = arr == 0.5
    work = np.where(half, 0.75, arr)
    if form == "gamma":
        lg = 0.5 * LOG_PI + np.asarray(log_gamma(work - 0.5)) - np.asarray(log_gamma(work))
        val = np.exp(lg) * np.asarray(riemann_zeta(2 * work - 1)) / np.asarray(riemann_zeta(2 * work))
    elif form == "xi":
        val = np.asarray(xi_completed(2 - 2 * work, reflect=False)) / np.asarray(
            xi_completed(2 * work, reflect=False)
        )
    else:
        raise DomainError(f"unknown form {form!r}")
    val = np.where(half, -1.0 + 0j, val)
    return _out(val, scalar)


def psi_decomposition(t):
    """-t log(pi) + Im log Gamma(1/2 + it) + Arg zeta(1 + 2it), no unwrapping."""
    t = np.asarray(t, dtype=float)
    val = -t * LOG_PI + np.asarray(sp.loggamma(0.5 + 1j * t)).imag
    val = val + np.angle(np.asarray(riemann_zeta(1 + 2j * t)))
    return float(val) if val.ndim == 0 else val


_BRANCH_MAGIC = b"PSIBR001"


@dataclass(frozen=True, eq=False)
class PhaseBranch:
    """Anchored continuous branch of psi(t) = arg xi(1 + 2it).

    ``t`` and ``psi`` hold the anchors.  Consecutive anchors differ by less
    than pi/2 in psi, so any point between them lifts unambiguously.
    """

    t: np.ndarray
    psi: np.ndarray
    step: float

    def __post_init__(self):
        if self.t.size < 2 or np.any(np.diff(self.t) <= 0) or self.t[0] <= 0:
            raise BranchGapError("anchors must be positive and strictly increasing")
        if np.any(np.abs(np.diff(self.psi)) >= math.pi / 2):
            raise BranchGapError("consecutive anchors differ by pi/2 or more")

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    @classmethod
    def build(cls, t_max: float, t_min: float = 0.5, step: float = 0.05) -> "PhaseBranch":
        count = int(round((t_max - t_min) / step)) + 1
        ts = t_min + step * np.arange(count)
        zarg = np.unwrap(np.angle(np.asarray(riemann_zeta(1 + 2j * ts))))
        psi = -ts * LOG_PI + sp.loggamma(0.5 + 1j * ts).imag + zarg
        return cls(ts, psi, step)

    def covers(self, t_hi: float) -> bool:
        return self.t_max >= t_hi - 1e-9

    def psi_at(self, t):
        """Continuous psi(t), lifted onto the anchor interpolation."""
        arr = np.asarray(t, dtype=float)
        slack = 4 * self.step
        if np.any(arr < self.t_min - slack) or np.any(arr > self.t_max + slack):
            raise BranchGapError(
                f"t outside branch coverage [{self.t_min}, {self.t_max}]"
            )
        raw = np.asarray(psi_decomposition(arr))
        guide = np.interp(arr, self.t, self.psi)
        lifted = raw + 2 * math.pi * np.round((guide - raw) / (2 * math.pi))
        return float(lifted) if lifted.ndim == 0 else lifted

    def psi_prime(self, t, h: float = 2e-3):
        """psi'(t) by a fourth-order central difference."""
        arr = np.asarray(t, dtype=float)
        f = self.psi_at
        val = (-f(arr + 2 * h) + 8 * f(arr + h) - 8 * f(arr - h) + f(arr - 2 * h)) / (12 * h)
        return float(val) if np.ndim(val) == 0 else val

    # -- disk cache ---------------------------------------------------------

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pairs = np.empty(2 * self.t.size, dtype="<f8")
        pairs[0::2] = self.t
        pairs[1::2] = self.psi
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_BRANCH_MAGIC)
            fh.write(pairs.tobytes())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "PhaseBranch":
        data = Path(path).read_bytes()
        if data[:8] != _BRANCH_MAGIC:
            raise CacheError(f"{path}: bad magic header")
        body = data[8:]
        if len(body) % 16:
            raise CacheError(f"{path}: truncated anchor table")
        pairs = np.frombuffer(body, dtype="<f8")
        ts, psi = pairs[0::2].copy(), pairs[1::2].copy()
        step = float(ts[1] - ts[0]) if ts.size > 1 else 0.05
        return cls(ts, psi, step)


BRANCH_FILE = "psi_branch.bin"
_BRANCHES: dict = {}


def default_branch(t_max: float = 200.0, cache_dir=None) -> PhaseBranch:
    """Shared branch covering at least [0.5, t_max], cached in memory and on disk."""
    key = str(cache_dir) if cache_dir is not None else None
    cached = _BRANCHES.get(key)
    if cached is not None and cached.covers(t_max):
        return cached
    directory = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = directory / BRANCH_FILE
    branch = None
    if path.exists():
        try:
            branch = PhaseBranch.load(path)
        except (CacheError, BranchGapError):
            branch = None
        if branch is not None and not branch.covers(t_max):
            branch = None
    if branch is None:
        target = max(t_max, 200.0)
        branch = PhaseBranch.build(target)
        try:
            branch.save(path)
        except OSError:
            pass
    _BRANCHES[key] = branch
    return branch


def psi_and_derivative(t: float, branch: PhaseBranch | None = None) -> tuple[float, float]:
    if t <= 0:
        raise DomainError("t must be positive")
    branch = branch or default_branch(t + 1)
    return branch.psi_at(t), branch.psi_prime(t)


# ---------------------------------------------------------------------------
# K-Bessel of complex order
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _k_path(nu: complex, x: float):
    """Breakpoints of a piecewise-linear path u = v + i beta(v)."""
    sigma, mu = nu.real, nu.imag
    if mu <= x:
        v0, beta_c = 0.0, math.asin(mu / x)
    else:
        v0, beta_c = math.acosh(mu / x), math.pi / 2
    drop = min(beta_c, math.pi / 4)
    ramp = drop

    def beta(v):
        excess = np.maximum(np.abs(v) - v0, 0.0)
        return beta_c - np.minimum(drop, excess * (drop / ramp if ramp else 0.0))

    def logmag(v):
        b = beta(v)
        return -x * np.cosh(v) * np.cos(b) + sigma * v - mu * b

    ref = float(np.max(logmag(np.linspace(-v0 - 1, v0 + 1, 201))))
    ends = []
    for sign in (1.0, -1.0):
        v = v0 + ramp + 0.25
        while logmag(sign * v) > ref - 42.0:
            v += 0.25
            if v > 60:
                break
        ends.append(v)
    knots = sorted(
        {-ends[1], -(v0 + ramp), -v0, 0.0, v0, v0 + ramp, ends[0]}
    )
    return knots, beta, ref


def _k_integrand(v, nu, x, beta, dbeta, shift):
    u = v + 1j * beta(v)
    return np.exp(-x * np.cosh(u) + nu * u - shift) * (1 + 1j * dbeta(v))


def bessel_k(nu, x: float) -> complex:
    """K_nu(x) for complex order nu and real x > 0.

    Integrates (1/2) exp(-x cosh u + nu u) along a path through the saddle
    region, which keeps the integrand at the size of the result instead of
    paying the exp(pi |Im nu| / 2) cancellation of the real-line integral.
    """
    if x <= 0:
        raise DomainError("x must be positive")
    nu = complex(nu)
    if nu.real < 0:
        nu = -nu
    flip = nu.imag < 0
    if flip:
        nu = nu.conjugate()
    knots, beta, ref = _k_path(nu, x)
    if ref < -700:
        return 0j

    def dbeta(v, eps=1e-7):
        return (beta(v + eps) - beta(v - eps)) / (2 * eps)

    nodes, weights = [], []
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi - lo <= 0:
            continue
        v = lo
        while v < hi - 1e-14:
            u = v + 1j * float(beta(v))
            rate = abs(-x * np.sinh(u) + nu) + 1.0
            width = min(0.5, 3.0 / rate, hi - v)
            mid = v + 0.5 * width
            rate2 = abs(-x * np.sinh(mid + 1j * float(beta(mid))) + nu) + 1.0
            width = min(width, 3.0 / rate2, hi - v)
            nodes.append(v + 0.5 * width * (_GL_X + 1))
            weights.append(0.5 * width * _GL_W)
            v += width
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    # beta is piecewise linear: use the one-sided slope inside each segment
    vals = _k_integrand(nodes, nu, x, beta, dbeta, ref)
    total = 0.5 * np.dot(weights, vals) * math.exp(ref)
    return total.conjugate() if flip else total


def bessel_k_imag(mu: float, y: float) -> float:
    """K_{i mu}(y), which is real for real mu and y > 0."""
    val = bessel_k(1j * mu, y)
    return float(val.real)
