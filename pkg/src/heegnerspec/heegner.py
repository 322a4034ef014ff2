"""Reduced binary quadratic forms, Heegner points and the spectral coefficients
of sums of Dirac masses at Heegner points."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .specialfns import dirichlet_l, is_fundamental_discriminant, riemann_zeta

__all__ = [
    "ReducedForm",
    "HeegnerSet",
    "ThetaCombination",
    "reduced_forms",
    "heegner_set",
    "class_number",
    "unit_count",
    "theta_coefficient",
    "theta_one",
    "UNIT_FACTOR",
]


@dataclass(frozen=True, order=True)
class ReducedForm:
    A: int
    B: int
    C: int

    @property
    def discriminant(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    def root(self) -> complex:
        """Root (-B + i sqrt|d|)/(2A) in the upper half-plane."""
        return complex(-self.B, math.sqrt(-self.discriminant)) / (2 * self.A)


def _check_disc(d: int) -> None:
    if d >= 0 or not is_fundamental_discriminant(d):
        raise DomainError(f"{d} is not a negative fundamental discriminant")


@lru_cache(maxsize=None)
def reduced_forms(d: int) -> tuple[ReducedForm, ...]:
    """All reduced forms of discriminant d, ordered by (A, B).

    Reduced means |B| <= A <= C with B >= 0 whenever |B| = A or A = C.  For
    d = -3 the single form is written with B = -1.
    """
    _check_disc(d)
    forms = []
    a_max = math.isqrt(-d // 3)
    for A in range(1, a_max + 1):
        for B in range(-A, A + 1):
            if (B - d) % 2:
                continue
            num = B * B - d
            if num % (4 * A):
                continue
            C = num // (4 * A)
            if C < A:
                continue
            if B < 0 and (-B == A or A == C):
                continue
            forms.append(ReducedForm(A, B, C))
    if d == -3:
        forms = [ReducedForm(1, -1, 1)]
    return tuple(sorted(forms))


def class_number(d: int) -> int:
    return len(reduced_forms(d))


def unit_count(d: int) -> int:
    """Number of units in the imaginary quadratic order of discriminant d."""
    return {-3: 6, -4: 4}.get(d, 2)


@dataclass(frozen=True)
class HeegnerSet:
    d: int
    forms: tuple[ReducedForm, ...]
    points: tuple[tuple[float, float], ...]

    @property
    def h(self) -> int:
        return len(self.forms)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "h": self.h,
                "forms": [[f.A, f.B, f.C] for f in self.forms],
                "points": [[x, y] for x, y in self.points],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "HeegnerSet":
        obj = json.loads(text)
        forms = tuple(ReducedForm(*f) for f in obj["forms"])
        points = tuple((float(x), float(y)) for x, y in obj["points"])
        if len(forms) != obj["h"]:
            raise DomainError("class number does not match the form list")
        return cls(int(obj["d"]), forms, points)


@lru_cache(maxsize=None)
def heegner_set(d: int) -> HeegnerSet:
    forms = reduced_forms(d)
    points = tuple((f.root().real, f.root().imag) for f in forms)
    return HeegnerSet(d, forms, points)


# ---------------------------------------------------------------------------
# Theta combinations
# ---------------------------------------------------------------------------

# sum_Q E_s(z_Q) = (w/2) (sqrt|d|/2)^s zeta(s) L(s, chi_d) / zeta(2s) with w the
# number of units; the factor was confirmed against lattice sums at z = i and
# z = (1 + i sqrt 3)/2.
UNIT_FACTOR = {-3: 3.0, -4: 2.0}


@dataclass(frozen=True)
class ThetaCombination:
    """Finite real combination sum_d nu_d theta_d of Heegner-point Dirac sums.

    By default only d < -4 are accepted.  ``unit_correction=True`` admits
    d = -3 and d = -4, whose coefficients then carry the extra unit factor.
    """

    terms: tuple[tuple[int, float], ...]
    unit_correction: bool = False

    def __post_init__(self):
        terms = tuple((int(d), float(nu)) for d, nu in self.terms)
        discs = [d for d, _ in terms]
        if len(set(discs)) != len(discs):
            raise DomainError("discriminants in a theta combination must be distinct")
        for d in discs:
            _check_disc(d)
            if d in (-3, -4) and not self.unit_correction:
                raise DomainError(
                    f"d = {d} needs unit_correction=True (extra unit factor)"
                )
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, d: int, nu: float = 1.0, **kw) -> "ThetaCombination":
        return cls(((d, nu),), **kw)

    @classmethod
    def parse(cls, specs, **kw) -> "ThetaCombination":
        """Build from strings such as ``"-7"`` or ``"-7:2.5"``."""
        terms = []
        for spec in specs:
            d, _, nu = str(spec).partition(":")
            terms.append((int(d), float(nu) if nu else 1.0))
        return cls(tuple(terms), **kw)

    @property
    def discriminants(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.terms)

    def heegner_points(self) -> list[tuple[float, float, float]]:
        """(x, y, weight) for every Heegner point in the combination."""
        out = []
        for d, nu in self.terms:
            for x, y in heegner_set(d).points:
                out.append((x, y, nu))
        return out

    def max_height(self) -> float:
        pts = self.heegner_points()
        return max((y for _, y, _ in pts), default=0.0)

    def key(self) -> str:
        body = ",".join(f"{d}:{nu!r}" for d, nu in self.terms)
        return f"{body}|u{int(self.unit_correction)}"


def theta_coefficient(theta: ThetaCombination, s):
    """theta(E_s) = sum_d nu_d (w_d/2) (sqrt|d|/2)^s zeta(s) L(s, chi_d) / zeta(2s)."""
    arr = np.asarray(s, dtype=complex)
    scalar = arr.ndim == 0
    if not theta.terms:
        return 0j if scalar else np.zeros(arr.shape, dtype=complex)
    ratio = np.asarray(riemann_zeta(arr)) / np.asarray(riemann_zeta(2 * arr))
    total = np.zeros(arr.shape, dtype=complex)
    for d, nu in theta.terms:
        unit = UNIT_FACTOR.get(d, 1.0)
        scale = np.exp(arr * math.log(math.sqrt(-d) / 2))
        total = total + nu * unit * scale * np.asarray(dirichlet_l(arr, d))
    total = total * ratio
    return complex(total) if scalar else total


def theta_one(theta: ThetaCombination) -> float:
    """theta(1) = sum_d nu_d h(d)."""
    return float(sum(nu * class_number(d) for d, nu in theta.terms))
