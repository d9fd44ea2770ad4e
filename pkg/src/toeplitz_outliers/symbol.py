"""Finite-band Laurent symbols, their curves, winding numbers and distances."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OnCurveError

DEFAULT_M = 4096
ON_CURVE_TOL = 1e-8
MAX_EXPONENT = 8
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Symbol:
    """Laurent polynomial a(l) = sum_{j=-d2}^{d1} a_j l^j.

    `terms` holds (exponent, coefficient) pairs sorted by exponent, zeros dropped.
    """

    terms: tuple

    def __post_init__(self):
        clean = {}
        for exp, coef in self.terms:
            exp = int(exp)
            clean[exp] = clean.get(exp, 0j) + complex(coef)
        terms = tuple(sorted((e, c) for e, c in clean.items() if c != 0))
        if not terms:
            raise DomainError("symbol has no nonzero coefficient")
        object.__setattr__(self, "terms", terms)
        if self.d1 < 1:
            raise DomainError("the symbol needs a positive maximal exponent d1 >= 1")
        if self.d2 < 0:
            raise DomainError("lowest exponent must be <= 0")

    @classmethod
    def from_dict(cls, coeffs: dict) -> "Symbol":
        return cls(tuple(coeffs.items()))

    @classmethod
    def parse(cls, text: str) -> "Symbol":
        """Parse the `exp:coef` comma-separated format, e.g. `-1:1,1:0.5i`."""
        terms = []
        for part in text.replace(" ", "").split(","):
            if not part:
                continue
            if ":" not in part:
                raise DomainError(f"bad symbol term {part!r}")
            exp_s, coef_s = part.split(":", 1)
            try:
                exp = int(exp_s)
            except ValueError as exc:
                raise DomainError(f"bad exponent in {part!r}") from exc
            if abs(exp) > MAX_EXPONENT:
                raise DomainError(f"exponent {exp} outside [-{MAX_EXPONENT}, {MAX_EXPONENT}]")
            terms.append((exp, _parse_complex(coef_s)))
        return cls(tuple(terms))

    def to_text(self) -> str:
        return ",".join(f"{e}:{_format_complex(c)}" for e, c in self.terms)

    @property
    def coeffs(self) -> dict:
        return dict(self.terms)

    @property
    def d1(self) -> int:
        return self.terms[-1][0]

    @property
    def d2(self) -> int:
        return max(0, -self.terms[0][0])

    @property
    def d(self) -> int:
        return self.d1 + self.d2

    def coef(self, j: int) -> complex:
        return self.coeffs.get(j, 0j)

    def shifted_coef(self, j: int, z: complex) -> complex:
        """a'_j = a_j - z [j == 0]."""
        return self.coef(j) - (z if j == 0 else 0.0)

    def poly_coeffs(self, z: complex) -> np.ndarray:
        """Coefficients p_0..p_d of l^{d2}(a(l) - z), lowest degree first."""
        return np.array([self.shifted_coef(m - self.d2, z) for m in range(self.d + 1)],
                        dtype=complex)

    def __add__(self, other: "Symbol") -> "Symbol":
        return Symbol(self.terms + other.terms)

    def __str__(self):
        return self.to_text()


def _parse_complex(text: str) -> complex:
    t = text.replace("I", "i").replace("j", "i")
    if not re.fullmatch(r"[0-9eE.+\-i]+", t):
        raise DomainError(f"bad coefficient {text!r}")
    try:
        return complex(t.replace("i", "j"))
    except ValueError as exc:
        raise DomainError(f"bad coefficient {text!r}") from exc


def _format_complex(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}i"
    sign = "+" if c.imag >= 0 else "-"
    return f"{c.real!r}{sign}{abs(c.imag)!r}i"


JORDAN = Symbol(((1, 1.0),))
LIMACON = Symbol(((1, 1.0), (2, 1.0)))
ELLIPSE = Symbol(((-1, 1.0), (1, 0.5j)))
NAMED = {"jordan": JORDAN, "limacon": LIMACON, "ellipse": ELLIPSE}


def resolve_symbol(text) -> Symbol:
    if isinstance(text, Symbol):
        return text
    key = str(text).strip().lower().replace("ç", "c")
    if key in NAMED:
        return NAMED[key]
    return Symbol.parse(str(text))


def eval_symbol(s: Symbol, lam):
    """Evaluate a(lam); accepts scalars or arrays."""
    arr = np.asarray(lam, dtype=complex)
    if np.any(arr == 0):
        raise DomainError("a(l) is undefined at l = 0")
    out = np.zeros_like(arr)
    for exp, coef in s.terms:
        out = out + coef * arr ** exp
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CurveSample:
    points: np.ndarray
    M: int


def sample_curve(s: Symbol, M: int = DEFAULT_M) -> CurveSample:
    if M < 1:
        raise DomainError("M must be positive")
    theta = 2.0 * np.pi * np.arange(M) / M
    return CurveSample(eval_symbol(s, np.exp(1j * theta)), M)


def _curve_at(s: Symbol, theta):
    return eval_symbol(s, np.exp(1j * np.asarray(theta, dtype=float)))


def distance_to_curve_many(s: Symbol, zs, M: int = DEFAULT_M, iters: int = 80) -> np.ndarray:
    """Vectorized distance from each z to a(S^1).

    Sampled minimum, then golden-section refinement of theta in the bracket
    around the sampled argmin.
    """
    if M < 64:
        raise DomainError("M must be >= 64")
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if zs.size == 0:
        return np.zeros(0)
    pts = sample_curve(s, M).points
    idx = np.empty(zs.size, dtype=int)
    best = np.empty(zs.size)
    chunk = max(1, 2_000_000 // M)
    for lo in range(0, zs.size, chunk):
        block = np.abs(zs[lo:lo + chunk, None] - pts[None, :])
        idx[lo:lo + chunk] = np.argmin(block, axis=1)
        best[lo:lo + chunk] = block[np.arange(block.shape[0]), idx[lo:lo + chunk]]
    h = 2.0 * np.pi / M
    a = 2.0 * np.pi * idx / M - h
    b = a + 2.0 * h
    c = b - _GOLDEN * (b - a)
    e = a + _GOLDEN * (b - a)
    fc = np.abs(_curve_at(s, c) - zs)
    fe = np.abs(_curve_at(s, e) - zs)
    for _ in range(iters):
        left = fc < fe
        # left: keep [a, e], old c becomes the new upper probe
        b = np.where(left, e, b)
        a = np.where(left, a, c)
        new_e = np.where(left, c, a + _GOLDEN * (b - a))
        new_c = np.where(left, b - _GOLDEN * (b - a), e)
        probe = np.where(left, new_c, new_e)
        fp = np.abs(_curve_at(s, probe) - zs)
        fc, fe = np.where(left, fp, fe), np.where(left, fc, fp)
        c, e = new_c, new_e
    return np.minimum(best, np.minimum(fc, fe))


def distance_to_curve(s: Symbol, z: complex, M: int = DEFAULT_M) -> float:
    return float(distance_to_curve_many(s, [z], M)[0])


def _phase_steps(s: Symbol, z: complex, theta: np.ndarray, max_points: int) -> float:
    """Total phase change of a(e^{it}) - z along the closed grid `theta`, refining
    any step larger than pi/2 by bisection."""
    theta = np.append(theta, 2.0 * np.pi)
    vals = _curve_at(s, theta) - z
    while True:
        steps = np.angle(vals[1:] / vals[:-1])
        bad = np.flatnonzero(np.abs(steps) > np.pi / 2)
        if bad.size == 0:
            return float(np.sum(steps))
        if theta.size + bad.size > max_points:
            raise OnCurveError(f"phase refinement did not converge near z={z}")
        mids = 0.5 * (theta[bad] + theta[bad + 1])
        theta = np.insert(theta, bad + 1, mids)
        vals = np.insert(vals, bad + 1, _curve_at(s, mids) - z)


def winding_number(s: Symbol, z: complex, M: int = DEFAULT_M) -> int:
    """Winding number of a(S^1) about z by phase unwrapping."""
    if distance_to_curve(s, z, max(M, 64)) < ON_CURVE_TOL:
        raise OnCurveError(f"z={z} is on the curve")
    theta = 2.0 * np.pi * np.arange(M) / M
    total = _phase_steps(s, z, theta, max_points=64 * max(M, 4096))
    return int(round(total / (2.0 * np.pi)))
