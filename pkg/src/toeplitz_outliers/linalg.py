"""Dense matrices for banded Toeplitz work: construction, eigenvalues, determinants.

Matrices are plain complex numpy arrays. Large determinants are carried as
LogComplex so that |a_{d1}|^N prod |l_i|^N does not overflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, SolverError
from .roots import min_separation, solve_lambda_many
from .symbol import Symbol

SCHUR_CLUSTER_TOL = 1e-5
SCHUR_COND_MAX = 1e10


@dataclass(frozen=True)
class LogComplex:
    """exp(log_mag + i phase), or an exact zero when `zero` is set."""

    log_mag: float
    phase: float
    zero: bool = False
    tag: str = ""

    @classmethod
    def from_complex(cls, v: complex, tag: str = "") -> "LogComplex":
        v = complex(v)
        if v == 0:
            return cls(-math.inf, 0.0, True, tag)
        return cls(math.log(abs(v)), cmath.phase(v), False, tag)

    @classmethod
    def zero_value(cls, tag: str = "") -> "LogComplex":
        return cls(-math.inf, 0.0, True, tag)

    def to_complex(self) -> complex:
        if self.zero:
            return 0j
        return cmath.exp(complex(self.log_mag, self.phase))

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if self.zero or other.zero:
            return LogComplex.zero_value(self.tag)
        return LogComplex(self.log_mag + other.log_mag, _wrap(self.phase + other.phase),
                          False, self.tag)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if other.zero:
            raise ZeroDivisionError("division by a zero LogComplex")
        if self.zero:
            return self
        return LogComplex(self.log_mag - other.log_mag, _wrap(self.phase - other.phase),
                          False, self.tag)

    def with_tag(self, tag: str) -> "LogComplex":
        return LogComplex(self.log_mag, self.phase, self.zero, tag)


def _wrap(phase: float) -> float:
    """Map a phase into (-pi, pi]."""
    p = math.remainder(phase, 2 * math.pi)
    return math.pi if p == -math.pi else p


def phase_distance(a: float, b: float) -> float:
    return abs(_wrap(a - b))


def build_toeplitz(s: Symbol, N: int, z: complex = 0.0) -> np.ndarray:
    """T_N(a(z)): entry (i, j) = a_{j-i} - z [i == j]."""
    if N <= max(s.d1, s.d2):
        raise DomainError(f"N={N} must exceed max(d1, d2)={max(s.d1, s.d2)}")
    return shifted_toeplitz(s, N, z, s.d1, _check=False)


def shifted_toeplitz(s: Symbol, M: int, z: complex, dbar1: int, _check: bool = True) -> np.ndarray:
    """T_M(a, z; dbar1): entry (i, j) = a'_{j-i+d1-dbar1}."""
    if _check:
        if not 0 <= dbar1 <= s.d:
            raise DomainError(f"dbar1={dbar1} outside [0, {s.d}]")
        if M <= s.d:
            raise DomainError(f"M={M} must exceed d={s.d}")
    T = np.zeros((M, M), dtype=complex)
    shift = s.d1 - dbar1
    for j in range(-s.d2, s.d1 + 1):
        off = j - shift
        c = s.shifted_coef(j, z)
        if c == 0 or abs(off) >= M:
            continue
        idx = np.arange(M - abs(off))
        if off >= 0:
            T[idx, idx + off] = c
        else:
            T[idx - off, idx] = c
    return T


def det_lu(m: np.ndarray) -> LogComplex:
    """Determinant via partially pivoted LU, in log form."""
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != m.shape[1]:
        raise DomainError("det of a non-square matrix")
    if m.shape[0] == 0:
        return LogComplex(0.0, 0.0)
    lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0):
        return LogComplex.zero_value()
    swaps = int(np.sum(piv != np.arange(piv.size)))
    phase = float(np.sum(np.angle(diag))) + (math.pi if swaps % 2 else 0.0)
    return LogComplex(float(np.sum(np.log(np.abs(diag)))), _wrap(phase))


def submatrix_det(m: np.ndarray, rows, cols) -> complex:
    """det m[rows; cols] for 1-based index sets; the empty minor is 1."""
    rows = np.asarray(list(rows), dtype=int)
    cols = np.asarray(list(cols), dtype=int)
    if rows.size != cols.size:
        raise DomainError("minor needs |rows| == |cols|")
    if rows.size == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(m[np.ix_(rows - 1, cols - 1)]))


def schur_toeplitz_det(s: Symbol, N: int, z: complex) -> LogComplex:
    """det T_N(a(z)) = (-1)^{N d1} a_{d1}^N S_m(l_1..l_d), m = (N^{d1}, 0^{d2}).

    Here l_i are the roots of l^{d2}(a(l) - z).
    S_m = det V_m / det V_0 with rows of V_alpha carrying exponents alpha_r + d - r.
    Rows and columns of V_m are equilibrated before LU and their scale logs
    added back; det V_0 is the Vandermonde product. Clustered roots or a large
    condition estimate fall back to det_lu, tagged "fallback".
    """
    # S_m is evaluated at the roots themselves (= -lambda); S_m is homogeneous of
    # degree N d1, so this is where the (-1)^{N d1} prefactor belongs
    lams = -solve_lambda_many(s, [z])[0]
    d, d1 = s.d, s.d1
    if min_separation(lams) < SCHUR_CLUSTER_TOL:
        return det_lu(build_toeplitz(s, N, z)).with_tag("fallback")
    exps = np.array([(N if r < d1 else 0) + d - 1 - r for r in range(d)], dtype=float)
    loglam = np.log(lams.astype(complex))
    # log of V_m entries, then equilibrate columns then rows
    logV = exps[:, None] * loglam[None, :]
    col_scale = np.max(logV.real, axis=0)
    logV = logV - col_scale[None, :]
    row_scale = np.max(logV.real, axis=1)
    logV = logV - row_scale[:, None]
    V = np.exp(logV)
    if np.linalg.cond(V) > SCHUR_COND_MAX:
        return det_lu(build_toeplitz(s, N, z)).with_tag("fallback")
    det_vm = det_lu(V)
    det_vm = det_vm * LogComplex(float(col_scale.sum() + row_scale.sum()), 0.0)
    log_v0, ph_v0 = 0.0, 0.0
    for i in range(d):
        for j in range(i + 1, d):
            diff = lams[i] - lams[j]
            log_v0 += math.log(abs(diff))
            ph_v0 += cmath.phase(diff)
    a = s.coef(d1)
    pref = LogComplex(N * math.log(abs(a)), _wrap(N * cmath.phase(a) + (math.pi * ((N * d1) % 2))))
    return (pref * det_vm / LogComplex(log_v0, _wrap(ph_v0))).with_tag("schur")


# ---------------------------------------------------------------------------
# Eigenvalues: Householder Hessenberg reduction and shifted complex QR.


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg form by Householder reflections (similarity)."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        lead = x[0]
        phase = lead / abs(lead) if lead != 0 else 1.0
        v = x
        v[0] = lead + phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _givens(a: complex, b: complex):
    """c, s with [[c, s], [-conj(s), c]] @ [a, b] = [r, 0], c real."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, complex(np.conj(b) / abs(b))
    na = abs(a)
    nrm = math.hypot(na, abs(b))
    c = na / nrm
    s = (a / na) * np.conj(b) / nrm
    return c, complex(s)


def _wilkinson(h: np.ndarray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4 - det)
    e1, e2 = tr / 2 + disc, tr / 2 - disc
    return e1 if abs(e1 - d) < abs(e2 - d) else e2


def qr_eigenvalues(a: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Eigenvalues by implicitly shifted single-shift QR on the Hessenberg form."""
    h = hessenberg(a)
    n = h.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    scale = max(np.linalg.norm(h), 1e-300)
    eig = np.zeros(n, dtype=complex)
    hi = n - 1
    iters = 0
    since = 0
    max_iter = 40 * n
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        # find the active block [lo, hi]
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            if sub < tol * scale or sub < 1e-16 * (abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            since = 0
            continue
        iters += 1
        since += 1
        if iters > max_iter:
            raise SolverError(f"QR did not converge after {max_iter} sweeps")
        if since % 11 == 10:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1]) * (1 + 1j)
        else:
            mu = _wilkinson(h, hi)
        # implicit single-shift QR sweep on the block via bulge chasing
        x, y = h[lo, lo] - mu, h[lo + 1, lo]
        for k in range(lo, hi):
            c, s = _givens(x, y)
            g = np.array([[c, s], [-np.conj(s), c]])
            cols = slice(max(lo, k - 1), hi + 1)
            h[k:k + 2, cols] = g @ h[k:k + 2, cols]
            rows = slice(lo, min(k + 3, hi + 1))
            h[rows, k:k + 2] = h[rows, k:k + 2] @ g.conj().T
            if k < hi - 1:
                x, y = h[k + 1, k], h[k + 2, k]
    return eig


def eigenvalues(m: np.ndarray, backend: str = "qr") -> np.ndarray:
    """All eigenvalues; backend "qr" is the in-repo solver, "lapack" uses numpy."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("eigenvalues need a square matrix")
    if backend == "qr":
        return qr_eigenvalues(m)
    if backend == "lapack":
        return np.linalg.eigvals(m)
    raise DomainError(f"unknown eigen backend {backend!r}")
