"""Limiting random fields P_w^L(z), closed forms for Jordan and the limacon, zeros.

P_w^L(z) = sum over field tableau pairs with max c_i <= L of
sign * det E_inf[Xhat; Yhat] * prod_{i <= d0} l_i^{-c_i} prod_{i > d0} l_i^{c_i},
with l the negated roots as returned by roots.solve_lambda_many. Pairs sharing
an exponent vector are merged into one weight, so evaluation over many z is a
single matrix product.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError, DomainError, RegionError, SolverError
from .noise import FixedNoise
from .points import PointProcessSample
from .roots import UNIT_TOL, region_arrays, solve_lambda_many
from .symbol import JORDAN, LIMACON, Symbol, distance_to_curve_many
from .tableaux import field_terms


@lru_cache(maxsize=32)
def _terms(s: Symbol, wind: int, L: int, reading: str):
    return field_terms(s, wind, L, reading=reading)


def _minors(src, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Batched det E[rows_p; cols_p] for index arrays of shape (P, k)."""
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    blocks = src.entries(rows[:, :, None], cols[:, None, :])
    return np.linalg.det(blocks)


def monomials(lams: np.ndarray, E: np.ndarray) -> np.ndarray:
    """(B, M) values prod_c lams[b, c] ** E[m, c] for integer exponents.

    Integer powers keep a zero root exact (0 ** 0 = 1), unlike exp(E log lams).
    """
    lams = np.atleast_2d(np.asarray(lams, dtype=complex))
    E = np.asarray(E, dtype=np.int64)
    out = np.ones((lams.shape[0], E.shape[0]), dtype=complex)
    for c in range(E.shape[1]):
        out *= lams[:, c:c + 1] ** E[None, :, c]
    return out


class FieldEvaluator:
    """Truncated field for one (symbol, wind index, L, noise) choice."""

    def __init__(self, s: Symbol, wind: int, L: int, src, reading: str = "natural",
                 terms=None):
        self.symbol = s
        self.wind = int(wind)
        self.L = int(L)
        self.noise = src
        self.d0 = s.d1 - self.wind
        if terms is None:
            terms = _terms(s, self.wind, self.L, reading)
        C, XH, YH, SG = terms
        self.n_pairs = int(C.shape[0])
        vals = np.zeros(self.n_pairs, dtype=complex)
        for lo in range(0, self.n_pairs, 1 << 16):
            hi = lo + (1 << 16)
            vals[lo:hi] = SG[lo:hi] * _minors(src, XH[lo:hi], YH[lo:hi])
        keys, inv = np.unique(C, axis=0, return_inverse=True)
        weights = np.zeros(keys.shape[0], dtype=complex)
        np.add.at(weights, inv.reshape(-1), vals)
        self.exponents = keys.astype(np.int64).reshape(-1, s.d)
        self.exponents[:, :self.d0] *= -1
        self.weights = weights

    def eval_lambdas(self, lams) -> np.ndarray:
        """Field at given sorted lambda rows (B, d); no region checks."""
        lams = np.atleast_2d(np.asarray(lams, dtype=complex))
        if self.weights.size == 0:
            return np.zeros(lams.shape[0], dtype=complex)
        return monomials(lams, self.exponents) @ self.weights

    def eval_many(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        shape = zs.shape
        flat = zs.reshape(-1)
        if flat.size == 0:
            return np.zeros(shape, dtype=complex)
        lams = solve_lambda_many(self.symbol, flat)
        d0, _ = region_arrays(self.symbol, lams)
        if np.any(np.abs(np.abs(lams) - 1.0) < UNIT_TOL) or np.any(d0 != self.d0):
            bad = flat[(d0 != self.d0) | np.any(np.abs(np.abs(lams) - 1.0) < UNIT_TOL, axis=1)]
            raise RegionError(f"point {bad[0]} is not in the region of wind index {self.wind}")
        return self.eval_lambdas(lams).reshape(shape)

    def __call__(self, z):
        return self.eval_many(z)


def eval_field(fe: FieldEvaluator, z: complex) -> complex:
    return complex(fe.eval_many(np.array([z]))[0])


# ---------------------------------------------------------------------------
# Closed forms


def _named(s: Symbol) -> str:
    if s == JORDAN:
        return "jordan"
    if s == LIMACON:
        return "limacon"
    raise DomainError("closed forms exist only for the Jordan block and the limacon")


def closed_form_monomials(s: Symbol, wind: int, L: int, src, sign_rule: str = "consistent"):
    """Closed-form series as {root exponents: noise weight}, in the actual roots.

    Jordan: sum_k r^k G_k with G_k the sum of e(a, y) over a + y - 2 = k.
    Limacon, wind 1: sum_k r2^k G_k / (r1 - r2), the prefactor expanded as
    sum_m r1^{-(m+1)} r2^m and kept on the support m + 1 <= L, k + m <= L.
    Limacon, wind 2: sum r1^{i+j-3} r2^{k+l-3} s_{ijkl} W_{ijkl} X_{ijkl} with
    X_{ijkl} = e_ik e_jl - e_il e_jk and W_{ijkl} = sum_{i<=s<j, k<=t<l} (r2/r1)^{s-t},
    each (s, t) kept when both resulting exponents are at most L. The sign
    s_{ijkl} is (-1)^{(j-i-1)(l-k-1)} for sign_rule "paper" and 1 for "consistent".
    """
    name = _named(s)
    if sign_rule not in ("consistent", "paper"):
        raise DomainError(f"unknown sign rule {sign_rule!r}")
    out = {}

    def add(key, v):
        out[key] = out.get(key, 0j) + v

    if name == "jordan" or wind == 1:
        if (name, wind) not in (("jordan", 1), ("limacon", 1)):
            raise DomainError(f"unsupported wind index {wind} for {name}")
        G = []
        for k in range(L + 1):
            a = np.arange(1, k + 2)
            G.append(complex(src.entries(a, k + 2 - a).sum()))
        for k in range(L + 1):
            if name == "jordan":
                add((k,), G[k])
            else:
                for m in range(0, min(L - 1, L - k) + 1):
                    add((-(m + 1), k + m), G[k])
        return out
    if wind != 2:
        raise DomainError(f"unsupported wind index {wind} for {name}")
    top = 2 * L + 6
    for i in range(1, top):
        for j in range(i + 1, top):
            for k in range(1, top):
                for l in range(k + 1, top):
                    if i + j + k + l - 6 > 2 * L:
                        break
                    minor = None
                    sgn = (-1) ** ((j - i - 1) * (l - k - 1)) if sign_rule == "paper" else 1
                    for s_ in range(i, j):
                        for t in range(k, l):
                            c1 = i + j - 3 - (s_ - t)
                            c2 = k + l - 3 + (s_ - t)
                            if c1 > L or c2 > L:
                                continue
                            if minor is None:
                                blk = src.block([i, j], [k, l])
                                minor = complex(blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0])
                            add((c1, c2), sgn * minor)
    return out


def _eval_monomials(mono: dict, roots: np.ndarray) -> np.ndarray:
    if not mono:
        return np.zeros(roots.shape[0], dtype=complex)
    keys = sorted(mono)
    E = np.array(keys, dtype=np.int64)
    W = np.array([mono[k] for k in keys], dtype=complex)
    return monomials(roots, E) @ W


def closed_form(s: Symbol, wind: int, L: int, src, z, sign_rule: str = "consistent") -> np.ndarray:
    """Closed-form field at z (scalar or array), evaluated at the actual roots."""
    name = _named(s)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    roots = -solve_lambda_many(s, zs)
    d0, _ = region_arrays(s, -roots)
    if np.any(d0 != s.d1 - wind):
        raise RegionError(f"z outside the region of wind index {wind} for {name}")
    vals = _eval_monomials(closed_form_monomials(s, wind, L, src, sign_rule), roots)
    return vals if np.ndim(z) else complex(vals[0])


def calibrate_sign(s: Symbol, wind: int, L: int, z0: complex, sign_rule: str = "consistent",
                   tol: float = 1e-10) -> int:
    """Global sign between the tableau field and the closed form.

    Fixed on the first common monomial: noise supported on the rows/columns
    1..|wind| with an identity block, which isolates the minor of the
    lexicographically smallest index sets.
    """
    k = abs(wind)
    src = FixedNoise({(i, i): 1.0 for i in range(1, k + 1)})
    f = eval_field(FieldEvaluator(s, wind, L, src), z0)
    g = closed_form(s, wind, L, src, z0, sign_rule)
    if abs(g) == 0:
        raise ConsistencyError("calibration monomial vanishes in the closed form")
    ratio = f / g
    sign = 1 if ratio.real > 0 else -1
    if abs(ratio - sign) > tol * max(1.0, abs(ratio)):
        raise ConsistencyError(f"field/closed-form ratio {ratio} is not a sign")
    return sign


# ---------------------------------------------------------------------------
# Zeros


class _BoundaryZero(Exception):
    pass


def _edge_winding(f, a: complex, b: complex, n0: int, max_refine: int):
    """Total phase change of f along the segment a -> b, adaptively sampled.

    A step is trusted only when it turns by less than pi/2 and its two halves
    agree with it; the midpoint test catches a zero close to the segment whose
    phase turn wraps around to a small value.
    """
    t = np.linspace(0.0, 1.0, n0 + 1)
    vals = f(a + (b - a) * t)
    for _ in range(max_refine + 1):
        scale = np.max(np.abs(vals))
        if scale == 0 or np.any(np.abs(vals) <= 1e-13 * scale):
            raise _BoundaryZero()
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) >= np.pi / 2
        if not bad.any():
            tm = 0.5 * (t[:-1] + t[1:])
            vm = f(a + (b - a) * tm)
            if np.any(np.abs(vm) <= 1e-13 * scale):
                raise _BoundaryZero()
            h1 = np.angle(vm / vals[:-1])
            h2 = np.angle(vals[1:] / vm)
            bad = ((np.abs(h1) >= np.pi / 2) | (np.abs(h2) >= np.pi / 2)
                   | (np.abs(h1 + h2 - dphi) > 1e-9))
            if not bad.any():
                return float(dphi.sum()), scale
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        t = np.concatenate([t, mids])
        order = np.argsort(t)
        t = t[order]
        vals = np.concatenate([vals, f(a + (b - a) * mids)])[order]
    raise _BoundaryZero()


def winding_count(f, rect, n0: int = 32, max_refine: int = 14):
    """(number of zeros inside rect by the argument principle, boundary scale)."""
    x0, x1, y0, y1 = rect
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total, scale = 0.0, 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        w, sc = _edge_winding(f, a, b, n0, max_refine)
        total += w
        scale = max(scale, sc)
    return int(round(total / (2 * math.pi))), scale


def _newton(f, z: complex, h: float, scale: float, max_iter: int = 60):
    for _ in range(max_iter):
        fz = complex(f(np.array([z]))[0])
        if abs(fz) <= 1e-12 * scale:
            return z, True
        df = complex((f(np.array([z + h]))[0] - f(np.array([z - h]))[0]) / (2 * h))
        if df == 0:
            return z, False
        step = fz / df
        z = z - step
        if abs(step) < 1e-15 * (1 + abs(z)):
            fz = complex(f(np.array([z]))[0])
            return z, abs(fz) <= 1e-8 * scale
    return z, False


def find_zeros(f, window, seed: int = 0, min_size: float = 1e-9, max_jitter: int = 8,
               wind: int = 0) -> PointProcessSample:
    """Zeros of a vectorized holomorphic f in an axis-aligned window (x0, x1, y0, y1).

    Counts come from the boundary argument principle; rectangles holding zeros
    are split into four (split point jittered deterministically from `seed`)
    until each holds one zero, which Newton's method with a central-difference
    derivative then refines. Rectangles that shrink below `min_size` report a
    single point carrying the remaining count as its multiplicity.
    """
    x0, x1, y0, y1 = (float(v) for v in window)
    meta = {"window": [x0, x1, y0, y1], "seed": int(seed)}
    if isinstance(f, FieldEvaluator):
        meta.update({"L": f.L, "wind": f.wind})
        wind = f.wind
    if not (x1 > x0 and y1 > y0):
        return PointProcessSample.empty("field-zero", meta)
    rng = np.random.default_rng(seed)
    # a zero on the window edge: widen the window slightly and filter afterwards
    size = max(x1 - x0, y1 - y0)
    outer, pad = (x0, x1, y0, y1), 0.0
    for attempt in range(max_jitter + 1):
        try:
            total, scale = winding_count(f, outer)
            break
        except _BoundaryZero:
            pad = size * 1e-7 * (1 + rng.uniform()) * 4 ** attempt
            outer = (x0 - pad, x1 + pad, y0 - pad, y1 + pad)
    else:
        raise SolverError(f"phase tracking failed on the boundary of window {window}")
    found = []

    def solve(rect, count, scale):
        if count == 0:
            return
        rx0, rx1, ry0, ry1 = rect
        size = max(rx1 - rx0, ry1 - ry0)
        center = complex(0.5 * (rx0 + rx1), 0.5 * (ry0 + ry1))
        if count == 1 or size < min_size:
            try:
                z, ok = _newton(f, center, max(size, 1e-6) * 1e-6, scale)
            except RegionError:
                z, ok = center, False
            pad = 1e-9 * max(size, 1.0)
            inside = rx0 - pad <= z.real <= rx1 + pad and ry0 - pad <= z.imag <= ry1 + pad
            if ok and inside and count == 1:
                found.append((z, 1))
                return
            if size < min_size:
                found.append((z if ok and inside else center, count))
                return
        for _ in range(max_jitter):
            sx = rx0 + (rx1 - rx0) * (0.5 + rng.uniform(-0.05, 0.05))
            sy = ry0 + (ry1 - ry0) * (0.5 + rng.uniform(-0.05, 0.05))
            kids = [(rx0, sx, ry0, sy), (sx, rx1, ry0, sy), (rx0, sx, sy, ry1), (sx, rx1, sy, ry1)]
            try:
                counts = [winding_count(f, r) for r in kids]
            except _BoundaryZero:
                continue
            if sum(c for c, _ in counts) != count:
                continue
            for r, (c, sc) in zip(kids, counts):
                solve(r, c, sc)
            return
        raise SolverError(f"subdivision of {rect} did not reproduce its zero count {count}")

    if total < 0:
        raise SolverError(f"negative winding {total} on window {window}: f is not holomorphic there")
    solve(outer, total, scale)
    if pad:
        found = [(z, m) for z, m in found
                 if x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad]
        total = sum(m for _, m in found)
    found.sort(key=lambda p: (p[0].real, p[0].imag))
    pts = np.array([z for z, _ in found], dtype=complex)
    mult = np.array([m for _, m in found], dtype=int)
    meta["count"] = int(total)
    return PointProcessSample(pts, np.full(pts.size, wind, dtype=int), mult, "field-zero", meta)


def check_window(s: Symbol, wind: int, window, eps: float, n: int = 9) -> None:
    """Probe an n x n grid (edges included) for membership in the shrunk region."""
    x0, x1, y0, y1 = window
    xs, ys = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n))
    zs = (xs + 1j * ys).reshape(-1)
    lams = solve_lambda_many(s, zs)
    d0, _ = region_arrays(s, lams)
    if np.any(d0 != s.d1 - wind):
        raise RegionError(f"window {window} leaves the region of wind index {wind}")
    if np.any(distance_to_curve_many(s, zs) < eps):
        raise RegionError(f"window {window} comes within {eps} of the symbol curve")
