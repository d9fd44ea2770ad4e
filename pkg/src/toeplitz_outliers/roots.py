"""Roots of l^{d2}(a(l) - z) and region classification by root moduli."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, OnCurveError, SolverError, UnitModulusError
from .symbol import Symbol, distance_to_curve, winding_number

MAX_SWEEPS = 200
RESIDUAL_TOL = 1e-13
UNIT_TOL = 1e-8
CLUSTER_TOL = 1e-7


def _horner(p: np.ndarray, x: np.ndarray):
    """Value and derivative of sum p[..., m] x^m, batched over leading axes.

    p has shape (B, d+1) lowest degree first, x has shape (B, d).
    """
    val = np.zeros_like(x) + p[:, -1:]
    der = np.zeros_like(x)
    for m in range(p.shape[1] - 2, -1, -1):
        der = der * x + val
        val = val * x + p[:, m:m + 1]
    return val, der


def aberth_batch(p: np.ndarray, max_sweeps: int = MAX_SWEEPS, tol: float = RESIDUAL_TOL):
    """Simultaneous roots of a batch of polynomials of common degree d.

    p: (B, d+1) coefficients, lowest degree first, p[:, d] != 0.
    Returns (B, d) roots, each polished by one Newton step.
    """
    p = np.atleast_2d(np.asarray(p, dtype=complex))
    B, n = p.shape
    d = n - 1
    if d == 1:
        return -p[:, :1] / p[:, 1:]
    lead = p[:, -1:]
    const = np.abs(p[:, :1])
    radius = (const / np.abs(lead)) ** (1.0 / d)
    radius = np.where(radius > 0, radius, 1.0)
    angles = 2.0 * np.pi * np.arange(d) / d + 0.4
    x = radius * np.exp(1j * angles)[None, :] * (1.0 + 0.01 * np.arange(d))[None, :]
    absp = np.abs(p)
    active = np.ones(B, dtype=bool)
    eye = np.eye(d, dtype=bool)
    res = None
    for _ in range(max_sweeps):
        xa = x[active]
        pa = p[active]
        val, der = _horner(pa, xa)
        scale = _horner(absp[active], np.abs(xa).astype(complex))[0].real
        res = np.abs(val) / np.maximum(scale, 1e-300)
        done = np.all(res < tol, axis=1)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            break
        xa, val, der = xa[~done], val[~done], der[~done]
        diff = xa[:, :, None] - xa[:, None, :]
        diff[:, eye] = 1.0
        inv = 1.0 / diff
        inv[:, eye] = 0.0
        with np.errstate(all="ignore"):
            ratio = val / der
            step = ratio / (1.0 - ratio * inv.sum(axis=2))
        step = np.where(np.isfinite(step), step, 0.0)
        x[idx[~done]] = xa - step
    if active.any():
        raise SolverError("Aberth iteration did not converge", residuals=res)
    val, der = _horner(p, x)
    with np.errstate(all="ignore"):
        newton = val / der
    ok = np.isfinite(newton) & (np.abs(newton) < 1e-6 * np.maximum(np.abs(x), 1.0))
    return np.where(ok, x - newton, x)


def sort_lambdas(lams: np.ndarray) -> np.ndarray:
    """Order each row by modulus non-increasing, ties by ascending phase."""
    lams = np.atleast_2d(lams)
    mod = np.round(np.abs(lams), 11)
    out = np.empty_like(lams)
    for r in range(lams.shape[0]):
        order = np.lexsort((np.angle(lams[r]), -mod[r]))
        out[r] = lams[r, order]
    return out


def solve_lambda_many(s: Symbol, zs) -> np.ndarray:
    """lambda_l(z) for each z: negated roots of l^{d2}(a(l) - z), sorted."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    base = s.poly_coeffs(0.0)
    p = np.tile(base, (zs.size, 1))
    p[:, s.d2] -= zs
    return sort_lambdas(-aberth_batch(p))


def solve_lambda(s: Symbol, z: complex) -> list:
    return list(solve_lambda_many(s, [z])[0])


def region_arrays(s: Symbol, lams: np.ndarray):
    """d0 and margin for a batch of sorted lambda rows (no error checks)."""
    mods = np.abs(lams)
    d0 = np.sum(mods > 1.0, axis=1)
    # closeness of each root to the unit circle; a root of modulus 1 gives margin 0
    near = np.where(mods > 1.0, 1.0 / np.where(mods > 0, mods, 1.0), mods)
    margin = 1.0 - near.max(axis=1)
    return d0, margin


@dataclass(frozen=True)
class RegionClass:
    z: complex
    lambdas: tuple
    d0: int
    wind_index: int
    margin: float
    clustered: bool = False

    @property
    def lam(self) -> np.ndarray:
        return np.array(self.lambdas, dtype=complex)


def min_separation(lams) -> float:
    lams = np.asarray(lams)
    if lams.size < 2:
        return np.inf
    diff = np.abs(lams[:, None] - lams[None, :])
    return float(diff[~np.eye(lams.size, dtype=bool)].min())


def classify_region(s: Symbol, z: complex, min_dist: float = 1e-6,
                    check_winding: bool = True) -> RegionClass:
    z = complex(z)
    if min_dist > 0 and distance_to_curve(s, z) <= min_dist:
        raise OnCurveError(f"z={z} is within {min_dist} of the symbol curve")
    lams = solve_lambda_many(s, [z])[0]
    mods = np.abs(lams)
    if np.any(np.abs(mods - 1.0) < UNIT_TOL):
        raise UnitModulusError(f"root of modulus ~1 at z={z}: {mods}")
    d0, margin = region_arrays(s, lams[None, :])
    d0 = int(d0[0])
    wind = s.d1 - d0
    if check_winding:
        w = winding_number(s, z)
        if w != wind:
            raise ConsistencyError(f"root count gives {wind}, phase winding gives {w} at z={z}")
    return RegionClass(z, tuple(complex(v) for v in lams), d0, wind, float(margin[0]),
                       min_separation(lams) < CLUSTER_TOL)
