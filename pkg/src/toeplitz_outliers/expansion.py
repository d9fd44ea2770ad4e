"""Expansion of det(T_N(a(z)) + N^-g E_N) in the size of the noise minor.

P_k(z) sums sign * det T[X^c; Y^c] * N^{-gk} det E[X; Y] over |X| = |Y| = k.
Through Cauchy-Binet on T_{N+d2}(a, z; d) = a_{d1} prod (J + l_i) each Toeplitz
minor becomes a sum over interlacing index chains, which is what the truncated
dominant term P^L is built from.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetError, DomainError, RegionError
from .linalg import LogComplex, build_toeplitz
from .noise import NoiseSource, sample_block
from .roots import RegionClass, classify_region
from .symbol import Symbol

DIRECT_MAX_N = 10
CHAIN_BUDGET = 10_000_000


def subset_sign(subset) -> int:
    """Sign of the permutation listing `subset` (1-based) first, then the rest of
    {1, 2, ...} in order: (-1)^{sum_j (x_j - j)}."""
    xs = sorted(subset)
    return -1 if (sum(xs) - len(xs) * (len(xs) + 1) // 2) % 2 else 1


def compute_Pk(s: Symbol, N: int, z: complex, k: int, gamma: float,
               src: NoiseSource) -> LogComplex:
    """Direct sum for P_k(z); only feasible for N <= 10."""
    if N > DIRECT_MAX_N:
        raise BudgetError(f"direct P_k summation is limited to N <= {DIRECT_MAX_N}")
    if not 0 <= k <= N:
        raise DomainError("need 0 <= k <= N")
    T = build_toeplitz(s, N, z)
    E = sample_block(src, N)
    subsets = [np.array(c, dtype=int) for c in combinations(range(N), k)]
    comps = [np.setdiff1d(np.arange(N), c) for c in subsets]
    signs = np.array([subset_sign(c + 1) for c in subsets], dtype=float)
    X = np.array(subsets).reshape(len(subsets), k)
    Xc = np.array(comps).reshape(len(comps), N - k)
    t_minors = np.linalg.det(T[Xc[:, None, :, None], Xc[None, :, None, :]])
    e_minors = np.linalg.det(E[X[:, None, :, None], X[None, :, None, :]])
    total = np.sum(signs[:, None] * signs[None, :] * t_minors * e_minors)
    return LogComplex.from_complex(total * float(N) ** (-gamma * k))


# ---------------------------------------------------------------------------
# Index chains


@dataclass(frozen=True)
class IndexChain:
    """Rows X_1..X_{d+1}, each k+d2 increasing integers in [1, N+d2]."""

    N: int
    k: int
    d2: int
    rows: tuple

    @property
    def X(self) -> tuple:
        return tuple(x for x in self.rows[0] if x <= self.N)

    @property
    def Y(self) -> tuple:
        return tuple(y - self.d2 for y in self.rows[-1] if self.d2 < y <= self.N + self.d2)

    @property
    def d(self) -> int:
        return len(self.rows) - 1


def level_exponent(upper, lower, N: int, d2: int) -> int:
    """Exponent l_i of the bidiagonal minor (J + l Id)[X_i^c; X_{i+1}^c]."""
    K = len(upper)
    return (lower[0] + sum(lower[j] - upper[j - 1] for j in range(1, K))
            + (N + d2 - upper[K - 1]) - K)


def hat_exponents(chain: IndexChain, d0: int) -> tuple:
    """hat l_i: N + d2 - l_i for i <= d0, l_i otherwise."""
    out = []
    for i in range(chain.d):
        ell = level_exponent(chain.rows[i], chain.rows[i + 1], chain.N, chain.d2)
        out.append(chain.N + chain.d2 - ell if i < d0 else ell)
    return tuple(out)


def is_interlaced(chain: IndexChain) -> bool:
    for up, lo in zip(chain.rows, chain.rows[1:]):
        K = len(up)
        for j in range(K):
            if not lo[j] <= up[j]:
                return False
            if j + 1 < K and not up[j] < lo[j + 1]:
                return False
    return True


def _next_rows(upper, level, d0, N, d2, last, budget, exact):
    """Rows X_{i+1} below `upper` with hat exponent <= budget, paired with it."""
    K = len(upper)
    low_side = level < d0
    fixed = 0 if low_side else N + d2 - upper[-1]
    if fixed > budget:
        return
    lo = [1] + [upper[j - 1] + 1 for j in range(1, K)]
    hi = list(upper)
    if last:
        for j in range(min(d2, K)):
            if not lo[j] <= j + 1 <= hi[j]:
                return
            lo[j] = hi[j] = j + 1
    row = [0] * K

    def rec(j, acc):
        if j == K:
            total = acc + fixed
            if exact is None or total == exact:
                yield tuple(row), total
            return
        remaining = K - j - 1
        if low_side:
            # term U_j - v + 1 >= 1; descend v from U_j
            for v in range(hi[j], lo[j] - 1, -1):
                t = upper[j] - v + 1
                if acc + t + remaining > budget:
                    break
                row[j] = v
                yield from rec(j + 1, acc + t)
        else:
            base = 1 if j == 0 else upper[j - 1] + 1
            for v in range(lo[j], hi[j] + 1):
                t = v - base
                if acc + t + fixed > budget:
                    break
                row[j] = v
                yield from rec(j + 1, acc + t)

    yield from rec(0, 0)


def iter_chains(s: Symbol, N: int, k: int, d0: int, max_hat=None, hat_ell=None,
                budget: int = CHAIN_BUDGET):
    """Yield (chain, hat_ell) for pinned interlacing chains.

    Either `max_hat` (an int or per-level list of upper bounds) or an exact
    `hat_ell` target restricts the search; with neither, all chains are produced.
    """
    d, d2 = s.d, s.d2
    if k < 1:
        raise DomainError("chains need k >= 1")
    if hat_ell is not None:
        bounds = list(hat_ell)
        exact = list(hat_ell)
    else:
        cap = 10 ** 9 if max_hat is None else max_hat
        bounds = list(cap) if isinstance(cap, (list, tuple)) else [cap] * d
        exact = [None] * d
    pinned_top = tuple(range(N + 1, N + d2 + 1))
    count = 0
    rows = [None] * (d + 1)
    hats = [0] * d

    def rec(level):
        nonlocal count
        if level == d:
            count += 1
            if count > budget:
                raise BudgetError(f"chain enumeration exceeded budget {budget}")
            yield IndexChain(N, k, d2, tuple(rows)), tuple(hats)
            return
        for row, h in _next_rows(rows[level], level, d0, N, d2, level == d - 1,
                                 bounds[level], exact[level]):
            rows[level + 1] = row
            hats[level] = h
            yield from rec(level + 1)

    for X in combinations(range(1, N + 1), k):
        rows[0] = X + pinned_top
        yield from rec(0)


def enumerate_chains(s: Symbol, N: int, k: int, hat_ell, d0: int,
                     budget: int = CHAIN_BUDGET) -> list:
    hat_ell = list(hat_ell)
    if len(hat_ell) != s.d:
        raise DomainError("hat_ell needs d entries")
    if any(hat_ell[i] < k + s.d2 for i in range(d0)):
        return []
    return [c for c, _ in iter_chains(s, N, k, d0, hat_ell=hat_ell, budget=budget)]


def count_pairs(s: Symbol, N: int, k: int, hat_ell, d0: int,
                budget: int = CHAIN_BUDGET) -> int:
    """Number of chain pairs in the same class sharing X_1 and X_{d+1}."""
    groups = Counter((c.rows[0], c.rows[-1]) for c in enumerate_chains(s, N, k, hat_ell, d0, budget))
    return sum(v * v for v in groups.values())


def counting_bound(s: Symbol, N: int, k: int, hat_ell, d0: int) -> int:
    """Binomial product bounding count_pairs (wind index d1 - d0)."""
    wind = s.d1 - d0
    d2 = s.d2
    m = k - abs(wind)
    if m < 0:
        return 0
    out = math.comb(N + d2, m)
    for i, h in enumerate(hat_ell):
        if i < d0:
            out *= math.comb(h - 1, k + d2 - 1) ** 2 if h >= 1 else 0
        else:
            out *= math.comb(h + k + d2, k + d2) ** 2
    return out


# ---------------------------------------------------------------------------
# Truncated dominant term


def noise_indices(chain_X, chain_Y, N: int, d2: int, wind: int, coupling: str):
    """Row and column indices into E_inf for the minor E_N[X; Y].

    "block": E_N is the leading block, indices unchanged.
    "aligned": E_N is read through the index maps that carry chains to field
    tableaux, so the minor equals (up to row/column order) the minor of E_inf
    used by the field; this makes the truncation independent of N.
    """
    if coupling == "block":
        return list(chain_X), list(chain_Y)
    if coupling != "aligned":
        raise DomainError(f"unknown coupling {coupling!r}")
    if wind > 0:
        return [N + d2 + 1 - x for x in chain_X], [y + d2 for y in chain_Y]
    return list(chain_X), [N + 1 - y for y in chain_Y]


def chain_sum(s: Symbol, N: int, k: int, region: RegionClass, src: NoiseSource,
              max_hat=None, coupling: str = "block", budget: int = CHAIN_BUDGET) -> complex:
    """sum over chains of prod l_i^{-+hat l_i} * sgn * det E[X; Y] (exactly rounded)."""
    lam = region.lam
    d0 = region.d0
    d2 = s.d2
    coef_cache = {}
    minor_cache = {}
    re, im = [], []
    for chain, hat in iter_chains(s, N, k, d0, max_hat=max_hat, budget=budget):
        coef = coef_cache.get(hat)
        if coef is None:
            coef = 1.0 + 0j
            for i, h in enumerate(hat):
                coef *= lam[i] ** (-h if i < d0 else h)
            coef_cache[hat] = coef
        key = (chain.X, chain.Y)
        minor = minor_cache.get(key)
        if minor is None:
            rows, cols = noise_indices(chain.X, chain.Y, N, d2, region.wind_index, coupling)
            minor = subset_sign(chain.X) * subset_sign(chain.Y) * complex(
                np.linalg.det(src.block(rows, cols)))
            minor_cache[key] = minor
        term = coef * minor
        re.append(term.real)
        im.append(term.imag)
    return complex(math.fsum(re), math.fsum(im))


def normalization(s: Symbol, N: int, gamma: float, region: RegionClass, k: int) -> LogComplex:
    """K(z) = a_{d1}^N N^{-g k} prod_{i <= d0} l_i^{N + d2}, in log form."""
    a = s.coef(s.d1)
    out = LogComplex(N * math.log(abs(a)) - gamma * k * math.log(N), N * np.angle(a))
    for lam in region.lambdas[:region.d0]:
        out = out * LogComplex((N + s.d2) * math.log(abs(lam)), (N + s.d2) * np.angle(lam))
    return LogComplex.from_complex(1.0) * out


def compute_Phat_L(s: Symbol, N: int, z: complex, gamma: float, L: int, src: NoiseSource,
                   region: RegionClass = None, coupling: str = "block",
                   check_window: bool = True) -> complex:
    """L-truncated normalized dominant term a_{d1}^{-|w|} * chain_sum(max hat <= L).

    `gamma` enters only through the normalization K(z), which is divided out;
    it is accepted so callers can pass one parameter set to every path.
    """
    if region is None:
        region = classify_region(s, z)
    wind = region.wind_index
    if wind == 0:
        raise RegionError("z lies in S_0, where no noise term dominates")
    if L > 64:
        raise DomainError("L must be <= 64")
    if check_window and not N + s.d2 > 2 * L + 2 * s.d:
        raise DomainError(f"need N + d2 > 2L + 2d for an N-stable truncation (N={N}, L={L})")
    k = abs(wind)
    total = chain_sum(s, N, k, region, src, max_hat=L, coupling=coupling)
    return total * s.coef(s.d1) ** (-k)
