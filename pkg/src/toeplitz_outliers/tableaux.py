"""Field tableaux: pairs of semistandard tableaux indexing the limiting fields.

A field tableau is an SSYT that also increases strictly along south-west
diagonals ((i, j) -> (i+1, j-1)) and has x_{i,1} = i for i <= d2. Pairs
(x, y) with shapes (mu1, mu2) fixed by the winding index carry exponents c_i,
row/column index sets Xhat/Yhat into the noise array, and a sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError, RegionError
from .expansion import IndexChain, subset_sign
from .roots import RegionClass
from .symbol import Symbol

PAIR_BUDGET = 10_000_000


def shapes(s: Symbol, wind: int):
    """(mu1, mu2) for winding index `wind`."""
    d, d1, d2 = s.d, s.d1, s.d2
    if wind == 0 or not -d2 <= wind <= d1:
        raise DomainError(f"wind index {wind} outside [-{d2}, {d1}] minus 0")
    d0 = d1 - wind
    if wind > 0:
        mu1 = tuple(range(d, d0, -1))
        mu2 = tuple(range(d - d0, 0, -1))
    else:
        mu1 = (d + 1,) * (-wind) + tuple(range(d, d0, -1))
        mu2 = (d + 1,) * (-wind) + tuple(range(d2 + wind, 0, -1))
    return mu1, mu2


def _c_forms(s: Symbol, wind: int):
    """Each c_i as a list of terms (pos cells, neg cells, const, min value).

    Cells are ("x" | "y", row, col), 1-based. Every term is non-negative on
    field tableaux; `min value` is a structural lower bound for it.
    """
    d, d1, d2 = s.d, s.d1, s.d2
    d0 = d1 - wind
    X = lambda i, j: ("x", i, j)  # noqa: E731
    Y = lambda i, j: ("y", i, j)  # noqa: E731
    forms = []
    for i in range(1, d + 1):
        terms = []
        if wind > 0:
            if i <= d0:
                for j in range(1, d - d0 + 1):
                    terms.append(([X(j, i + 1)], [X(j, i)], 1, 1))
            else:
                terms.append(([Y(1, d + 1 - i), X(1, i)], [], -1 - d2 - wind, None))
                for j in range(2, i - d0 + 1):
                    terms.append(([Y(j, d + 1 - i)], [Y(j - 1, d + 2 - i)], 0, 1))
                for j in range(2, d + 2 - i):
                    terms.append(([X(j, i)], [X(j - 1, i + 1)], 0, 1))
        else:
            if i <= d0:
                for j in range(1, d2 + 1):
                    terms.append(([X(j, i + 1)], [X(j, i)], 1, 1))
                for j in range(1, -wind + 1):
                    terms.append(([Y(j, d + 2 - i)], [Y(j, d + 1 - i)], 1, 1))
            else:
                terms.append(([Y(1, d + 1 - i), X(1, i)], [], -1 - d2 + wind, None))
                for j in range(2, i - d1 + 1):
                    terms.append(([Y(j, d + 1 - i)], [Y(j - 1, d + 2 - i)], 0, 1))
                for j in range(2, d + 2 - wind - i):
                    terms.append(([X(j, i)], [X(j - 1, i + 1)], 0, 1))
        forms.append(terms)
    return forms


def _cell(x, y, cell):
    tab = x if cell[0] == "x" else y
    return tab[cell[1] - 1][cell[2] - 1]


def exponents(s: Symbol, wind: int, x, y) -> tuple:
    """c_1..c_d of a pair."""
    out = []
    for terms in _c_forms(s, wind):
        total = 0
        for pos, neg, const, _ in terms:
            total += sum(_cell(x, y, c) for c in pos) - sum(_cell(x, y, c) for c in neg) + const
        out.append(total)
    return tuple(out)


def interval_sign(subset) -> int:
    """Sign of listing `subset` first within its covering interval [min, max]."""
    xs = sorted(subset)
    if not xs:
        return 1
    inv = sum(x - xs[0] - j for j, x in enumerate(xs))
    return -1 if inv % 2 else 1


def hat_sign(subset, reading: str = "natural") -> int:
    """ŝgn of an index set.

    "natural": permutation listing the set first, then the remaining integers of
    {1, ..., max} (the reading under which chain signs are preserved).
    "interval": the same within {min, ..., max}.
    """
    if reading == "natural":
        return subset_sign(subset)
    if reading == "interval":
        return interval_sign(subset)
    raise DomainError(f"unknown sign reading {reading!r}")


def sign_and_index_sets(s: Symbol, wind: int, x, y, reading: str = "natural"):
    """(Xhat, Yhat, sign) of a pair."""
    d, d2 = s.d, s.d2
    if wind > 0:
        xh = tuple(x[i - 1][0] for i in range(d2 + 1, wind + d2 + 1))
        yh = tuple(y[i - 1][0] for i in range(d2 + 1, wind + d2 + 1))
    else:
        xh = tuple(y[i - 1][d] for i in range(1, -wind + 1))
        yh = tuple(x[i - 1][d] for i in range(1, -wind + 1))
    return xh, yh, hat_sign(xh, reading) * hat_sign(yh, reading)


@dataclass(frozen=True)
class FieldTableauPair:
    wind: int
    x: tuple
    y: tuple
    c: tuple
    Xhat: tuple
    Yhat: tuple
    sign: int

    def dump(self) -> str:
        """Rows separated by `|`, cells by spaces, the two tableaux by ` || `."""
        fmt = lambda t: "|".join(" ".join(str(v) for v in row) for row in t)  # noqa: E731
        return f"{fmt(self.x)} || {fmt(self.y)}"


def parse_tableau(text: str) -> tuple:
    return tuple(tuple(int(v) for v in row.split()) for row in text.strip().split("|"))


def make_pair(s: Symbol, wind: int, x, y, reading: str = "natural") -> FieldTableauPair:
    x = tuple(tuple(r) for r in x)
    y = tuple(tuple(r) for r in y)
    xh, yh, sg = sign_and_index_sets(s, wind, x, y, reading)
    return FieldTableauPair(wind, x, y, exponents(s, wind, x, y), xh, yh, sg)


def is_field_tableau(tab, shape, d2: int) -> bool:
    if tuple(len(r) for r in tab) != tuple(shape):
        return False
    for i, row in enumerate(tab):
        for j, v in enumerate(row):
            if v < 1:
                return False
            if j and v < row[j - 1]:
                return False
            if i and v <= tab[i - 1][j]:
                return False
            if i and j + 1 < len(tab[i - 1]) and v <= tab[i - 1][j + 1]:
                return False
        if i < d2 and row[0] != i + 1:
            return False
    return True


def is_valid_pair(s: Symbol, wind: int, x, y) -> bool:
    mu1, mu2 = shapes(s, wind)
    if not (is_field_tableau(x, mu1, s.d2) and is_field_tableau(y, mu2, s.d2)):
        return False
    return all(c >= 0 for c in exponents(s, wind, x, y))


def _walk_pairs(s: Symbol, wind: int, L: int, c_target, cap, budget, visit,
                prefix=None) -> int:
    """Visit every pair with max c_i <= L (or with c equal to `c_target`).

    `visit(cell_value, c)` gets the live value lookup ("x"|"y", row, col) -> int
    and the exponent list; it must copy what it keeps. `prefix` optionally
    fixes some cells {("x"|"y", row, col): value}. Returns the pair count.

    Depth-first filling of x then y in row-major order. Each c_i is a sum of
    terms that are non-negative on field tableaux. Unassigned cells carry the
    minimum forced by the tableau order, which gives a lower bound for every
    c_i; its part that cannot fall as the current cell grows stops the value
    loop. Cells bounded only through later cells get an upper limit from the
    pins and the remaining slack of each c_i.
    """
    if L > 64:
        raise DomainError("L must be <= 64")
    d, d2 = s.d, s.d2
    mu1, mu2 = shapes(s, wind)
    if cap is None:
        cap = (d + 1) * (L + 1) + d2 + 1
    bound = list(c_target) if c_target is not None else [L] * d
    cells = [("x", i + 1, j + 1) for i, n in enumerate(mu1) for j in range(n)]
    cells += [("y", i + 1, j + 1) for i, n in enumerate(mu2) for j in range(n)]
    index = {c: n for n, c in enumerate(cells)}
    ncell = len(cells)
    try:
        fixed = {index[c]: int(v) for c, v in (prefix or {}).items()}
    except KeyError as exc:
        raise DomainError(f"prefix cell {exc} is not in the shapes {mu1}, {mu2}") from None

    # static minimal values (pins and the three strictness/weakness constraints)
    static = [0] * ncell
    preds = []
    for n, (t, i, j) in enumerate(cells):
        left = index.get((t, i, j - 1))
        up = index.get((t, i - 1, j))
        upright = index.get((t, i - 1, j + 1))
        preds.append((left, up, upright, i if i <= d2 and j == 1 else None))
        lo = 1
        if left is not None:
            lo = max(lo, static[left])
        if up is not None:
            lo = max(lo, static[up] + 1)
        if upright is not None:
            lo = max(lo, static[upright] + 1)
        if j == 1 and i <= d2:
            lo = i
        static[n] = lo

    # flat term table: (form, pos cells, neg cells, const, structural min, last cell)
    terms = []
    for i, ft in enumerate(_c_forms(s, wind)):
        for pos, neg, const, mval in ft:
            p = [index[c] for c in pos]
            q = [index[c] for c in neg]
            if mval is None:
                mval = const + sum(static[v] for v in p)
            terms.append((i, p, q, const, mval, max(p + q)))
    complete_at = [-1] * d
    for i, _, _, _, _, last in terms:
        complete_at[i] = max(complete_at[i], last)
    done_at = [[i for i in range(d) if complete_at[i] == n] for n in range(ncell)]

    # cells whose propagated minimum depends on cell n, and terms that see them
    succ = [[] for _ in range(ncell)]
    for m in range(ncell):
        for p in preds[m][:3]:
            if p is not None:
                succ[p].append(m)
    down = []
    for n in range(ncell):
        seen, stack = set(), list(succ[n])
        while stack:
            m = stack.pop()
            if m not in seen:
                seen.add(m)
                stack.extend(succ[m])
        down.append(sorted(seen))
    touched = []
    falling = []
    for n in range(ncell):
        cells_n = set(down[n]) | {n}
        touched.append([t for t, (_, p, q, *_r) in enumerate(terms) if cells_n & set(p + q)])
        # live terms that can decrease while cell n grows: n negative, a positive cell open
        falling.append([t for t, (_, p, q, _c, _m, last) in enumerate(terms)
                        if n in q and all(v <= n for v in q) and last > n])

    # Cells that never sit on the positive side of a live term get no upper
    # limit from the bounds above; for them an upper bound is found by
    # relaxing the difference constraints (tableau order plus each term's
    # remaining slack) over the unassigned cells.
    flagged = [not any(n in p and all(v <= n for v in q) for _, p, q, *_r in terms)
               for n in range(ncell)]
    order_edges = [(m, p, 0 if k == 0 else 1) for m in range(ncell)
                   for k, p in enumerate(preds[m][:3]) if p is not None]

    # static upper limits from the pinned cells through the tableau order
    static_ub = [cap if preds[m][3] is None else preds[m][3] for m in range(ncell)]
    for m, p, w in sorted(order_edges, reverse=True):
        static_ub[p] = min(static_ub[p], static_ub[m] - w)

    # vals holds assigned values for cells <= n and propagated minima beyond
    vals = list(static)

    def upper(n):
        ub = list(static_ub)
        for m in range(n):
            ub[m] = vals[m]
        slack = []
        for t, (i, p, q, const, mval, last) in enumerate(terms):
            slack.append(bound[i] - form[i] + tval[t] - const)
        for _ in range(ncell):
            changed = False
            for m, p, w in order_edges:
                if p >= n and ub[m] - w < ub[p]:
                    ub[p] = ub[m] - w
                    changed = True
            for t, (i, p, q, const, mval, last) in enumerate(terms):
                room = slack[t] + sum(ub[v] for v in q)
                for a in p:
                    if a < n:
                        continue
                    lim = room - sum(vals[b] for b in p if b != a)
                    if lim < ub[a]:
                        ub[a] = lim
                        changed = True
            if not changed:
                break
        return ub[n]

    def term_full(t, n):
        _, p, q, const, mval, last = terms[t]
        if any(v > n for v in q):
            return mval
        val = const + sum(vals[v] for v in p) - sum(vals[v] for v in q)
        return val if last <= n or val >= mval else mval

    tval = [term_full(t, -1) for t in range(len(terms))]
    form = [0] * d
    for t, tr in enumerate(terms):
        form[tr[0]] += tval[t]
    count = 0
    lookup = lambda cell: vals[index[cell]]  # noqa: E731

    def emit():
        nonlocal count
        count += 1
        if count > budget:
            raise BudgetError(f"pair enumeration exceeded budget {budget}")
        visit(lookup, form)

    def rec(n):
        if n == ncell:
            emit()
            return
        lo = orig = vals[n]  # propagated minimum
        hi = static_ub[n]
        pin = preds[n][3]
        if pin is not None:
            if lo > pin:
                return
            lo = hi = pin
        if n in fixed:
            if not lo <= fixed[n] <= hi:
                return
            lo = hi = fixed[n]
        if flagged[n]:
            hi = min(hi, upper(n))
        dn, tn, fall, done = down[n], touched[n], falling[n], done_at[n]
        saved_vals = [vals[m] for m in dn]
        saved_t = [tval[t] for t in tn]
        saved_form = list(form)
        for v in range(lo, hi + 1):
            vals[n] = v
            for m in dn:
                left, up, upright, _ = preds[m]
                x = static[m]
                if left is not None and vals[left] > x:
                    x = vals[left]
                if up is not None and vals[up] >= x:
                    x = vals[up] + 1
                if upright is not None and vals[upright] >= x:
                    x = vals[upright] + 1
                vals[m] = x
            for t in tn:
                new = term_full(t, n)
                form[terms[t][0]] += new - tval[t]
                tval[t] = new
            # the monotone part of the bound decides when to stop increasing v
            mono = list(form)
            for t in fall:
                mono[terms[t][0]] -= tval[t] - terms[t][4]
            if any(a > b for a, b in zip(mono, bound)):
                break
            if any(a > b for a, b in zip(form, bound)):
                continue
            if c_target is not None and any(form[i] != bound[i] for i in done):
                continue
            rec(n + 1)
        vals[n] = orig
        for m, old in zip(dn, saved_vals):
            vals[m] = old
        for t, old in zip(tn, saved_t):
            tval[t] = old
        form[:] = saved_form

    rec(0)
    return count


def enumerate_pairs(s: Symbol, wind: int, L: int, c_target=None, cap: int = None,
                    budget: int = PAIR_BUDGET, reading: str = "natural", prefix=None) -> list:
    """All field tableau pairs with max c_i <= L, or with c equal to `c_target`.

    `prefix` restricts the search to pairs agreeing with a partial assignment
    {("x"|"y", row, col): value}.

    Output is in lexicographic order of the cell values (x row-major, then y).
    `cap` bounds every cell value; the default (d+1)(L+1)+d2+1 is never binding.
    """
    mu1, mu2 = shapes(s, wind)
    out = []

    def visit(cell, c):
        x = tuple(tuple(cell(("x", i + 1, j + 1)) for j in range(m)) for i, m in enumerate(mu1))
        y = tuple(tuple(cell(("y", i + 1, j + 1)) for j in range(m)) for i, m in enumerate(mu2))
        xh, yh, sg = sign_and_index_sets(s, wind, x, y, reading)
        out.append(FieldTableauPair(wind, x, y, tuple(c), xh, yh, sg))

    _walk_pairs(s, wind, L, c_target, cap, budget, visit, prefix)
    return out


def field_terms(s: Symbol, wind: int, L: int, budget: int = PAIR_BUDGET,
                reading: str = "natural"):
    """Compact form of enumerate_pairs: arrays (c, Xhat, Yhat, sign).

    Shapes (P, d), (P, k), (P, k), (P,) with k = |wind|.
    """
    d, d2 = s.d, s.d2
    k = abs(wind)
    if wind > 0:
        xcells = [("x", i, 1) for i in range(d2 + 1, wind + d2 + 1)]
        ycells = [("y", i, 1) for i in range(d2 + 1, wind + d2 + 1)]
    else:
        xcells = [("y", i, d + 1) for i in range(1, k + 1)]
        ycells = [("x", i, d + 1) for i in range(1, k + 1)]
    cs, xs, ys, sg = [], [], [], []

    def visit(cell, c):
        xh = [cell(v) for v in xcells]
        yh = [cell(v) for v in ycells]
        cs.append(tuple(c))
        xs.append(xh)
        ys.append(yh)
        sg.append(hat_sign(xh, reading) * hat_sign(yh, reading))

    _walk_pairs(s, wind, L, None, None, budget, visit)
    return (np.array(cs, dtype=np.int64).reshape(-1, d), np.array(xs, dtype=np.int64).reshape(-1, k),
            np.array(ys, dtype=np.int64).reshape(-1, k), np.array(sg, dtype=np.int64))


# ---------------------------------------------------------------------------
# Bijection with index chains


def _maps(s: Symbol, wind: int, N: int):
    """Cell -> (chain row, chain column, reflected?) for the chain/tableau maps."""
    d, d1, d2 = s.d, s.d1, s.d2
    d0 = d1 - wind
    mu1, mu2 = shapes(s, wind)
    out = {}
    if wind > 0:
        for i in range(1, wind + d2 + 1):
            for j in range(1, d + 2 - i):
                out[("x", i, j)] = (j, wind + d2 - i + 1, True)
            for j in range(1, d - d0 + 2 - i):
                out[("y", i, j)] = (d + 2 - j, i, False)
    else:
        for i in range(1, d2 + 1):
            for j in range(1, min(d + 1 - wind - i, d + 1) + 1):
                out[("x", i, j)] = (j, d2 - wind - i + 1, True)
        for i in range(1, d2 + 1):
            top = d + 1 if i <= -wind else d2 + 1 - i
            for j in range(1, top + 1):
                out[("y", i, j)] = (d + 2 - j, i, False)
    # shape sanity
    for t, mu in (("x", mu1), ("y", mu2)):
        cells = {(i + 1, j + 1) for i, n in enumerate(mu) for j in range(n)}
        mapped = {(i, j) for (tt, i, j) in out if tt == t}
        if cells != mapped:
            raise DomainError("internal: tableau maps do not match the shapes")
    return out


def chain_to_pair(s: Symbol, chain: IndexChain, wind: int,
                  reading: str = "natural") -> FieldTableauPair:
    """Image of a chain under the reflection maps (G for x, h for y)."""
    N, d2 = chain.N, chain.d2
    if chain.k != abs(wind):
        raise DomainError("chain size does not match |wind|")
    x_rows, y_rows = {}, {}
    for (t, i, j), (r, c, refl) in _maps(s, wind, N).items():
        v = chain.rows[r - 1][c - 1]
        v = N + d2 + 1 - v if refl else v
        (x_rows if t == "x" else y_rows).setdefault(i, {})[j] = v
    x = tuple(tuple(x_rows[i][j] for j in sorted(x_rows[i])) for i in sorted(x_rows))
    y = tuple(tuple(y_rows[i][j] for j in sorted(y_rows[i])) for i in sorted(y_rows))
    return make_pair(s, wind, x, y, reading)


def pair_to_chain(s: Symbol, pair: FieldTableauPair, N: int) -> IndexChain:
    """Inverse of chain_to_pair; every chain entry is covered by exactly one cell."""
    d, d2 = s.d, s.d2
    k = abs(pair.wind)
    grid = [[None] * (k + d2) for _ in range(d + 1)]
    for (t, i, j), (r, c, refl) in _maps(s, pair.wind, N).items():
        v = (pair.x if t == "x" else pair.y)[i - 1][j - 1]
        v = N + d2 + 1 - v if refl else v
        if grid[r - 1][c - 1] is not None and grid[r - 1][c - 1] != v:
            raise DomainError("pair does not come from a chain at this N")
        grid[r - 1][c - 1] = v
    if any(v is None for row in grid for v in row):
        raise DomainError("internal: maps do not cover the chain")
    return IndexChain(N, k, d2, tuple(tuple(r) for r in grid))


def coefficient(s: Symbol, pair: FieldTableauPair, region: RegionClass) -> complex:
    """prod_{i <= d0} l_i^{-c_i} * prod_{i > d0} l_i^{c_i}."""
    if region.wind_index != pair.wind:
        raise RegionError(f"pair has wind {pair.wind}, region has {region.wind_index}")
    out = 1.0 + 0j
    for i, (lam, c) in enumerate(zip(region.lambdas, pair.c)):
        out *= lam ** (-c if i < region.d0 else c)
    return out


def noise_minor(pair: FieldTableauPair, src) -> complex:
    """det E_inf[Xhat; Yhat]."""
    return complex(np.linalg.det(src.block(pair.Xhat, pair.Yhat)))
