import itertools
from collections import Counter

import numpy as np
import pytest

from toeplitz_outliers.errors import DomainError, RegionError
from toeplitz_outliers.expansion import iter_chains, subset_sign
from toeplitz_outliers.roots import RegionClass, classify_region
from toeplitz_outliers.symbol import ELLIPSE, JORDAN, LIMACON, Symbol
from toeplitz_outliers.tableaux import (chain_to_pair, coefficient, enumerate_pairs, exponents,
                                        field_terms, hat_sign, is_field_tableau, is_valid_pair,
                                        make_pair, pair_to_chain, parse_tableau, shapes)

SYM33 = Symbol.parse("-3:1,-2:1,-1:1,1:1,2:1,3:1")
TOP = ("1 1 1 2 4 6|2 2 3 6 7|3 5 9 9|6 10 12", "1 1 1 9|2 2 10|3 11|12")
BOTTOM = ("1 1 1 6 7 8 8|2 2 10 10 10 11|3 12 12 12 12", "1 1 1 8 8 11 12|2 2|3")


def parity(perm):
    inv = sum(perm[a] > perm[b] for a in range(len(perm)) for b in range(a + 1, len(perm)))
    return -1 if inv % 2 else 1


def test_shapes():
    assert shapes(SYM33, 1) == ((6, 5, 4, 3), (4, 3, 2, 1))
    assert shapes(SYM33, -1) == ((7, 6, 5), (7, 2, 1))
    assert shapes(SYM33, -3) == ((7, 7, 7), (7, 7, 7))
    assert shapes(ELLIPSE, -1) == ((3,), (3,))
    assert shapes(JORDAN, 1) == ((1,), (1,))
    with pytest.raises(DomainError):
        shapes(LIMACON, 3)


def test_figure_fixtures_are_valid_with_printed_exponents():
    top = make_pair(SYM33, 1, parse_tableau(TOP[0]), parse_tableau(TOP[1]))
    bot = make_pair(SYM33, -1, parse_tableau(BOTTOM[0]), parse_tableau(BOTTOM[1]))
    assert top.c == (10, 11, 12, 3, 3, 5)
    assert bot.c == (14, 15, 9, 12, 7, 9)
    assert is_valid_pair(SYM33, 1, top.x, top.y)
    assert is_valid_pair(SYM33, -1, bot.x, bot.y)
    assert top.dump() == " || ".join(TOP)


def test_invalid_tableaux_rejected():
    x = [list(r) for r in parse_tableau(TOP[0])]
    y = parse_tableau(TOP[1])
    x[1][1] = 1  # column: x_{1,2} = 1 above it
    assert not is_valid_pair(SYM33, 1, x, y)
    x = [list(r) for r in parse_tableau(TOP[0])]
    x[2][0] = 4  # first-column pin x_{3,1} = 3
    assert not is_valid_pair(SYM33, 1, x, y)
    x = [list(r) for r in parse_tableau(TOP[0])]
    x[1][2] = 2  # diagonal: x_{2,3} must exceed x_{1,4} = 2
    assert not is_field_tableau(x, shapes(SYM33, 1)[0], 3)


def test_fixture_sign_by_inversion_count():
    top = make_pair(SYM33, 1, parse_tableau(TOP[0]), parse_tableau(TOP[1]))
    assert top.Xhat == (6,) and top.Yhat == (12,)

    def natural(sub):
        m = max(sub)
        return parity(list(sub) + [v for v in range(1, m + 1) if v not in sub])

    assert top.sign == natural(top.Xhat) * natural(top.Yhat)


def test_hat_sign_readings():
    assert hat_sign((4,), "interval") == 1
    assert hat_sign((2, 3), "interval") == 1
    assert hat_sign((2, 4), "interval") == parity([2, 4, 3])
    for sub in itertools.combinations(range(1, 8), 3):
        rest = [v for v in range(1, max(sub) + 1) if v not in sub]
        assert hat_sign(sub) == parity(list(sub) + rest)
    with pytest.raises(DomainError):
        hat_sign((1,), "other")


def test_jordan_counts():
    c = Counter(p.c[0] for p in enumerate_pairs(JORDAN, 1, 12))
    assert all(c[k] == k + 1 for k in range(13))
    assert sum(c.values()) == 13 * 14 // 2


def _brute_pairs(s, wind, L, bound):
    mu1, mu2 = shapes(s, wind)
    cells1 = [(i, j) for i, r in enumerate(mu1) for j in range(r)]
    cells2 = [(i, j) for i, r in enumerate(mu2) for j in range(r)]
    out = set()
    for vals in itertools.product(range(1, bound + 1), repeat=len(cells1) + len(cells2)):
        x = [[0] * r for r in mu1]
        y = [[0] * r for r in mu2]
        for (i, j), v in zip(cells1, vals):
            x[i][j] = v
        for (i, j), v in zip(cells2, vals[len(cells1):]):
            y[i][j] = v
        if is_valid_pair(s, wind, x, y) and max(exponents(s, wind, x, y)) <= L:
            out.add((tuple(map(tuple, x)), tuple(map(tuple, y))))
    return out


@pytest.mark.parametrize("s,wind,L,bound", [(JORDAN, 1, 6, 9), (LIMACON, 1, 4, 9), (ELLIPSE, -1, 3, 9)])
def test_enumerate_pairs_vs_brute_force(s, wind, L, bound):
    got = {(p.x, p.y) for p in enumerate_pairs(s, wind, L)}
    assert got == _brute_pairs(s, wind, L, bound)


def test_enumerated_pairs_valid_and_truncated():
    for s, w in ((LIMACON, 2), (ELLIPSE, -1), (LIMACON, 1)):
        for p in enumerate_pairs(s, w, 5):
            assert is_valid_pair(s, w, p.x, p.y) and max(p.c) <= 5
            assert p == make_pair(s, w, p.x, p.y)


def test_c_target_and_prefix():
    allp = enumerate_pairs(LIMACON, 2, 5)
    target = allp[len(allp) // 2].c
    sub = enumerate_pairs(LIMACON, 2, 5, c_target=target)
    assert {(p.x, p.y) for p in sub} == {(p.x, p.y) for p in allp if p.c == target}
    pre = {("x", 1, 1): sub[0].x[0][0], ("x", 1, 2): sub[0].x[0][1]}
    some = enumerate_pairs(LIMACON, 2, 5, c_target=target, prefix=pre)
    assert sub[0] in some and all(p.x[0][:2] == sub[0].x[0][:2] for p in some)
    with pytest.raises(DomainError):
        enumerate_pairs(LIMACON, 2, 5, prefix={("z", 1, 1): 1})


def test_field_terms_match_pairs():
    C, XH, YH, SG = field_terms(LIMACON, 2, 5)
    pairs = enumerate_pairs(LIMACON, 2, 5)
    assert C.shape == (len(pairs), 2)
    assert sorted(map(tuple, np.hstack([C, XH, YH, SG[:, None]]))) == sorted(
        p.c + p.Xhat + p.Yhat + (p.sign,) for p in pairs)


@pytest.mark.parametrize("s,w", [(LIMACON, 1), (ELLIPSE, -1), (LIMACON, 2)])
def test_chain_bijection_small(s, w):
    L = 3
    N = 2 * L + 2 * s.d + s.d2 + 4
    d0 = s.d1 - w
    images = set()
    signs = set()
    for ch, hats in iter_chains(s, N, abs(w), d0, max_hat=L):
        p = chain_to_pair(s, ch, w)
        assert p.c == hats
        assert is_valid_pair(s, w, p.x, p.y)
        assert pair_to_chain(s, p, N) == ch
        images.add((p.x, p.y))
        signs.add(p.sign * subset_sign(ch.X) * subset_sign(ch.Y))
    assert images == {(p.x, p.y) for p in enumerate_pairs(s, w, L)}
    assert signs == {(-1) ** (abs(w) * (N + 1))}


def test_coefficient():
    z = 0.3 + 0.4j
    reg = classify_region(JORDAN, z)
    for p in enumerate_pairs(JORDAN, 1, 5):
        assert coefficient(JORDAN, p, reg) == pytest.approx((-z) ** p.c[0])
    lams = (2.0 + 1j, -1.5, 0.5j, 0.4, -0.3 + 0.1j, 0.2)
    reg = RegionClass(0j, lams, 2, 1, 0.5)
    top = make_pair(SYM33, 1, parse_tableau(TOP[0]), parse_tableau(TOP[1]))
    ref = lams[0] ** -10 * lams[1] ** -11 * lams[2] ** 12 * lams[3] ** 3 * lams[4] ** 3 * lams[5] ** 5
    assert coefficient(SYM33, top, reg) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(RegionError):
        coefficient(SYM33, top, RegionClass(0j, lams, 4, -1, 0.5))


def test_coefficient_margin_bound():
    for z, w in ((1.0, 1), (-0.2, 2)):
        reg = classify_region(LIMACON, z)
        for p in enumerate_pairs(LIMACON, w, 6):
            assert abs(coefficient(LIMACON, p, reg)) <= (1 - reg.margin) ** sum(p.c) * (1 + 1e-12)
