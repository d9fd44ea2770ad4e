import numpy as np
import pytest

from toeplitz_outliers.errors import RegionError
from toeplitz_outliers.field import (FieldEvaluator, calibrate_sign, check_window, closed_form,
                                     closed_form_monomials, eval_field, find_zeros, winding_count)
from toeplitz_outliers.noise import FixedNoise, NoiseSource
from toeplitz_outliers.roots import solve_lambda_many
from toeplitz_outliers.symbol import ELLIPSE, JORDAN, LIMACON


def test_zero_noise_gives_zero():
    fe = FieldEvaluator(LIMACON, 1, 6, NoiseSource(0, "zero"))
    assert eval_field(fe, 1.0) == 0


def test_jordan_is_power_series_in_z():
    src = NoiseSource(5)
    L = 10
    fe = FieldEvaluator(JORDAN, 1, L, src)
    for z in (0.3 + 0.2j, -0.5j, 0.0):
        ref = sum(z ** (x + y - 2) * src.entry(x, y)
                  for x in range(1, L + 2) for y in range(1, L + 2) if x + y - 2 <= L)
        assert eval_field(fe, z) == pytest.approx(ref, rel=1e-13, abs=1e-15)


def test_within_group_permutation_invariance():
    fe = FieldEvaluator(LIMACON, 2, 12, NoiseSource(1))
    lam = solve_lambda_many(LIMACON, [-0.2 + 0.02j, -0.25 - 0.01j])
    a, b = fe.eval_lambdas(lam), fe.eval_lambdas(lam[:, ::-1])
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_region_checked():
    fe = FieldEvaluator(LIMACON, 1, 4, NoiseSource(1))
    with pytest.raises(RegionError):
        fe(np.array([-0.2]))
    with pytest.raises(RegionError):
        fe(np.array([3.0]))


def test_deterministic():
    a = FieldEvaluator(ELLIPSE, -1, 6, NoiseSource(9))(np.array([0.1j]))
    b = FieldEvaluator(ELLIPSE, -1, 6, NoiseSource(9))(np.array([0.1j]))
    assert a.tobytes() == b.tobytes()


def test_closed_form_single_minor():
    mono = closed_form_monomials(LIMACON, 2, 4, FixedNoise({(1, 1): 1, (2, 2): 1}))
    assert {k: v for k, v in mono.items() if v != 0} == {(0, 0): 1}
    # i, j = 2, 3 and k, l = 1, 2: one-term W = (r2 / r1)^{i-k}, total r1 r2
    mono = closed_form_monomials(LIMACON, 2, 4, FixedNoise({(2, 1): 1, (3, 2): 1}))
    assert {k: v for k, v in mono.items() if v != 0} == {(1, 1): 1}


@pytest.mark.parametrize("s,w,zs", [(JORDAN, 1, [0.3 + 0.2j, -0.5j]), (LIMACON, 1, [0.5, 1.0, 0.3j]),
                                    (LIMACON, 2, [-0.2, -0.22 + 0.02j])])
def test_closed_form_matches_field(s, w, zs):
    L = 8
    sg = calibrate_sign(s, w, L, zs[0])
    assert sg in (1, -1)
    for seed in (0, 1):
        src = NoiseSource(seed)
        a = FieldEvaluator(s, w, L, src)(np.array(zs))
        b = closed_form(s, w, L, src, np.array(zs))
        assert np.max(np.abs(a - sg * b)) <= 1e-10 * np.max(np.abs(a))


def test_paper_sign_rule_inconsistent():
    L, zs = 8, np.array([-0.2, -0.22 + 0.02j])
    src = NoiseSource(7)
    a = FieldEvaluator(LIMACON, 2, L, src)(zs)
    sg = calibrate_sign(LIMACON, 2, L, zs[0])
    b = closed_form(LIMACON, 2, L, src, zs, sign_rule="paper")
    assert np.max(np.abs(a - sg * b)) > 1e-3 * np.max(np.abs(a))


def test_find_zeros_stubs():
    r = find_zeros(lambda z: np.asarray(z) - 0.3, (0, 1, 0, 1))
    assert r.count == 1 and r.points[0] == pytest.approx(0.3, abs=1e-10)
    w1, w2 = 0.2 + 0.1j, 0.7 + 0.6j
    r = find_zeros(lambda z: (np.asarray(z) - w1) * (np.asarray(z) - w2), (0, 1, 0, 1))
    assert r.count == 2
    assert sorted(r.points, key=abs) == pytest.approx([w1, w2], abs=1e-10)


def test_find_zeros_double_root_multiplicity():
    r = find_zeros(lambda z: (np.asarray(z) - 0.41 - 0.37j) ** 2, (0, 1, 0, 1))
    assert r.count == 2


def test_jordan_zero_count_equals_boundary_winding():
    fe = FieldEvaluator(JORDAN, 1, 20, NoiseSource(3))
    win = (-0.6, 0.6, -0.6, 0.6)
    r = find_zeros(fe, win, seed=3)
    count, _ = winding_count(fe, win)
    assert r.count == count
    assert np.all(np.abs(fe(r.points)) < 1e-10)
    assert r.metadata["count"] == r.count


def test_empty_window():
    fe = FieldEvaluator(JORDAN, 1, 8, NoiseSource(3))
    assert find_zeros(fe, (0.1, 0.1, 0.0, 0.2)).count == 0


def test_check_window():
    check_window(LIMACON, 1, (0.7, 1.3, -0.3, 0.3), 0.1)
    with pytest.raises(RegionError):
        check_window(LIMACON, 1, (-0.3, 0.3, -0.1, 0.1), 0.1)
