import numpy as np
import pytest

from krrcheck import InputError, KernelConfig, kernel_cross, kernel_eval, kernel_matrix, median_heuristic


def test_config_rejects_bad_gamma():
    with pytest.raises(InputError):
        KernelConfig(gamma=0.0)
    with pytest.raises(InputError):
        KernelConfig(gamma=-1.0)
    with pytest.raises(InputError):
        KernelConfig(gamma=1.0, family="matern")


def test_eval_identical_points_is_exactly_one():
    cfg = KernelConfig(gamma=0.5)
    assert kernel_eval(cfg, [0.0], [0.0]) == 1.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.standard_normal(4)
        assert kernel_eval(cfg, x, x) == 1.0


def test_eval_direct_formula():
    cfg = KernelConfig(gamma=0.5)
    assert kernel_eval(cfg, [0.0], [1.0]) == pytest.approx(np.exp(-0.5), rel=1e-15)
    cfg = KernelConfig(gamma=1.0)
    # squared distance (1,1)-(0,0) is 2
    assert kernel_eval(cfg, [1.0, 1.0], [0.0, 0.0]) == pytest.approx(np.exp(-2.0), rel=1e-15)


def test_eval_symmetric_and_bounded():
    cfg = KernelConfig(gamma=0.7)
    rng = np.random.default_rng(1)
    for _ in range(50):
        x, y = rng.standard_normal((2, 3))
        kxy = kernel_eval(cfg, x, y)
        assert kxy == kernel_eval(cfg, y, x)
        assert 0.0 < kxy <= 1.0


def test_eval_dimension_mismatch():
    with pytest.raises(InputError):
        kernel_eval(KernelConfig(gamma=1.0), [0.0], [0.0, 1.0])


def test_matrix_single_row():
    K = kernel_matrix(KernelConfig(gamma=2.0), np.array([[1.0, 2.0]]))
    assert K.shape == (1, 1)
    assert K[0, 0] == 1.0


def test_matrix_duplicate_rows():
    K = kernel_matrix(KernelConfig(gamma=1.0), np.array([[3.0], [3.0]]))
    np.testing.assert_array_equal(K, np.ones((2, 2)))


def test_matrix_symmetric_unit_diagonal_psd():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((6, 2))
    K = kernel_matrix(KernelConfig(gamma=0.8), X)
    np.testing.assert_array_equal(K, K.T)
    np.testing.assert_array_equal(np.diag(K), np.ones(6))
    # dense symmetric eigensolver as the PSD oracle
    assert np.linalg.eigvalsh(K).min() >= -1e-10


def test_matrix_psd_invariant_many_sizes():
    rng = np.random.default_rng(3)
    for n in (2, 10, 40):
        X = rng.standard_normal((n, 3)) * 2.0
        K = kernel_matrix(KernelConfig(gamma=0.4), X)
        assert np.linalg.eigvalsh(K).min() >= -n * 1e-12


def test_matrix_rejects_nonfinite():
    X = np.array([[0.0], [np.nan]])
    with pytest.raises(InputError):
        kernel_matrix(KernelConfig(gamma=1.0), X)


def test_matrix_permutation_equivariant():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((8, 2))
    perm = rng.permutation(8)
    cfg = KernelConfig(gamma=1.3)
    K = kernel_matrix(cfg, X)
    Kp = kernel_matrix(cfg, X[perm])
    np.testing.assert_allclose(Kp, K[np.ix_(perm, perm)], rtol=0, atol=1e-15)


def test_cross_matches_matrix_column():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((7, 3))
    cfg = KernelConfig(gamma=0.6)
    K = kernel_matrix(cfg, X)
    col = kernel_cross(cfg, X, X[4:5])
    np.testing.assert_allclose(col[:, 0], K[:, 4], rtol=0, atol=1e-14)


def test_cross_empty_locations():
    X = np.zeros((3, 2))
    out = kernel_cross(KernelConfig(gamma=1.0), X, np.empty((0, 2)))
    assert out.shape == (3, 0)


def test_cross_direct_values():
    cfg = KernelConfig(gamma=0.5)
    X = np.array([[0.0], [1.0]])
    V = np.array([[2.0]])
    out = kernel_cross(cfg, X, V)
    np.testing.assert_allclose(out[:, 0], [np.exp(-2.0), np.exp(-0.5)], rtol=1e-15)


def test_cross_equals_matrix_entrywise():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((12, 4))
    cfg = KernelConfig(gamma=0.9)
    np.testing.assert_allclose(
        kernel_cross(cfg, X, X), kernel_matrix(cfg, X), rtol=0, atol=1e-14
    )


def test_cross_dimension_mismatch():
    with pytest.raises(InputError):
        kernel_cross(KernelConfig(gamma=1.0), np.zeros((3, 2)), np.zeros((1, 3)))


def test_median_heuristic_small_cases():
    # distances {1, 2, 3} -> median 2 -> gamma 0.5
    assert median_heuristic(np.array([[0.0], [1.0], [3.0]])) == pytest.approx(0.5)
    # a single pair at distance 2
    assert median_heuristic(np.array([[0.0], [2.0]])) == pytest.approx(0.5)


def test_median_heuristic_even_count_uses_lower_middle():
    # distances {1, 2, 3, 4, 5, 6}; lower-middle order statistic is 3
    X = np.array([[0.0], [1.0], [3.0], [6.0]])
    # pairwise: 1,3,6,2,5,3 -> sorted 1,2,3,3,5,6 -> index (6-1)//2 = 2 -> 3
    assert median_heuristic(X) == pytest.approx(1.0 / 3.0)


def test_median_heuristic_brute_force_oracle():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((50, 3))
    dists = sorted(
        float(np.linalg.norm(X[i] - X[j])) for i in range(50) for j in range(i + 1, 50)
    )
    expected = 1.0 / dists[(len(dists) - 1) // 2]
    assert median_heuristic(X) == pytest.approx(expected, rel=1e-12)


def test_median_heuristic_identical_points():
    with pytest.raises(InputError):
        median_heuristic(np.zeros((4, 2)))
    with pytest.raises(InputError):
        median_heuristic(np.zeros((1, 2)))
