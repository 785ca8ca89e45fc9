import itertools

import numpy as np
import pytest

from infoplan.model import (
    AreaSensing,
    FieldModel,
    assemble_observation,
    grid_adjacency,
    grid_field,
    info_term,
    selection_matrix,
)

from conftest import random_model


def one_area(C_fixed, C_mobile, r_fixed, r_mobile, n):
    area = AreaSensing(C_fixed, C_mobile, r_fixed, r_mobile)
    return FieldModel((area,), np.eye(n), np.zeros((n, 1)), np.eye(n))


def test_single_area_stacking():
    model = one_area([[1, 0]], [[0, 1]], [1.0], [1.0], 2)
    np.testing.assert_array_equal(assemble_observation(model), np.eye(2))


def test_two_scalar_fixed_areas():
    a = AreaSensing([[1.0]], np.zeros((0, 1)), [1.0], [])
    model = FieldModel((a, a), np.eye(2), np.zeros((2, 1)), np.eye(2))
    np.testing.assert_array_equal(assemble_observation(model), np.eye(2))


def test_observation_block_pattern(rng):
    model = random_model(rng, N=3, n=2)
    C = assemble_observation(model)
    off = model.output_offsets
    for a, area in enumerate(model.areas):
        rows = slice(off[a], off[a + 1])
        np.testing.assert_array_equal(C[rows, model.block(a)], np.vstack([area.C_fixed, area.C_mobile]))
        mask = np.ones(model.n_states, dtype=bool)
        mask[model.block(a)] = False
        assert not np.any(C[rows][:, mask])


def test_selection_all_rows():
    model = one_area([[1.0]], [[1.0]], [1.0], [1.0], 1)
    np.testing.assert_array_equal(selection_matrix(model, [1]).matrix, np.eye(2))


def test_selection_unvisited_keeps_fixed():
    model = one_area([[1.0]], [[1.0]], [1.0], [1.0], 1)
    np.testing.assert_array_equal(selection_matrix(model, [0]).matrix, [[1.0, 0.0]])


def test_selection_direct_sum_by_hand():
    a1 = AreaSensing([[1.0]], [[1.0]], [1.0], [1.0])
    a2 = AreaSensing(np.zeros((0, 1)), [[1.0]], [], [1.0])
    model = FieldModel((a1, a2), np.eye(2), np.zeros((2, 1)), np.eye(2))
    sel = selection_matrix(model, [0, 1])
    assert sel.M_k == 2
    # outputs are (area 1 fixed, area 1 mobile, area 2 mobile); 1-based 1 and 3
    np.testing.assert_array_equal(sel.rows, [0, 2])


def test_selection_rows_orthonormal(rng):
    model = random_model(rng, N=4, n=2)
    for gamma in itertools.product([0, 1], repeat=4):
        G = selection_matrix(model, gamma).matrix
        np.testing.assert_array_equal(G @ G.T, np.eye(G.shape[0]))


def test_selection_rejects_wrong_length(rng):
    model = random_model(rng, N=3)
    with pytest.raises(ValueError):
        selection_matrix(model, [1, 0])


def test_info_term_scalars():
    model = one_area(np.zeros((0, 1)), [[1.0]], [], [1.0], 1)
    assert info_term(model, 0)[0, 0] == 1.0
    model = one_area(np.zeros((0, 1)), [[1.0]], [], [0.25], 1)
    assert info_term(model, 0)[0, 0] == 4.0


def test_info_terms_sum_to_gamma_restricted_information(rng):
    for N in (1, 2, 3, 4):
        model = random_model(rng, N=N, n=2)
        C = assemble_observation(model)
        R = np.diag(model.noise_variances)
        for gamma in itertools.product([0, 1], repeat=N):
            G = selection_matrix(model, gamma).matrix
            total = sum(info_term(model, a, "fixed") for a in range(N))
            total = total + sum(g * info_term(model, a, "mobile") for a, g in enumerate(gamma))
            if G.shape[0]:
                Ck = G @ C
                oracle = Ck.T @ np.linalg.inv(G @ R @ G.T) @ Ck
            else:
                oracle = np.zeros_like(total)
            np.testing.assert_allclose(total, oracle, atol=1e-12)


def test_info_terms_symmetric_psd_and_local(rng):
    model = random_model(rng, N=4, n=2)
    for a in range(model.N):
        for kind in ("fixed", "mobile"):
            H = info_term(model, a, kind)
            assert np.abs(H - H.T).max() <= 1e-12
            assert np.linalg.eigvalsh(H).min() >= -1e-12
            outside = np.ones_like(H, dtype=bool)
            outside[model.block(a), model.block(a)] = False
            assert not np.any(H[outside])


def test_info_term_bad_args(rng):
    model = random_model(rng, N=2)
    with pytest.raises(IndexError):
        info_term(model, 2)
    with pytest.raises(ValueError):
        info_term(model, 0, "both")


def test_heterogeneous_areas_rejected():
    a1 = AreaSensing.scalar(mobile_variance=1.0)
    a2 = AreaSensing(np.zeros((0, 2)), np.eye(2), [], [1.0, 1.0])
    with pytest.raises(ValueError, match="state size"):
        FieldModel((a1, a2), np.eye(3), np.zeros((3, 1)), np.eye(3))


def test_bad_noise_and_q_rejected():
    with pytest.raises(ValueError):
        AreaSensing([[1.0]], [[1.0]], [0.0], [1.0])
    a = AreaSensing.scalar(mobile_variance=1.0)
    with pytest.raises(ValueError, match="semidefinite"):
        FieldModel((a,), np.eye(1), np.zeros((1, 1)), -np.eye(1))
    with pytest.raises(ValueError, match="symmetric"):
        FieldModel((a, a), np.eye(2), np.zeros((2, 1)), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_grid_field_structure():
    model = grid_field(3, 4, fixed_areas=[0, 5])
    adj = grid_adjacency(3, 4)
    lap = np.diag(adj.sum(1)) - adj
    np.testing.assert_allclose(model.A, np.eye(12) - 0.05 * lap)
    assert np.linalg.eigvalsh(model.Q).min() >= -1e-15
    raw = 0.01 * (np.eye(12) + 0.5 * adj)
    w, V = np.linalg.eigh(raw)
    np.testing.assert_allclose(model.Q, (V * np.clip(w, 0, None)) @ V.T, atol=1e-15)
    assert model.Q[0, 1] > 0
    assert [a.f for a in model.areas] == [1, 0, 0, 0, 0, 1] + [0] * 6
    assert adj.sum() == 2 * (2 * 3 * 4 - 3 - 4)
