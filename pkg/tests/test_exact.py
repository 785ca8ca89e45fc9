import numpy as np
import pytest

from infoplan.estimator import InformationObjective
from infoplan.exact import (
    MisdpEncoding,
    decode_assignment,
    encode_path,
    export_misdp,
    max_visits,
    parse_misdp,
    solve_exact,
    verify_assignment,
)
from infoplan.exceptions import InstanceTooLarge, NoFeasiblePath
from infoplan.graph import build_grid, is_feasible, make_path, visit_vector
from infoplan.model import grid_field
from infoplan.problem import budget_for_visits, random_problem

from conftest import brute_force_best, enumerate_paths, oracle_lambda, random_spd


def test_no_feasible_path_below_cheapest_round_trip():
    g = build_grid(2, 2)
    cheapest = min(g.t(0, j) + g.t(j, g.end) for j in range(1, 5))
    model = grid_field(2, 2)
    with pytest.raises(NoFeasiblePath):
        solve_exact(g, model, np.eye(4), 0.99 * cheapest)


def test_two_by_two_picks_informative_area():
    g = build_grid(2, 2)
    # area index 2 has no fixed sensor and a far better mobile sensor
    model = grid_field(2, 2, fixed_areas=[0, 1, 3], mobile_variance=[1.0, 1.0, 1e-3, 1.0])
    P = np.eye(4)
    budget = budget_for_visits(g, 2)
    path, lam = solve_exact(g, model, P, budget)
    assert 2 in path.areas
    oracle_lam, _ = brute_force_best(g, model, P, budget)
    assert lam == pytest.approx(oracle_lam, rel=1e-12)


def test_three_by_three_matches_permutation_oracle(rng):
    for _ in range(5):
        p = random_problem(3, 3, 4, rng)
        path, lam = solve_exact(p.graph, p.model, p.P_prior, p.budget)
        obj = InformationObjective(p.model, p.P_prior)
        lam_o, path_o = brute_force_best(p.graph, p.model, p.P_prior, p.budget, evaluate=obj)
        assert is_feasible(path, p.graph, p.budget)
        assert lam == lam_o
        assert path.seq == path_o.seq
        # and the evaluator itself agrees with the explicit-selection oracle
        assert lam == pytest.approx(oracle_lambda(p.model, p.P_prior, visit_vector(path, 9)), rel=1e-12)


def test_uniform_sensing_oracle(rng):
    g = build_grid(3, 3)
    model = grid_field(3, 3)
    P = random_spd(rng, 9)
    budget = budget_for_visits(g, 3)
    _, lam = solve_exact(g, model, P, budget)
    assert lam == pytest.approx(brute_force_best(g, model, P, budget)[0], rel=1e-12)


def test_pruning_does_not_change_answer(rng):
    for _ in range(5):
        p = random_problem(3, 4, 5, rng)
        a = solve_exact(p.graph, p.model, p.P_prior, p.budget, prune=True)
        b = solve_exact(p.graph, p.model, p.P_prior, p.budget, prune=False)
        assert a[1] == b[1] and a[0].seq == b[0].seq


def test_guards():
    g = build_grid(7, 7)
    model = grid_field(7, 7)
    with pytest.raises(InstanceTooLarge):
        solve_exact(g, model, np.eye(49), 1000.0)
    g = build_grid(4, 4)
    with pytest.raises(InstanceTooLarge):
        solve_exact(g, grid_field(4, 4), np.eye(16), budget_for_visits(g, 14))
    with pytest.raises(ValueError):
        solve_exact(g, grid_field(2, 2), np.eye(4), 500.0)


def test_max_visits_is_an_upper_bound():
    g = build_grid(3, 3)
    for k in range(1, 6):
        budget = budget_for_visits(g, k)
        longest = max(len(p.areas) for p in enumerate_paths(g, budget))
        assert longest <= max_visits(g, budget)
        assert max_visits(g, budget) == k


def test_verify_examples():
    g = build_grid(2, 2)
    path = make_path([0, 1, g.end], g)
    q, u = encode_path(path, g)
    assert verify_assignment(q, u, g, path.cost)
    assert decode_assignment(q, g).seq == path.seq
    q2 = dict(q)
    q2[(0, 2)] = 1
    assert not verify_assignment(q2, u, g, 1e9)


def test_verify_rejects_subtour():
    g = build_grid(3, 3)
    # flight 0-1-4-N+1 plus a detached cycle 5-6-9-8-5
    path = make_path([0, 1, 4, g.end], g)
    q, u = encode_path(path, g)
    for e in [(5, 6), (6, 9), (9, 8), (8, 5)]:
        q[e] = 1
    for v, pos in zip((5, 6, 9, 8), (3, 4, 5, 6)):
        u[v] = pos
    # degrees are consistent, only the ordering rules it out
    assert not verify_assignment(q, u, g, 1e9)


def test_verify_rejects_other_defects():
    g = build_grid(2, 2)
    path = make_path([0, 1, 2, g.end], g)
    q, u = encode_path(path, g)
    assert verify_assignment(q, u, g, path.cost)
    assert not verify_assignment(q, u, g, path.cost - 1.0)
    assert not verify_assignment({**q, (1, 0): 1}, u, g, 1e9)
    assert not verify_assignment({**q, (0, 1): 0.5}, u, g, 1e9)
    assert not verify_assignment(q, {**u, 2: 0}, g, 1e9)


def test_verify_all_feasible_paths_round_trip():
    g = build_grid(2, 3)
    budget = budget_for_visits(g, 4)
    for p in enumerate_paths(g, budget):
        q, u = encode_path(p, g)
        assert verify_assignment(q, u, g, budget)
        assert decode_assignment(q, g).seq == p.seq


def test_visiting_every_area_keeps_feasible_order():
    g = build_grid(2, 3)
    path = make_path([0, 1, 2, 3, 6, 5, 4, g.end], g)
    q, u = encode_path(path, g)
    assert verify_assignment(q, u, g, path.cost)


def test_encoding_counts():
    g = build_grid(1, 2)
    enc = MisdpEncoding(g, 100.0)
    assert enc.edges == ((0, 1), (0, 2), (1, 2), (2, 1), (1, 3), (2, 3))
    assert enc.big_m == 2 and enc.u_bounds == (1, 2)
    names = [c.name for c in enc.constraints()]
    assert names[:2] == ["depot_out", "depot_in"]
    assert "order_1_2" in names and "order_2_1" in names


def test_export_round_trip_and_determinism(rng):
    g = build_grid(1, 2)
    model = grid_field(1, 2, fixed_areas=[0])
    P = random_spd(rng, 2)
    enc = MisdpEncoding(g, 80.0)
    text = export_misdp(enc, model, P)
    assert export_misdp(MisdpEncoding(g, 80.0), model, P) == text
    doc = parse_misdp(text)
    assert [v[0] for v in doc["variables"]] == [n for n, *_ in enc.variables()] + ["alpha"]
    assert doc["constraints"] == enc.constraints()
    obj = InformationObjective(model, P)
    np.testing.assert_array_equal(doc["lmi_const"], obj.Y_base)
    np.testing.assert_array_equal(doc["lmi_terms"]["alpha"], -np.eye(2))
    # the LMI evaluated at a path's encoding reproduces Y of that path
    path = make_path([0, 2, 1, 3], g)
    q, _ = encode_path(path, g)
    Y = doc["lmi_const"].copy()
    for e, val in q.items():
        if val and enc.q_name(e) in doc["lmi_terms"]:
            Y += doc["lmi_terms"][enc.q_name(e)]
    np.testing.assert_allclose(Y, obj.matrix(visit_vector(path, 2)), rtol=1e-15)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_misdp("NOT A MODEL\n")
