import itertools

import numpy as np
import pytest

from shamans.errors import MissingZeroEntry
from shamans.homotopy import PathEntry, RegularizationPath, regularization_path
from shamans.selector import (CostTables, assemble, build_cost_tables,
                              column_gain, delta_cost, init_gain, select,
                              select_step)

import demo_data as dd
from oracles import min_error_by_total, random_cost_table

R, N = dd.DEMO_R, dd.DEMO_N


def entry(lam, err, card, r=4):
    """Synthetic path entry with `card` leading nonzeros."""
    x = np.zeros(r)
    x[:card] = 1.0
    support = np.arange(card)
    return PathEntry(lam, support, x, err, card, x[support], np.zeros(card))


def demo_paths():
    return [regularization_path(dd.DEMO_W, dd.DEMO_M[:, j]) for j in range(N)]


def demo_tables():
    tables = build_cost_tables(demo_paths(), R, N)
    return delta_cost(tables)


def synthetic_tables(cost):
    levels, n = cost.shape
    sols = [[np.zeros(levels - 1)] * n for _ in range(levels)]
    return CostTables(cost=np.asarray(cost, dtype=float), sols=sols,
                      present=np.ones((levels, n), dtype=bool))


class TestBuildCostTables:
    def test_demo_matches_frozen(self):
        tables = build_cost_tables(demo_paths(), R, N)
        np.testing.assert_allclose(tables.cost, dd.DEMO_COST, atol=1e-9)

    def test_zero_level_is_squared_column_norm(self):
        tables = build_cost_tables(demo_paths(), R, N)
        norms = (dd.DEMO_M ** 2).sum(axis=0)
        np.testing.assert_allclose(tables.cost[0, :], norms, rtol=1e-12)

    def test_columns_nonincreasing_and_solutions_consistent(self):
        tables = build_cost_tables(demo_paths(), R, N)
        assert np.all(np.diff(tables.cost, axis=0) <= 0.0)
        for k in range(R + 1):
            for j in range(N):
                x = tables.sols[k][j]
                assert np.count_nonzero(x) <= k
                resid = dd.DEMO_M[:, j] - dd.DEMO_W @ x
                assert float(resid @ resid) == pytest.approx(
                    tables.cost[k, j], abs=1e-8)

    def test_gap_propagation(self):
        # Entries only at cardinalities 0 and 2: rows 2..r carry the
        # 2-sparse solution, row 1 keeps the zero solution.
        path = RegularizationPath([entry(2.0, 10.0, 0), entry(0.0, 1.0, 2)])
        tables = build_cost_tables([path], 4, 1)
        np.testing.assert_allclose(tables.cost[:, 0], [10, 10, 1, 1, 1])
        assert np.count_nonzero(tables.sols[1][0]) == 0
        assert np.count_nonzero(tables.sols[3][0]) == 2
        np.testing.assert_array_equal(tables.present[:, 0],
                                      [True, False, True, False, False])

    def test_sparser_later_entry_wins_denser_rows(self):
        # A 2-sparse solution found after a 3-sparse one, with a smaller
        # error: the row for level 3 must hold the 2-sparse error.
        path = RegularizationPath([
            entry(3.0, 10.0, 0),
            entry(1.0, 5.0, 3),
            entry(0.0, 3.0, 2),
        ])
        tables = build_cost_tables([path], 4, 1)
        np.testing.assert_allclose(tables.cost[:, 0], [10, 10, 3, 3, 3])
        assert np.count_nonzero(tables.sols[3][0]) == 2

    def test_stale_error_never_overwrites(self):
        # A later entry with a *larger* error must not displace rows
        # already filled with smaller values.
        path = RegularizationPath([
            entry(3.0, 10.0, 0),
            entry(1.0, 2.0, 1),
            entry(0.0, 4.0, 2),
        ])
        tables = build_cost_tables([path], 4, 1)
        np.testing.assert_allclose(tables.cost[:, 0], [10, 2, 2, 2, 2])

    def test_missing_zero_entry(self):
        path = RegularizationPath([entry(1.0, 5.0, 2)])
        with pytest.raises(MissingZeroEntry):
            build_cost_tables([path], 4, 1)


class TestDeltaCost:
    def test_demo(self):
        tables = demo_tables()
        expected = dd.DEMO_COST[:-1, :] - dd.DEMO_COST[1:, :]
        np.testing.assert_allclose(tables.delta, expected, atol=1e-9)
        assert np.all(tables.delta >= 0.0)

    def test_constant_column(self):
        tables = synthetic_tables(np.full((4, 1), 2.5))
        delta_cost(tables)
        np.testing.assert_array_equal(tables.delta, np.zeros((3, 1)))

    def test_single_drop(self):
        tables = synthetic_tables(np.array([[1.0], [0.0], [0.0], [0.0]]))
        delta_cost(tables)
        np.testing.assert_array_equal(tables.delta[:, 0], [1.0, 0.0, 0.0])


class TestInitGain:
    def test_prefix_means_single_column(self):
        cost = np.array([[4.3], [0.66], [0.01], [0.0], [0.0]])
        cost[0, 0] = 4.3
        tables = synthetic_tables(cost)
        delta_cost(tables)
        tables.delta[:, 0] = [3.64, 0.65, 0.01, 0.0]
        state = init_gain(tables)
        expected = [3.64, (3.64 + 0.65) / 2, (3.64 + 0.65 + 0.01) / 3,
                    (3.64 + 0.65 + 0.01) / 4]
        np.testing.assert_allclose(state.gain[:, 0], expected, rtol=1e-12)

    def test_all_zero(self):
        tables = synthetic_tables(np.full((5, 3), 1.0))
        state = init_gain(tables)
        np.testing.assert_array_equal(state.gain, np.zeros((4, 3)))
        assert state.column_best() is None

    def test_demo_top_entry(self):
        state = init_gain(demo_tables())
        gain, row, col = state.column_best()
        assert (row, col) == (0, 1)
        assert gain == pytest.approx(8.58349710771, abs=1e-9)


class TestSelect:
    def test_demo_budget18(self):
        tables = demo_tables()
        state = init_gain(tables)
        picks = [select_step(state, tables, dd.DEMO_BUDGET) for _ in range(3)]
        assert picks == dd.DEMO_FIRST_PICKS
        cursors = select(state, tables, dd.DEMO_BUDGET)
        np.testing.assert_array_equal(cursors, dd.DEMO_CURSORS)
        assert state.nnz_total == dd.DEMO_BUDGET

    def test_zero_budget(self):
        tables = demo_tables()
        state = init_gain(tables)
        cursors = select(state, tables, 0)
        np.testing.assert_array_equal(cursors, np.zeros(N, dtype=int))

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            cost = random_cost_table(rng, 3, 4)
            tables = synthetic_tables(cost)
            delta_cost(tables)
            best = min_error_by_total(cost)
            state = init_gain(tables)
            cursors = select(state, tables, 6)
            achieved = int(cursors.sum())
            total_err = float(sum(cost[cursors[j], j] for j in range(4)))
            assert total_err == pytest.approx(best[achieved], abs=1e-10)

    def test_strict_mode_never_exceeds_budget(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            cost = random_cost_table(rng, 4, 5)
            for q in range(0, 21):
                tables = synthetic_tables(cost)
                delta_cost(tables)
                state = init_gain(tables)
                cursors = select(state, tables, q, strict=True)
                assert int(cursors.sum()) <= q

    def test_strict_mode_takes_best_fitting_step(self):
        # Best advance jumps two levels, but only one nonzero remains in
        # the budget; strict mode must fall back to the best single step.
        cost = np.array([
            [10.0, 10.0],
            [9.0, 8.0],
            [0.0, 7.9],
        ])
        tables = synthetic_tables(cost)
        delta_cost(tables)
        state = init_gain(tables)
        cursors = select(state, tables, 1, strict=True)
        np.testing.assert_array_equal(cursors, [0, 1])
        tables2 = delta_cost(synthetic_tables(cost))
        cursors2 = select(init_gain(tables2), tables2, 1)
        # default mode takes the 2-level jump and overshoots to q + r - 1
        np.testing.assert_array_equal(cursors2, [2, 0])

    def test_default_mode_overshoot_bounded(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            r = int(rng.integers(2, 5))
            n = int(rng.integers(2, 6))
            cost = random_cost_table(rng, r, n)
            available = sum(
                int(np.flatnonzero(cost[:-1, j] - cost[1:, j] > 0).max(initial=-1)) + 1
                for j in range(n))
            for q in range(0, r * n + 1):
                tables = synthetic_tables(cost)
                delta_cost(tables)
                state = init_gain(tables)
                cursors = select(state, tables, q)
                got = int(cursors.sum())
                if available >= q:
                    assert q <= got <= q + r - 1
                else:
                    assert got == available

    def test_gain_consistency_after_steps(self):
        tables = demo_tables()
        state = init_gain(tables)
        for _ in range(5):
            select_step(state, tables, dd.DEMO_BUDGET)
            for j in range(N):
                fresh = column_gain(tables.delta[:, j], int(state.cursors[j]))
                assert np.array_equal(fresh, state.gain[:, j])

    def test_heap_top_is_true_argmax(self):
        tables = demo_tables()
        state = init_gain(tables)
        while True:
            top = state.column_best()
            if top is None:
                break
            gain, row, col = top
            assert gain == state.gain.max()
            if select_step(state, tables, dd.DEMO_BUDGET) is None:
                break

    def test_total_error_monotone(self):
        tables = demo_tables()
        state = init_gain(tables)
        prev = float(sum(tables.cost[0, :]))
        while select_step(state, tables, dd.DEMO_BUDGET) is not None:
            cur = float(sum(tables.cost[state.cursors[j], j] for j in range(N)))
            assert cur <= prev + 1e-12
            prev = cur

    def test_negative_budget_rejected(self):
        tables = demo_tables()
        with pytest.raises(ValueError):
            select(init_gain(tables), tables, -1)


class TestAssemble:
    def test_demo_cursors(self):
        tables = demo_tables()
        H = assemble(tables, dd.DEMO_CURSORS)
        np.testing.assert_allclose(H, dd.DEMO_H_SHAMANS, atol=1e-9)

    def test_full_budget_matches_terminal_solutions(self):
        paths = demo_paths()
        tables = demo_tables()
        H = assemble(tables, np.full(N, R))
        for j in range(N):
            np.testing.assert_allclose(H[:, j], paths[j].terminal().solution,
                                       atol=1e-12)

    def test_zero_cursors(self):
        tables = demo_tables()
        H = assemble(tables, np.zeros(N, dtype=int))
        np.testing.assert_array_equal(H, np.zeros((R, N)))

    def test_nonzeros_bounded_by_cursor(self):
        tables = demo_tables()
        for tup in itertools.product(range(R + 1), repeat=2):
            cursors = np.array(tup + (0,) * (N - 2))
            H = assemble(tables, cursors)
            for j in range(N):
                assert np.count_nonzero(H[:, j]) <= cursors[j]
