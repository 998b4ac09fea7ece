import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import InvalidInputError
from core.resources import (
    CostQuery,
    plan_resources,
    table1_crossover,
    table1_row,
    truncation_budget,
)


class CostQueryTests(SimpleTestCase):
    def test_rejects_out_of_range(self):
        with self.assertRaises(InvalidInputError):
            CostQuery(1.0, 1.0, 1.5, 1.0, 2.0, 1.0)
        with self.assertRaises(InvalidInputError):
            CostQuery(1.0, 0.01, 0.1, 1.0, 2.0, 1.0)
        with self.assertRaises(InvalidInputError):
            CostQuery(1.0, 1.0, 0.1, 1.0, 0.5, 1.0)
        with self.assertRaises(InvalidInputError):
            CostQuery(-1.0, 1.0, 0.1, 1.0, 2.0, 1.0)
        with self.assertRaises(InvalidInputError):
            CostQuery(1.0, float('inf'), 0.1, 1.0, 2.0, 1.0)


class PlanResourcesTests(SimpleTestCase):
    def test_hand_computed_plan(self):
        plan = plan_resources(CostQuery(1.0, 1.0, 1e-2, 1.0, 2.0, 1.0))
        self.assertEqual(plan.n_steps_L, 10)
        self.assertAlmostEqual(plan.step_h, 0.1)
        self.assertAlmostEqual(plan.per_step_delta, 1e-3)
        self.assertEqual(plan.quad_points_M, 10)
        self.assertEqual(plan.n_m, 4)
        self.assertEqual(plan.block_ancillas, 2 + 8 + 5)
        self.assertAlmostEqual(plan.budget, 0.03)
        self.assertTrue(plan.budget_holds())
        self.assertAlmostEqual(plan.per_step_queries, 0.2 + math.log(1000))
        self.assertAlmostEqual(plan.ham_t_queries, 5 * 10 * plan.per_step_queries)
        self.assertAlmostEqual(plan.comp_queries, 10 * plan.per_step_queries)
        self.assertAlmostEqual(plan.delta_prime, 1e-3 + 2 * 0.1 ** 3)
        self.assertAlmostEqual(plan.failure_prob_bound, 2 * 10 * plan.delta_prime)
        self.assertIn('ham_t_queries', plan.up_to_constant)

    def test_tight_rule_saturates_budget(self):
        q = CostQuery(2.0, 5.0, 2e-3, 1.5, 2.0, 1.0)
        tight = plan_resources(q, delta_rule='tight')
        self.assertAlmostEqual(tight.budget, 3 * q.epsilon, delta=1e-12 * q.epsilon)
        closed = plan_resources(q)
        self.assertGreaterEqual(tight.per_step_delta, closed.per_step_delta)
        self.assertEqual(tight.delta_tight, closed.delta_tight)

    def test_single_step_plan_rederives_delta(self):
        # до округления L ~ 0.045: замкнутая формула дала бы δ > ε
        plan = plan_resources(CostQuery(1.0, 1.0, 0.5, 1e-3, 2.0, 1.0))
        self.assertEqual(plan.n_steps_L, 1)
        self.assertLess(plan.n_steps_raw, 1.0)
        self.assertAlmostEqual(plan.per_step_delta, 1.5 - 2e-3)
        self.assertAlmostEqual(plan.budget, 1.5)
        self.assertTrue(plan.budget_holds())
        self.assertAlmostEqual(plan.per_step_queries, 2.0)

    def test_single_step_boundary_gives_delta_epsilon(self):
        plan = plan_resources(CostQuery(1.0, 1.0, 0.25, 0.25, 2.0, 1.0))
        self.assertEqual(plan.n_steps_L, 1)
        self.assertAlmostEqual(plan.per_step_delta, 0.25)

    def test_monotone_through_single_step_regime(self):
        plans = [plan_resources(CostQuery(1.0, 1.0, eps, 1e-3, 2.0, 1.0))
                 for eps in np.logspace(math.log10(0.5), -5, 15)]
        self.assertEqual(plans[0].n_steps_L, 1)
        self.assertGreater(plans[-1].n_steps_L, 1)
        for a, b in zip(plans, plans[1:]):
            self.assertTrue(b.budget_holds())
            self.assertGreaterEqual(b.n_steps_L, a.n_steps_L)
            self.assertGreaterEqual(b.ham_t_queries, a.ham_t_queries)

    def test_unknown_delta_rule(self):
        with self.assertRaises(InvalidInputError):
            plan_resources(CostQuery(1.0, 1.0, 1e-2, 1.0, 2.0, 1.0), delta_rule='loose')

    def test_budget_and_monotonicity_sweep(self):
        for theta in (2.0, 4.0):
            for t_total in (1.0, 2.0, 5.0, 10.0, 20.0):
                plans = [plan_resources(CostQuery(1.0, t_total, eps, 1.0, theta, 1.0))
                         for eps in np.logspace(-1, -6, 10)]
                for plan in plans:
                    self.assertTrue(plan.budget_holds())
                for a, b in zip(plans, plans[1:]):
                    self.assertGreaterEqual(b.n_steps_L, a.n_steps_L)
                    self.assertGreaterEqual(b.quad_points_M, a.quad_points_M)
                    self.assertGreaterEqual(b.ham_t_queries, a.ham_t_queries)

    def test_higher_order_needs_fewer_steps(self):
        for t_total, eps in ((1.0, 1e-3), (10.0, 1e-5), (2.0, 1e-1)):
            low = plan_resources(CostQuery(1.0, t_total, eps, 1.0, 2.0, 1.0))
            high = plan_resources(CostQuery(1.0, t_total, eps, 1.0, 4.0, 1.0))
            self.assertLessEqual(high.n_steps_L, low.n_steps_L)

    def test_truncation_budget(self):
        self.assertAlmostEqual(truncation_budget(1.0, 2.0, 2.0, 4), 2 * 8 / 16)

    def test_as_dict(self):
        data = plan_resources(CostQuery(1.0, 1.0, 1e-2, 1.0, 2.0, 1.0)).as_dict()
        self.assertNotIn('up_to_constant', data)
        self.assertEqual(data['n_steps_L'], 10)


class Table1Tests(SimpleTestCase):
    PARAMS = {'alpha': 1.0, 'alpha_b': 1.0, 'c_comm': 1.0, 'c_h_prime': 1.0, 'c_v': 1.0,
              't_total': 1.0, 'epsilon': 1e-4}

    def test_superconvergence_row(self):
        row = table1_row('superconvergence', self.PARAMS)
        self.assertAlmostEqual(row.value, 1 + 10 * math.log(1e4))
        self.assertTrue(row.up_to_constant)
        self.assertIn('c_v', row.expression)

    def test_commutator_row(self):
        row = table1_row('general_H', self.PARAMS)
        self.assertAlmostEqual(row.value, 1 + 100 * math.log(1e4))

    def test_zero_constant_leaves_linear_term(self):
        params = dict(self.PARAMS, c_comm=0.0, alpha=3.0, t_total=2.0)
        self.assertAlmostEqual(table1_row('general_H', params).value, 6.0)

    def test_row_validation(self):
        with self.assertRaises(InvalidInputError):
            table1_row('trotter', self.PARAMS)
        with self.assertRaises(InvalidInputError):
            table1_row('general_H', {'alpha': 1.0, 't_total': 1.0, 'epsilon': 0.1})

    def test_crossover(self):
        self.assertAlmostEqual(table1_crossover(4.0, 1.0), 2.0)
        with self.assertRaises(InvalidInputError):
            table1_crossover(0.0, 1.0)
