import math

import numpy as np
import pytest

from halfpoisson import rbound as rb


def _l2(v):
    return float(np.linalg.norm(v))


class TestRademacherRatio:
    def test_single_operator_deterministic(self):
        """N = 1: the signs cancel and the ratio is exactly ||Tx|| / ||x||."""
        x = np.array([3.0, 4.0])
        trial = rb.RademacherTrial(operators=[lambda v: 2.0 * v], vectors=[x],
                                   trials=8)
        est = rb.rademacher_ratio(trial, _l2, _l2)
        assert est.estimate == pytest.approx(2.0, rel=1e-12)
        assert est.stderr == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_family_exact_ratio(self):
        """Operators scaling disjoint coordinates: both sides are
        sign-independent, ratio = sqrt(sum a_l^2 / N)."""
        N = 4
        a = np.array([1.0, 2.0, 3.0, 4.0])
        ops, vecs = [], []
        for l in range(N):
            e = np.zeros(N)
            e[l] = 1.0
            vecs.append(e)
            ops.append(lambda v, _l=l: a[_l] * v)
        trial = rb.RademacherTrial(operators=ops, vectors=vecs, trials=16)
        est = rb.rademacher_ratio(trial, _l2, _l2)
        expected = math.sqrt(float(np.sum(a ** 2)) / N)
        assert est.estimate == pytest.approx(expected, rel=1e-12)

    def test_reproducible_for_fixed_seed(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(6)
        ops = [lambda v, _l=l: np.roll(v, _l) for l in range(3)]
        t1 = rb.RademacherTrial(operators=ops, vectors=[x] * 3, seed=5, trials=64)
        t2 = rb.RademacherTrial(operators=ops, vectors=[x] * 3, seed=5, trials=64)
        a = rb.rademacher_ratio(t1, _l2, _l2)
        b = rb.rademacher_ratio(t2, _l2, _l2)
        assert a.estimate == b.estimate
        assert a.stderr == b.stderr

    def test_seed_changes_sample(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(6)
        ops = [lambda v, _l=l: np.roll(v, _l) + 0.1 * _l * v for l in range(3)]
        a = rb.rademacher_ratio(
            rb.RademacherTrial(operators=ops, vectors=[x] * 3, seed=1, trials=64),
            _l2, _l2)
        b = rb.rademacher_ratio(
            rb.RademacherTrial(operators=ops, vectors=[x] * 3, seed=2, trials=64),
            _l2, _l2)
        assert a.estimate != b.estimate

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            rb.RademacherTrial(operators=[], vectors=[])

    def test_zero_vectors_rejected(self):
        trial = rb.RademacherTrial(operators=[lambda v: v],
                                   vectors=[np.zeros(3)])
        with pytest.raises(ValueError):
            rb.rademacher_ratio(trial, _l2, _l2)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            rb.RademacherTrial(operators=[lambda v: v], vectors=[])


class TestGrowthExperiment:
    def test_p_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            rb.dirichlet_nonrbound_experiment(p=3.0)

    def test_growth_below_two(self):
        rows = rb.dirichlet_nonrbound_experiment(p=1.2, trials=256,
                                                 N_list=(4, 16, 64))
        assert [row.N for row in rows] == [4, 16, 64]
        ratios = [row.ratio for row in rows]
        assert ratios[-1] / ratios[0] > 1.4
        # monotone growth along the family sizes
        assert ratios[0] < ratios[1] < ratios[2]

    def test_plateau_at_p_two(self):
        rows = rb.dirichlet_nonrbound_experiment(p=2.0, trials=256,
                                                 N_list=(4, 16, 64))
        ratios = [row.ratio for row in rows]
        assert max(ratios) / min(ratios) < 1.3

    def test_rows_deterministic(self):
        a = rb.dirichlet_nonrbound_experiment(p=1.5, trials=64, N_list=(4, 8),
                                              seed=9)
        b = rb.dirichlet_nonrbound_experiment(p=1.5, trials=64, N_list=(4, 8),
                                              seed=9)
        assert [(r.ratio, r.stderr) for r in a] == [(r.ratio, r.stderr) for r in b]
