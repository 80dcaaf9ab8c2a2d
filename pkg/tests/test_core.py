"""Distributions, marginals, entropies, perturbations."""

import itertools
import math

import numpy as np
import pytest

import entroray as er
from conftest import random_pmf


def brute_entropy_vector(pmf):
    """Independent oracle: accumulate marginals per subset via dicts."""
    n = pmf.spec.n
    outcomes = list(itertools.product(*[range(s) for s in pmf.spec.sizes]))
    out = []
    for mask in er.subset_masks(n):
        vars0 = [v - 1 for v in er.mask_vars(mask)]
        acc = {}
        for x in outcomes:
            key = tuple(x[v] for v in vars0)
            acc[key] = acc.get(key, 0.0) + pmf.mass[pmf.spec.index_of(x)]
        h = -sum(p * math.log2(p) for p in acc.values() if p > 0)
        out.append(h)
    return np.array(out)


class TestAlphabetSpec:
    def test_indexing_roundtrip(self):
        spec = er.AlphabetSpec((2, 3, 2))
        for idx in range(spec.num_cells):
            assert spec.index_of(spec.outcome_of(idx)) == idx

    def test_x1_is_least_significant(self):
        spec = er.AlphabetSpec((2, 3, 2))
        assert spec.index_of((1, 0, 0)) == 1
        assert spec.index_of((0, 1, 0)) == 2
        assert spec.index_of((0, 0, 1)) == 6

    def test_guards(self):
        with pytest.raises(er.InvalidArgumentError):
            er.AlphabetSpec(tuple([2] * 9))
        with pytest.raises(er.InvalidArgumentError):
            er.AlphabetSpec((0, 2))
        with pytest.raises(er.InvalidArgumentError):
            er.AlphabetSpec((10_000, 10_000))  # 1e8 cells

    def test_canonical_order_n4(self):
        labels = [er.mask_label(m) for m in er.subset_masks(4)]
        assert labels == ["1", "2", "12", "3", "13", "23", "123",
                          "4", "14", "24", "124", "34", "134", "234", "1234"]


class TestJointPmf:
    def test_sum_tolerance(self):
        spec = er.AlphabetSpec((2, 2))
        with pytest.raises(er.InvalidDistributionError):
            er.JointPmf(spec, np.array([0.5, 0.5, 0.1, 0.0]))

    def test_tiny_negative_clamped(self):
        spec = er.AlphabetSpec((2,))
        p = er.JointPmf(spec, np.array([1.0 + 1e-16, -1e-16]))
        assert p.mass[1] == 0.0

    def test_large_negative_rejected(self):
        spec = er.AlphabetSpec((2,))
        with pytest.raises(er.InvalidDistributionError):
            er.JointPmf(spec, np.array([1.0 + 1e-9, -1e-9]))

    def test_immutable(self):
        p = er.JointPmf.uniform(er.AlphabetSpec((2, 2)))
        with pytest.raises(ValueError):
            p.mass[0] = 0.3

    def test_atoms_roundtrip(self, rng):
        spec = er.AlphabetSpec((3, 2, 2))
        p = random_pmf(rng, spec)
        q = er.JointPmf.from_atoms(spec, p.atoms())
        np.testing.assert_array_equal(p.mass, q.mass)


class TestMarginalize:
    def test_uniform_single(self):
        p = er.JointPmf.uniform(er.AlphabetSpec((2, 2)))
        np.testing.assert_allclose(er.marginalize(p, er.mask_from_vars([1])), [0.5, 0.5])

    def test_point_mass(self):
        spec = er.AlphabetSpec((2, 2))
        mass = np.zeros(4)
        mass[spec.index_of((0, 0))] = 1.0
        p = er.JointPmf(spec, mass)
        np.testing.assert_array_equal(er.marginalize(p, er.mask_from_vars([2])), [1.0, 0.0])

    def test_reference_distribution_h4(self):
        p = er.load_fixture_pmf("near_four_atom_2x4")
        m4 = er.marginalize(p, er.mask_from_vars([4]))
        assert abs(er.shannon_entropy(m4) - 1.0) <= 5e-5

    def test_empty_subset_rejected(self):
        p = er.JointPmf.uniform(er.AlphabetSpec((2, 2)))
        with pytest.raises(er.InvalidArgumentError):
            er.marginalize(p, 0)

    def test_marginal_sums_to_one(self, rng):
        spec = er.AlphabetSpec((2, 3, 4))
        p = random_pmf(rng, spec)
        for mask in er.subset_masks(3):
            assert abs(er.marginalize(p, mask).sum() - 1.0) < 1e-12

    def test_marginal_ordering(self):
        # P(x1=1, x3=1) must land at index 1 + 2*1 = 3 of the {1,3} marginal
        spec = er.AlphabetSpec((2, 2, 2))
        mass = np.zeros(8)
        mass[spec.index_of((1, 0, 1))] = 1.0
        p = er.JointPmf(spec, mass)
        m = er.marginalize(p, er.mask_from_vars([1, 3]))
        assert m[3] == 1.0


class TestShannonEntropy:
    @pytest.mark.parametrize("mass,expected", [
        ([0.5, 0.5], 1.0),
        ([1.0, 0.0, 0.0], 0.0),
        ([0.25] * 4, 2.0),
    ])
    def test_known_values(self, mass, expected):
        assert er.shannon_entropy(np.array(mass)) == pytest.approx(expected, abs=1e-12)

    def test_rejects_non_distribution(self):
        with pytest.raises(er.InvalidDistributionError):
            er.shannon_entropy(np.array([0.5, 0.6]))

    def test_tiny_masses_skipped(self):
        assert er.shannon_entropy(np.array([1.0, 1e-310])) == 0.0


class TestEntropyVector:
    def test_independent_uniform_bits(self):
        # additivity: h_alpha = |alpha| for independent uniform bits
        h = er.entropy_vector(er.JointPmf.uniform(er.AlphabetSpec((2, 2, 2, 2))))
        expected = [1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4]
        np.testing.assert_allclose(h.values, expected, atol=1e-12)

    def test_reference_vector(self):
        h = er.entropy_vector(er.load_fixture_pmf("near_entropic_extreme_2x4"))
        printed = er.load_fixture_rays("reference_points").get("near_entropic_extreme_2x4")
        assert np.max(np.abs(h.values - printed.values)) <= 5e-5

    def test_matches_bruteforce_oracle(self, rng):
        spec = er.AlphabetSpec((2, 3, 2))
        for _ in range(20):
            p = random_pmf(rng, spec)
            np.testing.assert_allclose(er.entropy_vector(p).values,
                                       brute_entropy_vector(p), atol=1e-9)

    def test_subset_access(self):
        h = er.entropy_vector(er.JointPmf.uniform(er.AlphabetSpec((2, 2))))
        assert h[er.mask_from_vars([1, 2])] == pytest.approx(2.0)
        with pytest.raises(er.InvalidArgumentError):
            h[4]


class TestTotalVariation:
    def test_identical(self, rng):
        p = random_pmf(rng, er.AlphabetSpec((2, 2)))
        assert er.total_variation(p, p) == 0.0

    def test_disjoint_point_masses(self):
        spec = er.AlphabetSpec((2, 2))
        a = np.zeros(4); a[0] = 1.0
        b = np.zeros(4); b[3] = 1.0
        assert er.total_variation(er.JointPmf(spec, a), er.JointPmf(spec, b)) == 2.0

    def test_direct_sum(self):
        spec = er.AlphabetSpec((2,))
        p = er.JointPmf(spec, np.array([0.5, 0.5]))
        q = er.JointPmf(spec, np.array([0.6, 0.4]))
        assert er.total_variation(p, q) == pytest.approx(0.2, abs=1e-15)

    def test_spec_mismatch(self):
        p = er.JointPmf.uniform(er.AlphabetSpec((2, 2)))
        q = er.JointPmf.uniform(er.AlphabetSpec((4,)))
        with pytest.raises(er.InvalidArgumentError):
            er.total_variation(p, q)


class TestPerturbTwoPoint:
    def test_fixed_point(self):
        spec = er.AlphabetSpec((2,))
        p = er.JointPmf(spec, np.array([0.3, 0.7]))
        lam = 0.3 / (0.3 + 0.7)
        q = er.perturb_two_point(p, 0, 1, lam)
        np.testing.assert_allclose(q.mass, p.mass, rtol=1e-12)

    def test_lambda_zero_empties_first_cell(self):
        spec = er.AlphabetSpec((2,))
        p = er.JointPmf(spec, np.array([0.3, 0.7]))
        q = er.perturb_two_point(p, 0, 1, 0.0)
        assert q.mass[0] == 0.0
        assert q.mass[1] == 1.0

    def test_half_split(self):
        spec = er.AlphabetSpec((2,))
        p = er.JointPmf(spec, np.array([0.3, 0.7]))
        q = er.perturb_two_point(p, 0, 1, 0.5)
        np.testing.assert_allclose(q.mass, [0.5, 0.5], atol=1e-16)

    def test_same_cell_rejected(self):
        p = er.JointPmf.uniform(er.AlphabetSpec((2, 2)))
        with pytest.raises(er.InvalidArgumentError):
            er.perturb_two_point(p, 1, 1, 0.5)

    def test_mass_conserved_exactly(self, rng):
        spec = er.AlphabetSpec((2, 2, 2))
        for _ in range(200):
            p = random_pmf(rng, spec)
            i, j = rng.choice(8, size=2, replace=False)
            lam = rng.random()
            q = er.perturb_two_point(p, int(i), int(j), lam)
            assert q.mass.min() >= 0.0
            assert q.mass[int(i)] + q.mass[int(j)] == pytest.approx(
                p.mass[int(i)] + p.mass[int(j)], abs=5e-17)
            untouched = [k for k in range(8) if k not in (i, j)]
            np.testing.assert_array_equal(q.mass[untouched], p.mass[untouched])


class TestShannonInequalities:
    """Every entropy vector satisfies monotonicity and submodularity."""

    def test_monotone_and_submodular(self, rng):
        spec = er.AlphabetSpec((2, 2, 3))
        full = er.full_mask(3)
        for _ in range(50):
            h = er.entropy_vector(random_pmf(rng, spec))
            for a in er.subset_masks(3):
                for b in er.subset_masks(3):
                    if a | b == b:  # a subset of b
                        assert h[b] >= h[a] - 1e-9
                    union, inter = a | b, a & b
                    lhs = h[a] + h[b]
                    rhs = h[union] + (h[inter] if inter else 0.0)
                    assert lhs >= rhs - 1e-9

    def test_marginal_tv_bounded_by_joint_tv(self, rng):
        spec = er.AlphabetSpec((2, 2, 2))
        for _ in range(100):
            p = random_pmf(rng, spec)
            q = random_pmf(rng, spec)
            tv = er.total_variation(p, q)
            for mask in er.subset_masks(3):
                mtv = np.abs(er.marginalize(p, mask) - er.marginalize(q, mask)).sum()
                assert mtv <= tv + 1e-12

    def test_entropy_continuity_under_small_perturbation(self, rng):
        spec = er.AlphabetSpec((2, 2, 2, 2))
        for _ in range(25):
            p = random_pmf(rng, spec)
            i, j = rng.choice(16, size=2, replace=False)
            pair = p.mass[i] + p.mass[j]
            if pair < 1e-9:
                continue
            # nudge lambda so the TV size is at most 1e-6
            lam0 = p.mass[i] / pair
            lam = np.clip(lam0 + 4e-7 / pair, 0.0, 1.0)
            q = er.perturb_two_point(p, int(i), int(j), float(lam))
            assert er.total_variation(p, q) <= 1e-6
            dh = np.linalg.norm(er.entropy_vector(q).values - er.entropy_vector(p).values)
            assert dh <= 1e-3
