"""Exhaustive exact-probability oracles, cross-checked by local brute force."""

import itertools
from fractions import Fraction

import pytest

from singlab import (
    BudgetError,
    ConfigError,
    DiscreteDist,
    IIDScheme,
    TableScheme,
    enumerate_singularity,
    exact_border_law,
    exact_linear_concentration,
    exact_quadratic_concentration,
    exact_rank_process,
    first_row_zero_prob,
    linear_combination_law,
    quadratic_form_law,
    verify_decoupling,
)
from singlab.ensembles import DensityRule, SparseBernoulliScheme
from singlab.oracle import joint_outcomes
from singlab.xlinalg import ExactMatrix

F = Fraction

BERN = DiscreteDist.bernoulli(F(1, 2))
RAD = DiscreteDist.rademacher()
GB2 = IIDScheme(BERN)
GRAD = IIDScheme(RAD)


# -- joint outcome enumeration ---------------------------------------------------


def test_joint_outcomes_total_mass_uniform_and_weighted():
    for dists in (
        [BERN, RAD, BERN],  # uniform masses: shared-probability fast path
        [DiscreteDist.bernoulli(F(1, 3)), RAD],  # weighted path
    ):
        outcomes = list(joint_outcomes(dists))
        assert len(outcomes) == 2 ** len(dists)
        assert sum(p for _, p in outcomes) == 1


def test_joint_outcomes_budget():
    with pytest.raises(BudgetError):
        list(joint_outcomes([BERN] * 10, budget=100))


# -- singularity probabilities ------------------------------------------------------


def test_singularity_frozen_bernoulli_values():
    # 2x2 {0,1}: singular iff ad = bc; P(ad=0)P(bc=0) + P(ad=1)P(bc=1)
    # = (3/4)^2 + (1/4)^2 = 10/16
    assert enumerate_singularity(GB2, 2, "ginibre") == F(10, 16)
    # symmetric 2x2 {0,1}: singular iff ac = b^2; b=0 needs ac=0 (3 cases),
    # b=1 needs ac=1 (1 case) out of 8
    assert enumerate_singularity(GB2, 2, "wigner") == F(1, 2)


def test_singularity_frozen_sign_matrix_values():
    assert enumerate_singularity(GRAD, 2, "ginibre") == F(1, 2)
    assert enumerate_singularity(GRAD, 3, "ginibre") == F(320, 512)
    assert enumerate_singularity(GRAD, 2, "wigner") == F(1, 2)


def test_singularity_matches_local_brute_force_2x2():
    brute = F(0)
    for a, b, c, d in itertools.product((0, 1), repeat=4):
        if a * d - b * c == 0:
            brute += F(1, 16)
    assert enumerate_singularity(GB2, 2, "ginibre") == brute


def test_singularity_weighted_entries():
    # P(singular) for 1x1 is just the mass at zero
    tilted = IIDScheme(DiscreteDist.bernoulli(F(1, 3)))
    assert enumerate_singularity(tilted, 1, "ginibre") == F(2, 3)
    # 2x2 brute force with per-outcome weights
    third = DiscreteDist.bernoulli(F(1, 3))
    brute = F(0)
    for vals in itertools.product((0, 1), repeat=4):
        a, b, c, d = vals
        if a * d == b * c:
            p = F(1)
            for v in vals:
                p *= F(1, 3) if v == 1 else F(2, 3)
            brute += p
    assert enumerate_singularity(IIDScheme(third), 2, "ginibre") == brute


def test_singularity_guards():
    with pytest.raises(ConfigError):
        enumerate_singularity(GB2, 2, "hermite")
    with pytest.raises(BudgetError):
        enumerate_singularity(GB2, 2, "ginibre", budget=10)
    asym = TableScheme(((BERN, RAD), (DiscreteDist.point(0), BERN)))
    with pytest.raises(ConfigError):
        enumerate_singularity(asym, 2, "wigner")


# -- linear combinations ---------------------------------------------------------


def test_linear_concentration_two_signs():
    mass, at = exact_linear_concentration([1, 1], [RAD, RAD])
    assert (mass, at) == (F(1, 2), F(0))


def test_linear_concentration_central_binomial():
    n = 10
    mass, at = exact_linear_concentration([1] * n, [RAD] * n)
    assert at == 0
    assert mass == F(252, 1024)  # C(10,5)/2^10


def test_linear_combination_law_shifted():
    law = linear_combination_law([2, 3], [BERN, BERN])
    assert dict(zip(law.values, law.masses)) == {
        F(0): F(1, 4),
        F(2): F(1, 4),
        F(3): F(1, 4),
        F(5): F(1, 4),
    }
    with pytest.raises(ConfigError):
        linear_combination_law([0, 1], [BERN, BERN])
    with pytest.raises(ConfigError):
        linear_combination_law([1], [BERN, BERN])


# -- quadratic forms ------------------------------------------------------------------


def brute_quadratic(c, dists):
    acc = {}
    n = len(dists)
    for values, p in joint_outcomes(dists):
        phi = sum(
            F(c[i][j]) * values[i] * values[j] for i in range(n) for j in range(n)
        )
        acc[phi] = acc.get(phi, F(0)) + p
    return acc


def test_quadratic_form_law_cross_term():
    law = quadratic_form_law([[0, 1], [1, 0]], [BERN, BERN])
    assert dict(zip(law.values, law.masses)) == {F(0): F(3, 4), F(2): F(1, 4)}


def test_quadratic_form_fast_path_matches_brute_force():
    import numpy as np

    from singlab.oracle import _quadratic_law_int_fast

    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        c = rng.integers(-3, 4, size=(n, n))
        c = (c + c.T).tolist()
        dists = [RAD if rng.integers(2) else BERN for _ in range(n)]
        cc = [[F(e) for e in row] for row in c]
        fast = _quadratic_law_int_fast(cc, dists, budget=2**24)
        assert fast is not None  # int coefficients + uniform masses: fast path taken
        law = quadratic_form_law(c, dists)
        assert fast == law
        assert dict(zip(law.values, law.masses)) == brute_quadratic(c, dists)


def test_quadratic_form_generic_path_weighted():
    third = DiscreteDist.bernoulli(F(1, 3))
    c = [[1, -2], [-2, 3]]
    law = quadratic_form_law(c, [third, RAD])
    assert dict(zip(law.values, law.masses)) == brute_quadratic(c, [third, RAD])


def test_quadratic_form_rational_coefficients():
    c = [["1/2", "1/3"], ["1/3", "1/4"]]
    law = quadratic_form_law(c, [BERN, BERN])
    expect = {
        F(0): F(1, 4),
        F(1, 2): F(1, 4),
        F(1, 4): F(1, 4),
        F(1, 2) + F(2, 3) + F(1, 4): F(1, 4),
    }
    assert dict(zip(law.values, law.masses)) == expect


def test_quadratic_form_guards():
    with pytest.raises(ConfigError):
        quadratic_form_law([[0, 1], [2, 0]], [BERN, BERN])  # asymmetric
    with pytest.raises(ConfigError):
        quadratic_form_law([[0, 1]], [BERN, BERN])  # wrong shape
    with pytest.raises(BudgetError):
        quadratic_form_law([[0] * 12] * 12, [BERN] * 12, budget=100)


def test_quadratic_concentration_sup_atom():
    mass, at = exact_quadratic_concentration([[0, 1], [1, 0]], [BERN, BERN])
    assert (mass, at) == (F(3, 4), F(0))


# -- decoupling --------------------------------------------------------------------


def test_decoupling_frozen_example():
    lhs_sq, rhs, holds = verify_decoupling(
        [[0, 1], [1, 0]], [BERN, BERN], s1=[1], s2=[2], interval=(2, 2)
    )
    assert (lhs_sq, rhs, holds) == (F(1, 16), F(1, 8), True)


def test_decoupling_unbounded_interval_is_trivial():
    lhs_sq, rhs, holds = verify_decoupling(
        [[0, 1], [1, 0]], [RAD, RAD], s1=[1], s2=[2], interval=(None, None)
    )
    assert (lhs_sq, rhs, holds) == (F(1), F(1), True)


def test_decoupling_partition_validation():
    c = [[0, 1], [1, 0]]
    with pytest.raises(ConfigError):
        verify_decoupling(c, [BERN, BERN], s1=[1, 2], s2=[2], interval=(0, 1))
    with pytest.raises(ConfigError):
        verify_decoupling(c, [BERN, BERN], s1=[1], s2=[], interval=(0, 1))
    with pytest.raises(ConfigError):
        verify_decoupling(c, [BERN, BERN], s1=[1], s2=[3], interval=(0, 1))
    with pytest.raises(ConfigError):
        verify_decoupling(c, [BERN, BERN], s1=[1], s2=[2], interval=(2, 1))
    with pytest.raises(BudgetError):
        verify_decoupling(c, [BERN, BERN], s1=[1], s2=[2], interval=(0, 1), budget=4)


def test_decoupling_never_violated_on_random_battery():
    import numpy as np

    rng = np.random.default_rng(99)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        c = rng.integers(-2, 3, size=(n, n))
        c = (c + c.T).tolist()
        dists = [RAD if rng.integers(2) else BERN for _ in range(n)]
        cut = int(rng.integers(1, n))
        s1 = list(range(1, cut + 1))
        s2 = list(range(cut + 1, n + 1))
        lo = int(rng.integers(-4, 5))
        hi = lo + int(rng.integers(0, 6))
        lhs_sq, rhs, holds = verify_decoupling(c, dists, s1, s2, (lo, hi))
        assert holds and lhs_sq <= rhs


# -- symmetric bordering law ---------------------------------------------------------


def test_border_law_frozen_cases():
    ones = ExactMatrix.from_rows([[1, 1], [1, 1]])
    law = exact_border_law(ones, GB2)
    assert dict(zip(law.values, law.masses)) == {F(0): F(1, 4), F(1): F(1, 4), F(2): F(1, 2)}

    eye = ExactMatrix.identity(2)
    law = exact_border_law(eye, GB2)
    assert dict(zip(law.values, law.masses)) == {F(0): F(3, 8), F(1): F(5, 8)}

    zero = ExactMatrix.from_rows([[0]])
    law = exact_border_law(zero, GB2)
    assert dict(zip(law.values, law.masses)) == {F(0): F(1, 4), F(1): F(1, 4), F(2): F(1, 2)}


def test_border_law_guards():
    with pytest.raises(ConfigError):
        exact_border_law(ExactMatrix.from_rows([[1, 2], [3, 4]]), GB2)


# -- rank process expectations --------------------------------------------------------


def test_rank_process_frozen_bernoulli_values():
    out = exact_rank_process(GB2, 3)
    assert out == pytest.approx(
        [0.5452538663326288, 0.5575912891248118, 0.5592730459943164]
    )
    # explicit kappa override matches the per-size default for iid Bernoulli(1/2)
    assert exact_rank_process(GB2, 3, kappa=0.5) == pytest.approx(out)


def test_rank_process_sign_matrix_starts_at_zero():
    out = exact_rank_process(GRAD, 2)
    assert out[0] == 0.0  # a +-1 scalar is never singular
    assert out[1] == pytest.approx(0.5 * 2 ** (1 / 8))  # singular iff equal diagonal


def test_rank_process_guards():
    asym = TableScheme(((BERN, RAD), (DiscreteDist.point(0), BERN)))
    with pytest.raises(ConfigError):
        exact_rank_process(asym, 2)
    with pytest.raises(ConfigError):
        exact_rank_process(GB2, 0)
    with pytest.raises(ConfigError):
        exact_rank_process(IIDScheme(DiscreteDist.point(1)), 2)  # kappa_n = 1
    with pytest.raises(BudgetError):
        exact_rank_process(GB2, 8, budget=100)


# -- first-row-zero probabilities ------------------------------------------------------


def test_first_row_zero_values():
    assert first_row_zero_prob(GB2, 2, "ginibre") == F(1, 4)
    assert first_row_zero_prob(GB2, 3, "wigner") == F(1, 8)
    sparse = SparseBernoulliScheme(DensityRule(alpha=0.0))
    assert first_row_zero_prob(sparse, 5, "ginibre") == F(4, 5) ** 5
    assert first_row_zero_prob(GRAD, 4, "ginibre") == 0
    with pytest.raises(ConfigError):
        first_row_zero_prob(GB2, 2, "adjacency")
