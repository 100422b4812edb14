import math

import numpy as np
import pytest

from gsbm.divergence import (
    ch_divergence_discrete,
    ch_divergence_profile,
    information_metric,
    mgf_P,
    mgf_Q,
    rate_function_zero,
    sample_Z,
    sample_Z_many,
)
from gsbm.geometry import unit_ball_volume
from gsbm.profiles import evaluate, make_step_profile

from conftest import random_profile


def step_closed_form(a, b, lam, d, r):
    return lam * unit_ball_volume(d) * r**d * (
        1 - math.sqrt(a * b) - math.sqrt((1 - a) * (1 - b))
    )


class TestInformationMetric:
    def test_step_closed_form_d1(self):
        p = make_step_profile(0.8, 0.2, 1.0)
        rep = information_metric(p, 1.0, 1)
        assert rep.I == pytest.approx(0.4, abs=1e-12)

    def test_step_closed_form_d3(self):
        # the radial density integrates to 1 in every dimension
        p = make_step_profile(0.8, 0.2, 1.0)
        rep = information_metric(p, 1.0, 3)
        assert rep.I == pytest.approx(4 * math.pi / 3 * 0.2, abs=1e-10)

    def test_positive_for_symmetric_crossing(self, crossing_profile):
        rep = information_metric(crossing_profile, 1.0, 1)
        assert rep.I > 0.0

    def test_quadrature_vs_riemann(self, crossing_profile):
        for profile in (make_step_profile(0.7, 0.35, 1.5), crossing_profile):
            for d in (1, 2):
                rep = information_metric(profile, 2.0, d)
                ts = (np.arange(1_000_000) + 0.5) / 1_000_000 * profile.r
                fi, fo = evaluate(profile, ts)
                g = d * ts ** (d - 1) / profile.r**d
                integrand = (1 - np.sqrt(fi * fo) - np.sqrt((1 - fi) * (1 - fo))) * g
                riemann = 2.0 * unit_ball_volume(d) * profile.r**d * (
                    integrand.mean() * profile.r
                )
                assert rep.I == pytest.approx(riemann, abs=1e-6)

    def test_swap_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            p = random_profile(rng)
            swapped = type(p)(
                r=p.r, f_in=p.f_out, f_out=p.f_in, xi=p.xi,
                intersections=p.intersections,
            )
            a = information_metric(p, 1.3, 2).I
            b = information_metric(swapped, 1.3, 2).I
            assert a == pytest.approx(b, abs=1e-12)


class TestDiscreteDivergence:
    def test_identical_distributions(self):
        p = [np.array([0.3, 0.7])]
        val, _ = ch_divergence_discrete(p, p, [1.0])
        assert abs(val) < 1e-12

    def test_swapped_bernoulli_pair(self):
        p = [np.array([0.8, 0.2]), np.array([0.2, 0.8])]
        q = [np.array([0.2, 0.8]), np.array([0.8, 0.2])]
        val, t_star = ch_divergence_discrete(p, q, [0.5, 0.5])
        assert val == pytest.approx(0.2, abs=1e-10)
        assert t_star == pytest.approx(0.5, abs=1e-6)

    def test_grid_scan_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            p = [rng.dirichlet(np.ones(4)) for _ in range(2)]
            q = [rng.dirichlet(np.ones(4)) for _ in range(2)]
            pi = [0.5, 0.5]
            val, _ = ch_divergence_discrete(p, q, pi)

            ts = np.arange(0.0, 1.0 + 1e-12, 1e-4)
            obj = np.array(
                [
                    sum(
                        w * np.sum(pk**t * qk ** (1 - t))
                        for w, pk, qk in zip(pi, p, q)
                    )
                    for t in ts
                ]
            )
            assert val == pytest.approx(1.0 - obj.min(), abs=1e-7)
            assert 0.0 <= val <= 1.0

    def test_sparse_logarithmic_regime(self):
        # two-community symmetric comparison in the n >> 1 scaling
        a, b, n = 5.0, 1.0, 1e6
        pa, pb = a * math.log(n) / n, b * math.log(n) / n
        p = [np.array([pa, 1 - pa]), np.array([pb, 1 - pb])]
        q = [np.array([pb, 1 - pb]), np.array([pa, 1 - pa])]
        val, _ = ch_divergence_discrete(p, q, [0.5, 0.5])

        ts = np.linspace(0, 1, 10_001)
        dense = 0.5 * (ts * a + (1 - ts) * b - a**ts * b ** (1 - ts)) + 0.5 * (
            ts * b + (1 - ts) * a - b**ts * a ** (1 - ts)
        )
        target = dense.max()
        assert n / math.log(n) * val == pytest.approx(target, rel=0.02)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="not normalized"):
            ch_divergence_discrete([np.array([0.5, 0.6])], [np.array([0.5, 0.5])], [1.0])

    def test_value_zero_iff_componentwise_equal(self):
        rng = np.random.default_rng(4)
        p = [rng.dirichlet(np.ones(3)) for _ in range(2)]
        q = [p[0].copy(), rng.dirichlet(np.ones(3))]
        val, _ = ch_divergence_discrete(p, q, [0.5, 0.5])
        assert val > 1e-6
        val_eq, _ = ch_divergence_discrete(p, [x.copy() for x in p], [0.5, 0.5])
        assert abs(val_eq) < 1e-12


class TestProfileDivergence:
    def test_step_value_and_minimizer(self):
        p = make_step_profile(0.8, 0.2, 1.0)
        val, t_star = ch_divergence_profile(p, 1)
        assert val == pytest.approx(0.2, abs=1e-10)
        assert t_star == pytest.approx(0.5, abs=1e-6)

    def test_minimizer_always_half(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            p = random_profile(rng)
            _, t_star = ch_divergence_profile(p, int(rng.integers(1, 4)))
            assert t_star == pytest.approx(0.5, abs=1e-6)

    def test_near_equal_levels_small_value(self):
        p = make_step_profile(0.51, 0.49, 1.0)
        val, _ = ch_divergence_profile(p, 1)
        closed = 1 - math.sqrt(0.51 * 0.49) - math.sqrt(0.49 * 0.51)
        assert val == pytest.approx(closed, abs=1e-10)
        assert val <= 1e-3

    def test_identity_with_information_metric(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            p = random_profile(rng)
            d = int(rng.integers(1, 4))
            lam = float(rng.uniform(0.5, 5.0))
            rep = information_metric(p, lam, d)
            scale = lam * unit_ball_volume(d) * p.r**d
            assert rep.I == pytest.approx(scale * rep.D_plus, abs=1e-8)


class TestMgf:
    def test_endpoints_are_one(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            p = random_profile(rng)
            for d in (1, 2):
                assert mgf_P(p, d, 0.0) == pytest.approx(1.0, abs=1e-10)
                assert mgf_P(p, d, 1.0) == pytest.approx(1.0, abs=1e-10)
                assert mgf_Q(p, d, 0.0) == pytest.approx(1.0, abs=1e-10)

    def test_half_point_symmetry(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            p = random_profile(rng)
            assert mgf_P(p, 2, 0.5) == pytest.approx(mgf_Q(p, 2, 0.5), abs=1e-14)

    def test_convexity_on_grid(self, crossing_profile):
        ts = np.linspace(0, 1, 21)
        vals = [mgf_P(crossing_profile, 1, t) for t in ts]
        for i in range(1, len(ts) - 1):
            assert vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-12
        assert vals[10] <= min(vals[0], vals[-1]) + 1e-12


class TestRateFunction:
    def test_step_closed_form(self):
        p = make_step_profile(0.8, 0.2, 1.0)
        assert rate_function_zero(p, 1) == pytest.approx(-math.log(0.8), abs=1e-12)

    def test_near_equal_levels_vanish(self):
        p = make_step_profile(0.501, 0.499, 1.0)
        assert rate_function_zero(p, 1) == pytest.approx(0.0, abs=1e-5)

    def test_identity_with_information_metric(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            p = random_profile(rng)
            d = int(rng.integers(1, 4))
            lam = float(rng.uniform(0.5, 5.0))
            scale = lam * unit_ball_volume(d) * p.r**d
            lhs = scale * (1.0 - math.exp(-rate_function_zero(p, d)))
            rhs = information_metric(p, lam, d).I
            assert lhs == pytest.approx(rhs, abs=1e-9)


class _ZeroPoissonRng:
    """Stub generator forcing empty Poisson counts."""

    def poisson(self, mu, size=None):
        return 0 if size is None else np.zeros(size, dtype=np.int64)

    def random(self, size=None):
        raise AssertionError("no draws expected with zero counts")


class TestZSampling:
    def test_empty_sum_is_zero(self):
        p = make_step_profile(0.8, 0.2, 1.0)
        z = sample_Z(p, 1.0, 1, 100.0, _ZeroPoissonRng())
        assert z.value == 0.0 and z.n_plus == 0 and z.n_minus == 0

    def test_negative_mean(self):
        p = make_step_profile(0.8, 0.2, 1.0)
        rng = np.random.default_rng(10)
        vals = sample_Z_many(p, 1.0, 1, 1000.0, 100_000, rng)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert vals.mean() < -5 * se

    def test_exponential_half_moment_matches_power_law(self):
        p = make_step_profile(0.8, 0.2, 1.0)
        lam, d, n = 1.0, 1, 100.0
        rep = information_metric(p, lam, d)
        rng = np.random.default_rng(11)
        vals = np.exp(sample_Z_many(p, lam, d, n, 1_000_000, rng) / 2.0)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - n**-rep.I) <= 3 * se

    def test_batch_matches_single_draw_law(self):
        p = make_step_profile(0.8, 0.2, 1.0)
        rng1 = np.random.default_rng(12)
        singles = np.array(
            [sample_Z(p, 1.0, 1, 200.0, rng1).value for _ in range(20_000)]
        )
        rng2 = np.random.default_rng(13)
        batch = sample_Z_many(p, 1.0, 1, 200.0, 20_000, rng2)
        assert abs(singles.mean() - batch.mean()) < 4 * (
            singles.std() / math.sqrt(len(singles)) + batch.std() / math.sqrt(len(batch))
        )
