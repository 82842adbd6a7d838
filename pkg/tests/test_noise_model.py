import numpy as np
import pytest

from momentshape.moments import MomentGrid, MomentKind
from momentshape.noise_model import (
    NoiseSchedule,
    NoisySpec,
    perturb,
    sample_noise,
)
from momentshape.utils.rand import create_rng


def create_target(order: int) -> MomentGrid:
    values = np.zeros((order + 1, order + 1))
    values[0, 0] = 0.5
    return MomentGrid(MomentKind.LEGENDRE, values)


def test_noisy_spec_with_bad_arguments():
    with pytest.raises(ValueError):
        NoisySpec("quadratic")

    with pytest.raises(ValueError):
        NoisySpec(NoiseSchedule.AS_CONSISTENT, epsilon=0.0)

    with pytest.raises(ValueError):
        NoisySpec(NoiseSchedule.FIXED, scale=-1.0)

    with pytest.raises(ValueError):
        NoisySpec(NoiseSchedule.FIXED, seed=-1)


def test_noisy_spec():
    spec = NoisySpec("as", 0.25, 0.01, 3)

    assert spec.schedule == NoiseSchedule.AS_CONSISTENT
    assert spec.epsilon == 0.25
    assert spec.scale == 0.01
    assert spec.seed == 3
    assert spec.with_seed(4) == NoisySpec("as", 0.25, 0.01, 4)
    assert spec.with_seed(4) != spec


def test_variance():
    assert NoisySpec().variance(10) == 0.0
    assert NoisySpec("fixed", scale=0.02).variance(10) == 0.02
    assert NoisySpec("mean", 0.5, 0.01).variance(10) == pytest.approx(
        3.1623e-5, rel=1e-4
    )
    assert NoisySpec("as", 0.5, 0.01).variance(10) == pytest.approx(
        3.1623e-6, rel=1e-4
    )


def test_variance_with_bad_order():
    with pytest.raises(ValueError):
        NoisySpec("fixed", scale=0.01).variance(-1)

    with pytest.raises(ValueError):
        NoisySpec("mean", scale=0.01).variance(0)

    with pytest.raises(ValueError):
        NoisySpec("as", scale=0.01).variance(0)

    assert NoisySpec("fixed", scale=0.01).variance(0) == 0.01
    assert NoisySpec().variance(0) == 0.0


def test_expected_sum_of_squares_decays():
    for schedule in ("mean", "as"):
        spec = NoisySpec(schedule, 0.5, 1.0)
        sums = [spec.expected_sum_of_squares(order) for order in range(1, 30)]

        assert sums[0] == pytest.approx(4.0)
        assert np.all(np.diff(sums) < 0.0)


def test_expected_sum_of_squares_over_study_orders():
    spec = NoisySpec("as", 0.5, 0.01)
    sums = [spec.expected_sum_of_squares(order) for order in (4, 8, 12)]

    assert sums[0] > sums[1] > sums[2]
    assert sums[0] / sums[2] == pytest.approx(25.0 / 169.0 * 3.0**3.5)


def test_sample_noise_statistics():
    spec = NoisySpec("fixed", scale=0.04, seed=5)
    noise = sample_noise(20, spec, draws=100)

    assert noise.shape == (100, 21, 21)
    assert np.var(noise) == pytest.approx(0.04, rel=0.05)
    assert abs(np.mean(noise)) < 4.0 * 0.2 / np.sqrt(noise.size)


def test_sample_noise_mean_sum_of_squares():
    spec = NoisySpec("as", 0.5, 0.01, seed=11)

    for order in (4, 8, 12):
        noise = sample_noise(order, spec, draws=10000)
        sums = np.sum(noise**2, axis=(1, 2))

        assert np.mean(sums) == pytest.approx(
            spec.expected_sum_of_squares(order), rel=0.05
        )


def test_sample_noise_streams():
    spec = NoisySpec("mean", 0.5, 0.01, 21)
    noise = sample_noise(3, spec)
    draws = sample_noise(3, spec, draws=4)

    assert draws.shape == (4, 4, 4)
    assert np.array_equal(draws[0], noise)
    assert noise[2, 1] == pytest.approx(
        np.sqrt(spec.variance(3))
        * create_rng(21, 3, 2, 1).standard_normal(1)[0]
    )


def test_sample_noise_with_bad_draws():
    with pytest.raises(ValueError):
        sample_noise(3, NoisySpec("fixed", scale=0.01), draws=0)


def test_sample_noise_is_deterministic():
    spec = NoisySpec("as", 0.5, 0.01, 17)

    assert np.array_equal(sample_noise(8, spec), sample_noise(8, spec))
    assert not np.array_equal(
        sample_noise(8, spec), sample_noise(8, spec.with_seed(18))
    )
    assert sample_noise(8, spec)[0, 0] != sample_noise(9, spec)[0, 0]


def test_sample_noise_without_variance():
    assert np.array_equal(sample_noise(4, NoisySpec()), np.zeros((5, 5)))


def test_perturb_without_noise():
    target = create_target(4)

    assert perturb(target, NoisySpec()) is target


def test_perturb_with_zero_scale():
    target = create_target(4)
    perturbed = perturb(target, NoisySpec("fixed", scale=0.0))

    assert perturbed.kind == MomentKind.LEGENDRE
    assert np.array_equal(perturbed.values, target.values)


def test_perturb():
    target = create_target(6)
    spec = NoisySpec("mean", 0.5, 0.01, 2)
    perturbed = perturb(target, spec)

    assert perturbed.order == 6
    assert np.allclose(
        perturbed.values - target.values, sample_noise(6, spec)
    )
    assert not np.array_equal(perturbed.values, target.values)


def test_perturb_geometric_moments():
    target = MomentGrid(MomentKind.GEOMETRIC, np.ones((3, 3)))

    with pytest.raises(ValueError):
        perturb(target, NoisySpec("fixed", scale=0.01))
