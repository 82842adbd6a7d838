from enum import Enum
from typing import Optional, Union

import numpy as np

from momentshape.moments import MomentGrid, MomentKind
from momentshape.utils.rand import create_rng

MAX_SEED = 2**64 - 1


class NoiseSchedule(Enum):
    """
    An enumeration of the decay schedules of the noise variance in the
    moment order N.
    """

    NONE = "none"
    MEAN_CONSISTENT = "mean"
    AS_CONSISTENT = "as"
    FIXED = "fixed"


class NoisySpec:
    """
    The distribution of additive Gaussian noise on Legendre moments. Every
    moment of order N receives independent noise with mean zero and variance

    * c N^-(2 + epsilon) for the mean consistent schedule,
    * c N^-(3 + epsilon) for the almost surely consistent schedule,
    * c for the fixed schedule, and
    * zero without noise.
    """

    def __init__(
        self,
        schedule: Union[NoiseSchedule, str] = NoiseSchedule.NONE,
        epsilon: float = 0.5,
        scale: float = 0.0,
        seed: int = 0,
    ):
        """
        :param schedule: the decay schedule of the variance
        :param epsilon: the exponent offset of the decaying schedules
        :param scale: the scale c of the variance
        :param seed: the seed of the noise
        """
        schedule = NoiseSchedule(schedule)
        if not epsilon > 0.0:
            raise ValueError(f"epsilon ({epsilon}) must be positive")
        if scale < 0.0:
            raise ValueError(f"scale ({scale}) must be non-negative")
        if not 0 <= seed <= MAX_SEED:
            raise ValueError(
                f"seed ({seed}) must be between 0 and {MAX_SEED}"
            )

        self._schedule = schedule
        self._epsilon = float(epsilon)
        self._scale = float(scale)
        self._seed = int(seed)

    @property
    def schedule(self) -> NoiseSchedule:
        """
        The decay schedule of the variance.
        """
        return self._schedule

    @property
    def epsilon(self) -> float:
        """
        The exponent offset of the decaying schedules.
        """
        return self._epsilon

    @property
    def scale(self) -> float:
        """
        The scale c of the variance.
        """
        return self._scale

    @property
    def seed(self) -> int:
        """
        The seed of the noise.
        """
        return self._seed

    def with_seed(self, seed: int) -> "NoisySpec":
        """
        Returns a copy of the specification with a different seed.

        :param seed: the new seed
        :return: the new specification
        """
        return NoisySpec(self._schedule, self._epsilon, self._scale, seed)

    def variance(self, order: int) -> float:
        """
        Returns the noise variance sigma_N^2 of the moments of order N.

        :param order: the order N
        :return: the variance
        """
        if order < 0:
            raise ValueError(f"order ({order}) must be non-negative")

        if self._schedule == NoiseSchedule.NONE:
            return 0.0
        if self._schedule == NoiseSchedule.FIXED:
            return self._scale
        if order == 0:
            raise ValueError(
                f"order (0) must be positive for the {self._schedule.value} "
                "noise schedule"
            )

        exponent = (
            2.0 if self._schedule == NoiseSchedule.MEAN_CONSISTENT else 3.0
        )
        return self._scale * float(order) ** -(exponent + self._epsilon)

    def expected_sum_of_squares(self, order: int) -> float:
        """
        Returns the expected sum of the squared noise over all (N + 1)^2
        moments, (N + 1)^2 sigma_N^2.

        :param order: the order N
        :return: the expected sum of squares
        """
        return (order + 1) ** 2 * self.variance(order)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NoisySpec) and vars(self) == vars(other)


def sample_noise(
    order: int, spec: NoisySpec, draws: Optional[int] = None
) -> np.ndarray:
    """
    Draws the noise of the moments up to order N. The noise of the moment
    (k, l) comes from its own Philox stream keyed by the seed and (N, k, l),
    so every entry only depends on the specification and its index.
    Repeated draws take the successive values of every stream.

    :param order: the order N
    :param spec: the noise specification
    :param draws: the number of repeated draws, if any
    :return: the (N + 1) x (N + 1) array of noise, or a draws x (N + 1) x
        (N + 1) array with repeated draws
    """
    count = 1 if draws is None else draws
    if count < 1:
        raise ValueError(f"number of draws ({count}) must be at least 1")

    variance = spec.variance(order)
    noise = np.zeros((count, order + 1, order + 1))
    if variance > 0.0:
        for k, l in np.ndindex(order + 1, order + 1):
            rng = create_rng(spec.seed, order, k, l)
            noise[:, k, l] = rng.standard_normal(count)
        noise *= np.sqrt(variance)

    return noise[0] if draws is None else noise


def perturb(target: MomentGrid, spec: NoisySpec) -> MomentGrid:
    """
    Adds noise to Legendre moments.

    :param target: the exact Legendre moments
    :param spec: the noise specification
    :return: the noisy Legendre moments
    """
    if target.kind != MomentKind.LEGENDRE:
        raise ValueError(
            f"moment kind ({target.kind.value}) must be legendre"
        )
    if spec.schedule == NoiseSchedule.NONE:
        return target

    return MomentGrid(
        MomentKind.LEGENDRE,
        target.values + sample_noise(target.order, spec),
    )
