import logging
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from mpi4py import MPI

from momentshape.bounds import BoundConfig, noise_envelope
from momentshape.estimator import LeastSquaresEstimator, ReconstructionConfig
from momentshape.geometry import (
    ConvexPolygon,
    DirectionSet,
    hausdorff_distance,
    nikodym_distance,
    polygonization_bound,
)
from momentshape.legendre_basis import LegendreBasis, build_basis
from momentshape.moment_polynomials import MomentPolynomials
from momentshape.moments import MomentGrid, shape_legendre_moments
from momentshape.noise_model import NoisySpec, perturb
from momentshape.shape import PolygonShape, ShapeModel

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1024
MIN_CALIBRATED_A1 = 1e-12
UNIT_SQUARE_VERTICES = np.array(
    [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
)

Cell = Tuple[int, int, int]


class StudyKind(Enum):
    """
    An enumeration of the kinds of reconstruction studies.
    """

    CONVERGENCE = "convergence"
    NOISE = "noise"


class StudyRecord(NamedTuple):
    """
    The outcome of one reconstruction of a study.
    """

    n: int
    N: int
    seed: int
    sigma2: float
    sum_eps2: float
    objective: float
    nikodym: float
    hausdorff: float
    bound_envelope: float
    converged: bool


STUDY_COLUMNS = StudyRecord._fields


class StudyConfig:
    """
    The setup of a reconstruction study over a grid of direction counts n and
    moment orders N.
    """

    def __init__(
        self,
        kind: Union[StudyKind, str],
        truth: ShapeModel,
        grid: Sequence[Tuple[int, int]],
        seeds: Sequence[int],
        reconstruction: Optional[ReconstructionConfig] = None,
        noise: Optional[NoisySpec] = None,
        bounds: Optional[BoundConfig] = None,
        resolution: int = DEFAULT_RESOLUTION,
    ):
        """
        :param kind: the kind of the study
        :param truth: the true body
        :param grid: the pairs (n, N) of direction counts and moment orders;
            every n must be a multiple of 4
        :param seeds: the seeds of the noise and the solver starts
        :param reconstruction: the reconstruction settings
        :param noise: the noise specification; ignored by convergence
            studies
        :param bounds: the constants of the bound envelope
        :param resolution: the number of vertices of the polygonal
            approximation of the truth
        """
        kind = StudyKind(kind)
        grid = tuple((int(n), int(order)) for n, order in grid)
        if not grid:
            raise ValueError("study grid must not be empty")
        for n, order in grid:
            if n < 4 or n % 4 != 0:
                raise ValueError(
                    f"number of directions ({n}) must be a positive multiple "
                    "of 4"
                )
            if order < 0:
                raise ValueError(f"order ({order}) must be non-negative")
        seeds = tuple(int(seed) for seed in seeds)
        if not seeds:
            raise ValueError("seeds must not be empty")
        if any(seed < 0 for seed in seeds):
            raise ValueError(f"seeds ({seeds}) must be non-negative")
        if resolution < 3:
            raise ValueError(f"resolution ({resolution}) must be at least 3")

        truth.validate_in_unit_square()

        self._kind = kind
        self._truth = truth
        self._grid = grid
        self._seeds = seeds
        self._reconstruction = reconstruction or ReconstructionConfig()
        if kind == StudyKind.CONVERGENCE or noise is None:
            noise = NoisySpec()
        self._noise = noise
        self._bounds = bounds or BoundConfig()
        self._resolution = resolution

    @property
    def kind(self) -> StudyKind:
        """
        The kind of the study.
        """
        return self._kind

    @property
    def truth(self) -> ShapeModel:
        """
        The true body.
        """
        return self._truth

    @property
    def grid(self) -> Tuple[Tuple[int, int], ...]:
        """
        The pairs (n, N) of direction counts and moment orders.
        """
        return self._grid

    @property
    def seeds(self) -> Tuple[int, ...]:
        """
        The seeds of the noise and the solver starts.
        """
        return self._seeds

    @property
    def reconstruction(self) -> ReconstructionConfig:
        """
        The reconstruction settings.
        """
        return self._reconstruction

    @property
    def noise(self) -> NoisySpec:
        """
        The noise specification.
        """
        return self._noise

    @property
    def bounds(self) -> BoundConfig:
        """
        The constants of the bound envelope.
        """
        return self._bounds

    @property
    def resolution(self) -> int:
        """
        The number of vertices of the polygonal approximation of the truth.
        """
        return self._resolution

    def cells(self) -> List[Cell]:
        """
        Returns the (n, N, seed) cells of the study sorted by key.
        """
        return sorted(
            (n, order, seed) for n, order in self._grid for seed in self._seeds
        )


class _CellRunner:
    """
    Runs study cells, caching bases, moment polynomials and exact truth
    moments across the cells of a rank.
    """

    def __init__(self, config: StudyConfig):
        self._config = config
        self._truth_polygon = config.truth.to_polygon(config.resolution)
        self._bases: Dict[int, LegendreBasis] = {}
        self._moments: Dict[int, MomentGrid] = {}
        self._polynomials: Dict[Tuple[int, int], MomentPolynomials] = {}

    def __call__(self, cell: Cell) -> StudyRecord:
        n, order, seed = cell
        config = self._config
        directions = DirectionSet.equidistant(n)

        spec = config.noise.with_seed(seed)
        exact = self._truth_moments(order)
        noisy = perturb(exact, spec)
        sum_eps2 = float(np.sum((noisy.values - exact.values) ** 2))

        estimator = LeastSquaresEstimator(
            self._moment_polynomials(directions, order),
            config.reconstruction.with_seed(seed),
        )
        try:
            result = estimator.reconstruct(noisy)
        except RuntimeError as error:
            logger.warning(
                "cell n=%d N=%d seed=%d failed: %s", n, order, seed, error
            )
            return StudyRecord(
                n=n,
                N=order,
                seed=seed,
                sigma2=spec.variance(order),
                sum_eps2=sum_eps2,
                objective=float("nan"),
                nikodym=float("nan"),
                hausdorff=float("nan"),
                bound_envelope=noise_envelope(
                    directions, sum_eps2, order, config.bounds
                ),
                converged=False,
            )

        record = StudyRecord(
            n=n,
            N=order,
            seed=seed,
            sigma2=spec.variance(order),
            sum_eps2=sum_eps2,
            objective=result.objective,
            nikodym=nikodym_distance(self._truth_polygon, result.polygon),
            hausdorff=_hausdorff_or_nan(self._truth_polygon, result.polygon),
            bound_envelope=noise_envelope(
                directions, sum_eps2, order, config.bounds
            ),
            converged=result.converged,
        )
        logger.info(
            "cell n=%d N=%d seed=%d: nikodym %.6e, objective %.6e",
            n,
            order,
            seed,
            record.nikodym,
            record.objective,
        )
        return record

    def _basis(self, order: int) -> LegendreBasis:
        if order not in self._bases:
            self._bases[order] = build_basis(order)
        return self._bases[order]

    def _truth_moments(self, order: int) -> MomentGrid:
        if order not in self._moments:
            self._moments[order] = shape_legendre_moments(
                self._config.truth, self._basis(order)
            )
        return self._moments[order]

    def _moment_polynomials(
        self, directions: DirectionSet, order: int
    ) -> MomentPolynomials:
        key = (len(directions), order)
        if key not in self._polynomials:
            self._polynomials[key] = MomentPolynomials(
                directions, self._basis(order)
            )
        return self._polynomials[key]


def run_study(
    config: StudyConfig, parallel_enabled: bool = True
) -> List[StudyRecord]:
    """
    Runs every (n, N, seed) cell of a study. With parallelism enabled, the
    cells are distributed round robin over the MPI ranks and the records are
    gathered on every rank. The records are sorted by cell key regardless of
    the number of ranks.

    :param config: the study setup
    :param parallel_enabled: whether to distribute the cells over the ranks
    :return: the records of all cells
    """
    cells = config.cells()
    runner = _CellRunner(config)

    comm = MPI.COMM_WORLD
    if parallel_enabled and comm.size > 1:
        local_cells = cells[comm.rank :: comm.size]
        local_records = [runner(cell) for cell in local_cells]
        records = [
            record
            for rank_records in comm.allgather(local_records)
            for record in rank_records
        ]
    else:
        records = [runner(cell) for cell in cells]

    return sorted(records, key=lambda record: record[:3])


def noise_consistency_study(
    truth: ShapeModel,
    spec: NoisySpec,
    grid: Sequence[Tuple[int, int]],
    seeds: Sequence[int],
    reconstruction: Optional[ReconstructionConfig] = None,
    bounds: Optional[BoundConfig] = None,
    resolution: int = DEFAULT_RESOLUTION,
    parallel_enabled: bool = True,
) -> List[StudyRecord]:
    """
    Reconstructs the truth from noisy Legendre moments for every cell of the
    grid and seed; the seed drives both the noise and the solver starts.

    :param truth: the true body
    :param spec: the noise specification; its seed is replaced by the seeds
    :param grid: the pairs (n, N) of direction counts and moment orders
    :param seeds: the seeds
    :param reconstruction: the reconstruction settings
    :param bounds: the constants of the bound envelope
    :param resolution: the resolution of the polygonal truth
    :param parallel_enabled: whether to distribute the cells over MPI ranks
    :return: the study records sorted by cell key
    """
    config = StudyConfig(
        StudyKind.NOISE,
        truth,
        grid,
        seeds,
        reconstruction,
        spec,
        bounds,
        resolution,
    )
    return run_study(config, parallel_enabled)


def convergence_study(
    truth: ShapeModel,
    grid: Sequence[Tuple[int, int]],
    seeds: Sequence[int],
    reconstruction: Optional[ReconstructionConfig] = None,
    bounds: Optional[BoundConfig] = None,
    resolution: int = DEFAULT_RESOLUTION,
    parallel_enabled: bool = True,
) -> List[StudyRecord]:
    """
    Reconstructs the truth from exact Legendre moments for every cell of the
    grid and seed.

    :param truth: the true body
    :param grid: the pairs (n, N) of direction counts and moment orders
    :param seeds: the seeds of the solver starts
    :param reconstruction: the reconstruction settings
    :param bounds: the constants of the bound envelope
    :param resolution: the resolution of the polygonal truth
    :param parallel_enabled: whether to distribute the cells over MPI ranks
    :return: the study records sorted by cell key
    """
    config = StudyConfig(
        StudyKind.CONVERGENCE,
        truth,
        grid,
        seeds,
        reconstruction,
        None,
        bounds,
        resolution,
    )
    return run_study(config, parallel_enabled)


def median_errors(
    records: Sequence[StudyRecord],
) -> Dict[Tuple[int, int], Dict[str, float]]:
    """
    Returns the medians of the errors over the seeds of every (n, N) pair.
    Undefined values, such as the Hausdorff distance to a collapsed
    reconstruction or the errors of a failed cell, are left out; a median
    without any defined value is NaN.

    :param records: the study records
    :return: a mapping from (n, N) to the medians of the Nikodym distance,
        the Hausdorff distance and the objective
    """
    groups: Dict[Tuple[int, int], List[StudyRecord]] = {}
    for record in records:
        groups.setdefault((record.n, record.N), []).append(record)

    return {
        key: {
            "nikodym": _median([r.nikodym for r in group]),
            "hausdorff": _median([r.hausdorff for r in group]),
            "objective": _median([r.objective for r in group]),
        }
        for key, group in sorted(groups.items())
    }


def calibrate_a1(
    grid: Sequence[Tuple[int, int]],
    seeds: Sequence[int],
    truth: Optional[ShapeModel] = None,
    reconstruction: Optional[ReconstructionConfig] = None,
    resolution: int = DEFAULT_RESOLUTION,
    parallel_enabled: bool = True,
) -> float:
    """
    Calibrates the truncation constant a1 as the smallest value for which the
    reconstructions of the truth, by default the unit square, respect the
    bound sqrt(2) max tan(gap / 2) + a1 / (N + 1).

    :param grid: the pairs (n, N) of direction counts and moment orders
    :param seeds: the seeds of the solver starts
    :param truth: the calibration body
    :param reconstruction: the reconstruction settings
    :param resolution: the resolution of the polygonal truth
    :param parallel_enabled: whether to distribute the cells over MPI ranks
    :return: the calibrated constant
    """
    if truth is None:
        truth = PolygonShape(ConvexPolygon(UNIT_SQUARE_VERTICES))

    records = convergence_study(
        truth,
        grid,
        seeds,
        reconstruction,
        resolution=resolution,
        parallel_enabled=parallel_enabled,
    )
    excesses = [
        (record.N + 1)
        * max(
            record.nikodym
            - polygonization_bound(DirectionSet.equidistant(record.n)),
            0.0,
        )
        for record in records
        if np.isfinite(record.nikodym)
    ]
    a1 = max(excesses + [MIN_CALIBRATED_A1])
    logger.info("calibrated a1 = %g from %d runs", a1, len(records))
    return a1


def _hausdorff_or_nan(p: ConvexPolygon, q: ConvexPolygon) -> float:
    if p.is_degenerate or q.is_degenerate:
        return float("nan")
    return hausdorff_distance(p, q)


def _median(values: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    if np.all(np.isnan(values)):
        return float("nan")
    return float(np.nanmedian(values))
