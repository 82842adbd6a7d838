import logging
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from momentshape.feasible_set import (
    FEASIBILITY_TOLERANCE,
    FeasibleSet,
    ProjectionMethod,
)
from momentshape.geometry import (
    ConvexPolygon,
    DirectionSet,
    SupportVector,
    hausdorff_distance,
    nikodym_distance,
    random_convex_polygon,
)
from momentshape.legendre_basis import LegendreBasis, build_basis
from momentshape.moment_polynomials import MomentPolynomials
from momentshape.moments import (
    MomentGrid,
    MomentKind,
    moment_distance,
    shape_legendre_moments,
)
from momentshape.shape import ShapeModel
from momentshape.utils.rand import create_rng

logger = logging.getLogger(__name__)

ARMIJO_PARAMETER = 1e-4
MIN_STEP = 1e-30
MAX_DISPLACEMENT = np.sqrt(2.0)
MAX_BACKTRACKS = 60
GAUSS_NEWTON_BACKTRACKS = 10
MAX_RESTARTS = 3
DEGENERATE_AREA = 1e-12
TRUTH_POLYGON_RESOLUTION = 1024


class ReconstructionConfig:
    """
    The settings of the multi-start reconstruction.
    """

    def __init__(
        self,
        starts: int = 4,
        max_iters: int = 5000,
        tol: float = 1e-10,
        seed: int = 0,
        projection: Union[ProjectionMethod, str] = ProjectionMethod.NNLS,
        moment_scale: float = 1.0,
    ):
        """
        :param starts: the number of starting points
        :param max_iters: the maximum number of iterations per start
        :param tol: the tolerance of the projected gradient norm
        :param seed: the seed of the random starting points
        :param projection: the method of projecting onto the feasible set
        :param moment_scale: the factor the moment model is multiplied by
        """
        if starts < 1:
            raise ValueError(f"number of starts ({starts}) must be at least 1")
        if max_iters < 1:
            raise ValueError(
                f"maximum number of iterations ({max_iters}) must be at "
                "least 1"
            )
        if not tol > 0.0:
            raise ValueError(f"tolerance ({tol}) must be positive")
        if seed < 0:
            raise ValueError(f"seed ({seed}) must be non-negative")
        if not moment_scale > 0.0:
            raise ValueError(
                f"moment scale ({moment_scale}) must be positive"
            )

        self._starts = int(starts)
        self._max_iters = int(max_iters)
        self._tol = float(tol)
        self._seed = int(seed)
        self._projection = ProjectionMethod(projection)
        self._moment_scale = float(moment_scale)

    @property
    def starts(self) -> int:
        """
        The number of starting points.
        """
        return self._starts

    @property
    def max_iters(self) -> int:
        """
        The maximum number of iterations per start.
        """
        return self._max_iters

    @property
    def tol(self) -> float:
        """
        The tolerance of the projected gradient norm.
        """
        return self._tol

    @property
    def seed(self) -> int:
        """
        The seed of the random starting points.
        """
        return self._seed

    @property
    def projection(self) -> ProjectionMethod:
        """
        The method of projecting onto the feasible set.
        """
        return self._projection

    @property
    def moment_scale(self) -> float:
        """
        The factor the moment model is multiplied by.
        """
        return self._moment_scale

    def with_seed(self, seed: int) -> "ReconstructionConfig":
        """
        Returns a copy of the configuration with a different seed.

        :param seed: the new seed
        :return: the new configuration
        """
        return ReconstructionConfig(
            self._starts,
            self._max_iters,
            self._tol,
            seed,
            self._projection,
            self._moment_scale,
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ReconstructionConfig) and vars(
            self
        ) == vars(other)


class StartKind(Enum):
    """
    An enumeration of the kinds of starting points.
    """

    INSCRIBED_DISK = "inscribed_disk"
    UNIT_SQUARE = "unit_square"
    RANDOM_POLYGON = "random_polygon"


class StartDiagnostics(NamedTuple):
    """
    The course of the minimization from one starting point.
    """

    index: int
    kind: StartKind
    initial_objective: float
    final_objective: float
    iterations: int
    restarts: int
    converged: bool
    projected_gradient_norm: float
    max_violation: float
    objective_trace: Tuple[float, ...]


class TruthErrors(NamedTuple):
    """
    The distances of a reconstruction from the known truth.
    """

    nikodym: float
    hausdorff: Optional[float]
    moment_distance: float


_Candidate = Tuple[np.ndarray, float, np.ndarray, np.ndarray]


class ReconstructionResult:
    """
    The best local minimizer found by the multi-start reconstruction.
    """

    def __init__(
        self,
        h_hat: SupportVector,
        polygon: ConvexPolygon,
        objective: float,
        converged: bool,
        diagnostics: Sequence[StartDiagnostics],
        truth_errors: Optional[TruthErrors] = None,
    ):
        """
        :param h_hat: the support values of the reconstruction
        :param polygon: the reconstructed polygon P(h_hat)
        :param objective: the objective value at h_hat
        :param converged: whether the minimization from the best start
            converged
        :param diagnostics: the diagnostics of every start
        :param truth_errors: the errors with respect to the truth if known
        """
        self._h_hat = h_hat
        self._polygon = polygon
        self._objective = objective
        self._converged = converged
        self._diagnostics = tuple(diagnostics)
        self._truth_errors = truth_errors

    @property
    def h_hat(self) -> SupportVector:
        """
        The support values of the reconstruction.
        """
        return self._h_hat

    @property
    def polygon(self) -> ConvexPolygon:
        """
        The reconstructed polygon.
        """
        return self._polygon

    @property
    def objective(self) -> float:
        """
        The objective value at h_hat.
        """
        return self._objective

    @property
    def starts_used(self) -> int:
        """
        The number of starting points minimized from.
        """
        return len(self._diagnostics)

    @property
    def converged(self) -> bool:
        """
        Whether the minimization from the best start converged.
        """
        return self._converged

    @property
    def diagnostics(self) -> Tuple[StartDiagnostics, ...]:
        """
        The diagnostics of every start in start order.
        """
        return self._diagnostics

    @property
    def truth_errors(self) -> Optional[TruthErrors]:
        """
        The errors with respect to the truth if it is known.
        """
        return self._truth_errors

    def with_truth_errors(
        self, truth_errors: TruthErrors
    ) -> "ReconstructionResult":
        """
        Returns a copy of the result with the provided truth errors.

        :param truth_errors: the errors with respect to the truth
        :return: the new result
        """
        return ReconstructionResult(
            self._h_hat,
            self._polygon,
            self._objective,
            self._converged,
            self._diagnostics,
            truth_errors,
        )


def objective(
    mp: MomentPolynomials,
    target: MomentGrid,
    h: Sequence[float],
    scale: float = 1.0,
) -> float:
    """
    Returns the squared Euclidean distance between the target Legendre
    moments and the scaled Legendre moments of P(h).

    :param mp: the moment polynomials
    :param target: the target Legendre moments
    :param h: the support values
    :param scale: the factor the moment model is multiplied by
    :return: the objective value
    """
    _check_target(mp, target)
    residual = target.values - scale * mp.legendre_moments(h)
    return float(np.sum(residual**2))


def objective_gradient(
    mp: MomentPolynomials,
    target: MomentGrid,
    h: Sequence[float],
    scale: float = 1.0,
) -> np.ndarray:
    """
    Returns the gradient of the objective with respect to h.

    :param mp: the moment polynomials
    :param target: the target Legendre moments
    :param h: the support values
    :param scale: the factor the moment model is multiplied by
    :return: the gradient
    """
    _check_target(mp, target)
    return _objective_and_gradient(mp, target.values, h, scale)[1]


class LeastSquaresEstimator:
    """
    A multi-start minimizer of the squared Legendre moment mismatch over the
    support vectors whose polygons lie in the unit square, combining
    projected Gauss-Newton steps with spectral projected gradient steps.
    """

    def __init__(
        self,
        mp: MomentPolynomials,
        config: Optional[ReconstructionConfig] = None,
    ):
        """
        :param mp: the moment polynomials of the outer normal directions
        :param config: the reconstruction settings
        """
        mp.directions.require_axes()

        self._mp = mp
        self._config = config or ReconstructionConfig()
        self._feasible_set = FeasibleSet(mp.directions)

    @property
    def moment_polynomials(self) -> MomentPolynomials:
        """
        The moment polynomials.
        """
        return self._mp

    @property
    def config(self) -> ReconstructionConfig:
        """
        The reconstruction settings.
        """
        return self._config

    @property
    def feasible_set(self) -> FeasibleSet:
        """
        The feasible set of support vectors.
        """
        return self._feasible_set

    def start_points(self) -> List[Tuple[StartKind, np.ndarray]]:
        """
        Returns the starting points: the support values of the disk inscribed
        in the unit square, those of the unit square, and those of seeded
        random convex polygons in the unit square.
        """
        normals = self._mp.directions.normals
        points = [
            (StartKind.INSCRIBED_DISK, normals @ np.array([0.5, 0.5]) + 0.5),
            (StartKind.UNIT_SQUARE, np.maximum(normals, 0.0).sum(axis=1)),
        ]
        for index in range(2, self._config.starts):
            rng = create_rng(self._config.seed, index)
            polygon = random_convex_polygon(rng)
            points.append(
                (
                    StartKind.RANDOM_POLYGON,
                    (normals @ polygon.vertices.T).max(axis=1),
                )
            )
        return points[: self._config.starts]

    def reconstruct(
        self, target: MomentGrid, truth: Optional[ShapeModel] = None
    ) -> ReconstructionResult:
        """
        Minimizes the objective from every starting point and returns the
        minimizer with the lowest objective value, the first one in start
        order among equal values.

        :param target: the target Legendre moments
        :param truth: the true body, if known, to compute errors against
        :return: the reconstruction
        """
        _check_target(self._mp, target)

        runs = []
        for index, (kind, start) in enumerate(self.start_points()):
            try:
                feasible_start = self._project(start)
            except RuntimeError as error:
                logger.warning("start %d is infeasible: %s", index, error)
                continue
            h, diagnostics = self._minimize(
                target.values, index, kind, feasible_start
            )
            logger.info(
                "start %d (%s): objective %.6e after %d iterations "
                "(converged: %s)",
                index,
                kind.value,
                diagnostics.final_objective,
                diagnostics.iterations,
                diagnostics.converged,
            )
            runs.append((h, diagnostics))

        if not runs:
            raise RuntimeError("no feasible starting point found")

        best_h, best = min(
            runs, key=lambda run: (run[1].final_objective, run[1].index)
        )
        h_hat = SupportVector(self._mp.directions, best_h)
        result = ReconstructionResult(
            h_hat,
            h_hat.polygon(),
            objective(
                self._mp, target, best_h, self._config.moment_scale
            ),
            best.converged,
            [diagnostics for _, diagnostics in runs],
        )
        if truth is not None:
            result = result.with_truth_errors(
                truth_errors(result, truth, self._mp)
            )
        return result

    def _project(self, h: np.ndarray) -> np.ndarray:
        return self._feasible_set.project(h, self._config.projection)

    def _try_project(self, h: np.ndarray) -> Optional[np.ndarray]:
        try:
            return self._project(h)
        except (RuntimeError, ValueError) as error:
            logger.debug("projection of a trial point failed: %s", error)
            return None

    def _collapsed(self, target: np.ndarray, h: np.ndarray) -> bool:
        """
        Returns whether P(h) has collapsed to a segment or a point although
        the target moments describe a body of positive area. All edges of
        such a polygon have zero length, so the gradient vanishes there
        without h being a minimizer.
        """
        implied_area = target[0, 0] / self._config.moment_scale
        return (
            implied_area > DEGENERATE_AREA
            and _loop_area(self._mp.vertices(h)) <= DEGENERATE_AREA
        )

    def _max_step(self, gradient: np.ndarray) -> float:
        return MAX_DISPLACEMENT / max(np.abs(gradient).max(), MIN_STEP)

    def _stationarity(self, h: np.ndarray, gradient: np.ndarray) -> float:
        step = min(1.0, self._max_step(gradient))
        projected = self._try_project(h - step * gradient)
        if projected is None:
            return np.inf
        return float(np.linalg.norm(projected - h)) / step

    def _minimize(
        self,
        target: np.ndarray,
        index: int,
        kind: StartKind,
        start: np.ndarray,
    ) -> Tuple[np.ndarray, StartDiagnostics]:
        """
        Runs a projected Gauss-Newton iteration safeguarded by spectral
        projected gradient steps with Barzilai-Borwein step lengths and
        Armijo backtracking along the projection arc. Every iterate is
        feasible and the objective does not increase between restarts.
        Stationary points at collapsed polygons are left by restarting from
        the midpoint of the current point and the start.
        """
        scale = self._config.moment_scale
        h = start
        value, residual, jacobian = _residual_and_jacobian(
            self._mp, target, h, scale
        )
        gradient = -2.0 * jacobian.T @ residual
        trace = [value]
        max_violation = self._feasible_set.violation(h)
        gradient_norm = self._stationarity(h, gradient)
        step = self._max_step(gradient)

        converged = False
        iterations = 0
        restarts = 0
        while iterations < self._config.max_iters:
            candidate = None
            searching = gradient_norm >= self._config.tol
            if searching:
                candidate = self._gauss_newton_step(
                    target, h, value, gradient, residual, jacobian
                )
                if candidate is None:
                    candidate = self._gradient_step(
                        target, h, value, gradient, step
                    )

            if candidate is None:
                if not self._collapsed(target, h):
                    converged = gradient_norm < (
                        np.sqrt(self._config.tol)
                        if searching
                        else self._config.tol
                    )
                    if searching:
                        logger.debug(
                            "start %d: line search stalled at iteration %d",
                            index,
                            iterations,
                        )
                    break
                if restarts == MAX_RESTARTS:
                    break

                restarts += 1
                logger.debug(
                    "start %d: restarting from a collapsed polygon at "
                    "iteration %d",
                    index,
                    iterations,
                )
                h = 0.5 * (h + start)
                value, residual, jacobian = _residual_and_jacobian(
                    self._mp, target, h, scale
                )
                gradient = -2.0 * jacobian.T @ residual
                trace.append(value)
                gradient_norm = self._stationarity(h, gradient)
                step = self._max_step(gradient)
                continue

            iterations += 1
            candidate_h, value, residual, jacobian = candidate
            candidate_gradient = -2.0 * jacobian.T @ residual
            difference = candidate_h - h
            curvature = difference @ (candidate_gradient - gradient)
            h, gradient = candidate_h, candidate_gradient
            step = self._max_step(gradient)
            if curvature > 0.0:
                step = min((difference @ difference) / curvature, step)

            trace.append(value)
            max_violation = max(
                max_violation, self._feasible_set.violation(h)
            )
            gradient_norm = self._stationarity(h, gradient)
            logger.debug(
                "start %d iteration %d: objective %.6e, projected gradient "
                "norm %.3e",
                index,
                iterations,
                value,
                gradient_norm,
            )
        else:
            converged = gradient_norm < self._config.tol and not (
                self._collapsed(target, h)
            )

        if max_violation > FEASIBILITY_TOLERANCE:
            logger.warning(
                "start %d: iterates violated the constraints by up to %g",
                index,
                max_violation,
            )

        return h, StartDiagnostics(
            index=index,
            kind=kind,
            initial_objective=trace[0],
            final_objective=value,
            iterations=iterations,
            restarts=restarts,
            converged=converged,
            projected_gradient_norm=gradient_norm,
            max_violation=max_violation,
            objective_trace=tuple(trace),
        )

    def _accept(
        self,
        target: np.ndarray,
        h: np.ndarray,
        value: float,
        gradient: np.ndarray,
        trial: np.ndarray,
    ) -> Optional[_Candidate]:
        candidate = self._try_project(trial)
        if candidate is None or self._collapsed(target, candidate):
            return None
        candidate_value, residual, jacobian = _residual_and_jacobian(
            self._mp, target, candidate, self._config.moment_scale
        )
        decrease = ARMIJO_PARAMETER * gradient @ (candidate - h)
        if candidate_value <= min(value + decrease, value):
            return candidate, candidate_value, residual, jacobian
        return None

    def _gauss_newton_step(
        self,
        target: np.ndarray,
        h: np.ndarray,
        value: float,
        gradient: np.ndarray,
        residual: np.ndarray,
        jacobian: np.ndarray,
    ) -> Optional[_Candidate]:
        direction = np.linalg.lstsq(jacobian, residual, rcond=None)[0]
        length = np.abs(direction).max()
        if not np.isfinite(length) or length == 0.0:
            return None
        direction *= min(1.0, MAX_DISPLACEMENT / length)
        for _ in range(GAUSS_NEWTON_BACKTRACKS):
            candidate = self._accept(
                target, h, value, gradient, h + direction
            )
            if candidate is not None:
                return candidate
            direction *= 0.5
        return None

    def _gradient_step(
        self,
        target: np.ndarray,
        h: np.ndarray,
        value: float,
        gradient: np.ndarray,
        step: float,
    ) -> Optional[_Candidate]:
        step = max(step, MIN_STEP)
        for _ in range(MAX_BACKTRACKS):
            candidate = self._accept(
                target, h, value, gradient, h - step * gradient
            )
            if candidate is not None:
                return candidate
            step *= 0.5
        return None


def reconstruct(
    target: MomentGrid,
    directions: DirectionSet,
    config: Optional[ReconstructionConfig] = None,
    mp: Optional[MomentPolynomials] = None,
    truth: Optional[ShapeModel] = None,
    basis: Optional[LegendreBasis] = None,
) -> ReconstructionResult:
    """
    Reconstructs a convex polygon with the provided outer normals from
    Legendre moments by multi-start least squares.

    :param target: the target Legendre moments of order N
    :param directions: the outer normal directions including the axes
    :param config: the reconstruction settings
    :param mp: the moment polynomials of the directions up to order N; built
        if not provided
    :param truth: the true body, if known, to compute errors against
    :param basis: the Legendre basis used if the moment polynomials have to
        be built
    :return: the reconstruction
    """
    directions.require_axes()
    if mp is None:
        if basis is None:
            basis = build_basis(target.order)
        mp = MomentPolynomials(directions, basis, target.order)
    elif mp.directions != directions:
        raise ValueError(
            "directions of the moment polynomials must match the provided "
            "directions"
        )

    return LeastSquaresEstimator(mp, config).reconstruct(target, truth)


def truth_errors(
    result: ReconstructionResult,
    truth: ShapeModel,
    mp: MomentPolynomials,
    resolution: int = TRUTH_POLYGON_RESOLUTION,
) -> TruthErrors:
    """
    Computes the distances of a reconstruction from the true body, using a
    polygonal approximation of the truth for the set distances.

    :param result: the reconstruction
    :param truth: the true body
    :param mp: the moment polynomials the reconstruction was computed with
    :param resolution: the resolution of the polygonal approximation
    :return: the truth errors
    """
    truth_polygon = truth.to_polygon(resolution)
    polygon = result.polygon
    hausdorff = (
        None
        if truth_polygon.is_degenerate or polygon.is_degenerate
        else hausdorff_distance(truth_polygon, polygon)
    )
    truth_moments = shape_legendre_moments(truth, mp.basis, mp.order)
    reconstruction_moments = MomentGrid(
        MomentKind.LEGENDRE, mp.legendre_moments(result.h_hat.h)
    )
    return TruthErrors(
        nikodym=nikodym_distance(truth_polygon, polygon),
        hausdorff=hausdorff,
        moment_distance=moment_distance(truth_moments, reconstruction_moments),
    )


def _check_target(mp: MomentPolynomials, target: MomentGrid):
    if target.kind != MomentKind.LEGENDRE:
        raise ValueError(
            f"target moment kind ({target.kind.value}) must be legendre"
        )
    if target.order != mp.order:
        raise ValueError(
            f"target order ({target.order}) must match the order of the "
            f"moment polynomials ({mp.order})"
        )


def _residual_and_jacobian(
    mp: MomentPolynomials,
    target: np.ndarray,
    h: Sequence[float],
    scale: float,
) -> Tuple[float, np.ndarray, np.ndarray]:
    residual = (target - scale * mp.legendre_moments(h)).reshape(-1)
    jacobian = scale * mp.legendre_jacobian(h).reshape(residual.size, -1)
    return float(residual @ residual), residual, jacobian


def _objective_and_gradient(
    mp: MomentPolynomials,
    target: np.ndarray,
    h: Sequence[float],
    scale: float,
) -> Tuple[float, np.ndarray]:
    value, residual, jacobian = _residual_and_jacobian(mp, target, h, scale)
    return value, -2.0 * jacobian.T @ residual


def _loop_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
