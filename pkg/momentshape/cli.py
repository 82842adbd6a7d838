import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from mpi4py import MPI

from momentshape import __version__
from momentshape.bounds import (
    bound_lsq,
    bound_stability2,
    bound_stability_geometric,
    bound_stability_legendre,
)
from momentshape.estimator import reconstruct
from momentshape.geometry import DirectionSet, polygonization_bound
from momentshape.legendre_basis import build_basis
from momentshape.moments import (
    MomentKind,
    shape_geometric_moments,
    shape_legendre_moments,
)
from momentshape.serialization import (
    bound_config_from_dict,
    bound_config_to_dict,
    directions_from_dict,
    file_digest,
    grid_from_dict,
    grid_to_csv,
    grid_to_dict,
    noisy_spec_from_dict,
    noisy_spec_to_dict,
    polygon_to_dict,
    read_json,
    reconstruction_config_from_dict,
    reconstruction_config_to_dict,
    records_to_csv,
    result_to_dict,
    shape_from_dict,
    study_config_from_dict,
    study_config_to_dict,
    write_json,
    write_text,
)
from momentshape.study import calibrate_a1, median_errors, run_study
from momentshape.utils.time import RunTimer

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_INVALID_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_COMPUTATION_FAILED = 4

MANIFEST_FILE_NAME = "manifest.json"


class RunManifest:
    """
    The record of a command run that makes its outputs reproducible: the
    command, its fully resolved configuration, the SHA-256 digests of its
    input and output files, the tool version and the wall time.
    """

    def __init__(self, command: str, config: Dict[str, Any]):
        """
        :param command: the name of the command
        :param config: the resolved configuration of the run
        """
        self._command = command
        self._config = config
        self._inputs: Dict[str, str] = {}
        self._outputs: Dict[str, str] = {}
        self._wall_time: Optional[float] = None

    @property
    def command(self) -> str:
        """
        The name of the command.
        """
        return self._command

    @property
    def config(self) -> Dict[str, Any]:
        """
        The resolved configuration of the run.
        """
        return self._config

    @property
    def inputs(self) -> Dict[str, str]:
        """
        The digests of the input files by path.
        """
        return self._inputs

    @property
    def outputs(self) -> Dict[str, str]:
        """
        The digests of the output files by path.
        """
        return self._outputs

    @property
    def wall_time(self) -> Optional[float]:
        """
        The wall time of the run in seconds.
        """
        return self._wall_time

    @wall_time.setter
    def wall_time(self, wall_time: float):
        self._wall_time = wall_time

    def add_input(self, path: Path):
        self._inputs[str(path)] = file_digest(path)

    def add_output(self, path: Path):
        self._outputs[str(path)] = file_digest(path)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self._command,
            "config": self._config,
            "inputs": self._inputs,
            "outputs": self._outputs,
            "version": __version__,
            "wall_time": self._wall_time,
        }

    def write(self, out_dir: Path) -> Path:
        """
        Writes the manifest next to the outputs.

        :param out_dir: the output directory
        :return: the path of the manifest
        """
        path = out_dir / MANIFEST_FILE_NAME
        write_json(path, self.to_dict())
        return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentshape",
        description="Reconstruct convex polygons with prescribed outer "
        "normals from Legendre moments.",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="increase the logging verbosity (-v for info, -vv for debug)",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen_moments = commands.add_parser(
        "gen-moments", help="compute the moments of a shape"
    )
    gen_moments.add_argument("--shape", type=Path, required=True)
    gen_moments.add_argument("--N", type=int, required=True, dest="order")
    gen_moments.add_argument(
        "--kind",
        choices=[kind.value for kind in MomentKind],
        default=MomentKind.LEGENDRE.value,
    )
    gen_moments.add_argument("--out", type=Path, required=True)
    gen_moments.set_defaults(handler=cmd_gen_moments)

    reconstruct_parser = commands.add_parser(
        "reconstruct", help="reconstruct a polygon from Legendre moments"
    )
    reconstruct_parser.add_argument("--moments", type=Path, required=True)
    _add_direction_arguments(reconstruct_parser)
    reconstruct_parser.add_argument("--N", type=int, dest="order")
    reconstruct_parser.add_argument("--config", type=Path)
    reconstruct_parser.add_argument("--starts", type=int)
    reconstruct_parser.add_argument("--seed", type=int)
    reconstruct_parser.add_argument("--max-iters", type=int)
    reconstruct_parser.add_argument("--tol", type=float)
    reconstruct_parser.add_argument(
        "--projection", choices=["nnls", "dykstra"]
    )
    reconstruct_parser.add_argument(
        "--shape", type=Path, help="the true shape to report errors against"
    )
    reconstruct_parser.add_argument("--out", type=Path, required=True)
    reconstruct_parser.set_defaults(handler=cmd_reconstruct)

    bounds = commands.add_parser("bounds", help="evaluate the error bounds")
    _add_direction_arguments(bounds)
    bounds.add_argument("--N", type=int, required=True, dest="order")
    bounds.add_argument(
        "--moment-error",
        type=float,
        default=0.0,
        help="the Euclidean distance of the moment grids",
    )
    _add_bound_arguments(bounds)
    bounds.add_argument("--out", type=Path, required=True)
    bounds.set_defaults(handler=cmd_bounds)

    study = commands.add_parser("study", help="run a reconstruction study")
    study.add_argument(
        "--kind", choices=["convergence", "noise"], required=True
    )
    study.add_argument("--config", type=Path, required=True)
    study.add_argument("--shape", type=Path)
    study.add_argument("--starts", type=int)
    study.add_argument(
        "--schedule", choices=["none", "mean", "as", "fixed"]
    )
    study.add_argument("--scale", type=float)
    study.add_argument("--eps", type=float)
    study.add_argument(
        "--calibrate",
        action="store_true",
        help="calibrate a1 on the unit square before running the study",
    )
    _add_bound_arguments(study)
    study.add_argument("--out", type=Path, required=True)
    study.set_defaults(handler=cmd_study)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs the command line interface.

    :param argv: the command line arguments
    :return: the exit code
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][
            min(args.verbose, 2)
        ],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.handler(args)
    except (ValueError, KeyError, json.JSONDecodeError, OSError) as error:
        logger.error("%s failed: %s", args.command, error)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except RuntimeError as error:
        logger.error("%s failed: %s", args.command, error)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_COMPUTATION_FAILED


def cmd_gen_moments(args: argparse.Namespace) -> int:
    shape = shape_from_dict(read_json(args.shape))
    kind = MomentKind(args.kind)
    manifest = RunManifest(
        "gen-moments", {"N": args.order, "kind": kind.value}
    )
    manifest.add_input(args.shape)

    with RunTimer("gen-moments") as timer:
        if kind == MomentKind.GEOMETRIC:
            grid = shape_geometric_moments(shape, args.order)
        else:
            grid = shape_legendre_moments(shape, build_basis(args.order))
    manifest.wall_time = timer.wall_time

    out_dir = _prepare_out_dir(args.out)
    json_path = out_dir / "moments.json"
    csv_path = out_dir / "moments.csv"
    write_json(json_path, grid_to_dict(grid))
    write_text(csv_path, grid_to_csv(grid))
    manifest.add_output(json_path)
    manifest.add_output(csv_path)
    manifest.write(out_dir)
    return EXIT_SUCCESS


def cmd_reconstruct(args: argparse.Namespace) -> int:
    target = grid_from_dict(read_json(args.moments))
    if target.kind != MomentKind.LEGENDRE:
        raise ValueError(
            f"moment kind ({target.kind.value}) must be legendre"
        )
    file_config = read_json(args.config) if args.config else {}
    order = args.order if args.order is not None else file_config.get("N")
    if order is not None:
        target = target.truncated(order)

    config = reconstruction_config_from_dict(
        {
            **file_config,
            **_given(
                starts=args.starts,
                seed=args.seed,
                max_iters=args.max_iters,
                tol=args.tol,
                projection=args.projection,
            ),
        }
    )
    directions = _resolve_directions(args, file_config)
    truth = shape_from_dict(read_json(args.shape)) if args.shape else None

    manifest = RunManifest(
        "reconstruct",
        {
            "n": len(directions),
            "N": target.order,
            "directions": directions.angles.tolist(),
            **reconstruction_config_to_dict(config),
        },
    )
    manifest.add_input(args.moments)
    for path in (args.config, args.directions, args.shape):
        if path is not None:
            manifest.add_input(path)

    with RunTimer("reconstruct") as timer:
        result = reconstruct(target, directions, config, truth=truth)
    manifest.wall_time = timer.wall_time

    out_dir = _prepare_out_dir(args.out)
    result_path = out_dir / "result.json"
    polygon_path = out_dir / "polygon.json"
    write_json(result_path, result_to_dict(result))
    write_json(polygon_path, polygon_to_dict(result.polygon))
    manifest.add_output(result_path)
    manifest.add_output(polygon_path)
    manifest.write(out_dir)

    if not result.converged:
        logger.warning(
            "reconstruction did not converge within %d iterations",
            config.max_iters,
        )
        return EXIT_NOT_CONVERGED
    return EXIT_SUCCESS


def cmd_bounds(args: argparse.Namespace) -> int:
    directions = _resolve_directions(args, {})
    config = bound_config_from_dict(_given(a0=args.a0, a1=args.a1))
    bounds = {
        "n": len(directions),
        "N": args.order,
        "moment_error": args.moment_error,
        "polygonization": polygonization_bound(directions),
        "stability_legendre": bound_stability_legendre(
            args.moment_error, args.order, config
        ),
        "stability_geometric": bound_stability_geometric(
            args.moment_error, args.order, config
        ),
        "stability2": bound_stability2(directions, args.order, config),
        "lsq_legendre": bound_lsq(
            len(directions), args.order, config, MomentKind.LEGENDRE
        ),
        "lsq_geometric": bound_lsq(
            len(directions), args.order, config, MomentKind.GEOMETRIC
        ),
        "note": "bounds hold up to the unspecified constants a0 and a1",
    }

    manifest = RunManifest(
        "bounds",
        {
            "directions": directions.angles.tolist(),
            "N": args.order,
            "moment_error": args.moment_error,
            **bound_config_to_dict(config),
        },
    )
    if args.directions is not None:
        manifest.add_input(args.directions)

    out_dir = _prepare_out_dir(args.out)
    bounds_path = out_dir / "bounds.json"
    write_json(bounds_path, bounds)
    manifest.add_output(bounds_path)
    manifest.write(out_dir)
    return EXIT_SUCCESS


def cmd_study(args: argparse.Namespace) -> int:
    data = read_json(args.config)
    data["kind"] = args.kind
    if args.shape is not None:
        data["truth"] = read_json(args.shape)
    if args.starts is not None:
        data.setdefault("reconstruction", {})["starts"] = args.starts
    data["noise"] = noisy_spec_to_dict(
        noisy_spec_from_dict(
            {
                **data.get("noise", {}),
                **_given(
                    schedule=args.schedule,
                    scale=args.scale,
                    epsilon=args.eps,
                ),
            }
        )
    )
    data["bounds"] = {
        **data.get("bounds", {}),
        **_given(a0=args.a0, a1=args.a1),
    }
    config = study_config_from_dict(data)

    if args.calibrate:
        a1 = calibrate_a1(
            config.grid,
            config.seeds,
            reconstruction=config.reconstruction,
            resolution=config.resolution,
        )
        data["bounds"]["a1"] = a1
        config = study_config_from_dict(data)

    manifest = RunManifest("study", study_config_to_dict(config))
    manifest.add_input(args.config)
    if args.shape is not None:
        manifest.add_input(args.shape)

    with RunTimer("study", synchronize=True) as timer:
        records = run_study(config)
    manifest.wall_time = timer.wall_time
    if MPI.COMM_WORLD.rank != 0:
        return EXIT_SUCCESS

    out_dir = _prepare_out_dir(args.out)
    csv_path = out_dir / "study.csv"
    medians_path = out_dir / "medians.json"
    write_text(csv_path, records_to_csv(records))
    write_json(
        medians_path,
        [
            {"n": n, "N": order, **medians}
            for (n, order), medians in median_errors(records).items()
        ],
    )
    manifest.add_output(csv_path)
    manifest.add_output(medians_path)
    manifest.write(out_dir)

    if not all(record.converged for record in records):
        logger.warning("some study reconstructions did not converge")
    return EXIT_SUCCESS


def _add_direction_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--n", type=int, help="the number of directions")
    parser.add_argument(
        "--equidistant",
        action="store_true",
        help="use n equidistant directions instead of the first n terms of "
        "the dense sequence; n must be a multiple of 4",
    )
    parser.add_argument(
        "--directions",
        type=Path,
        help="a JSON file of normal angles in radians",
    )


def _add_bound_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--a0", type=float, default=None)
    parser.add_argument("--a1", type=float, default=None)


def _resolve_directions(
    args: argparse.Namespace, file_config: Dict[str, Any]
) -> DirectionSet:
    """
    Resolves the outer normals from a directions file, from n equidistant
    directions with --equidistant, or from the first n terms of the dense
    sequence of directions otherwise.
    """
    if args.directions is not None:
        if args.equidistant:
            raise ValueError(
                "--equidistant must not be combined with --directions"
            )
        directions = directions_from_dict(read_json(args.directions))
        directions.require_axes()
        return directions

    n = args.n if args.n is not None else file_config.get("n")
    if n is None:
        raise ValueError("either --n or --directions must be provided")
    if not args.equidistant:
        return DirectionSet.dense_sequence(n)
    if n < 4 or n % 4 != 0:
        raise ValueError(
            f"number of equidistant directions ({n}) must be a positive "
            "multiple of 4 for the directions to include the axes"
        )
    return DirectionSet.equidistant(n)


def _given(**values: Any) -> Dict[str, Any]:
    return {key: value for key, value in values.items() if value is not None}


def _prepare_out_dir(out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    return out
