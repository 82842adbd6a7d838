"""
JSON and CSV forms of the objects of the package. JSON floats are written
with the shortest representation that round-trips exactly; CSV floats are
written with 17 significant digits.
"""

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from momentshape.bounds import BoundConfig
from momentshape.estimator import (
    ReconstructionConfig,
    ReconstructionResult,
    StartDiagnostics,
)
from momentshape.geometry import ConvexPolygon, DirectionSet, SupportVector
from momentshape.legendre_basis import LegendreBasis
from momentshape.moments import MomentGrid, MomentKind
from momentshape.noise_model import NoisySpec
from momentshape.shape import EllipseShape, PolygonShape, ShapeModel
from momentshape.study import STUDY_COLUMNS, StudyConfig, StudyRecord

JSON = Dict[str, Any]
PathLike = Union[str, Path]


def grid_to_dict(grid: MomentGrid) -> JSON:
    return {
        "kind": grid.kind.value,
        "order": grid.order,
        "values": grid.values.tolist(),
    }


def grid_from_dict(data: JSON) -> MomentGrid:
    grid = MomentGrid(MomentKind(data["kind"]), np.array(data["values"]))
    if "order" in data and data["order"] != grid.order:
        raise ValueError(
            f"order ({data['order']}) must match the shape of the values "
            f"({grid.order})"
        )
    return grid


def grid_to_csv(grid: MomentGrid) -> str:
    """
    Returns the grid as CSV with the header k,l,value in row-major order.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("k", "l", "value"))
    for (k, l), value in np.ndenumerate(grid.values):
        writer.writerow((k, l, _format_float(value)))
    return buffer.getvalue()


def basis_to_dict(basis: LegendreBasis) -> JSON:
    return {"order": basis.order, "coeffs": basis.coefficients.tolist()}


def directions_to_dict(directions: DirectionSet) -> JSON:
    return {"angles_rad": directions.angles.tolist()}


def directions_from_dict(data: Union[JSON, Sequence[float]]) -> DirectionSet:
    """
    Reads a direction set from either {"angles_rad": [...]}, which includes
    support vector objects, or a plain list of angles in radians.
    """
    if isinstance(data, dict):
        data = data["angles_rad"]
    return DirectionSet(data)


def support_vector_to_dict(sv: SupportVector) -> JSON:
    return {
        "angles_rad": sv.directions.angles.tolist(),
        "h": sv.h.tolist(),
    }


def support_vector_from_dict(data: JSON) -> SupportVector:
    return SupportVector(directions_from_dict(data), data["h"])


def polygon_to_dict(polygon: ConvexPolygon) -> JSON:
    return {"kind": "polygon", "vertices": polygon.vertices.tolist()}


def shape_to_dict(shape: ShapeModel) -> JSON:
    if isinstance(shape, PolygonShape):
        return polygon_to_dict(shape.polygon)
    if isinstance(shape, EllipseShape):
        return {
            "kind": "ellipse",
            "center": shape.center.tolist(),
            "semi_axes": shape.semi_axes.tolist(),
            "rotation": shape.rotation,
        }
    raise ValueError(f"unsupported shape type ({type(shape).__name__})")


def shape_from_dict(data: JSON) -> ShapeModel:
    """
    Reads a shape from one of

    * {"kind": "polygon", "vertices": [[x, y], ...]}, where an untagged
      object with vertices is read as a polygon as well,
    * {"kind": "ellipse", "center": [x, y], "semi_axes": [a, b],
      "rotation": angle}, and
    * {"kind": "disk", "center": [x, y], "radius": r}.
    """
    kind = data.get("kind", "polygon" if "vertices" in data else None)
    if kind == "polygon":
        return PolygonShape(ConvexPolygon(np.array(data["vertices"])))
    if kind == "ellipse":
        return EllipseShape(
            data["center"], data["semi_axes"], data.get("rotation", 0.0)
        )
    if kind == "disk":
        return EllipseShape.disk(data["center"], data["radius"])
    raise ValueError(f"unknown shape kind ({kind})")


def reconstruction_config_to_dict(config: ReconstructionConfig) -> JSON:
    return {
        "starts": config.starts,
        "max_iters": config.max_iters,
        "tol": config.tol,
        "seed": config.seed,
        "projection": config.projection.value,
        "moment_scale": config.moment_scale,
    }


def reconstruction_config_from_dict(data: JSON) -> ReconstructionConfig:
    """
    Reads a reconstruction configuration; missing fields take their default
    values and unrelated fields such as n and N are ignored.
    """
    defaults = reconstruction_config_to_dict(ReconstructionConfig())
    return ReconstructionConfig(
        **{key: data.get(key, value) for key, value in defaults.items()}
    )


def bound_config_to_dict(config: BoundConfig) -> JSON:
    return {"a0": config.a0, "a1": config.a1}


def bound_config_from_dict(data: JSON) -> BoundConfig:
    return BoundConfig(data.get("a0", 1.0), data.get("a1", 1.0))


def noisy_spec_to_dict(spec: NoisySpec) -> JSON:
    return {
        "schedule": spec.schedule.value,
        "epsilon": spec.epsilon,
        "scale": spec.scale,
        "seed": spec.seed,
    }


def noisy_spec_from_dict(data: JSON) -> NoisySpec:
    defaults = noisy_spec_to_dict(NoisySpec())
    return NoisySpec(
        **{key: data.get(key, value) for key, value in defaults.items()}
    )


def study_config_to_dict(config: StudyConfig) -> JSON:
    return {
        "kind": config.kind.value,
        "truth": shape_to_dict(config.truth),
        "grid": [list(pair) for pair in config.grid],
        "seeds": list(config.seeds),
        "reconstruction": reconstruction_config_to_dict(
            config.reconstruction
        ),
        "noise": noisy_spec_to_dict(config.noise),
        "bounds": bound_config_to_dict(config.bounds),
        "resolution": config.resolution,
    }


def study_config_from_dict(data: JSON) -> StudyConfig:
    return StudyConfig(
        data["kind"],
        shape_from_dict(data["truth"]),
        [tuple(pair) for pair in data["grid"]],
        data["seeds"],
        reconstruction_config_from_dict(data.get("reconstruction", {})),
        noisy_spec_from_dict(data.get("noise", {})),
        bound_config_from_dict(data.get("bounds", {})),
        data.get("resolution", 1024),
    )


def diagnostics_to_dict(diagnostics: StartDiagnostics) -> JSON:
    data = diagnostics._asdict()
    data["kind"] = diagnostics.kind.value
    data["objective_trace"] = list(diagnostics.objective_trace)
    return data


def result_to_dict(result: ReconstructionResult) -> JSON:
    data = {
        "h_hat": support_vector_to_dict(result.h_hat),
        "vertices": result.polygon.vertices.tolist(),
        "objective": result.objective,
        "starts_used": result.starts_used,
        "converged": result.converged,
        "diagnostics": [
            diagnostics_to_dict(diagnostics)
            for diagnostics in result.diagnostics
        ],
        "truth_errors": None,
    }
    if result.truth_errors is not None:
        data["truth_errors"] = result.truth_errors._asdict()
    return data


def records_to_csv(records: Sequence[StudyRecord]) -> str:
    """
    Returns study records as CSV with one row per record.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(STUDY_COLUMNS)
    for record in records:
        writer.writerow([_format_cell(value) for value in record])
    return buffer.getvalue()


def records_from_csv(text: str) -> List[StudyRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != STUDY_COLUMNS:
        raise ValueError(
            f"CSV columns ({reader.fieldnames}) must be {STUDY_COLUMNS}"
        )
    return [
        StudyRecord(
            n=int(row["n"]),
            N=int(row["N"]),
            seed=int(row["seed"]),
            sigma2=float(row["sigma2"]),
            sum_eps2=float(row["sum_eps2"]),
            objective=float(row["objective"]),
            nikodym=float(row["nikodym"]),
            hausdorff=float(row["hausdorff"]),
            bound_envelope=float(row["bound_envelope"]),
            converged=row["converged"] == "true",
        )
        for row in reader
    ]


def write_json(path: PathLike, data: Any):
    with open(path, "w", encoding="utf-8") as file:
        json.dump(data, file, indent=2)
        file.write("\n")


def read_json(path: PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as file:
        return json.load(file)


def write_text(path: PathLike, text: str):
    with open(path, "w", encoding="utf-8", newline="") as file:
        file.write(text)


def file_digest(path: PathLike) -> str:
    """
    Returns the hexadecimal SHA-256 digest of the contents of a file.
    """
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for chunk in iter(lambda: file.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _format_float(value)


def _format_float(value: float) -> str:
    return format(float(value), ".17g")
