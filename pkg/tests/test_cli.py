import csv
import json

import numpy as np
import pytest

from momentshape.cli import (
    EXIT_COMPUTATION_FAILED,
    EXIT_INVALID_INPUT,
    EXIT_NOT_CONVERGED,
    EXIT_SUCCESS,
    MANIFEST_FILE_NAME,
    main,
)
from momentshape.geometry import DirectionSet
from momentshape.serialization import file_digest
from momentshape.study import STUDY_COLUMNS


def write_json_file(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def create_square_file(tmp_path):
    return write_json_file(
        tmp_path / "square.json",
        {
            "kind": "polygon",
            "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        },
    )


def create_disk_file(tmp_path):
    return write_json_file(
        tmp_path / "disk.json",
        {"kind": "disk", "center": [0.5, 0.5], "radius": 0.4},
    )


def read_json_file(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_gen_moments_of_unit_square(tmp_path):
    out = tmp_path / "out"
    code = main(
        [
            "gen-moments",
            "--shape",
            str(create_square_file(tmp_path)),
            "--N",
            "4",
            "--out",
            str(out),
        ]
    )

    assert code == EXIT_SUCCESS
    moments = read_json_file(out / "moments.json")
    assert moments["kind"] == "legendre"
    assert moments["order"] == 4
    values = np.array(moments["values"])
    expected = np.zeros((5, 5))
    expected[0, 0] = 1.0
    assert np.allclose(values, expected, atol=1e-10)

    with open(out / "moments.csv", newline="", encoding="utf-8") as file:
        rows = list(csv.DictReader(file))
    assert len(rows) == 25
    assert (rows[0]["k"], rows[0]["l"]) == ("0", "0")
    assert float(rows[0]["value"]) == pytest.approx(1.0)


def test_gen_moments_of_untagged_polygon(tmp_path):
    shape_path = write_json_file(
        tmp_path / "untagged.json",
        {"vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]},
    )
    for name, path in (
        ("untagged", shape_path),
        ("tagged", create_square_file(tmp_path)),
    ):
        assert (
            main(
                [
                    "gen-moments",
                    "--shape",
                    str(path),
                    "--N",
                    "2",
                    "--out",
                    str(tmp_path / name),
                ]
            )
            == EXIT_SUCCESS
        )

    untagged = read_json_file(tmp_path / "untagged" / "moments.json")
    tagged = read_json_file(tmp_path / "tagged" / "moments.json")
    assert np.allclose(untagged["values"], tagged["values"])


def test_gen_moments_of_unknown_shape_kind(tmp_path):
    shape_path = write_json_file(
        tmp_path / "shape.json",
        {"type": "disk", "center": [0.5, 0.5], "radius": 0.4},
    )

    assert (
        main(
            [
                "gen-moments",
                "--shape",
                str(shape_path),
                "--N",
                "2",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )


def test_gen_geometric_moments_of_disk(tmp_path):
    out = tmp_path / "out"
    code = main(
        [
            "gen-moments",
            "--shape",
            str(create_disk_file(tmp_path)),
            "--N",
            "2",
            "--kind",
            "geometric",
            "--out",
            str(out),
        ]
    )

    assert code == EXIT_SUCCESS
    moments = read_json_file(out / "moments.json")
    assert moments["kind"] == "geometric"
    assert moments["values"][0][0] == pytest.approx(0.16 * np.pi)
    assert moments["values"][1][0] == pytest.approx(0.08 * np.pi)


def test_gen_moments_manifest(tmp_path):
    out = tmp_path / "out"
    shape_path = create_square_file(tmp_path)
    main(
        [
            "gen-moments",
            "--shape",
            str(shape_path),
            "--N",
            "2",
            "--out",
            str(out),
        ]
    )
    manifest = read_json_file(out / MANIFEST_FILE_NAME)

    assert manifest["command"] == "gen-moments"
    assert manifest["config"] == {"N": 2, "kind": "legendre"}
    assert manifest["inputs"] == {str(shape_path): file_digest(shape_path)}
    assert manifest["outputs"][str(out / "moments.json")] == file_digest(
        out / "moments.json"
    )
    assert manifest["wall_time"] >= 0.0
    assert manifest["version"]


def test_gen_moments_of_shape_outside_unit_square(tmp_path):
    shape_path = write_json_file(
        tmp_path / "disk.json",
        {"kind": "disk", "center": [0.9, 0.5], "radius": 0.3},
    )

    assert (
        main(
            [
                "gen-moments",
                "--shape",
                str(shape_path),
                "--N",
                "2",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )


def test_reconstruct_from_generated_moments(tmp_path):
    moments_dir = tmp_path / "moments"
    main(
        [
            "gen-moments",
            "--shape",
            str(create_square_file(tmp_path)),
            "--N",
            "3",
            "--out",
            str(moments_dir),
        ]
    )
    out = tmp_path / "out"
    code = main(
        [
            "reconstruct",
            "--moments",
            str(moments_dir / "moments.json"),
            "--n",
            "8",
            "--equidistant",
            "--starts",
            "2",
            "--shape",
            str(create_square_file(tmp_path)),
            "--out",
            str(out),
        ]
    )

    assert code in (EXIT_SUCCESS, EXIT_NOT_CONVERGED)
    result = read_json_file(out / "result.json")
    assert result["objective"] < 1e-8
    assert result["starts_used"] == 2
    assert result["truth_errors"]["nikodym"] < 1e-3
    polygon = read_json_file(out / "polygon.json")
    assert polygon["kind"] == "polygon"
    assert np.allclose(
        np.array(polygon["vertices"]).min(axis=0), [0.0, 0.0], atol=1e-4
    )
    manifest = read_json_file(out / MANIFEST_FILE_NAME)
    assert manifest["config"]["n"] == 8
    assert manifest["config"]["N"] == 3
    assert manifest["config"]["starts"] == 2


def test_reconstruct_with_config_file(tmp_path):
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {
            "kind": "legendre",
            "values": [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        },
    )
    config_path = write_json_file(
        tmp_path / "config.json",
        {"n": 4, "N": 1, "starts": 1, "max_iters": 1, "tol": 1e-3},
    )
    out = tmp_path / "out"
    code = main(
        [
            "reconstruct",
            "--moments",
            str(moments_path),
            "--config",
            str(config_path),
            "--out",
            str(out),
        ]
    )

    assert code in (EXIT_SUCCESS, EXIT_NOT_CONVERGED)
    manifest = read_json_file(out / MANIFEST_FILE_NAME)
    assert manifest["config"]["n"] == 4
    assert manifest["config"]["N"] == 1
    assert manifest["config"]["max_iters"] == 1
    assert str(config_path) in manifest["inputs"]


def test_reconstruct_without_convergence(tmp_path):
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {
            "kind": "legendre",
            "values": [[0.3, 0.05], [-0.02, 0.01]],
        },
    )
    code = main(
        [
            "reconstruct",
            "--moments",
            str(moments_path),
            "--n",
            "8",
            "--starts",
            "1",
            "--max-iters",
            "1",
            "--tol",
            "1e-300",
            "--out",
            str(tmp_path / "out"),
        ]
    )

    assert code == EXIT_NOT_CONVERGED
    assert (tmp_path / "out" / "result.json").exists()


def test_reconstruct_with_directions_missing_axes(tmp_path):
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {"kind": "legendre", "values": [[1.0, 0.0], [0.0, 0.0]]},
    )
    directions_path = write_json_file(
        tmp_path / "directions.json",
        {"angles_rad": [0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0]},
    )

    assert (
        main(
            [
                "reconstruct",
                "--moments",
                str(moments_path),
                "--directions",
                str(directions_path),
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )


def test_reconstruct_with_bad_direction_count(tmp_path):
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {"kind": "legendre", "values": [[1.0, 0.0], [0.0, 0.0]]},
    )

    for options in (["--n", "6", "--equidistant"], ["--n", "0"], ["--n", "3"]):
        assert (
            main(
                [
                    "reconstruct",
                    "--moments",
                    str(moments_path),
                    *options,
                    "--out",
                    str(tmp_path / "out"),
                ]
            )
            == EXIT_INVALID_INPUT
        )


def test_reconstruct_with_equidistant_and_directions(tmp_path):
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {"kind": "legendre", "values": [[1.0, 0.0], [0.0, 0.0]]},
    )
    directions_path = write_json_file(
        tmp_path / "directions.json",
        {"angles_rad": DirectionSet.equidistant(8).angles.tolist()},
    )

    assert (
        main(
            [
                "reconstruct",
                "--moments",
                str(moments_path),
                "--directions",
                str(directions_path),
                "--equidistant",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )


def test_reconstruct_honors_equidistant(tmp_path):
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {"kind": "legendre", "values": [[1.0, 0.0], [0.0, 0.0]]},
    )

    for options, expected in (
        (["--n", "6"], DirectionSet.dense_sequence(6)),
        (["--n", "8"], DirectionSet.dense_sequence(8)),
        (["--n", "8", "--equidistant"], DirectionSet.equidistant(8)),
        (["--n", "12", "--equidistant"], DirectionSet.equidistant(12)),
    ):
        out = tmp_path / "_".join(options)
        code = main(
            [
                "reconstruct",
                "--moments",
                str(moments_path),
                *options,
                "--starts",
                "1",
                "--max-iters",
                "1",
                "--out",
                str(out),
            ]
        )

        assert code in (EXIT_SUCCESS, EXIT_NOT_CONVERGED)
        manifest = read_json_file(out / MANIFEST_FILE_NAME)
        assert np.allclose(manifest["config"]["directions"], expected.angles)
        result = read_json_file(out / "result.json")
        assert np.allclose(result["h_hat"]["angles_rad"], expected.angles)


def test_reconstruct_with_computation_failure(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise RuntimeError("projection failed")

    monkeypatch.setattr("momentshape.cli.reconstruct", fail)
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {"kind": "legendre", "values": [[1.0, 0.0], [0.0, 0.0]]},
    )

    assert (
        main(
            [
                "reconstruct",
                "--moments",
                str(moments_path),
                "--n",
                "4",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_COMPUTATION_FAILED
    )
    assert not (tmp_path / "out" / "result.json").exists()


def test_reconstruct_from_geometric_moments(tmp_path):
    moments_path = write_json_file(
        tmp_path / "moments.json",
        {"kind": "geometric", "values": [[1.0, 0.5], [0.5, 0.25]]},
    )

    assert (
        main(
            [
                "reconstruct",
                "--moments",
                str(moments_path),
                "--n",
                "4",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )


def test_reconstruct_with_missing_moments_file(tmp_path):
    assert (
        main(
            [
                "reconstruct",
                "--moments",
                str(tmp_path / "missing.json"),
                "--n",
                "4",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )


def test_bounds(tmp_path):
    out = tmp_path / "out"
    code = main(
        [
            "bounds",
            "--n",
            "100",
            "--equidistant",
            "--N",
            "9",
            "--moment-error",
            "0.1",
            "--out",
            str(out),
        ]
    )

    assert code == EXIT_SUCCESS
    bounds = read_json_file(out / "bounds.json")
    assert bounds["n"] == 100
    assert bounds["N"] == 9
    assert bounds["polygonization"] == pytest.approx(0.044444, rel=1e-4)
    assert bounds["stability_legendre"] == pytest.approx(0.11)
    assert bounds["stability2"] == pytest.approx(0.144444, rel=1e-4)
    assert "a0" in bounds["note"]

    manifest = read_json_file(out / MANIFEST_FILE_NAME)
    assert manifest["config"]["a0"] == 1.0
    assert manifest["config"]["a1"] == 1.0


def test_bounds_with_constants(tmp_path):
    out = tmp_path / "out"
    main(
        [
            "bounds",
            "--n",
            "8",
            "--N",
            "3",
            "--a1",
            "0.5",
            "--out",
            str(out),
        ]
    )

    assert read_json_file(out / "bounds.json")[
        "stability_legendre"
    ] == pytest.approx(0.125)


def test_bounds_with_bad_constant(tmp_path):
    assert (
        main(
            [
                "bounds",
                "--n",
                "8",
                "--N",
                "3",
                "--a0",
                "0",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )


def test_study(tmp_path):
    config_path = write_json_file(
        tmp_path / "study.json",
        {
            "truth": {"kind": "disk", "center": [0.5, 0.5], "radius": 0.3},
            "grid": [[4, 2], [8, 2]],
            "seeds": [0, 1],
            "reconstruction": {"starts": 1, "max_iters": 100},
            "resolution": 128,
        },
    )
    out = tmp_path / "out"
    code = main(
        [
            "study",
            "--kind",
            "noise",
            "--config",
            str(config_path),
            "--schedule",
            "as",
            "--scale",
            "0.001",
            "--a1",
            "0.5",
            "--out",
            str(out),
        ]
    )

    assert code == EXIT_SUCCESS
    with open(out / "study.csv", newline="", encoding="utf-8") as file:
        reader = csv.DictReader(file)
        rows = list(reader)
    assert tuple(reader.fieldnames) == STUDY_COLUMNS
    assert [(row["n"], row["N"], row["seed"]) for row in rows] == [
        ("4", "2", "0"),
        ("4", "2", "1"),
        ("8", "2", "0"),
        ("8", "2", "1"),
    ]
    assert all(float(row["sum_eps2"]) > 0.0 for row in rows)

    medians = read_json_file(out / "medians.json")
    assert [(m["n"], m["N"]) for m in medians] == [(4, 2), (8, 2)]

    manifest = read_json_file(out / MANIFEST_FILE_NAME)
    assert manifest["config"]["kind"] == "noise"
    assert manifest["config"]["noise"]["schedule"] == "as"
    assert manifest["config"]["bounds"]["a1"] == 0.5


def test_study_with_bad_grid(tmp_path):
    config_path = write_json_file(
        tmp_path / "study.json",
        {
            "truth": {"kind": "disk", "center": [0.5, 0.5], "radius": 0.3},
            "grid": [[6, 2]],
            "seeds": [0],
        },
    )

    assert (
        main(
            [
                "study",
                "--kind",
                "convergence",
                "--config",
                str(config_path),
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == EXIT_INVALID_INPUT
    )
