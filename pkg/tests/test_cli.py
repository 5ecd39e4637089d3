"""Tests for the batch command-line interface (run in-process)."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from texlab.channels import KrausChannel, build_free_channel, channel_to_json_dict
from texlab.cli import main
from texlab.serialize import dumps_canonical
from texlab.states import QubitBasis, basis_distance, fourier_ket


def _write_json(path, payload) -> str:
    path.write_text(dumps_canonical(payload), encoding="utf-8")
    return str(path)


def _ket_payload(ket: np.ndarray) -> dict:
    return {"ket": [[float(z.real), float(z.imag)] for z in ket]}


def test_texture_json_reports_infinite_rugosity(tmp_path, capsys):
    infile = _write_json(tmp_path / "state.json", _ket_payload(fourier_ket(3, 2)))
    assert main(["texture", "--in", infile]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert list(payload) == [
        "version",
        "dim",
        "grand_sum",
        "projective_probability",
        "rugosity",
    ]
    assert payload["dim"] == 3
    assert abs(payload["grand_sum"]) <= 1e-12
    assert payload["rugosity"] == "inf"


def test_texture_csv_output_file(tmp_path):
    infile = _write_json(tmp_path / "state.json", _ket_payload(fourier_ket(4, 1)))
    outfile = tmp_path / "report.csv"
    assert main(
        ["texture", "--in", infile, "--format", "csv", "--out", str(outfile)]
    ) == 0
    lines = outfile.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == "dim,grand_sum,projective_probability,rugosity"
    row = lines[1].split(",")
    assert row[0] == "4"
    assert float(row[1]) == pytest.approx(4.0)
    assert float(row[3]) == pytest.approx(0.0, abs=1e-12)


def test_texture_accepts_matrix_input(tmp_path, capsys):
    infile = _write_json(
        tmp_path / "mixed.json", {"matrix": [[0.5, 0.0], [0.0, 0.5]]}
    )
    assert main(["texture", "--in", infile]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["grand_sum"] == pytest.approx(1.0)
    assert payload["rugosity"] == pytest.approx(math.log(2.0))


def test_texture_rejects_invalid_state(tmp_path, capsys):
    infile = _write_json(
        tmp_path / "bad.json", {"matrix": [[1.0, 1.0], [0.0, 0.0]]}
    )
    assert main(["texture", "--in", infile]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_missing_input_file_is_an_error(tmp_path, capsys):
    assert main(["texture", "--in", str(tmp_path / "absent.json")]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_channel_audit_free_channel(tmp_path, capsys):
    channel = build_free_channel(3, fourier_ket(3, 3))
    infile = _write_json(tmp_path / "chan.json", channel_to_json_dict(channel))
    assert main(["channel-audit", "--in", infile, "--states", "5"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert list(payload) == [
        "version",
        "seed",
        "dim",
        "num_operators",
        "is_free",
        "max_free_residual",
        "weight_norm_residual",
        "completeness_residual",
        "monotonicity",
    ]
    assert payload["is_free"] is True
    assert payload["dim"] == 3
    assert payload["num_operators"] == 9
    assert payload["monotonicity"]["states"] == 5
    assert payload["monotonicity"]["min_gain"] >= -1e-10
    assert payload["monotonicity"]["max_gain_residual"] <= 1e-9


def test_channel_audit_flags_non_free_channel(tmp_path, capsys):
    channel = KrausChannel(
        dim=2, operators=(np.diag([1.0, -1.0]).astype(np.complex128),)
    )
    infile = _write_json(tmp_path / "sign.json", channel_to_json_dict(channel))
    assert main(["channel-audit", "--in", infile, "--states", "3"]) == 2
    payload = json.loads(capsys.readouterr().out)
    assert payload["is_free"] is False
    assert payload["max_free_residual"] > 0.1


def test_layer_gen_and_identify_round_trip(tmp_path, capsys):
    layer_file = tmp_path / "layer.json"
    assert main(
        [
            "layer-gen",
            "--tracks",
            "3",
            "--cnots",
            "1",
            "--seed",
            "29",
            "--min-component",
            "0.3",
            "--out",
            str(layer_file),
        ]
    ) == 0
    stored = json.loads(layer_file.read_text(encoding="utf-8"))
    assert stored["tracks"] == 3
    truth = QubitBasis(
        alpha=complex(*stored["hidden_basis"]["alpha"]),
        beta=complex(*stored["hidden_basis"]["beta"]),
    )

    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    for out in (out_a, out_b):
        code = main(
            [
                "identify",
                "--in",
                str(layer_file),
                "--seed",
                "77",
                "--trials",
                "20000",
                "--out",
                str(out),
            ]
        )
        assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    report = json.loads(out_a.read_text(encoding="utf-8"))
    assert report["status"] == "full"
    assert report["seed"] == 77
    assert report["trials"] == 20000
    recovered = QubitBasis(
        alpha=complex(*report["selected"]["alpha"]),
        beta=complex(*report["selected"]["beta"]),
    )
    assert basis_distance(recovered, truth) <= 1e-9
    generated_pairs = [
        (g["control"], g["target"]) for g in stored["gates"] if g["kind"] == "CNOT"
    ]
    assert [tuple(p) for p in report["cnot_pairs"]] == generated_pairs


def test_identify_csv_format(tmp_path, capsys):
    layer_file = tmp_path / "layer.json"
    main(
        [
            "layer-gen",
            "--tracks",
            "2",
            "--cnots",
            "1",
            "--seed",
            "3",
            "--min-component",
            "0.3",
            "--out",
            str(layer_file),
        ]
    )
    code = main(
        [
            "identify",
            "--in",
            str(layer_file),
            "--trials",
            "5000",
            "--format",
            "csv",
        ]
    )
    out = capsys.readouterr().out
    assert code in (0, 2)
    lines = out.strip().split("\n")
    assert lines[0] == "track,X,stderr_X,Y,stderr_Y,trials"
    assert len(lines) == 3


def test_identify_noisy_layer_exits_partial(tmp_path, capsys):
    layer_file = tmp_path / "noisy.json"
    main(
        [
            "layer-gen",
            "--tracks",
            "3",
            "--cnots",
            "1",
            "--seed",
            "11",
            "--noise-p",
            "0.2",
            "--noise-q",
            "0.3",
            "--min-component",
            "0.4",
            "--out",
            str(layer_file),
        ]
    )
    assert main(["identify", "--in", str(layer_file), "--trials", "20000"]) == 2
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "partial"
    assert payload["noise"] == {"p": 0.2, "q": 0.3}
    assert payload["selected"] is None


def test_identify_rejects_malformed_layer(tmp_path, capsys):
    infile = _write_json(
        tmp_path / "bad_layer.json",
        {
            "tracks": 2,
            "hidden_basis": {"alpha": [1.0, 0.0], "beta": [0.0, 0.0]},
            "gates": [{"kind": "CZ", "track": 0}],
            "noise": {"p": 0.0, "q": 0.0},
        },
    )
    assert main(["identify", "--in", infile]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_paramagnet_csv_and_json(tmp_path, capsys):
    assert main(["paramagnet", "--grid", "0.5:2:4", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == (
        "x,rugosity_quadrature,paper_closed_form,alt_closed_form,"
        "residual_paper,residual_alt"
    )
    assert len(lines) == 5

    assert main(["paramagnet", "--grid", "0.5:2:4"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["rows"]) == 4
    assert payload["max_abs_residual_alt"] <= 1e-6
    assert payload["notes"]


def test_paramagnet_grid_validation(capsys):
    assert main(["paramagnet", "--grid", "1:2"]) == 1
    assert capsys.readouterr().err.startswith("error:")
    assert main(["paramagnet", "--grid", "a:b:4"]) == 1
    assert capsys.readouterr().err.startswith("error:")
    assert main(["paramagnet", "--grid", "0:1:0"]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_layer_gen_validation_error(capsys):
    assert main(["layer-gen", "--tracks", "2", "--cnots", "3"]) == 1
    assert capsys.readouterr().err.startswith("error:")
