import json

import numpy as np
import pytest

from dfscodes import cli


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


FAST_TIME = {"t_max": 20.0, "steps": 21}


# -- multiplicities ----------------------------------------------------------------


def test_multiplicities_table(capsys):
    assert cli.main(["multiplicities", "--max-n", "8"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "replicas,multiplicity,log2_multiplicity,per_replica,hilbert_fraction"
    rows = {int(l.split(",")[0]): l.split(",") for l in lines[1:]}
    assert len(rows) == 8
    for n, count in ((2, "1"), (4, "2"), (6, "5"), (8, "14")):
        assert rows[n][1] == count
    for n in (1, 3, 5, 7):
        assert rows[n][1] == "0"
        assert rows[n][2] == "nan"
    assert float(rows[4][2]) == pytest.approx(1.0)  # log2 2
    assert float(rows[4][3]) == pytest.approx(0.25)
    assert float(rows[4][4]) == pytest.approx(2.0 / 16.0)


def test_multiplicities_rank_two(capsys):
    assert cli.main(["multiplicities", "--rank", "2", "--max-n", "6"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    rows = {int(l.split(",")[0]): l.split(",") for l in lines[1:]}
    assert rows[3][1] == "1"
    assert rows[6][1] == "5"
    assert rows[4][1] == "0"


def test_multiplicities_bad_arguments(capsys):
    assert cli.main(["multiplicities", "--max-n", "1"]) == 2
    assert cli.main(["multiplicities", "--rank", "0", "--max-n", "4"]) == 2


# -- basis -------------------------------------------------------------------------


def test_basis_writes_orthonormal_files(tmp_path, capsys):
    out = tmp_path / "basis"
    assert cli.main(["basis", "--n", "4", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    txt = out / "basis_n4_r1.txt"
    npy = out / "basis_n4_r1.npy"
    assert txt.exists() and npy.exists()
    basis = np.load(npy)
    assert basis.shape == (2, 16)
    np.testing.assert_allclose(basis @ basis.conj().T, np.eye(2), atol=1e-12)
    assert "annihilation residual" in stdout
    assert "principal angles" in stdout
    angle_line = [l for l in stdout.splitlines() if "principal angles" in l][0]
    angles = [float(tok) for tok in angle_line.split(":")[1].split()]
    assert max(angles) < 1e-8
    # text rows reconstruct the stored vectors
    data_lines = [l for l in txt.read_text().splitlines() if not l.startswith("#")]
    assert len(data_lines) == 2
    rebuilt = np.zeros(16, dtype=complex)
    for triple in np.array(data_lines[0].split(), dtype=float).reshape(-1, 3):
        rebuilt[int(triple[0])] = triple[1] + 1j * triple[2]
    np.testing.assert_allclose(rebuilt, basis[0], atol=1e-14)


def test_basis_without_reference_comparison(tmp_path, capsys):
    assert cli.main(["basis", "--n", "2", "--out", str(tmp_path)]) == 0
    stdout = capsys.readouterr().out
    assert "principal angles" not in stdout


def test_basis_rejects_odd_replica_count(tmp_path, capsys):
    assert cli.main(["basis", "--n", "5", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "no singlets: N odd" in err


# -- config handling ---------------------------------------------------------------


def test_unknown_config_key_paths(tmp_path, capsys):
    cfg = write_config(tmp_path, "a.json", {"notakey": 1})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "unknown config key: notakey" in capsys.readouterr().err

    cfg = write_config(tmp_path, "b.json", {"bath": {"x": 1}})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "unknown config key: bath.x" in capsys.readouterr().err


def test_config_must_be_json_object(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2]")
    assert cli.main(["simulate", "--config", str(path)]) == 2
    assert "root must be a JSON object" in capsys.readouterr().err
    path.write_text("{nope")
    assert cli.main(["simulate", "--config", str(path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert cli.main(["simulate", "--config", str(tmp_path / "none.json")]) == 2
    assert "error:" in capsys.readouterr().err


# -- simulate ----------------------------------------------------------------------


def test_simulate_default_physics(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.json", {"time": FAST_TIME})
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "PASS" in stdout

    summary = json.loads((out / "summary.json").read_text())
    assert summary["encoded_pass"] is True
    assert summary["max_trace_distance"] <= 1e-8
    assert summary["reference_min_fidelity"] < 0.9
    assert summary["code_dimension"] == 2

    for name in ("trajectory.csv", "reference.csv"):
        lines = (out / name).read_text().splitlines()
        comments = [l for l in lines if l.startswith("#")]
        assert any("dfscodes" in l for l in comments)
        assert any("seed=7" in l for l in comments)
        assert any("config" in l and '"replicas": 4' in l for l in comments)
        header = [l for l in lines if not l.startswith("#")][0]
        assert header == "time,fidelity,purity,leakage,trace_distance"
        data = np.loadtxt(out / name, delimiter=",", skiprows=len(comments) + 1)
        assert data.shape == (21, 5)


def test_simulate_output_is_bitwise_deterministic(tmp_path):
    cfg = write_config(
        tmp_path, "run.json",
        {"time": {"t_max": 5.0, "steps": 6}, "coupling": {"random": True}, "seed": 3},
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out_a)]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", str(out_b)]) == 0
    for name in ("trajectory.csv", "reference.csv", "summary.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_simulate_zero_coupling_keeps_everything_fixed(tmp_path):
    cfg = write_config(
        tmp_path, "run.json",
        {
            "time": {"t_max": 5.0, "steps": 6},
            "coupling": {
                "enable_absorption": False,
                "enable_counter_rotating": False,
                "enable_dephasing": False,
            },
        },
    )
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["max_trace_distance"] <= 1e-10
    # alternating product reference is a free-Hamiltonian eigenstate here
    assert summary["reference_max_trace_distance"] <= 1e-10


def test_simulate_dephasing_only_weight_pair(tmp_path):
    # two-replica register state |01>+|10>: equal-weight pair, dephasing couples
    # only to the total weight so it should sit still even outside the code
    cfg = write_config(
        tmp_path, "run.json",
        {
            "replicas": 2,
            "time": FAST_TIME,
            "deviation_budget": 1e-9,
            "coupling": {
                "enable_absorption": False,
                "enable_counter_rotating": False,
            },
            "initial": {"register_state": [0, 1, 1, 0]},
        },
    )
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["max_trace_distance"] <= 1e-9


def test_simulate_budget_violation_exits_one(tmp_path, capsys):
    # same register state with the raising/lowering couplings back on: decoheres
    cfg = write_config(
        tmp_path, "run.json",
        {
            "replicas": 2,
            "time": FAST_TIME,
            "initial": {"register_state": [0, 1, 1, 0]},
        },
    )
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 1
    assert "FAIL" in capsys.readouterr().out
    summary = json.loads((out / "summary.json").read_text())
    assert summary["encoded_pass"] is False
    assert summary["max_trace_distance"] > 1e-3


def test_simulate_rejects_bad_initial_state_specs(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "a.json", {"initial": {"encoded_state": "nonsense"}}
    )
    assert cli.main(["simulate", "--config", cfg]) == 2
    assert "encoded_state" in capsys.readouterr().err

    cfg = write_config(
        tmp_path, "b.json", {"initial": {"encoded_state": [1.0, 0.0, 0.0]}}
    )
    assert cli.main(["simulate", "--config", cfg]) == 2
    assert "logical amplitudes" in capsys.readouterr().err

    cfg = write_config(
        tmp_path, "c.json",
        {"initial": {"bath_mixture": [{"weight": 1.0, "occupations": [0, 0], "extra": 1}]}},
    )
    assert cli.main(["simulate", "--config", cfg]) == 2
    assert "bath_mixture[0].extra" in capsys.readouterr().err


def test_simulate_logical_amplitudes_and_bath_mixture(tmp_path):
    cfg = write_config(
        tmp_path, "run.json",
        {
            "time": {"t_max": 10.0, "steps": 11},
            "initial": {
                "encoded_state": [[0.6, 0.0], [0.0, 0.8]],
                "bath_mixture": [
                    {"weight": 0.6, "occupations": [0, 0]},
                    {"weight": 0.4, "occupations": [1, 2]},
                ],
            },
        },
    )
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["max_trace_distance"] <= 1e-8


# -- robustness --------------------------------------------------------------------


ROBUST_OVERRIDES = {
    "time": FAST_TIME,
    "phase_scales": [0.0, 1e-3, 1e-2],
}


def read_sweep(path):
    lines = path.read_text().splitlines()
    comments = sum(1 for l in lines if l.startswith("#"))
    header = lines[comments]
    data = np.loadtxt(path, delimiter=",", skiprows=comments + 1, ndmin=2)
    return header, data


def test_robustness_sweep(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.json", ROBUST_OVERRIDES)
    out = tmp_path / "out"
    assert cli.main(["robustness", "--config", cfg, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "zero-phase budget" in stdout and "PASS" in stdout

    header, encoded = read_sweep(out / "robustness.csv")
    assert header == "phase_scale,max_infidelity,max_leakage"
    _, reference = read_sweep(out / "robustness_reference.csv")
    assert encoded.shape == reference.shape == (3, 3)
    np.testing.assert_allclose(encoded[:, 0], [0.0, 1e-3, 1e-2], atol=0)
    assert encoded[0, 1] <= 1e-8
    assert np.all(np.diff(encoded[:, 1]) >= 0.0)
    # the code keeps a large margin over the bare register at every scale here
    assert np.all(encoded[:, 1] < reference[:, 1])


def test_robustness_parallel_matches_serial(tmp_path):
    cfg = write_config(
        tmp_path, "run.json",
        {"time": {"t_max": 5.0, "steps": 6}, "phase_scales": [0.0, 1e-2]},
    )
    out_a, out_b = tmp_path / "serial", tmp_path / "threads"
    assert cli.main(["robustness", "--config", cfg, "--out", str(out_a)]) == 0
    assert cli.main(
        ["robustness", "--config", cfg, "--out", str(out_b), "--parallel", "2"]
    ) == 0
    for name in ("robustness.csv", "robustness_reference.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_robustness_rejects_unsorted_scales(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.json", {"phase_scales": [1e-2, 0.0]})
    assert cli.main(["robustness", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "sorted ascending" in capsys.readouterr().err
