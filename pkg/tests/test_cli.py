import json

import numpy as np
import pytest

import ctxpoly as cp
from ctxpoly.cli import run_cli, verdict_doc
from ctxpoly.documents import save_document


@pytest.fixture()
def docs(tmp_path, b_si, canonical_behavior):
    paths = {}
    for name, value in (
        ("si", b_si),
        ("table1", canonical_behavior),
        ("uniform", cp.uniform_behavior(b_si)),
        ("gamma", cp.simplest_permutations()["swap_measurements"]),
    ):
        path = tmp_path / f"{name}.json"
        path.write_bytes(save_document(value))
        paths[name] = str(path)
    return paths


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_contextual(capsys, docs):
    code, out, _ = run(capsys, "check", "--scenario", docs["si"], "--behavior", docs["table1"])
    assert code == 0
    result = json.loads(out)
    assert result["contextual"] is True
    assert result["violated"] == "h7"


def test_check_matches_library_bit_for_bit(capsys, docs, b_si, canonical_behavior):
    _, out, _ = run(capsys, "check", "--scenario", docs["si"], "--behavior", docs["table1"])
    expected = json.dumps(
        verdict_doc(cp.is_noncontextual(b_si, canonical_behavior)), separators=(",", ":")
    )
    assert out.strip() == expected


def test_distance_zero_for_uniform(capsys, docs):
    code, out, _ = run(capsys, "distance", "--scenario", docs["si"], "--behavior", docs["uniform"])
    assert code == 0
    assert json.loads(out) == {"d": 0.0}


def test_vertices_counts(capsys, docs):
    code, out, _ = run(capsys, "vertices", "--scenario", docs["si"])
    assert code == 0
    assert out.strip() == '{"count":36,"contextual":8}'


def test_validate_reports_ok(capsys, docs):
    code, out, _ = run(capsys, "validate", "--scenario", docs["si"], "--behavior", docs["table1"])
    assert code == 0
    assert json.loads(out)["ok"] is True


def test_validate_respects_tolerance_flag(capsys, tmp_path, docs, canonical_behavior):
    probs = canonical_behavior.probs.copy()
    probs[0, 0, 1] += 1e-6
    probs[0, 0, 0] -= 1e-6  # keeps the outcome sum but bends the equivalence
    wobbly = tmp_path / "wobbly.json"
    wobbly.write_bytes(save_document(cp.Behavior(probs)))
    code, out, _ = run(capsys, "validate", "--scenario", docs["si"], "--behavior", str(wobbly))
    assert code == 0 and json.loads(out)["ok"] is False
    code, out, _ = run(
        capsys, "validate", "--scenario", docs["si"], "--behavior", str(wobbly),
        "--tolerance", "1e-3",
    )
    assert code == 0 and json.loads(out)["ok"] is True


def test_apply_permutation(capsys, docs, canonical_behavior):
    code, out, _ = run(
        capsys, "apply",
        "--scenario", docs["si"], "--behavior", docs["table1"], "--operation", docs["gamma"],
    )
    assert code == 0
    result = json.loads(out)
    image = np.array(result["behavior"]["probs"])
    assert np.allclose(image[0], canonical_behavior.probs[1])
    assert result["transport"]["prep"] == ["transported"]


def test_erase_to_single_measurement(capsys, docs):
    code, out, _ = run(
        capsys, "erase", "--scenario", docs["si"], "--behavior", docs["table1"], "--keep", "0",
    )
    assert code == 0
    result = json.loads(out)
    assert result["scenario"]["meas"] == 1


def test_compose_and_power(capsys, docs):
    code, out, _ = run(
        capsys, "compose",
        "--scenario", docs["si"], "--scenario2", docs["si"],
        "--behavior", docs["table1"], "--behavior2", docs["uniform"],
    )
    assert code == 0
    result = json.loads(out)
    assert result["scenario"]["preps"] == 8
    assert np.array(result["behavior"]["probs"]).shape == (4, 8, 2)

    code, out, _ = run(capsys, "power", "--scenario", docs["si"], "--n", "3")
    assert json.loads(out)["scenario"]["meas"] == 6


def test_simulate_subcommand(capsys, tmp_path, b6_behavior, canonical_behavior):
    sim = tmp_path / "b6.json"
    tgt = tmp_path / "si_target.json"
    sim.write_bytes(save_document(b6_behavior))
    tgt.write_bytes(save_document(canonical_behavior))
    code, out, _ = run(capsys, "simulate", "--simulators", str(sim), "--target", str(tgt))
    assert code == 0
    result = json.loads(out)
    assert result["simulable"] is True
    assert result["shared_post_processing"] is True


def test_simulate_infeasible_is_still_a_verdict(capsys, tmp_path):
    sim = tmp_path / "trivial.json"
    tgt = tmp_path / "ztarget.json"
    sim.write_bytes(save_document(cp.Behavior(np.full((1, 2, 2), 0.5))))
    tgt.write_bytes(save_document(cp.Behavior(np.array([[[0.0, 1.0], [1.0, 0.0]]]))))
    code, out, _ = run(capsys, "simulate", "--simulators", str(sim), "--target", str(tgt))
    assert code == 0
    assert json.loads(out) == {"simulable": False}


def test_secondary_subcommand(capsys, tmp_path, docs, b_si, canonical_behavior):
    rng = np.random.default_rng(1)
    from ctxpoly.sampling import perturbed_behavior

    noisy = tmp_path / "noisy.json"
    noisy.write_bytes(save_document(perturbed_behavior(canonical_behavior, rng, 0.01)))
    code, out, _ = run(capsys, "secondary", "--scenario", docs["si"], "--behavior", str(noisy))
    assert code == 0
    result = json.loads(out)
    repaired = cp.Behavior(np.array(result["behavior"]["probs"]))
    assert cp.validate_behavior(b_si, repaired, tol=1e-9).ok


def test_quantum_demo(capsys):
    code, out, _ = run(capsys, "quantum-demo")
    assert code == 0
    result = json.loads(out)
    assert list(result["violations"]) == ["h7"]
    table = np.array(result["behavior"]["probs"])[:, :, 1]
    assert table[0, 0] == pytest.approx(np.sin(np.pi / 8) ** 2, abs=1e-12)


def test_witness_subcommand(capsys):
    code, out, _ = run(capsys, "witness", "--n", "2")
    assert code == 0
    result = json.loads(out)
    assert len(result["facets"]) == 16
    assert all(f["violation"] > 0.41 for f in result["facets"])


def test_cloning_subcommand(capsys):
    code, out, _ = run(capsys, "cloning")
    assert code == 0
    result = json.loads(out)
    assert result["scenario"]["preps"] == 12
    assert result["decomposition"]["measurement_map"][0] == list(range(6))


def test_format_text_writes_summary_to_stderr(capsys, docs):
    code, out, err = run(
        capsys, "check", "--scenario", docs["si"], "--behavior", docs["table1"], "--format", "text",
    )
    assert code == 0
    assert json.loads(out)["contextual"] is True
    assert "contextual" in err


def test_output_flag_writes_file(tmp_path, capsys, docs):
    target = tmp_path / "out.json"
    code, out, _ = run(
        capsys, "vertices", "--scenario", docs["si"], "--output", str(target),
    )
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["count"] == 36


def test_bad_document_exits_2_without_output(capsys, tmp_path, docs):
    broken = tmp_path / "broken.json"
    broken.write_text('{"kind":"behavior"')
    code, out, err = run(capsys, "check", "--scenario", docs["si"], "--behavior", str(broken))
    assert code == 2
    assert out == ""
    assert "error" in err


def test_kind_mismatch_exits_2(capsys, docs):
    code, out, _ = run(capsys, "check", "--scenario", docs["table1"], "--behavior", docs["table1"])
    assert code == 2
    assert out == ""


def test_unknown_flag_exits_2(capsys, docs):
    code, _, _ = run(capsys, "check", "--scenario", docs["si"], "--bogus", "1")
    assert code == 2


def test_unknown_command_exits_2(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2


def test_missing_file_exits_2(capsys):
    code, out, err = run(capsys, "vertices", "--scenario", "/nonexistent/si.json")
    assert code == 2
    assert out == ""
