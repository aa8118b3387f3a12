import json
from pathlib import Path

import pytest

from fdquant import (FunctionAlgebra, PhaseSpaceSignature, Scalar, StarProductRule, gns, matrix_algebra,
                     scalars_algebra, trace_functional, verify_algebra)
from fdquant.cli import main
from fdquant.serialize import (InputError, algebra_in, algebra_out, functional_in, load_json, observable_in,
                               observable_out, representation_in, representation_out)

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_star_verify_moyal_passes(capsys):
    code, report = run_json(capsys, "star-verify", "--rule", "moyal", "--dof", "1", "--order", "5",
                            "--samples", "6", "--degree-cap", "3")
    assert code == 0 and report["status"] == "pass"
    assert report["seed"] == 0


def test_star_verify_pointwise_fails(capsys):
    code, report = run_json(capsys, "star-verify", "--rule", "pointwise", "--dof", "1", "--samples", "3")
    assert code == 1
    c1 = next(c for c in report["checks"] if c["name"] == "C1_poisson")
    assert c1["verdict"] == "fail" and c1["witness"] == ["x", "p"]


def test_malformed_json_is_input_error(capsys):
    code, _, err = run(capsys, "psd", DATA / "malformed.json")
    assert code == 3 and "input error" in err


def test_missing_file_and_bad_flags(capsys, tmp_path):
    assert run(capsys, "psd", tmp_path / "nope.json")[0] == 3
    assert run(capsys, "star-verify", "--samples", "0")[0] == 3
    assert run(capsys, "no-such-command")[0] == 3


def test_gns_trace_writes_rank_four_rep(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code, report = run_json(capsys, "gns", DATA / "m2.json", DATA / "trace.json", "--out", out)
    assert code == 0 and report["data"]["rank"] == 4
    rep = representation_in(load_json(out), 6)
    assert rep.rank == 4


def test_gns_non_positive_functional(capsys):
    code, report = run_json(capsys, "gns", DATA / "m2.json", DATA / "bad_functional.json")
    assert code == 1
    assert report["checks"][0]["witness"]["value"] == "-1"


def test_gns_wick_fock_table(capsys):
    code, report = run_json(capsys, "gns", DATA / "wick.json", DATA / "delta0.json", "--degree-cap", "3")
    assert code == 0
    norms = {row["monomial"]: row["norm"] for row in report["data"]["fock_norms"]}
    assert norms == {"1": "1", "z": "0", "zb": "2*lam", "z^2": "0", "z*zb": "0", "zb^2": "8*lam^2",
                     "z^3": "0", "z^2*zb": "0", "z*zb^2": "0", "zb^3": "48*lam^3"}


def test_gns_moyal_delta_zero_rejected(capsys):
    code, report = run_json(capsys, "gns", DATA / "moyal.json", DATA / "delta0.json", "--degree-cap", "2",
                            "--order", "3")
    assert code == 1
    assert report["checks"][0]["witness"]["value"] == "-1/2*lam"


def test_induce_identity_bimodule(capsys):
    code, report = run_json(capsys, "induce", DATA / "identity_m2.json", DATA / "m2_trace_rep.json")
    assert code == 0
    names = {c["name"] for c in report["checks"]}
    assert {"identity_isometric", "identity_intertwines", "identity_bijective"} <= names


def test_induce_request_file(capsys):
    code, report = run_json(capsys, "induce", DATA / "induce_request.json")
    assert code == 0 and report["data"]["rank"] == 2


def test_induce_request_check_selection(capsys, tmp_path):
    request = load_json(DATA / "induce_request.json")
    request["checks"] = ["induced_positive"]
    path = tmp_path / "request.json"
    path.write_text(json.dumps(request))
    code, report = run_json(capsys, "induce", path)
    assert code == 0 and [c["name"] for c in report["checks"]] == ["induced_gram_positive"]
    request["checks"] = ["nonsense"]
    path.write_text(json.dumps(request))
    assert run(capsys, "induce", path)[0] == 3


def test_induce_gns_cross_check(capsys):
    code, report = run_json(capsys, "induce", "--gns", DATA / "m2.json", DATA / "vector_state.json")
    assert code == 0
    assert any(c["name"] == "gns_unitary_intertwines" and c["verdict"] == "pass" for c in report["checks"])


def test_induce_cp_failure(capsys):
    code, _ = run_json(capsys, "induce", DATA / "cp_failing_bimodule.json", DATA / "scalars_rep.json")
    assert code == 1


def test_induce_algebra_mismatch(capsys):
    assert run(capsys, "induce", DATA / "standard_c2.json", DATA / "m2_trace_rep.json")[0] == 3


def test_psd_commands(capsys, tmp_path):
    out = tmp_path / "cert.json"
    code, report = run_json(capsys, "psd", DATA / "diag_1_lambda.json", "--out", out)
    assert code == 0
    cert = load_json(out)["certificate"]
    assert sorted(t["lambda_power"] for t in cert) == [0, 1]
    code, report = run_json(capsys, "psd", DATA / "diag_1_minus_lambda.json")
    assert code == 1 and report["checks"][0]["witness"]["value"] == "-lam"


def test_cp_commands(capsys):
    assert run(capsys, "cp", DATA / "free_module_c2.json")[0] == 0
    assert run(capsys, "cp", DATA / "projected_m2.json")[0] == 0
    assert run(capsys, "cp", DATA / "negative_metric.json")[0] == 1


def test_cp_over_function_algebra_is_indeterminate(capsys):
    code, report = run_json(capsys, "cp", DATA / "moyal_module.json")
    assert code == 2 and report["status"] == "indeterminate"


def test_morita_command(capsys):
    code, report = run_json(capsys, "morita", DATA / "standard_c2.json")
    assert code == 0
    names = {c["name"] for c in report["checks"]}
    assert "dual_bases_reconstruct_via_left_inner" in names and "roundtrip0_intertwines" in names


def test_morita_explicit_spec(capsys):
    code, report = run_json(capsys, "morita", DATA / "explicit_m2_c2.json")
    assert code == 0, report


def test_json_output_is_deterministic(capsys):
    args = ("star-verify", "--rule", "wick", "--samples", "4", "--seed", "7", "--order", "3")
    first = run(capsys, *args, "--format", "json")[1]
    second = run(capsys, *args, "--format", "json")[1]
    assert first == second
    assert json.loads(first)["seed"] == 7
    timed = json.loads(run(capsys, *args, "--format", "json", "--timing")[1])
    assert all("timing" in c for c in timed["checks"])


def test_text_output_prints_seed(capsys):
    _, out, _ = run(capsys, "star-verify", "--rule", "moyal", "--samples", "2", "--seed", "42", "--order", "2")
    assert "seed: 42" in out


# -- serialization -------------------------------------------------------------------------

def test_algebra_roundtrip():
    M2 = matrix_algebra(scalars_algebra(2), 2)
    again = algebra_in(json.loads(json.dumps(algebra_out(M2))), 2)
    assert again == M2
    assert verify_algebra(again).ok


def test_observable_roundtrip():
    A = FunctionAlgebra(StarProductRule.moyal(), PhaseSpaceSignature.canonical(), 3)
    f = A.variable("x") * A.variable("p") + A.one().scale(Scalar.series([0, (0, 1)], 3))
    assert observable_in(json.loads(json.dumps(observable_out(f))), 3) == f


def test_representation_roundtrip():
    M2 = matrix_algebra(scalars_algebra(2), 2)
    pi = gns(M2, trace_functional(M2))
    again = representation_in(json.loads(json.dumps(representation_out(pi))), 2)
    assert again.rank == 4 and again.actions == pi.actions


def test_input_validation():
    with pytest.raises(InputError):
        algebra_in({"dim": 2, "unit": [1], "mult": [], "involution": []}, 2)
    with pytest.raises(InputError):
        functional_in({"kind": "covector", "coords": [1, 2]}, scalars_algebra(2), 2)
    with pytest.raises(InputError):
        functional_in({"kind": "wat"}, scalars_algebra(2), 2)


def test_non_associative_algebra_file_rejected(capsys, tmp_path):
    # e2 is idempotent, so it cannot act as the unit on e1
    bad = {"dim": 2, "unit": [0, 1],
           "mult": [[[1, 0], [0, 1]], [[0, 1], [0, 1]]],
           "involution": [[1, 0], [0, 1]]}
    path = tmp_path / "bad_algebra.json"
    path.write_text(json.dumps(bad))
    code, _, err = run(capsys, "gns", path, DATA / "trace.json")
    assert code == 3 and "axioms" in err
