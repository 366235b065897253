import json

import pytest

from qnetflow.cli import main
from qnetflow.protocols import builtin_protocol, script_to_dict
from qnetflow.states import QubitLabel, ghz_state, state_to_json


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_unassisted_butterfly_exact(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "builtin:butterfly",
                               "--scenario", "unassisted")
        doc = json.loads(out)
        assert code == 0
        assert doc["certification"] == "exact"
        assert doc["inner_region"]["vertices"] == [["0", "0"], ["0", "1"], ["1", "0"]]
        assert doc["shallow_certificate"]["verdict"] == "certified"

    def test_forward_with_fixture(self, capsys):
        code, out, _ = run_cli(
            capsys, "analyze", "builtin:butterfly", "--scenario", "forward",
            "--fixture", "fixture:butterfly_forward",
        )
        doc = json.loads(out)
        assert code == 0
        assert doc["fixture_match"] is True
        # the generic assisted cut bound stays visibly looser than the region
        # (first facet with a support difference is the r2 cap: 1 vs 2)
        assert doc["gap_direction"] == ["0", "1"]

    def test_backward_path_exact(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "builtin:path",
                               "--scenario", "backward", "--require-exact")
        assert code == 0
        assert json.loads(out)["certification"] == "exact"

    def test_require_exact_gap_exit(self, capsys):
        code, _, _ = run_cli(capsys, "analyze", "builtin:butterfly",
                             "--scenario", "forward", "--require-exact")
        assert code == 2

    def test_ent_scenario(self, capsys):
        code, out, _ = run_cli(
            capsys, "analyze", "builtin:butterfly", "--scenario", "ent",
            "--fixture", "fixture:butterfly_ent_classical",
        )
        doc = json.loads(out)
        assert code == 0
        assert doc["certification"] == "exact"
        assert doc["quantum_region"]["vertices"][-1] == ["1", "1"]

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "builtin:butterfly",
                               "--scenario", "backward", "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == "r1,r2"

    def test_deterministic_output(self, capsys):
        _, out1, _ = run_cli(capsys, "analyze", "builtin:inverted_crown",
                             "--scenario", "backward")
        _, out2, _ = run_cli(capsys, "analyze", "builtin:inverted_crown",
                             "--scenario", "backward")
        assert out1 == out2

    def test_input_error_exit(self, capsys):
        code, _, err = run_cli(capsys, "analyze", "/does/not/exist.json")
        assert code == 1
        assert "error" in err


class TestOtherCommands:
    def test_two_pair(self, capsys):
        code, out, _ = run_cli(capsys, "two-pair", "builtin:butterfly")
        doc = json.loads(out)
        assert code == 0
        assert doc["region"]["halfspaces"] == [{"a": ["1", "1"], "b": "2"}]

    def test_certify_shallow(self, capsys):
        code, out, _ = run_cli(capsys, "certify-shallow", "builtin:butterfly")
        assert code == 0
        assert json.loads(out)["verdict"] == "certified"

    def test_multicast(self, capsys):
        code, out, _ = run_cli(capsys, "multicast-rate", "builtin:path",
                               "A1", "B1")
        assert code == 0
        assert json.loads(out)["rate"] == "1"

    def test_eoa(self, capsys, tmp_path):
        st = ghz_state([QubitLabel("A", "m", 0), QubitLabel("B", "m", 0),
                        QubitLabel("C", "m", 0)])
        path = tmp_path / "ghz3.json"
        path.write_text(state_to_json(st))
        code, out, _ = run_cli(capsys, "eoa", str(path), "A", "B", "--ledger")
        doc = json.loads(out)
        assert code == 0
        assert abs(doc["value"] - 1.0) < 1e-9
        # winning partition is T = (), so C sits on B's side: S(A) = 1 ebit
        assert doc["ledger"]["pair_ebits"] == pytest.approx(1.0, abs=1e-9)

    def test_simulate_pass_and_fidelity_exit(self, capsys, tmp_path):
        bp = builtin_protocol("butterfly_backward_zero_two")
        spath = tmp_path / "script.json"
        spath.write_text(json.dumps(script_to_dict(bp.script)))
        code, out, _ = run_cli(capsys, "simulate", "builtin:butterfly",
                               str(spath), "--scenario", "backward",
                               "--rates", "0,2")
        assert code == 0
        assert json.loads(out)["passed"] is True
        # wrong expected rates still exit nonzero
        code, _, _ = run_cli(capsys, "simulate", "builtin:butterfly",
                             str(spath), "--scenario", "backward",
                             "--rates", "1,1")
        assert code == 3

    def test_simulate_broken_script_exit(self, capsys, tmp_path):
        from qnetflow.protocols import Controlled, ProtocolScript, SendClassical

        bp = builtin_protocol("butterfly_backward_zero_two")
        filtered = tuple(
            s for s in bp.script.steps
            if not (isinstance(s, SendClassical) and s.register == "rv1.send")
            and not (isinstance(s, Controlled) and s.control == "rv1.send")
        )
        broken = ProtocolScript(bp.script.n_calls, bp.script.messages,
                                filtered, "broken")
        spath = tmp_path / "broken.json"
        spath.write_text(json.dumps(script_to_dict(broken)))
        code, out, _ = run_cli(capsys, "simulate", "builtin:butterfly",
                               str(spath), "--scenario", "backward",
                               "--rates", "0,2")
        assert code == 3
        assert json.loads(out)["fidelities"]["2"] < 1 - 1e-9
