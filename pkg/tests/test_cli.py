import io
import json
import subprocess
import sys

from causalbell.boxes import BoxRecord, behavior_to_json, gyni_box, write_boxes, deterministic
from causalbell.cli import run
from oracles import pr_on_pair


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_enumerate():
    code, out, _ = call("enumerate", "--parties", "3")
    assert code == 0
    assert "classes: 16" in out and "per level: 1,1,4,4,4,1,1" in out
    code, out, _ = call("enumerate", "--parties", "3", "--format", "csv")
    assert len(out.strip().splitlines()) == 17
    code, _, err = call("enumerate", "--parties", "6")
    assert code == 3 and "limit" in err


def test_canonicalize():
    code, out, _ = call("canonicalize", "--dag", "3: L->x1")
    assert code == 0
    assert "io_bdag: {(1),(1,2),(1,3)}" in out and "orbit_size: 3" in out
    code, out, _ = call("canonicalize", "--dag", "{(1,2),(2,3),(1,2,3)}")
    assert "boring (chain witness 2,1,3)" in out
    code, _, err = call("canonicalize", "--dag", "{(1),(3)}")
    assert code == 2


def test_bound():
    assert call("bound", "--ineq", "svetlichny", "--class", "{(1),(2),(3)}")[1] == "4\n"
    assert call("bound", "--ineq", "circle", "--ns")[1] == "8\n"
    assert call("bound", "--ineq", "i3", "--algebraic")[1] == "12\n"
    code, out, _ = call("bound", "--ineq", "circle", "--class", "{(1,3),(1,2),(2,3)}", "--witness")
    assert out.startswith("# maximizer: ") and out.endswith("\n6\n")


def test_noise_and_membership(tmp_path):
    path = tmp_path / "gyni.json"
    path.write_text(behavior_to_json(gyni_box()))
    code, out, _ = call("noise", "--behavior", str(path), "--class", "{(1,3),(1,2),(2,3)}")
    assert (code, out) == (0, "1/4\n")
    code, out, _ = call("membership", "--behavior", "gyni", "--class", "{(1,3),(1,2),(2,3)}")
    assert code == 1 and out.startswith("infeasible\n") and "separating inequality" in out
    code, out, _ = call("membership", "--behavior", "gyni", "--class", "{(1),(1,2),(1,2,3)}")
    assert code == 0 and out.startswith("feasible\n")
    code, _, err = call("membership", "--behavior", "gyni", "--class", "{(1),(1,2),(1,2,3)}",
                        "--max-columns", "10")
    assert code == 3


def test_mix_threshold():
    code, out, _ = call("mix-threshold", "--a", "gyni", "--b", "white_noise(3)", "--class",
                        "{(1,3),(1,2),(2,3)}")
    assert (code, out) == (0, "1/4\n")
    code, out, _ = call("mix-threshold", "--a", "gyni", "--b", "gyni", "--class", "{(1),(2),(3)}")
    assert (code, out) == (1, "never\n")


def test_compose_i3(tmp_path):
    target = tmp_path / "i3.json"
    code, out, _ = call("compose-i3", "--i2", "chsh", "--beta-l", "7", "--beta-ns", "9",
                        "--output", str(target))
    assert (code, out) == (0, "recorded bound: 25\n")
    assert json.loads(target.read_text())["bounds"]["star"] == "25"
    assert call("bound", "--ineq", str(target), "--algebraic")[1] == "12\n"
    code, _, err = call("compose-i3", "--i2", "chsh", "--beta-l", "0.5", "--beta-ns", "1")
    assert code == 2 and "--beta-l" in err


def test_verify_and_table2(tmp_path):
    boxes = [BoxRecord(1, "det", deterministic([[0, 0], [0, 0], [0, 0]])),
             BoxRecord(2, "pr", pr_on_pair((0, 1))), BoxRecord(44, "gyni", gyni_box())]
    path = tmp_path / "boxes.json"
    path.write_text(write_boxes(boxes, "unit test"))
    code, out, _ = call("verify-boxes", "--file", str(path))
    assert code == 0 and "3 boxes, all claims verified" in out
    code, out, _ = call("table2", "--boxes", str(path), "--reference", "builtin")
    assert code == 0 and out.endswith("# matches reference\n")
    assert "44,3/5,3/8,3/8,1/3,1/3,1/3,1/4\n" in out
    relabeled = [BoxRecord(3, "gyni", gyni_box())]
    path.write_text(write_boxes(relabeled, "unit test"))
    code, out, _ = call("table2", "--boxes", str(path), "--reference", "builtin")
    assert code == 1 and "# mismatch box 3" in out


def test_gyni_command():
    assert call("gyni", "--behavior", "white_noise(3)")[1] == "1/8\n"
    code, _, err = call("gyni", "--behavior", "pr")
    assert code == 2


def test_usage_errors(tmp_path):
    assert call()[0] == 2
    assert call("frobnicate")[0] == 2
    assert call("bound", "--ineq", "circle")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"scenario": {"inputs": [2], "outputs": [2]},\n "probabilities": [1/2]}')
    code, _, err = call("gyni", "--behavior", str(bad))
    assert code == 2 and "line 2" in err
    code, _, err = call("membership", "--behavior", "nonsense", "--class", "{(1),(2)}")
    assert code == 2 and "neither a file" in err


def test_output_is_deterministic():
    first = call("bound", "--ineq", "circle", "--class", "{(1),(2),(1,2,3)}", "--witness")
    second = call("bound", "--ineq", "circle", "--class", "{(1),(2),(1,2,3)}", "--witness", "--jobs", "2")
    assert first == second
    a = call("membership", "--behavior", "gyni", "--class", "{(1),(2),(1,2,3)}")
    assert a == call("membership", "--behavior", "gyni", "--class", "{(1),(2),(1,2,3)}")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "causalbell.cli", "bound", "--ineq", "chsh",
                           "--class", "{(1),(2)}"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "2\n"
