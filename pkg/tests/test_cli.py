"""The command-line front end: commands, flags, exit codes."""

import json

import pytest

from strandcheck.cli import main
from strandcheck.descent import _Names, builtin_descent_base
from strandcheck.parser import format_base_block


@pytest.fixture(scope="module")
def base_text():
    return "\n".join(format_base_block(builtin_descent_base()))


@pytest.fixture(scope="module")
def bundle_dir(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("bundle")
    assert main(["export-bundle", str(outdir)]) == 0
    return outdir


def test_export_then_check_bundle(bundle_dir, capsys):
    assert sorted(p.name for p in bundle_dir.glob("*.strand")) == [
        "ac_bundle.strand", "dd_bundle.strand", "ta_bundle.strand"]
    assert main(["check", str(bundle_dir)]) == 0
    out = capsys.readouterr().out
    assert out.count("Verified") == 13
    assert "Failed" not in out


def test_check_json_report(bundle_dir, capsys):
    assert main(["check", "--json", str(bundle_dir / "ta_bundle.strand")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "Verified"
    assert all(s["verdict"] == "Verified" for s in payload["scripts"])


def test_check_corrupted_step_exits_1(bundle_dir, tmp_path, capsys):
    text = (bundle_dir / "ta_bundle.strand").read_text()
    corrupt = text.replace(
        "step axiom TA1 fwd @ layers:0..2, strand:0, width:1 -> d1",
        "step axiom TA2 fwd @ layers:0..2, strand:0, width:1 -> d1", 1)
    assert corrupt != text
    bad = tmp_path / "bad.strand"
    bad.write_text(corrupt)
    assert main(["check", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "Failed at step" in out


def test_check_malformed_header_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.strand"
    bad.write_text("[base\nobject A\n")
    assert main(["check", str(bad)]) == 2
    assert "error" in capsys.readouterr().err


def test_check_missing_file_exits_2(tmp_path):
    assert main(["check", str(tmp_path / "nope.strand")]) == 2


def test_verify_benabou_roubaud_default(capsys):
    assert main(["verify-benabou-roubaud", "--instances", "5"]) == 0
    out = capsys.readouterr().out
    assert "theorem: Verified (13/13 scripts)" in out
    assert "13/13 claims agree" in out


def test_verify_skip_oracle(capsys):
    assert main(["verify-benabou-roubaud", "--skip-oracle"]) == 0
    assert "oracle: skipped" in capsys.readouterr().out


def test_verify_zero_instances_warns(capsys):
    assert main(["verify-benabou-roubaud", "--instances", "0"]) == 0
    assert "warning" in capsys.readouterr().out


def test_probe_confluence(capsys):
    assert main(["probe-confluence", "--size", "3", "--samples", "25",
                 "--seed", "42"]) == 0
    assert "violations: 0" in capsys.readouterr().out


def test_probe_zero_samples_warns(capsys):
    assert main(["probe-confluence", "--samples", "0"]) == 0
    assert "warning" in capsys.readouterr().out


def test_normalize_pure_chi(base_text, tmp_path, capsys):
    src = tmp_path / "chi.strand"
    src.write_text(base_text + """

[signature]
extension none

[diagram d : f* f1* => f* f1*]
layer id(A) | chi(f1;f = f2;f) | id(Q)
layer id(A) | chi(f2;f = f1;f) | id(Q)
""")
    assert main(["normalize", str(src), "d"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[diagram d : f* f1* => f* f1*]")
    assert "layer" not in out


def test_normalize_rejects_non_chi(base_text, tmp_path):
    src = tmp_path / "eta.strand"
    src.write_text(base_text + """

[signature]
extension none

[diagram z : f* => f*]
layer f* | eta(f) | id(B)
layer id(A) | eps(f) | f*
""")
    assert main(["normalize", str(src), "z"]) == 2


def test_render_to_stdout_and_file(bundle_dir, tmp_path, capsys):
    src = str(bundle_dir / "ta_bundle.strand")
    assert main(["render", src, "d0"]) == 0
    first = capsys.readouterr().out
    assert first.startswith("<?xml") and first.endswith("</svg>\n")
    out = tmp_path / "d0.svg"
    assert main(["render", src, "d0", "--out", str(out)]) == 0
    assert out.read_text() == first
    assert main(["render", src, "d0", "--format", "tikz"]) == 0
    assert "tikzpicture" in capsys.readouterr().out


def test_render_unknown_diagram_exits_2(bundle_dir):
    src = str(bundle_dir / "ta_bundle.strand")
    assert main(["render", src, "no_such_diagram"]) == 2


def test_model_check_file(bundle_dir, capsys):
    src = str(bundle_dir / "dd_bundle.strand")
    assert main(["model-check", src, "--instances", "5",
                 "--max-size", "3", "--max-fiber", "2"]) == 0
    out = capsys.readouterr().out
    assert "G_AC1: Verified" in out


def test_model_check_without_scripts_exits_2(base_text, tmp_path):
    src = tmp_path / "empty.strand"
    src.write_text(base_text + "\n")
    assert main(["model-check", str(src)]) == 2


def test_model_check_detects_inequality(base_text, tmp_path, capsys):
    names = _Names(builtin_descent_base())
    assert names  # the two counit placements below differ pointwise
    src = tmp_path / "neq.strand"
    src.write_text(base_text + """

[signature]
extension none

[diagram inner : f* f! f* f! => f* f!]
layer id(A) | eps(f) | f* f!

[diagram outer : f* f! f* f! => f* f!]
layer f* f! | eps(f) | id(A)

[script bogus]
claim inner = outer
""")
    assert main(["model-check", str(src), "--instances", "40",
                 "--max-size", "3", "--max-fiber", "2", "--seed", "1"]) == 1
    assert "Failed" in capsys.readouterr().out


def test_usage_errors_exit_2():
    assert main(["render"]) == 2
    assert main(["no-such-command"]) == 2
