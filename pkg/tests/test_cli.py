import io
import json
import subprocess
import sys

import pytest

from tritangent_cv import cli
from tritangent_cv import trace_map as tm


def invoke(capsys, command, doc, *flags):
    """Run the CLI in-process on a document; returns (parsed output, exit code, raw text)."""
    text = doc if isinstance(doc, str) else json.dumps(doc)
    sys.stdin = io.StringIO(text)
    try:
        code = cli.main([command, *flags])
    finally:
        sys.stdin = sys.__stdin__
    raw = capsys.readouterr().out
    return json.loads(raw), code, raw


def as_complex(pair):
    return complex(*pair)


def test_phi_zero(capsys):
    out, code, _ = invoke(capsys, "phi", {"traces": [[0, 0]] * 4})
    assert code == 0
    assert out["result"]["params"] == [[0, 0], [0, 0], [0, 0], [4, 0]]
    assert out["schema"] == cli.SCHEMA
    for key in ("result", "residuals", "seed", "tolerance", "warnings"):
        assert key in out


def test_fiber_contains_both_signs(capsys):
    out, code, _ = invoke(capsys, "fiber", {"target": [[1, 0]] * 4})
    assert code == 0
    pts = [[as_complex(z) for z in t] for t in out["result"]["points"]]
    for want in ((1, 1, 1, 0), (-1, -1, -1, 0)):
        assert any(max(abs(u - v) for u, v in zip(t, want)) < 1e-7 for t in pts)


def test_rep4_reducible_exit_two(capsys):
    out, code, _ = invoke(capsys, "rep4", {"traces": [[2, 0]] * 4, "point": [[2, 0]] * 3})
    assert code == 2
    assert out["error_kind"] == "reducible-locus"


@pytest.mark.parametrize("doc", [
    "{not json",
    "[1, 2]",
    '{"traces": [[0, 0], [0, 0], [0, 0]]}',
    '{"traces": [[0, 0, 0], [0, 0], [0, 0], [0, 0]]}',
    '{"traces": [["a", 0], [0, 0], [0, 0], [0, 0]]}',
    '{"traces": [[NaN, 0], [0, 0], [0, 0], [0, 0]]}',
    '{"other": 1}',
    '{"schema": "tritangent-cv/999", "traces": [[0, 0], [0, 0], [0, 0], [0, 0]]}',
])
def test_malformed_input_exit_one(capsys, doc):
    out, code, _ = invoke(capsys, "phi", doc)
    assert code == 1
    assert out["error_kind"] == "malformed-input"


def test_unknown_subcommand(capsys):
    code = cli.main(["nope"])
    out = json.loads(capsys.readouterr().out)
    assert code == 1 and out["error_kind"] == "malformed-input"


def test_byte_stable_output(capsys):
    doc = {"target": [[1.5, -0.25], [2, 1], [-3, 0.5], [7, 0]]}
    _, _, first = invoke(capsys, "fiber", doc, "--seed", "3")
    _, _, second = invoke(capsys, "fiber", doc, "--seed", "3")
    assert first == second
    assert first.index('"residuals"') < first.index('"result"') < first.index('"schema"')


def test_phi_fiber_round_trip(capsys):
    phi_out, _, phi_raw = invoke(capsys, "phi", {"traces": [[1, 2], [0.5, 0], [-1, 1], [3, -2]]})
    # the phi output document is accepted directly as fiber input
    fib_out, code, fib_raw = invoke(capsys, "fiber", phi_raw)
    assert code == 0
    back, code, _ = invoke(capsys, "phi", fib_raw)
    assert code == 0
    target = [as_complex(z) for z in phi_out["result"]["params"]]
    for params in back["result"]["params_list"]:
        assert max(abs(as_complex(z) - w) for z, w in zip(params, target)) < 1e-9 * (1 + max(map(abs, target)))


def test_float_format():
    assert cli.dumps({"b": 0.1, "a": -0.0, "c": [1, True, None]}) == \
        '{"a":0,"b":0.10000000000000001,"c":[1,true,null]}'


@pytest.mark.parametrize("command, doc, key", [
    ("jacobian", {"traces": [[1, 0], [1, 0], [1, 0], [0, 0]]}, "det"),
    ("classify-pqr", {"traces": [[1, 0], [1, 0], [1, 0], [-1, 0]]}, "family"),
    ("singular", {"params": [[8, 0], [8, 0], [8, 0], [-28, 0]]}, "points"),
    ("solve-z", {"params": [[0, 0]] * 4, "x": [0, 0], "y": [0, 0]}, "z"),
    ("torus-char", {"point": [[3, 0]] * 3}, "kappa"),
    ("torus-rep", {"point": [[0, 0]] * 3}, "A"),
    ("delta", {"params": [[1, 0], [2, 0], [3, 0], [4, 0]]}, "orbit"),
    ("sphere-min", {"R": 0, "samples": 5}, "min"),
    ("fiber-count", {"target": [[1, 0.5], [2, 0], [-1, 1], [3, 0]], "trials": 1}, "count"),
])
def test_subcommands_succeed(capsys, command, doc, key):
    out, code, _ = invoke(capsys, command, doc)
    assert code == 0, out
    assert key in out["result"]


def test_jacobian_value(capsys):
    out, _, _ = invoke(capsys, "jacobian", {"traces": [[1, 0], [1, 0], [1, 0], [0, 0]]})
    assert out["result"]["det"] == [4, 0]


def test_normalize(capsys):
    poly = {"exponents": [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 1], [0, 1, 1], [1, 0, 0], [0, 0, 0]],
            "coeffs": [[1, 0], [1, 0], [1, 0], [1, 0], [1, 0], [2, 0], [1, 0]]}
    out, code, _ = invoke(capsys, "normalize", {"poly": poly})
    assert code == 0
    assert max(abs(as_complex(z)) for z in out["result"]["params"]) < 1e-12
    out, code, _ = invoke(capsys, "normalize", {"poly": {"exponents": [[1, 1, 1], [0, 2, 0], [0, 0, 2]],
                                                         "coeffs": [[1, 0], [1, 0], [1, 0]]}})
    assert code == 2 and out["error_kind"] == "singular-at-infinity"


def test_tritangent(capsys):
    fermat = {"exponents": [[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 3, 0], [0, 0, 0, 3]], "coeffs": [[1, 0]] * 4}
    out, code, _ = invoke(capsys, "tritangent", {"surface": fermat, "plane": [[1, 0], [0, 0], [0, 0], [1, 0]]})
    assert code == 0 and out["result"]["kind"] == "eckardt"
    out, code, _ = invoke(capsys, "tritangent", {"surface": fermat, "plane": [[0, 0]] * 4})
    assert code == 1


def test_torus_map_reports_discrepancy(capsys):
    out, code, _ = invoke(capsys, "torus-map", {"s": [0, 0]})
    assert code == 0
    assert out["result"]["kappa"] == [-2, 0]
    assert out["result"]["published_value"] == [2, 0]
    assert out["result"]["agrees_with_published"] is False
    assert out["warnings"]


def test_files_and_pretty(tmp_path):
    src, dst = tmp_path / "in.json", tmp_path / "out.json"
    src.write_text(json.dumps({"traces": [[2, 0]] * 4}))
    assert cli.main(["phi", "--input", str(src), "--output", str(dst), "--pretty"]) == 0
    text = dst.read_text()
    assert "\n" in text.strip()
    assert json.loads(text)["result"]["params"][3] == [-28, 0]


def test_selftest_quick(capsys):
    assert cli.main(["selftest", "--level", "quick"]) == 0
    report = json.loads(capsys.readouterr().out)["result"]
    assert report["ok"] and all(s["failed"] == 0 for s in report["suites"])


def test_selftest_negative_control(capsys, monkeypatch):
    real = tm.phi

    def corrupted(t):
        p, q, r, s = real(t)
        return tm.CubicParams(p, q, -r, s)

    monkeypatch.setattr(tm, "phi", corrupted)
    assert cli.main(["selftest", "--level", "quick"]) != 0
    assert not json.loads(capsys.readouterr().out)["result"]["ok"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tritangent_cv", "phi"], input='{"traces": [[0,0],[0,0],[0,0],[0,0]]}',
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["params"][3] == [4, 0]
