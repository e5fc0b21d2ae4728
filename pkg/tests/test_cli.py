import io
import json
import math

import numpy as np
import pytest

from herglotz import herglotz_core as hc
from herglotz import livsic as lv
from herglotz import measures as ms
from herglotz import perturbation as pt
from herglotz import verify
from herglotz.cli import main, parse_complex, parse_grid
from herglotz.errors import GridTooLarge, InputError, NonHerglotzSample


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def atom_file(tmp_path):
    p = tmp_path / "atom.json"
    p.write_text(json.dumps(ms.measure_to_dict(ms.Measure([(0.0, 1.0)]))))
    return str(p)


def test_weyl_example(capsys):
    code, out, err = run(capsys, "weyl", "--q", "zero", "--gamma", "0", "--z", "0,1")
    assert code == 0
    assert out.strip() == "-0.7071067812+0.7071067812i"
    assert err.startswith("# herglotz ") and "verb=weyl" in err and "tol=1e-08" in err


def test_livsic_example(capsys):
    code, out, _ = run(capsys, "livsic", "--a", "1", "--alpha", "0.785398", "--z", "0,1")
    assert code == 0 and out.strip() == "0.0000000000+1.0000000000i"


def test_global_flags_before_or_after_verb(capsys):
    _, _, err1 = run(capsys, "--tol", "1e-6", "--seed", "3", "livsic", "--a", "1", "--alpha", "0", "--z", "0,1")
    _, _, err2 = run(capsys, "livsic", "--tol", "1e-6", "--seed", "3", "--a", "1", "--alpha", "0", "--z", "0,1")
    assert "seed=3 tol=1e-06" in err1 and "seed=3 tol=1e-06" in err2


def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "all")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)
    assert {line.split()[1] for line in lines} == set(verify.SUITES)


def test_verify_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(verify, "run", lambda *a, **k: [verify.Check("x", "forced", 1.0, 0.0, False)])
    code, out, _ = run(capsys, "verify")
    assert code == 2 and out.startswith("FAIL")


def test_verification_error_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise NonHerglotzSample("Im M < 0")
    monkeypatch.setattr(verify, "run", boom)
    code, _, err = run(capsys, "verify")
    assert code == 2 and "error [" in err


def test_grid_sweep_csv_round_trip(capsys, atom_file):
    code, out, _ = run(capsys, "eval", "--measure", atom_file, "--kernel", "plain",
                       "--grid", "-1:1:10,0.1:1:10", "--format", "csv")
    assert code == 0
    zs, ms_ = hc.read_eval_csv(io.StringIO(out))
    assert zs.size == 100
    assert np.allclose(zs[:10].imag, 0.1) and np.allclose(zs[:10].real, np.linspace(-1, 1, 10))
    assert np.allclose(ms_, -1 / zs, rtol=1e-14)


def test_grid_too_large(capsys):
    code, _, err = run(capsys, "livsic", "--a", "1", "--alpha", "0", "--grid", "0:1:1001,0.1:1:1000")
    assert code == 1 and "GridTooLarge" in err
    with pytest.raises(GridTooLarge):
        parse_grid("0:1:1001,1:2:1000")


@pytest.mark.parametrize("argv", [
    ["livsic", "--a", "1", "--alpha", "0", "--z", "abc"],
    ["livsic", "--a", "-1", "--alpha", "0", "--z", "0,1"],
    ["eval", "--measure", "/nonexistent.json", "--z", "0,1"],
    ["eval", "--z", "0,1"],
    ["livsic", "--a", "1", "--alpha", "0"],
    ["eval", "--point", "4,krein", "--z", "0,1"],
])
def test_input_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "error [" in err


def test_unknown_verb_or_option_is_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["weyl", "--bogus"])
    assert "usage" in capsys.readouterr().err


def test_parse_complex_forms():
    assert parse_complex("-1,2") == complex(-1, 2)
    assert parse_complex("0.5+2i") == complex(0.5, 2)
    with pytest.raises(InputError):
        parse_complex("1,2,3")


def test_json_output_and_out_file(capsys, tmp_path):
    out = tmp_path / "m.json"
    code, stdout, _ = run(capsys, "livsic", "--a", "1", "--alpha", "0.5", "--z", "0,1", "--z=-1,0.5",
                          "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    doc = json.loads(out.read_text())
    assert len(doc["values"]) == 2
    assert doc["mass"] == pytest.approx(lv.LivsicInterval(1.0, 0.5).mass)
    assert doc["values"][0]["M"] == pytest.approx([0.0, 1.0], abs=1e-12)


def test_output_is_deterministic(capsys):
    argv = ["weyl", "--q", "zero", "--grid", "-1:1:3,0.5:1:2", "--format", "csv"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_invert_livsic_lattice(capsys):
    a, alpha = 1.0, math.pi / 4
    code, out, _ = run(capsys, "invert", "--livsic", f"{a},{alpha}", "--window", "-4,4")
    assert code == 0
    got = hc.read_inversion_csv(io.StringIO(out))
    model = lv.LivsicInterval(a, alpha)
    expected = model.poles([-2, -1, 0])
    assert np.allclose(got.locations, expected, atol=1e-4)
    assert np.allclose(got.masses, model.mass, rtol=1e-3)


def test_rotate_and_lft(capsys, tmp_path):
    code, out, _ = run(capsys, "rotate", "--point", "3,friedrichs", "--angle", str(-math.pi / 4), "--z", "0.3,0.7")
    assert code == 0
    from herglotz import schrodinger as sch
    assert complex(out.strip().replace("i", "j")) == pytest.approx(
        sch.point_interaction_m(3, "krein", 0.3 + 0.7j), abs=1e-9)
    A = tmp_path / "a.json"
    A.write_text(json.dumps(hc.JUnitary.rotation(math.pi / 2).to_dict()))
    code, out, _ = run(capsys, "lft", "--livsic", "1,0", "--junitary", str(A), "--z", "0,1")
    assert code == 0 and complex(out.strip().replace("i", "j")) == pytest.approx(1j, abs=1e-9)


def test_perturb_dilate_realize(capsys, tmp_path):
    rng = np.random.default_rng(5)
    t = pt.random_triple(rng, 3, 2)
    tf = tmp_path / "t.json"
    tf.write_text(json.dumps(t.to_dict()))
    L2 = tmp_path / "l2.json"
    L2.write_text(json.dumps(ms.complex_matrix_to_json(np.eye(2))))
    code, out, _ = run(capsys, "perturb", "--triple", str(tf), "--z", "0,1", "--check-L2", str(L2))
    doc = json.loads(out)
    assert code == 0 and doc["lft_max_error"] < 1e-10
    M = ms.complex_matrix_from_json(doc["values"][0]["M"])
    assert np.allclose(M, pt.perturbed_mfunc(t, 1j))

    om = ms.MatrixMeasure([(0.0, np.eye(2)), (1.0, np.diag([1.0, 0.0]))])
    of = tmp_path / "om.json"
    of.write_text(json.dumps(ms.matrix_measure_to_dict(om)))
    code, out, _ = run(capsys, "dilate", "--omega", str(of))
    D = pt.Dilation.from_dict(json.loads(out))
    assert code == 0 and D.N == 3
    code, out, _ = run(capsys, "realize", "--omega", str(of))
    assert code == 0 and json.loads(out)["max_residual"] < 1e-10


def test_donoghue_bounds_classify(capsys, tmp_path):
    code, out, _ = run(capsys, "donoghue", "--q", "zero", "--alpha", "0.4", "--z", "0,1")
    assert code == 0 and complex(out.strip().replace("i", "j")) == pytest.approx(1j, abs=1e-8)
    mf = tmp_path / "model.json"
    mf.write_text(json.dumps({"measure": {"tail": "lebesgue_over_pi"}, "alpha": 0.2}))
    code, out, _ = run(capsys, "donoghue", "--model", str(mf), "--alpha", "1.0", "--z", "3,0.1")
    assert code == 0 and complex(out.strip().replace("i", "j")) == pytest.approx(1j, abs=1e-9)
    code, out, _ = run(capsys, "bounds", "--alpha", str(math.pi / 6))
    doc = json.loads(out)
    assert doc["product"] == pytest.approx(0.75) and doc["variational"] is None
    code, out, _ = run(capsys, "classify", "--point", "3,krein")
    assert code == 0 and json.loads(out)["type"] == "Krein"


def test_livsic_measure_schema_round_trip(capsys):
    code, out, _ = run(capsys, "livsic-measure", "--a", "1", "--alpha", "0.7", "--periodic")
    m = ms.measure_from_dict(json.loads(out))
    assert code == 0 and m.tail.kind == "periodic"
    code, out, _ = run(capsys, "livsic-measure", "--a", "1", "--alpha", "0.7", "--n", "3")
    assert ms.measure_from_dict(json.loads(out)).locations.size == 7
