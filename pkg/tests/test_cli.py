import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from oracles import disc_green, disc_szego
from planarkernels.cli import extract_tolerances, main, parse_complex, parse_weight_expression


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_parse_complex():
    assert parse_complex("0.3+0.2i") == 0.3 + 0.2j
    assert parse_complex("-0.5i") == -0.5j
    assert parse_complex("1") == 1


def test_weight_expression():
    fn = parse_weight_expression("2+cos(t)-0.5*sin(3*t)")
    t = np.linspace(0, 6, 7)
    assert np.allclose(fn(t), 2 + np.cos(t) - 0.5 * np.sin(3 * t))
    assert np.allclose(parse_weight_expression("-1+3")(t), 2)


def test_extract_tolerances():
    rest, tols = extract_tolerances(["verify", "--tol:I31=1e-3", "--tol:I34", "2e-6", "--domain", "disc"])
    assert rest == ["verify", "--domain", "disc"]
    assert tols == {"I31": 1e-3, "I34": 2e-6}


def test_kernel_szego_disc(capsys):
    code, out, _ = run(capsys, "kernel", "--domain", "disc", "--kernel", "szego", "--a", "0", "--grid", "5")
    assert code == 0
    r = rows(out)
    assert r[0] == ["z_re", "z_im", "w_re", "w_im", "value_re", "value_im"]
    data = np.array(r[1:], dtype=float)
    assert len(data) > 0
    z = data[:, 0] + 1j * data[:, 1]
    w = data[:, 2] + 1j * data[:, 3]
    v = data[:, 4] + 1j * data[:, 5]
    assert np.abs(v - disc_szego(z, w)).max() < 1e-8


def test_kernel_points_and_weight(capsys):
    code, out, _ = run(capsys, "kernel", "--domain", "annulus:0.3", "--kernel", "sigma", "--a", "0.55",
                       "--weight", "2+cos(t)", "--z", "0.6+0.1i,-0.5i")
    assert code == 0
    assert len(rows(out)) == 3


def test_ahlfors_boundary_modulus(capsys):
    code, out, _ = run(capsys, "kernel", "--domain", "annulus:0.3", "--kernel", "ahlfors", "--a", "0.55",
                       "--boundary")
    assert code == 0
    data = np.array(rows(out)[1:], dtype=float)
    assert len(data) == 512
    assert np.abs(np.hypot(data[:, 4], data[:, 5]) - 1).max() <= 1e-6


@pytest.mark.parametrize("kernel", ["garabedian", "bergman", "lambda", "weighted_garabedian", "green"])
def test_other_kernels_run(capsys, kernel):
    code, out, _ = run(capsys, "kernel", "--domain", "disc", "--kernel", kernel, "--a", "0.1",
                       "--z", "0.3+0.2i", "--basis-order", "40")
    assert code == 0
    assert np.all(np.isfinite(np.array(rows(out)[1], dtype=float)))


def test_point_not_interior(capsys):
    code, _, err = run(capsys, "kernel", "--domain", "annulus:0.3", "--kernel", "szego", "--a", "0.1")
    assert code == 2
    assert err.startswith("error: point-not-interior")
    assert err.count("\n") == 1


def test_error_causes(capsys):
    cases = [
        (["kernel", "--domain", "disc", "--kernel", "szego", "--weight", "2+tan(t)"], 2, "weight-spec"),
        (["kernel", "--domain", "square", "--kernel", "szego"], 2, "domain-spec"),
        (["kernel", "--domain", "disc", "--kernel", "nope"], 2, "usage"),
        (["kernel", "--domain", "disc", "--kernel", "szego", "--nodes", "15"], 2, "usage"),
        (["kernel", "--domain", "disc", "--kernel", "sigma", "--weight", "cos(t)"], 2, "weight"),
        (["verify", "--domain", "disc", "--suite", "identities", "--tol:NOPE=1"], 2, "usage"),
    ]
    for argv, code, cause in cases:
        got, _, err = run(capsys, *argv)
        assert got == code, argv
        assert err.startswith(f"error: {cause}"), (argv, err)


def test_missing_domain_file(capsys):
    code, _, err = run(capsys, "kernel", "--domain", "/nonexistent/dom.json", "--kernel", "szego")
    assert code == 2 and "error:" in err


def test_verify_identities_disc(capsys):
    code, out, _ = run(capsys, "verify", "--domain", "disc", "--suite", "identities")
    assert code == 0
    r = rows(out)
    assert r[0] == ["identity_id", "domain", "weight", "max_residual", "tolerance", "pass"]
    assert {x[0] for x in r[1:]} >= {"I31", "I33", "I34", "I35", "I61", "I62", "I71", "I72"}


def test_verify_reconstruction_annulus(capsys):
    code, out, _ = run(capsys, "verify", "--domain", "annulus:0.3", "--suite", "reconstruction", "--a", "0.55")
    assert code == 0
    res = {x[0]: float(x[3]) for x in rows(out)[1:]}
    assert res["F63"] <= 1e-6 and res["F83"] <= 1e-6


def test_verify_dependence_disc(capsys):
    code, out, err = run(capsys, "verify", "--domain", "disc", "--suite", "dependence")
    assert code == 0
    assert "dependent at degree 1" in err and "relation" in err


def test_verify_failure_exit(capsys, tmp_path):
    out_file = tmp_path / "r.csv"
    code, _, err = run(capsys, "verify", "--domain", "disc", "--suite", "identities", "--tol:I34=0",
                       "--out", str(out_file))
    assert code == 1
    assert "fail: I34" in err
    assert "fail" in out_file.read_text()


def test_plotdata_green(capsys):
    code, out, _ = run(capsys, "plotdata", "--domain", "disc", "--field", "green", "--a", "0",
                       "--resolution", "21")
    assert code == 0
    data = np.array(rows(out)[1:], dtype=float)
    assert len(data) == 21 * 21
    ok = np.isfinite(data[:, 2])
    z = data[ok, 0] + 1j * data[ok, 1]
    assert np.abs(data[ok, 2] - disc_green(z, 0)).max() < 1e-8
    assert np.isnan(data[~ok, 2]).all()
    r = np.abs(data[:, 0] + 1j * data[:, 1])
    assert np.all(~ok[r > 1])


def test_plotdata_harmonic_measure(capsys):
    code, out, _ = run(capsys, "plotdata", "--domain", "annulus:0.3", "--field", "harmonic_measure",
                       "--j", "2", "--resolution", "15")
    assert code == 0
    v = np.array(rows(out)[1:], dtype=float)[:, 2]
    v = v[np.isfinite(v)]
    assert v.min() >= -1e-9 and v.max() <= 1 + 1e-9


def test_plotdata_ahlfors_modulus(capsys):
    code, out, _ = run(capsys, "plotdata", "--domain", "annulus:0.3", "--field", "ahlfors_modulus",
                       "--a", "0.55", "--resolution", "31")
    assert code == 0
    data = np.array(rows(out)[1:], dtype=float)
    ok = np.isfinite(data[:, 2])
    v = data[ok, 2]
    r = np.abs(data[ok, 0] + 1j * data[ok, 1])
    assert v.max() < 1
    near = np.minimum(1 - r, r - 0.3) < 0.03
    assert near.any() and v[near].min() > 0.9
    assert v[~near].min() < 0.5


def test_module_entry_point_is_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "planarkernels", "kernel", "--domain", "three_connected",
           "--kernel", "ahlfors", "--grid", "4"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.count(b"\n") > 1
