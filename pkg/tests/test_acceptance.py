"""Acceptance criteria, one test per criterion.

Every test records a single PASS/FAIL line (collected in the terminal
summary).  Tolerances are the published acceptance thresholds; the Hardy
basis order is K_DEFAULT (80) with M = 256 nodes per curve.
"""

import subprocess
import sys

import numpy as np
import pytest

from conftest import K_DEFAULT
from oracles import disc_bergman, disc_garabedian, disc_lambda, disc_szego
from planarkernels.classical import ProperMap, ahlfors, boundary_winding, garabedian, szego, szego_zeros
from planarkernels.hardy import sigma, weighted_garabedian
from planarkernels.potential import bergman, lambda_capital
from planarkernels.reconstruct import (
    build_basis_family,
    classical_szego_formula,
    gram_schmidt_p_independence,
    orthogonality_report,
    weighted_garabedian_formula,
    weighted_szego_formula_general,
    weighted_szego_formula_simple,
)
from planarkernels.verify import (
    DEFAULT_TOLERANCES,
    algebraic_dependence,
    bergman_szego_fit,
    check_identity,
    detect_dependence,
    lambda_zero_count,
    map_samples,
    quotient_nonconstant,
    sample_points,
)

pytestmark = pytest.mark.acceptance

SETUP = f"M=256 K={K_DEFAULT}"


def rel(got, want):
    got, want = np.asarray(got), np.asarray(want)
    return float(np.max(np.abs(got - want) / np.abs(want)))


def disc_pair_grid():
    """5 x 5 pairs with |z|, |w| <= 0.7."""
    z = 0.7 * np.exp(1j * (0.3 + 2 * np.pi * np.arange(5) / 5)) * np.array([1.0, 0.8, 0.5, 0.3, 0.0])
    w = 0.7 * np.exp(-1j * (0.9 + 2 * np.pi * np.arange(5) / 5)) * np.array([0.9, 1.0, 0.6, 0.2, 0.4])
    Z, W = np.meshgrid(z, w)
    return Z.ravel(), W.ravel()


def annulus_pairs(ws, seed):
    pts = sample_points(ws.domain, 10, clearance=0.6, seed=seed)
    Z, W = np.meshgrid(pts[:5], pts[5:])
    return Z.ravel(), W.ravel()


def test_criterion_01_disc_szego(disc_ws, criterion):
    B = disc_ws.basis()
    Z, W = disc_pair_grid()
    err = max(rel(szego(B, w)(z), disc_szego(z, w)) for z, w in zip(Z, W))
    ok = err <= 1e-8
    criterion(1, ok, f"disc Szego max rel err {err:.2e} <= 1e-8 over 25 pairs ({SETUP})")
    assert ok


def test_criterion_02_disc_garabedian(disc_ws, criterion):
    B = disc_ws.basis()
    Z, W = disc_pair_grid()
    keep = np.abs(Z - W) > 1e-3
    err = max(rel(garabedian(B, a)(z), disc_garabedian(z, a)) for z, a in zip(Z[keep], W[keep]))
    a = 0.2 - 0.3j
    lam = weighted_garabedian(B, a)
    n, r = 64, 0.05
    th = 2 * np.pi * np.arange(n) / n
    zc = a + r * np.exp(1j * th)
    residue = np.sum(lam(zc) * 1j * r * np.exp(1j * th)) * (2 * np.pi / n) / (2j * np.pi)
    res_err = abs(residue - 1 / (2 * np.pi))
    ok = err <= 1e-8 and res_err <= 1e-8
    criterion(2, ok, f"disc Garabedian rel err {err:.2e} <= 1e-8, residue err {res_err:.2e} <= 1e-8")
    assert ok


def test_criterion_03_disc_bergman(disc_ws, criterion):
    g = disc_ws.grid
    pairs = [(0.3 + 0.1j, -0.2 + 0.25j), (-0.4j, 0.5), (0.1 - 0.5j, -0.3 - 0.1j), (0.6, 0.2j)]
    kerr = max(rel(bergman(g, z, w, method="fd"), disc_bergman(z, w)) for z, w in pairs)
    lerr = max(rel(lambda_capital(g, z, w, method="fd"), disc_lambda(z, w)) for z, w in pairs)
    ok = kerr <= 1e-5 and lerr <= 1e-5
    criterion(3, ok, f"disc finite-difference K rel err {kerr:.2e}, Lambda rel err {lerr:.2e} (both <= 1e-5)")
    assert ok


def test_criterion_04_identity_suite(disc_ws, annulus_ws, tri_ws, criterion):
    ids = ("I31", "I34", "I35", "I61", "I62", "I71", "I72", "I33")
    worst, failed = {}, []
    for ws in (disc_ws, annulus_ws, tri_ws):
        for ident in ids:
            rep = check_identity(ident, ws)
            assert rep.tolerance == DEFAULT_TOLERANCES[ident]
            worst[ident] = max(worst.get(ident, 0.0), rep.max_residual / rep.tolerance)
            if not rep.passed:
                failed.append(f"{ident}@{ws.domain.name}")
    ok = not failed
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    criterion(4, ok, f"identities on disc, annulus, 3-connected; worst residual/tol: {detail}"
                     + (f"; failed {failed}" if failed else ""))
    assert ok


def test_criterion_05_ahlfors(annulus_ws, criterion):
    B = annulus_ws.basis()
    a = 0.55
    f = ahlfors(B, a)
    mod = float(np.abs(np.abs(f.values.samples) - 1).max())
    deg = boundary_winding(f.values)
    d_err = abs(f.derivative_at_base - 2 * np.pi * szego(B, a)(a))
    extra = szego_zeros(B, a)
    s_at = max(abs(f.S(z)) for z in extra)
    zeros_ok = f.zeros[0] == a and np.allclose(f.zeros[1:], extra, atol=0)
    ok = mod <= 1e-6 and deg == 2 and d_err <= 1e-7 and s_at <= 1e-8 and zeros_ok
    criterion(5, ok, f"annulus Ahlfors: ||f|-1| {mod:.2e}, degree {deg}, f'(a)-2piS(a,a) {d_err:.2e}, "
                     f"|S| at extra zero {s_at:.2e}")
    assert ok


def test_criterion_06_classical_formula(annulus_ws, criterion):
    B = annulus_ws.basis()
    F = classical_szego_formula(B, 0.55)
    Z, W = annulus_pairs(annulus_ws, 21)
    direct = np.array([szego(B, w)(z) for z, w in zip(Z, W)])
    err = rel(F(Z, W), direct)
    inv = F.coeffs.residual
    ok = err <= 1e-6 and inv <= 1e-8
    criterion(6, ok, f"annulus classical formula rel err {err:.2e} <= 1e-6 at 25 pairs, "
                     f"two-sided inverse residual {inv:.2e} <= 1e-8")
    assert ok


@pytest.fixture(scope="module")
def weighted_family(annulus_ws, annulus_cos_weight):
    fmap = ahlfors(annulus_ws.basis(), 0.55).as_proper()
    return build_basis_family(annulus_ws.basis(annulus_cos_weight), fmap)


def test_criterion_07_weighted_formula(weighted_family, annulus_ws, criterion):
    B = weighted_family.basis
    coeffs, F = weighted_szego_formula_simple(weighted_family)
    Z, W = annulus_pairs(annulus_ws, 22)
    direct = np.array([sigma(B, w)(z) for z, w in zip(Z, W)])
    err = rel(F(Z, W), direct)
    off = orthogonality_report(weighted_family)["off_block"]
    ok = err <= 1e-6 and off <= 1e-8
    criterion(7, ok, f"annulus weight 2+cos t: formula rel err {err:.2e} <= 1e-6, "
                     f"off-block inner products {off:.2e} <= 1e-8 (p, q <= 3)")
    assert ok


def test_criterion_08_double_zero(disc_ws, criterion):
    g = disc_ws.grid
    fam = build_basis_family(disc_ws.basis(), ProperMap.from_samples(g, g.nodes**2))
    coeffs, F = weighted_szego_formula_general(fam)
    Z, W = disc_pair_grid()
    err = float(np.abs(F(Z, W) - disc_szego(Z, W)).max())
    ok = err <= 1e-6 and fam.multiplicities == (2,) and len(coeffs.index) == 2
    criterion(8, ok, f"disc f = z^2 (double zero, derivative terms used): max err {err:.2e} <= 1e-6")
    assert ok


def test_criterion_09_garabedian_formula(weighted_family, criterion):
    B = weighted_family.basis
    coeffs, _ = weighted_szego_formula_simple(weighted_family)
    G = weighted_garabedian_formula(weighted_family, coeffs)
    pts = sample_points(B.domain, 40, clearance=0.6, seed=23)
    w, z = pts[:20], pts[20:]
    direct = np.array([weighted_garabedian(B, zi)(wi) for wi, zi in zip(w, z)])
    err = rel(G(w, z), direct)
    bound = max(G.boundedness(zi, radius=1e-3) for zi in z[:5])
    ok = err <= 1e-5 and np.isfinite(bound) and bound < 1e3
    criterion(9, ok, f"weighted Garabedian formula rel err {err:.2e} <= 1e-5 at 20 pairs, "
                     f"max |value| within 1e-3 of the zeros {bound:.3g}")
    assert ok


def test_criterion_10_poisson_weight(annulus_ws, criterion):
    A0 = 0.55
    sc = check_identity("SIGMA_CONST", annulus_ws, A0=A0).max_residual
    i101 = check_identity("I101", annulus_ws, A0=A0).max_residual
    zeros = lambda_zero_count(annulus_ws, A0)
    q = quotient_nonconstant(annulus_ws.poisson_basis(A0), A0, 0.6)
    ok = sc <= 1e-6 and i101 <= 1e-5 and zeros == 1 and q.nonconstant
    criterion(10, ok, f"Poisson weight at 0.55: |sigma-1| {sc:.2e} <= 1e-6, lambda/Green identity {i101:.2e} "
                      f"<= 1e-5, lambda zeros {zeros}, quotient residual/norm {q.residual / q.norm:.2e} > 1e-4")
    assert ok


def test_criterion_11_bergman_szego(disc_ws, annulus_ws, tri_ws, criterion):
    d = bergman_szego_fit(disc_ws).residual
    an = bergman_szego_fit(annulus_ws)
    tr = bergman_szego_fit(tri_ws)
    ok = d <= 1e-5 and an.residual <= 1e-3 and tr.residual <= 1e-3
    criterion(11, ok, f"K - 4 pi S^2 fit on 6x6 pairs: disc {d:.2e} <= 1e-5 (no F terms), "
                      f"annulus {an.residual:.2e}, 3-connected {tr.residual:.2e} (<= 1e-3)")
    assert ok


def test_criterion_12_dependence(disc_ws, annulus_ws, criterion):
    f0 = ahlfors(disc_ws.basis(), 0)
    pts = sample_points(disc_ws.domain, 80, seed=3)
    r0 = algebraic_dependence(*map_samples(f0, pts[:30]), 1, fresh=map_samples(f0, pts[30:]))
    r1 = detect_dependence(disc_ws, ahlfors(disc_ws.basis(), 0.4), 3)
    r2 = detect_dependence(annulus_ws, ahlfors(annulus_ws.basis(), 0.55), 4)
    ok = (r0.verdict == "dependent" and r0.min_singular <= 1e-12 and r0.fresh_residual <= 1e-8
          and r1.verdict == "dependent" and r1.degree_bound <= 3 and r1.fresh_residual <= 1e-8
          and r2.verdict == "no_relation_found" and r2.degree_bound == 4)
    criterion(12, ok, f"f=z: {r0.verdict} d=1 min sv {r0.min_singular:.1e} fresh {r0.fresh_residual:.1e}; "
                      f"automorphism: {r1.verdict} d={r1.degree_bound} fresh {r1.fresh_residual:.1e}; "
                      f"annulus d=4: {r2.verdict} (min sv {r2.min_singular:.2e})")
    assert ok


def test_criterion_13_p_independence(weighted_family, annulus_ws, criterion):
    fmap = ahlfors(annulus_ws.basis(), 0.55).as_proper()
    unit = build_basis_family(annulus_ws.basis(), fmap)
    dev = max(gram_schmidt_p_independence(weighted_family).deviation,
              gram_schmidt_p_independence(unit).deviation)
    ctrl = gram_schmidt_p_independence(weighted_family, perturbation=0.5).deviation
    ok = dev <= 1e-7 and ctrl > 1e-2
    criterion(13, ok, f"annulus p=0 vs p=1 coefficient deviation {dev:.2e} <= 1e-7, "
                      f"perturbed-weight control {ctrl:.2e} > 1e-2")
    assert ok


def test_criterion_14_determinism(criterion):
    cmd = [sys.executable, "-m", "planarkernels", "verify", "--domain", "annulus:0.3", "--suite", "all"]
    first = subprocess.run(cmd, capture_output=True)
    second = subprocess.run(cmd, capture_output=True)
    rows = first.stdout.decode().count("\n") - 1
    ok = first.returncode == 0 and first.stdout == second.stdout and rows > 10
    criterion(14, ok, f"two full-suite CLI runs on annulus: {rows} report rows, "
                      f"byte-identical {first.stdout == second.stdout}, exit {first.returncode}")
    assert ok
