"""Smoke tests for the python bindings."""

import pytest

toeporb = pytest.importorskip("toeporb")


def test_prime_table():
    table = toeporb.PrimeTable(1000)
    assert table.prime_pi(100) == 25
    assert table.is_prime(97)
    assert not table.is_prime(91)
    assert table.prime_pi_ap(100, 4, 1) == 11


def test_semiprimes_and_phi():
    table = toeporb.PrimeTable(1000)
    assert toeporb.semiprime_pi(table, 10) == 5
    assert toeporb.semiprime_pi(table, 10, toeporb.SemiprimeMode.DISTINCT) == 4
    assert toeporb.euler_phi(30) == 8
    powers, omega, radical = toeporb.factorize(360)
    assert powers == [(2, 3), (3, 2), (5, 1)]
    assert omega == 3 and radical == 30


def test_residue_profiles():
    P = toeporb.PolynomialSpec.square()
    prof = toeporb.residue_profile(P, 5)
    assert prof.psi == 3
    assert prof.attains(4) and not prof.attains(2)
    assert toeporb.square_psi_closed(3, 2) == 4
    assert toeporb.rho_count(P, 9, 9, 0) == 3
    residues, psi_tilde = toeporb.tilde_residues(12)
    assert psi_tilde == 2


def test_skeleton_roundtrip_and_eval():
    text = "alphabet: 01\ncompletion: 0\n3:01?\n6:010010\n"
    sk = toeporb.ToeplitzSkeleton.from_text(text)
    assert sk.stage_count == 2
    assert sk.eval(2) == 0
    assert sk.to_text() == text


def test_builder_and_averages():
    cfg = toeporb.BuildConfig()
    cfg.stage_budget = 2
    skeleton, certs = toeporb.build_theorem_a(cfg)
    assert all(c["all_pass"] for c in certs)
    table = toeporb.PrimeTable(max(skeleton.period(skeleton.stage_count), 1000))
    rep = toeporb.prime_average(skeleton, table, skeleton.period(skeleton.stage_count))
    assert abs(rep["value"]) <= 1.0

    bounded = toeporb.build_bounded_holes(2, [2, 4, 8], 1)
    pred = toeporb.predicted_prime_limit(bounded, 3)
    assert abs(pred["value"]) <= 1.0
    poly_pred = toeporb.predicted_poly_limit(bounded, toeporb.PolynomialSpec.square(), 3)
    assert abs(poly_pred["value"]) <= 1.0


def test_sturmian():
    spec = toeporb.RotationSpec.golden_conjugate()
    bits = "".join(str(toeporb.sturmian_code(spec, k)) for k in range(1, 14))
    assert bits == "0100101001001"
