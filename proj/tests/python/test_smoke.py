import cmath
import math

import kgsplit as kg


def test_required_bits():
    assert kg.required_bits("0", 0) == 53
    # pi sqrt(2)/0.2 nats with the default 64 guard bits
    nats = math.pi * math.sqrt(2.0) / 0.2
    assert kg.required_bits(str(nats), 64) == 150


def test_duffing_homoclinic():
    v, dv = kg.duffing_homoclinic(0)
    assert abs(v - 2 * math.sqrt(2)) < 1e-12
    assert abs(dv) < 1e-12
    # zero-energy first integral (dv)^2 = v^2 - v^4/8
    v1, d1 = kg.duffing_homoclinic(0.7 + 0.3j)
    assert abs(d1 * d1 - (v1 * v1 - v1**4 / 8)) < 1e-10


def test_frequency_classes():
    assert kg.classify_frequency("1.5", "0.5") == ("J", 0)
    tag, k = kg.classify_frequency(str(1 / math.sqrt(1.01)), "0.5")
    assert (tag, k) == ("I", 1)


def test_eigenvalues():
    assert abs(kg.mu_n(3) - 2 * math.sqrt(2)) < 1e-14
    assert abs(kg.lambda_n(1, "0.3", 3) - math.sqrt(8 - 0.09)) < 1e-12


def test_toy_oracle_pair():
    closed = kg.toy_splitting_closed_form([(3, "1")], "5")
    numeric = kg.toy_splitting_numeric([(3, "1")], "5", 20.0)
    assert abs(closed) > 0
    assert abs(numeric - closed) / abs(closed) < 1e-6
    # frozen value pi sqrt2 e^{-10 sqrt2}
    expect = math.pi * math.sqrt(2) * math.exp(-10 * math.sqrt(2))
    assert abs(closed.real - expect) / expect < 1e-12
    assert abs(closed.imag) < 1e-18


def test_melnikov_pipeline():
    cprime = kg.c_in_prime([], 12)
    assert abs(cprime.real) < 1e-15
    quad = kg.melnikov_quadrature([], r=3.0, S_cut=30.0, n_tau=48)
    assert abs(quad["value"] - cprime) / abs(cprime) < 1e-3


def test_family_endpoints():
    g0 = dict(kg.appendix_c_family("0"))
    assert abs(float(g0[5]) + 1 / 30) < 1e-12
    assert abs(float(g0[7]) - 1 / 630) < 1e-12
    assert kg.appendix_c_family("1") == []


def test_measure_splitting_smoke():
    out = kg.measure_splitting(k=1, eps="0.4", n_max=5, order_P=6)
    assert out["trustedted"] if False else out["trusted"]
    assert 0 < out["s_eps"] < 1e-2
    assert out["bits"] >= 53
