import numpy as np
import pytest

from sectorsum import (
    HolomorphicSymbol,
    ImaginaryPowerFamily,
    bip_fit,
    builtin_symbols,
    complex_power,
    fractional_power,
    hinf_apply,
    hinf_constant,
    imaginary_power,
    symbol_class_check,
)
from sectorsum.errors import ClassViolated
from conftest import certified


# ------------------------------------------------------------ complex powers


def test_complex_power_half_inverse(diag14):
    got = complex_power(diag14, -0.5)
    assert np.abs(got - np.diag([1.0, 0.5])).max() < 1e-8


def test_complex_power_identity_operator():
    A = certified(np.eye(3), 0.9 * np.pi)
    for z in (-0.5, -1.0, -0.3 + 0.7j):
        assert np.abs(complex_power(A, z) - np.eye(3)).max() < 1e-9


def test_complex_power_inverse_oracle():
    A = certified(np.diag([4.0]), 0.9 * np.pi)
    direct = np.linalg.inv(A.matrix)
    assert np.abs(complex_power(A, -1.0) - direct).max() < 1e-8


def test_complex_power_zero_is_identity(diag14):
    assert np.array_equal(complex_power(diag14, 0.0), np.eye(2))


def test_complex_power_contract():
    A = certified(np.diag([1.0, 2.0]), 0.9 * np.pi)
    with pytest.raises(ValueError):
        complex_power(A, 0.5)


def test_power_semigroup_property():
    ops = [
        certified(np.diag([1.0, 2.0, 7.0]), 0.9 * np.pi),
        certified([[2.0, 1.0], [0.0, 2.0]], 0.75 * np.pi),
        certified(np.exp(1j * np.pi / 4) * np.diag([1.0, 3.0]), 0.7 * np.pi),
    ]
    pairs = [(-0.5, -0.25), (-0.3 + 0.5j, -0.7 - 0.5j), (-1.0, -0.5 + 1.0j)]
    for A in ops:
        for z1, z2 in pairs:
            P1, P2 = complex_power(A, z1), complex_power(A, z2)
            P12 = complex_power(A, z1 + z2)
            assert np.linalg.norm(P1 @ P2 - P12, 2) <= 1e-6


def test_fractional_power_positive_exponent(diag14):
    got = fractional_power(diag14, 0.5)
    assert np.abs(got - np.diag([1.0, 2.0])).max() < 1e-8


# ---------------------------------------------------------- imaginary powers


def test_imaginary_power_identity():
    A = certified(np.eye(2), 0.9 * np.pi)
    assert np.abs(imaginary_power(A, 1.0) - np.eye(2)).max() < 1e-10


def test_imaginary_power_scalar_e():
    A = certified([[np.e]], 0.9 * np.pi)
    got = imaginary_power(A, 1.0)[0, 0]
    assert abs(got - np.exp(1j)) < 1e-7


def test_imaginary_power_rotated_modulus():
    A = certified([[np.exp(1j * np.pi / 4)]], 0.7 * np.pi)
    got = imaginary_power(A, -1.0)[0, 0]
    assert abs(abs(got) - np.exp(np.pi / 4)) < 1e-5


def test_power_routes_consistency():
    # A^{it} against the continuation A^{-0.5+it} (A^{-0.5})^{-1}
    A = certified(np.diag([1.0, 3.0]), 0.9 * np.pi)
    half_inv = np.linalg.inv(complex_power(A, -0.5))
    for t in (0.5, -1.0):
        via_contour = complex_power(A, -0.5 + 1j * t) @ half_inv
        direct = imaginary_power(A, t)
        assert np.linalg.norm(via_contour - direct, 2) <= 1e-6


def test_bip_fit_positive_selfadjoint():
    A = certified(np.diag([1.0, 2.0]), 0.9 * np.pi)
    fit = bip_fit(A, t_max=3.0, n_t=13)
    assert fit.phi <= 0.01
    assert fit.M == pytest.approx(1.0, abs=1e-6)


def test_bip_fit_rotated_pair():
    A = certified(np.diag([np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)]), 0.7 * np.pi)
    fit = bip_fit(A, t_max=4.0)
    assert fit.phi == pytest.approx(np.pi / 4, rel=0.05)


def test_bip_fit_identity():
    A = certified(np.eye(2), 0.9 * np.pi)
    fit = bip_fit(A, t_max=2.0, n_t=9)
    assert fit.M == pytest.approx(1.0, abs=1e-8) and fit.phi <= 1e-8


def test_bip_bound_holds_at_samples():
    A = certified(np.diag([np.exp(0.5j), 2.0]), 0.8 * np.pi)
    fit = bip_fit(A, t_max=3.0)
    assert np.all(fit.norms <= fit.M * np.exp(fit.phi * np.abs(fit.t_grid)) + 1e-12)


# ------------------------------------------------------------------ symbols


def test_builtin_symbols_pass_their_class_check():
    for theta in (np.pi / 4, np.pi / 2):
        for name, sym in builtin_symbols(theta).items():
            rec = symbol_class_check(sym)
            assert rec["passed"], name


def test_cayley_squared_matches_stated_constant():
    # |f| <= 1.1 (|lam|/(1+|lam|^2)) holds off the right half plane
    f = builtin_symbols(np.pi / 2)["cayley-squared"]
    sym = HolomorphicSymbol("cayley-1.1", f.evaluator, np.pi / 2, "h0", c=1.1, eta=1.0)
    assert symbol_class_check(sym)["passed"]


def test_constant_symbol_violates_class():
    sym = HolomorphicSymbol("one", lambda lam: np.ones_like(lam), np.pi / 2,
                            "h0", c=100.0, eta=0.5)
    with pytest.raises(ClassViolated) as exc:
        symbol_class_check(sym)
    assert exc.value.point is not None


def test_sqrt_symbol_extended_class():
    sym = builtin_symbols(np.pi / 4)["sqrt-over-1minus"]
    assert sym.decay == "extended" and sym.eta == 0.5
    assert symbol_class_check(sym)["passed"]


# ------------------------------------------------------------ H-inf calculus


def test_hinf_apply_scalar_residues(scalar1):
    reg = builtin_symbols(np.pi / 2)
    got = hinf_apply(reg["sqrt-over-1minus"], scalar1)
    assert abs(got[0, 0] - 0.5) < 1e-7
    got = hinf_apply(reg["cayley-squared"], scalar1)
    assert abs(got[0, 0] - 0.25) < 1e-7


def test_hinf_apply_normal_oracle(diag14):
    reg = builtin_symbols(np.pi / 2)
    sym = reg["sqrt-over-1minus"]
    got = hinf_apply(sym, diag14)
    expected = np.diag([0.5, 0.4])
    assert np.abs(got - expected).max() < 1e-7


def test_hinf_angle_contract():
    A = certified(np.diag([1.0, 2.0]), np.pi / 4)
    sym = builtin_symbols(np.pi / 2)["cayley-squared"]
    with pytest.raises(ValueError):
        hinf_apply(sym, A)


def test_hinf_constant_identity_bound():
    A = certified(np.eye(2), 0.9 * np.pi)
    family = list(builtin_symbols(np.pi / 2).values())
    c = hinf_constant(A, np.pi / 2, family)
    # for A = I each ||f(-A)|| equals |f(-1)| <= sup |f|
    assert c <= 1.0 + 1e-6


def test_hinf_constant_normal_oracle(diag14):
    family = list(builtin_symbols(np.pi / 2).values())
    c = hinf_constant(diag14, np.pi / 2, family)
    assert c <= 1.0 + 1e-6
    assert c > 0.1


def test_hinf_constant_empty_family(diag14):
    with pytest.raises(ValueError):
        hinf_constant(diag14, np.pi / 2, [])


def test_hinf_operators_have_bounded_imaginary_powers(diag14):
    family = list(builtin_symbols(np.pi / 2).values())
    assert np.isfinite(hinf_constant(diag14, np.pi / 2, family))
    fit = bip_fit(diag14, t_max=2.0, n_t=9)
    assert np.isfinite(fit.M) and np.isfinite(fit.phi)


def test_normal_operator_oracle_all_routes():
    d = np.array([0.5, 2.0, 8.0])
    A = certified(np.diag(d), 0.9 * np.pi)
    z = -0.6 + 0.4j
    assert np.abs(complex_power(A, z) - np.diag(d ** z)).max() < 1e-7
    t = 0.8
    assert np.abs(imaginary_power(A, t) - np.diag(d ** (1j * t))).max() < 1e-7
    sym = builtin_symbols(np.pi / 2)["rational-eta"]
    expected = np.diag([complex(sym(np.array([-a + 0j]))[0]) for a in d])
    assert np.abs(hinf_apply(sym, A) - expected).max() < 1e-7


def test_imaginary_power_family_reuse():
    A = certified(np.diag([1.0, 4.0]), 0.9 * np.pi)
    fam = ImaginaryPowerFamily(A, t_max=3.0)
    for t in (0.3, 1.7, -2.2):
        assert np.abs(fam.at(t) - np.diag([1.0, 4.0 ** (1j * t)])).max() < 1e-9
