import numpy as np
import pytest

from sectorsum import (
    MatrixOperator,
    SectorSampling,
    SectorSpec,
    certify_sector,
    decay_probe,
    extended_sector_check,
    resolvent_apply,
)
from sectorsum.errors import ExtensionViolated, NotSectorialAtAngle, SingularShift
from conftest import certified


def test_resolvent_apply_examples(scalar1):
    assert abs(resolvent_apply(scalar1, 1.0, [1.0])[0] - 0.5) < 1e-14
    A = MatrixOperator(np.diag([1.0, 4.0]))
    got = resolvent_apply(A, 1j, [1.0, 0.0])
    assert abs(got[0] - (0.5 - 0.5j)) < 1e-14 and abs(got[1]) < 1e-14
    with pytest.raises(SingularShift):
        resolvent_apply(scalar1, -1.0, [1.0])


def test_certify_scalar_sup_near_i(scalar1):
    # sup over the imaginary axis of (1+t)/sqrt(1+t^2), attained at t=1
    k = certify_sector(scalar1, np.pi / 2, attach=False)
    assert k == pytest.approx(np.sqrt(2.0), abs=1e-5)


def test_certify_identity_at_zero_angle():
    A = MatrixOperator(np.eye(3))
    assert certify_sector(A, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_certify_spectrum_on_ray():
    A = MatrixOperator([[-1.0]])
    with pytest.raises(NotSectorialAtAngle) as exc:
        certify_sector(A, 0.0)
    assert exc.value.shift is not None


def test_certify_monotonic_in_angle(scalar1):
    ks = [certify_sector(scalar1, th, attach=False) for th in (0.2, 0.6, 1.2, 1.5)]
    assert all(a <= b + 1e-12 for a, b in zip(ks, ks[1:]))


def test_certify_monotonic_in_density(scalar1):
    coarse = SectorSampling(n_boundary=24, interior_density=8)
    # geometric grids with 2n-1 points nest the n-point ones
    fine = SectorSampling(n_boundary=47, interior_density=15)
    k1 = certify_sector(scalar1, 1.0, coarse, attach=False)
    k2 = certify_sector(scalar1, 1.0, fine, attach=False)
    assert k2 >= k1 - 1e-13


def test_resolvent_identity_property():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((6, 6)) + 6.0 * np.eye(6)
    A = certified(M, 0.5)
    eye = np.eye(6)
    for z, w in [(1.0, 2.0), (0.5 + 0.2j, 3.0), (2.0, 0.1 - 0.05j)]:
        Rz = np.linalg.inv(M + z * eye)
        Rw = np.linalg.inv(M + w * eye)
        resid = np.linalg.norm(Rz - Rw - (w - z) * (Rz @ Rw), 2)
        assert resid <= 1e-9


def test_scaling_covariance():
    # (cA + cz)^{-1} = c^{-1} (A+z)^{-1}; asserted argmax-free on matched
    # z -> cz samples (the affine weight 1+|z| itself is not scale
    # invariant, so K-hat comparisons go through the norms directly)
    A = certified(np.diag([1.0, 3.0]), 1.2)
    c = 7.0
    sampling = SectorSampling(n_boundary=24, interior_density=8)
    for z in sampling.points(1.2):
        Rz = np.linalg.inv(A.matrix + z * np.eye(2))
        Rcz = np.linalg.inv(c * A.matrix + c * z * np.eye(2))
        assert np.linalg.norm(Rcz - Rz / c, 2) <= 1e-13 * np.linalg.norm(Rz / c, 2)
        assert c * np.linalg.norm(Rcz, 2) == pytest.approx(
            np.linalg.norm(Rz, 2), rel=1e-12
        )


def test_normal_operator_oracle_certify():
    d = np.array([1.0, 2.5, 10.0])
    A = MatrixOperator(np.diag(d))
    sampling = SectorSampling(n_boundary=64, interior_density=16)
    theta = 1.0
    k = certify_sector(A, theta, sampling, attach=False)
    # scalar maximum over the same grid
    pts = sampling.points(theta)
    scalar = max(
        (1.0 + abs(z)) / min(abs(a + z) for a in d) for z in pts
    )
    assert k == pytest.approx(scalar, rel=1e-2)


def test_extension_check_passes_with_measured_K(scalar1):
    k = certify_sector(scalar1, np.pi / 2, attach=False)
    chk = extended_sector_check(scalar1, SectorSpec(np.pi / 2, round(k + 5e-5, 4)))
    assert chk.passed and chk.worst_value <= chk.bound


def test_extension_check_identity():
    A = certified(np.eye(2), 0.0)
    chk = extended_sector_check(A, SectorSpec(0.0, 1.0))
    assert chk.passed


def test_extension_check_understated_K(scalar1):
    with pytest.raises(ExtensionViolated):
        extended_sector_check(scalar1, SectorSpec(np.pi / 2, 1.0))


def test_decay_probe_scalar_bounded(scalar1):
    # ||A(A+z)^{-1}|| = 1/|1+z| <= 1 on the positive reals
    sup = decay_probe(scalar1, 0.5, 0.0, 0.0, [1.0])
    assert sup <= 1.0 + 1e-9


def test_decay_probe_scalar_eta_quarter(scalar1):
    # max over r >= 0 of r^{1/4}/(1+r) is attained at r = 1/3
    sup = decay_probe(scalar1, 0.5, 0.25, 0.0, [1.0])
    expected = (1.0 / 3.0) ** 0.25 / (4.0 / 3.0)
    assert sup <= expected + 1e-9
    assert sup >= expected * 0.98


def test_decay_probe_contract_violations():
    A = certified(np.diag([1.0, 10.0]), 2.0)
    with pytest.raises(ValueError):
        decay_probe(A, 0.9, 0.9, 1.0, np.ones(2))  # eta = phi
    with pytest.raises(ValueError):
        decay_probe(A, 0.5, 0.1, 2.5, np.ones(2))  # theta' above certificate
