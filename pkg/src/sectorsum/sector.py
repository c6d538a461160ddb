"""Sectoriality model: resolvents, angle/constant certification, the
disk-thickened extension check, and the resolvent decay probe.

An operator A is held as a dense matrix together with an optional
certificate (theta, K) meaning: on the sampled sector
Lambda_theta = { z : |arg z| <= theta } u {0} every shift was resolvable
and (1 + |z|) ||(A + z)^{-1}|| <= K held.  The supremum over the
unbounded sector is sampled on the boundary rays with log-spaced radii
plus an interior polar grid; since (1+|z|)||(A+z)^{-1}|| -> 1 as
|z| -> infinity for matrices, a finite radial range suffices and the
certificate records the edge values so saturation can be audited.
K-hat is therefore a lower bound for the true constant, reported with
its grid so re-checks are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linops
from .errors import ExtensionViolated, NotSectorialAtAngle, SingularShift, UnboundedSuspected


@dataclass(frozen=True)
class SectorSpec:
    """Certified sector: angle theta in [0, pi) and constant K >= 1."""

    theta: float
    K: float

    def __post_init__(self):
        if not (0.0 <= self.theta < np.pi):
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")
        if self.K < 1.0:
            raise ValueError(f"K must be >= 1, got {self.K}")


@dataclass(frozen=True)
class SectorSampling:
    """Discretization of the sup over Lambda_theta.

    n_boundary log-spaced radii on each boundary ray, an interior polar
    grid with n_angles angular lines and interior_density radii, all in
    [r_min, r_max].  Radius 1 and the origin are always included.
    """

    n_boundary: int = 96
    n_angles: int = 9
    r_min: float = 1e-6
    r_max: float = 1e6
    interior_density: int = 24

    def __post_init__(self):
        if self.n_boundary < 1 or self.n_angles < 1 or self.interior_density < 1:
            raise ValueError("all sampling counts must be >= 1")
        if self.r_min <= 0 or self.r_max <= self.r_min:
            raise ValueError("need 0 < r_min < r_max")

    def radii(self, n: int) -> np.ndarray:
        r = np.geomspace(self.r_min, self.r_max, n)
        return np.unique(np.concatenate([r, [1.0]]))

    def points(self, theta: float) -> np.ndarray:
        """All sampled shifts in Lambda_theta (origin included)."""
        pts = [np.array([0.0 + 0.0j])]
        rb = self.radii(self.n_boundary)
        if theta == 0.0:
            pts.append(rb.astype(complex))
        else:
            pts.append(rb * np.exp(1j * theta))
            pts.append(rb * np.exp(-1j * theta))
            ri = self.radii(self.interior_density)
            angles = np.linspace(-theta, theta, self.n_angles)
            inner = np.multiply.outer(ri, np.exp(1j * angles)).reshape(-1)
            pts.append(inner)
        return np.unique(np.concatenate(pts))

    def to_dict(self) -> dict:
        return {
            "n_boundary": self.n_boundary,
            "n_angles": self.n_angles,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "interior_density": self.interior_density,
        }


@dataclass
class MatrixOperator:
    """Dense operator with cached sector metadata.

    `certified` records the last successful certification; `sampling`
    the grid it was obtained on.
    """

    matrix: np.ndarray
    certified: SectorSpec | None = None
    sampling: SectorSampling | None = None
    _norm: float | None = field(default=None, repr=False)
    _inv_norm: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.matrix = linops.as_matrix(self.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def norm(self) -> float:
        if self._norm is None:
            self._norm = linops.operator_norm(self.matrix)
        return self._norm

    def inverse_norm(self) -> float:
        """||A^{-1}||; 1/inverse_norm lower-bounds the distance of the
        spectrum to the origin."""
        if self._inv_norm is None:
            inv = linops.ShiftedFactorization(self.matrix, 0.0).inverse()
            self._inv_norm = linops.operator_norm(inv)
        return self._inv_norm

    def scale_window(self, pad: float = 50.0) -> tuple[float, float]:
        """Radial window generously covering the spectral magnitudes."""
        lo = 1.0 / max(self.inverse_norm(), 1e-300)
        hi = max(self.norm(), lo)
        return (lo / pad, hi * pad)

    def angle(self) -> float:
        if self.certified is None:
            raise ValueError("operator is not certified; run certify_sector first")
        return self.certified.theta

    def constant(self) -> float:
        if self.certified is None:
            raise ValueError("operator is not certified; run certify_sector first")
        return self.certified.K


def resolvent_apply(A: MatrixOperator, z: complex, x) -> np.ndarray:
    """(A + z)^{-1} x."""
    return linops.solve_shifted(A.matrix, z, x)


def _bound_value(A: MatrixOperator, z: complex) -> float:
    inv = linops.ShiftedFactorization(A.matrix, z).inverse()
    return (1.0 + abs(z)) * linops.operator_norm(inv)


def certify_sector(
    A: MatrixOperator,
    theta: float,
    sampling: SectorSampling | None = None,
    attach: bool = True,
) -> float:
    """Sampled sup of (1+|z|) ||(A+z)^{-1}|| over Lambda_theta.

    Returns the sup K-hat (a lower bound for the true sector constant,
    nondecreasing in sampling density).  On success the certificate is
    attached to A unless attach=False.

    Raises
    ------
    NotSectorialAtAngle
        If any sampled shift is not resolvable; carries the offending z.
    """
    if not (0.0 <= theta < np.pi):
        raise ValueError(f"theta must lie in [0, pi), got {theta}")
    sampling = sampling or SectorSampling()
    k_hat = 0.0
    for z in sampling.points(theta):
        try:
            k_hat = max(k_hat, _bound_value(A, complex(z)))
        except SingularShift as exc:
            raise NotSectorialAtAngle(
                f"shift z={z} not resolvable at theta={theta}", shift=complex(z)
            ) from exc
    k_hat = max(k_hat, 1.0)
    if attach:
        A.certified = SectorSpec(theta=theta, K=k_hat)
        A.sampling = sampling
    return k_hat


@dataclass
class ExtensionCheck:
    """Outcome of the disk-enlargement verification."""

    passed: bool
    bound: float
    worst_value: float
    worst_margin: float
    worst_z: complex
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "bound": self.bound,
            "worst_value": self.worst_value,
            "worst_margin": self.worst_margin,
            "worst_z": [self.worst_z.real, self.worst_z.imag],
            "n_samples": self.n_samples,
        }


def extended_sector_check(
    A: MatrixOperator,
    spec: SectorSpec,
    sampling: SectorSampling | None = None,
    n_disk: int = 12,
    slack: float = 1e-9,
) -> ExtensionCheck:
    """Verify (1+|z|) ||(A+z)^{-1}|| <= 2K+1 on the disk-thickened sector.

    Around each sampled lambda in Lambda_theta the disk of radius
    (1+|lambda|)/(2K) is probed on its boundary circle.  A violation
    (or an unresolvable z) raises ExtensionViolated, which flags that A
    was certified with an understated K.
    """
    sampling = sampling or SectorSampling(n_boundary=48, interior_density=12)
    bound = 2.0 * spec.K + 1.0
    worst_val, worst_z = -np.inf, 0.0 + 0.0j
    count = 0
    angles = np.exp(2j * np.pi * np.arange(n_disk) / n_disk)
    for lam in sampling.points(spec.theta):
        radius = (1.0 + abs(lam)) / (2.0 * spec.K)
        for z in lam + radius * angles:
            count += 1
            try:
                val = _bound_value(A, complex(z))
            except SingularShift as exc:
                raise ExtensionViolated(
                    f"unresolvable z={z} inside the enlargement "
                    f"(K={spec.K} likely understated)",
                    shift=complex(z),
                ) from exc
            if val > worst_val:
                worst_val, worst_z = val, complex(z)
            if val > bound * (1.0 + slack):
                raise ExtensionViolated(
                    f"(1+|z|)||(A+z)^{{-1}}|| = {val:.6g} > 2K+1 = {bound:.6g} "
                    f"at z={z} (K={spec.K} inconsistent with certification)",
                    shift=complex(z),
                )
    return ExtensionCheck(
        passed=True,
        bound=bound,
        worst_value=worst_val,
        worst_margin=bound - worst_val,
        worst_z=worst_z,
        n_samples=count,
    )


def decay_probe(
    A: MatrixOperator,
    phi: float,
    eta: float,
    theta_prime: float,
    y,
    sampling: SectorSampling | None = None,
) -> float:
    """Sampled sup of ||z^eta A (A+z)^{-1} x|| over Lambda_theta', where
    x = A^{-phi} y.

    The sup must stabilize before the radial horizon: if the outermost
    decade [r_max/10, r_max] dominates everything below it by more than
    a factor 2, UnboundedSuspected is raised.
    """
    if not (0.0 < phi < 1.0):
        raise ValueError(f"phi must lie in (0,1), got {phi}")
    if not (0.0 <= eta < phi):
        raise ValueError(f"eta must lie in [0, phi), got eta={eta}, phi={phi}")
    if A.certified is None or theta_prime >= A.angle():
        raise ValueError("theta_prime must be below the certified angle of A")
    sampling = sampling or SectorSampling(r_max=1e6)
    if sampling.r_max < 1e6:
        sampling = SectorSampling(
            n_boundary=sampling.n_boundary,
            n_angles=sampling.n_angles,
            r_min=sampling.r_min,
            r_max=1e6,
            interior_density=sampling.interior_density,
        )

    from .calculus import complex_power  # deferred: calculus builds on this module

    y = linops.as_vector(y, A.dim)
    x = complex_power(A, -phi) @ y

    sup_inner = 0.0
    sup_outer = 0.0
    shell = sampling.r_max / 10.0
    for z in sampling.points(theta_prime):
        z = complex(z)
        resolved = linops.solve_shifted(A.matrix, z, x)
        val = float(np.linalg.norm((z ** eta) * (A.matrix @ resolved)))
        if abs(z) >= shell:
            sup_outer = max(sup_outer, val)
        else:
            sup_inner = max(sup_inner, val)
    if sup_outer > 2.0 * max(sup_inner, 1e-300):
        raise UnboundedSuspected(
            f"sup over [r_max/10, r_max] = {sup_outer:.3e} exceeds twice the "
            f"inner sup {sup_inner:.3e}; increase r_max or reduce eta"
        )
    return max(sup_inner, sup_outer)
