"""Trigonometric-polynomial sectoriality tests, the principal-value
resolvent representation formulas, and the periodic Hilbert multiplier.

The tested inequality bounds, over t in (0, 2 pi),

    || sum_k e^{ikt} (I + r e^{-k + i phi} A)^{-1} x_k ||_{L^p}

by a constant times || sum_k a_k(t) x_k ||_{L^p} for some collection of
multipliers with ||a_k||_inf <= 1.  The existential quantifier over the
a_k cannot be falsified on a machine; witness_search certifies
sufficiency over an explicit recorded family and reports the best
constant the family achieves.

The representation formulas, for an operator with bounded imaginary
powers of power angle phi < pi and any rho > 0,

    (I + rho A)^{-1} x = (1/2 pi i) PV int (rho A)^{-is} pi/sinh(pi s) x ds + x/2
    (I + rho e^{i theta} A)^{-1}
        = (I + rho A)^{-1}
          + (1/2 pi i) int (rho A)^{-is} pi (e^{theta s} - 1)/sinh(pi s) ds

hold for |theta| < pi - phi; the integrand decays like
e^{(phi + |theta| - pi)|s|}, which fixes the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import linops
from .calculus import BipFit, ImaginaryPowerFamily, bip_fit
from .contour import pv_integral
from .errors import AngleOutOfRange, DenominatorDegenerate, TruncationNotConverged
from .maxreg import GridFunction, TimeGrid
from .sector import MatrixOperator, certify_sector

FAMILY_SEED = 0xA11CE


def periodic_grid(N_t: int, p: float = 2.0) -> TimeGrid:
    """Uniform grid of N_t points on the circle (0, 2 pi)."""
    return TimeGrid(tau=2.0 * np.pi, N_t=N_t, p=p, periodic=True)


def _check_grid_resolves(n_terms: int, N_t: int) -> None:
    if N_t < 4 * n_terms:
        raise ValueError(
            f"N_t = {N_t} cannot resolve {n_terms} harmonics; need N_t >= {4 * n_terms}"
        )


def trig_sum(xs, N_t: int) -> np.ndarray:
    """Values of sum_k e^{ikt} x_k on the uniform grid, shape (N_t, dim)."""
    xs = [linops.as_vector(x) for x in xs]
    t = 2.0 * np.pi * np.arange(N_t) / N_t
    phases = np.exp(1j * np.outer(t, np.arange(len(xs))))
    return phases @ np.array(xs)


def lhs_norm(
    A: MatrixOperator,
    phi: float,
    r: float,
    xs,
    p: float = 2.0,
    N_t: int = 256,
    stride: int = 1,
) -> float:
    """L^p(0, 2pi) norm of sum_k e^{i m k t} (I + r e^{-k+i phi} A)^{-1} x_k.

    The harmonic stride m >= 1 defaults to 1; p may be any exponent in
    [1, inf) here (the closedness machinery never needs p = 1, but the
    majorant inequality itself admits it).
    """
    if not (np.exp(-1.0) - 1e-12 <= r <= 1.0 + 1e-12):
        raise ValueError(f"r must lie in [1/e, 1], got {r}")
    if A.certified is None or abs(phi) > A.angle() + 1e-12:
        raise ValueError("|phi| must not exceed the certified angle of A")
    if p < 1.0:
        raise ValueError(f"p must lie in [1, inf), got {p}")
    if stride < 1:
        raise ValueError("harmonic stride must be a positive integer")
    xs = [linops.as_vector(x, A.dim) for x in xs]
    _check_grid_resolves(stride * len(xs), N_t)
    resolved = []
    for k, x in enumerate(xs):
        scale = r * np.exp(-k + 1j * phi)
        # (I + s A)^{-1} = (1/s) (A + 1/s)^{-1}
        resolved.append(linops.solve_shifted(A.matrix, 1.0 / scale, x) / scale)
    grid = periodic_grid(N_t)
    t = grid.times()
    phases = np.exp(1j * np.outer(t, stride * np.arange(len(xs))))
    vals = phases @ np.array(resolved)
    return GridFunction(grid, vals).lp_norm(p)


# ----------------------------------------------------------- multiplier family


@dataclass(frozen=True)
class MultiplierFamily:
    """Finite recorded family of unimodular multiplier collections.

    kinds:
      pure-harmonics      a_k(t) = e^{i(kt + beta)}, beta in {0, pi/2, pi, 3pi/2}
      piecewise-constant  seeded unimodular phases, constant on m segments
      proof-derived       time-shifted harmonics a_k(t) = e^{ik(t+s)}
    """

    kind: str = "pure-harmonics"
    segments: tuple[int, ...] = (4, 8)
    members_per_segment: int = 4
    shifts: tuple[float, ...] = (0.0, np.pi / 4, np.pi / 2, np.pi)
    seed: int = FAMILY_SEED

    def members(self, n_terms: int, N_t: int):
        """Yield (label, a) with a of shape (n_terms, N_t), |a| <= 1."""
        t = 2.0 * np.pi * np.arange(N_t) / N_t
        k = np.arange(n_terms)
        if self.kind == "pure-harmonics":
            for beta in (0.0, np.pi / 2, np.pi, 1.5 * np.pi):
                yield f"harmonic-beta={beta:.3f}", np.exp(1j * (np.outer(k, t) + beta))
        elif self.kind == "piecewise-constant":
            rng = np.random.default_rng(self.seed)
            for m in self.segments:
                for j in range(self.members_per_segment):
                    seg = np.minimum((t / (2 * np.pi) * m).astype(int), m - 1)
                    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_terms, m))
                    yield f"pw-m={m}-{j}", np.exp(1j * phases[:, seg])
        elif self.kind == "proof-derived":
            for s in self.shifts:
                yield f"shifted-s={s:.3f}", np.exp(1j * np.outer(k, t + s))
        else:
            raise ValueError(f"unknown multiplier family kind {self.kind!r}")


@dataclass
class TSectorReport:
    """Witness-search outcome for the majorant inequality."""

    C_hat: float
    witness: str
    phi: float
    r: float
    p: float
    n_terms: int
    N_t: int
    family_kind: str
    lhs: float
    denominator: float

    def to_dict(self) -> dict:
        return {
            "C_hat": self.C_hat,
            "witness": self.witness,
            "phi": self.phi,
            "r": self.r,
            "p": self.p,
            "n_terms": self.n_terms,
            "N_t": self.N_t,
            "family_kind": self.family_kind,
            "lhs": self.lhs,
            "denominator": self.denominator,
        }


def witness_search(
    A: MatrixOperator,
    phi: float,
    r: float,
    xs,
    p: float = 2.0,
    family: MultiplierFamily | None = None,
    N_t: int = 256,
    stride: int = 1,
) -> TSectorReport:
    """Best (smallest) constant lhs / ||sum_k a_k x_k||_p over the family.

    The reported C_hat upper-bounds the constant achievable within the
    family; degenerate denominators are rejected.
    """
    family = family or MultiplierFamily()
    xs = [linops.as_vector(x, A.dim) for x in xs]
    _check_grid_resolves(stride * len(xs), N_t)
    lhs = lhs_norm(A, phi, r, xs, p, N_t, stride=stride)
    grid = periodic_grid(N_t)
    floor = 1e-12 * sum(np.linalg.norm(x) for x in xs)
    X = np.array(xs)
    best = None
    for label, a in family.members(len(xs), N_t):
        vals = np.einsum("kt,kd->td", a, X)
        denom = GridFunction(grid, vals).lp_norm(p)
        if denom <= floor:
            continue
        ratio = lhs / denom
        if best is None or ratio < best[0]:
            best = (ratio, label, denom)
    if best is None:
        raise DenominatorDegenerate(
            "every family member yielded a numerically zero denominator"
        )
    return TSectorReport(
        C_hat=float(best[0]),
        witness=best[1],
        phi=phi,
        r=r,
        p=p,
        n_terms=len(xs),
        N_t=N_t,
        family_kind=family.kind,
        lhs=lhs,
        denominator=float(best[2]),
    )


def parseval_tsector_check(
    A: MatrixOperator,
    phi: float,
    r: float,
    xs,
    N_t: int = 256,
    normality_tol: float = 1e-10,
) -> dict:
    """p = 2 equivalence check for normal operators: the grid value of
    lhs_norm^2 must not exceed K-hat^2 * || sum e^{ikt} x_k ||_2^2, with
    K-hat certified at angle |phi|.  Both sides are also reproduced by
    Parseval sums as an independent route."""
    Am = A.matrix
    if linops.operator_norm(Am @ Am.conj().T - Am.conj().T @ Am) > normality_tol * max(
        1.0, A.norm() ** 2
    ):
        raise ValueError("parseval check needs a normal operator")
    xs = [linops.as_vector(x, A.dim) for x in xs]
    _check_grid_resolves(len(xs), N_t)
    K_hat = certify_sector(A, abs(phi), attach=False)
    lhs = lhs_norm(A, phi, r, xs, p=2.0, N_t=N_t)
    rhs_vals = trig_sum(xs, N_t)
    rhs = GridFunction(periodic_grid(N_t, 2.0), rhs_vals).lp_norm()
    # independent Parseval route for both sides
    res_sq = 0.0
    for k, x in enumerate(xs):
        scale = r * np.exp(-k + 1j * phi)
        y = linops.solve_shifted(Am, 1.0 / scale, x) / scale
        res_sq += float(np.linalg.norm(y) ** 2)
    lhs_parseval = np.sqrt(2.0 * np.pi * res_sq)
    rhs_parseval = np.sqrt(2.0 * np.pi * sum(np.linalg.norm(x) ** 2 for x in xs))
    record = {
        "K_hat": K_hat,
        "lhs": lhs,
        "rhs": rhs,
        "lhs_parseval": float(lhs_parseval),
        "rhs_parseval": float(rhs_parseval),
        "margin": float(K_hat * rhs - lhs),
        "passed": bool(lhs <= K_hat * rhs * (1.0 + 1e-9)),
    }
    return record


# -------------------------------------------------- representation formulas


def _rep_cutoff(bip: BipFit, theta: float, tol_tail: float) -> float:
    gap = np.pi - bip.phi - abs(theta)
    if gap <= 0.05:
        raise AngleOutOfRange(
            f"|theta| = {abs(theta):.4f} leaves no decay margin below "
            f"pi - phi-hat = {np.pi - bip.phi:.4f}"
        )
    return float(np.log(max(bip.M, 1.0) / tol_tail) / gap)


def resolvent_rep_real(
    A: MatrixOperator,
    rho: float,
    x,
    bip: BipFit | None = None,
    n_nodes: int = 320,
    tol_tail: float = 1e-9,
    family: ImaginaryPowerFamily | None = None,
) -> np.ndarray:
    """(I + rho A)^{-1} x from the principal-value formula."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = linops.as_vector(x, A.dim)
    bip = bip or bip_fit(A)
    S = _rep_cutoff(bip, 0.0, tol_tail)
    fam = family or ImaginaryPowerFamily(A, t_max=S)

    def kernel(s):
        op = fam.at(-s) * rho ** (-1j * s)
        return (np.pi / np.sinh(np.pi * s)) * (op @ x) / (2j * np.pi)

    val = pv_integral(kernel, S, n_nodes=n_nodes)
    return val + 0.5 * x


def resolvent_rep_rotated(
    A: MatrixOperator,
    rho: float,
    theta: float,
    x,
    bip: BipFit | None = None,
    n_nodes: int = 320,
    tol_tail: float = 1e-9,
    family: ImaginaryPowerFamily | None = None,
) -> np.ndarray:
    """(I + rho e^{i theta} A)^{-1} x: the real-shift value plus the
    rotation correction with kernel pi (e^{theta s} - 1)/sinh(pi s)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = linops.as_vector(x, A.dim)
    bip = bip or bip_fit(A)
    if abs(theta) >= np.pi - bip.phi:
        raise AngleOutOfRange(
            f"need |theta| < pi - phi-hat = {np.pi - bip.phi:.4f}, got {theta}"
        )
    S = _rep_cutoff(bip, theta, tol_tail)
    fam = family or ImaginaryPowerFamily(A, t_max=S)
    base = resolvent_rep_real(A, rho, x, bip=bip, n_nodes=n_nodes, family=fam)
    if theta == 0.0:
        return base

    def kern(s):
        return np.pi * (np.exp(theta * s) - 1.0) / np.sinh(np.pi * s)

    xg, wg = leggauss(10)
    width = 0.7
    edges = np.linspace(-S, S, max(4, int(np.ceil(2 * S / width))) + 1)
    corr = np.zeros_like(x)
    for a, b in zip(edges[:-1], edges[1:]):
        s_nodes = 0.5 * (b + a) + 0.5 * (b - a) * xg
        w_nodes = 0.5 * (b - a) * wg
        for s, w in zip(s_nodes, w_nodes):
            factor = kern(s) if s != 0.0 else theta
            op = fam.at(-s) * rho ** (-1j * s)
            corr += w * factor * (op @ x)
    return base + corr / (2j * np.pi)


# ------------------------------------------------------- Hilbert multiplier


def discrete_hilbert(f: GridFunction) -> GridFunction:
    """Periodic conjugate-function multiplier: harmonic k -> -i sgn(k),
    k = 0 -> 0, via the discrete Fourier basis.

    The Nyquist bin (k = N/2 for even N) is annihilated as well, so the
    transform maps real data to real data; two applications give
    -(identity minus mean) on Nyquist-free inputs.
    """
    if not f.grid.periodic:
        raise ValueError("discrete_hilbert needs a periodic grid")
    N = f.grid.N_t
    if N % 2 != 0:
        raise ValueError("N_t must be even")
    spec = np.fft.fft(f.values, axis=0)
    k = np.fft.fftfreq(N, d=1.0 / N)
    mult = -1j * np.sign(k)
    mult[0] = 0.0
    mult[N // 2] = 0.0
    return GridFunction(f.grid, np.fft.ifft(mult[:, None] * spec, axis=0))


# ------------------------------------------------------- bound assembly


def bip_tsector_bound_assembly(
    A: MatrixOperator,
    theta: float,
    r: float,
    xs,
    p: float = 2.0,
    N_t: int = 256,
    bip: BipFit | None = None,
    tol_tail: float = 1e-8,
    grid_slack: float = 1e-6,
) -> dict:
    """Evaluate the four-term split of the rotated-resolvent sum (the
    smoothed kernel term, the principal-value term, the half term, and
    the rotation term) and verify their L^p norms dominate lhs_norm.

    The underlying pointwise identity is exact, so the sum of norms
    dominates the left side by the triangle inequality up to quadrature
    and grid error.
    """
    xs = [linops.as_vector(x, A.dim) for x in xs]
    _check_grid_resolves(len(xs), N_t)
    bip = bip or bip_fit(A)
    if bip.phi + abs(theta) >= np.pi:
        raise AngleOutOfRange("phi-hat + |theta| must stay below pi")
    if p < 1.0:
        raise ValueError(f"p must lie in [1, inf), got {p}")
    S = _rep_cutoff(bip, theta, tol_tail)
    fam = ImaginaryPowerFamily(A, t_max=max(S, np.pi))
    grid = periodic_grid(N_t)
    t = grid.times()
    n_terms = len(xs)
    phases = np.exp(1j * np.outer(t, np.arange(n_terms)))  # (N_t, n)
    X = np.array(xs)  # (n, dim)

    def harmonic_field(s: float) -> np.ndarray:
        """sum_k e^{ikt} (r e^{-k} A)^{-is} x_k on the grid, (N_t, dim)."""
        M = fam.at(-s)
        scales = np.array([(r * np.exp(-k)) ** (-1j * s) for k in range(n_terms)])
        Y = (scales[:, None] * (X @ M.T))
        return phases @ Y

    # term 1: smoothed kernel pi/sinh(pi s) - chi(s)/s. smooth on [-pi, pi],
    # pure pi/sinh outside; panels split at +-pi.
    def g1(s):
        return np.pi / np.sinh(np.pi * s) - (1.0 / s if abs(s) <= np.pi else 0.0)

    xg, wg = leggauss(10)
    term1 = np.zeros((N_t, A.dim), dtype=complex)
    seg_edges = np.concatenate([
        np.linspace(-S, -np.pi, max(3, int((S - np.pi) / 0.7)) + 1),
        np.linspace(-np.pi, np.pi, 10),
        np.linspace(np.pi, S, max(3, int((S - np.pi) / 0.7)) + 1),
    ])
    seg_edges = np.unique(seg_edges)
    for a, b in zip(seg_edges[:-1], seg_edges[1:]):
        for sx, sw in zip(0.5 * (b + a) + 0.5 * (b - a) * xg, 0.5 * (b - a) * wg):
            if sx == 0.0:
                continue
            term1 += sw * g1(sx) * harmonic_field(sx)
    term1 /= 2j * np.pi

    # term 2: principal value of chi(s)/s over [-pi, pi]
    term2 = pv_integral(lambda s: harmonic_field(s) / s, np.pi, n_nodes=260) / (2j * np.pi)

    # term 3: half sum
    term3 = 0.5 * (phases @ X)

    # term 4: rotation kernel
    term4 = np.zeros((N_t, A.dim), dtype=complex)
    if theta != 0.0:
        edges4 = np.linspace(-S, S, max(6, int(np.ceil(2 * S / 0.7))) + 1)
        for a, b in zip(edges4[:-1], edges4[1:]):
            for sx, sw in zip(0.5 * (b + a) + 0.5 * (b - a) * xg, 0.5 * (b - a) * wg):
                kern = np.pi * (np.exp(theta * sx) - 1.0) / np.sinh(np.pi * sx) \
                    if sx != 0.0 else theta
                term4 += sw * kern * harmonic_field(sx)
        term4 /= 2j * np.pi

    norms = [GridFunction(grid, tm).lp_norm(p) for tm in (term1, term2, term3, term4)]
    lhs = lhs_norm(A, theta, r, xs, p, N_t)
    rhs = float(sum(norms))
    record = {
        "lhs": lhs,
        "term_norms": [float(v) for v in norms],
        "rhs_sum": rhs,
        "phi_hat": bip.phi,
        "M_hat": bip.M,
        "theta": theta,
        "r": r,
        "p": p,
        "N_t": N_t,
        "cutoff": S,
        "passed": bool(lhs <= rhs * (1.0 + grid_slack) + 1e-12),
    }
    if not record["passed"]:
        raise TruncationNotConverged(
            f"four-term sum {rhs:.6g} fails to dominate lhs {lhs:.6g}"
        )
    return record
