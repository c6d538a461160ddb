"""Sector-boundary contours and quadrature engines.

The basic path is, for arc radius rho >= 0 and opening angle theta,

    { rho e^{i phi} : theta <= phi <= 2 pi - theta }
        union  { r e^{+- i theta} : r >= rho },

traversed positively around the region to the left of the sector: in
along the lower ray, around the arc (phi decreasing from 2 pi - theta
to theta), and out along the upper ray.  With this orientation the
weighted sum of resolvent values reproduces residues at enclosed
spectral points with a + sign, which is the convention every formula
in this package assumes.  Node weights absorb the path derivative and
the 1/(2 pi i) prefactor.

Ray quadrature uses composite Gauss-Legendre panels on a radially
graded mesh: panel widths are uniform in log r across a caller-supplied
"focus" window (where the integrand's poles live) and coarsen
geometrically with ratio 2 toward both endpoints 0 and R.  Endpoint
power behavior |lambda|^w is handled by the grading; truncation at R is
estimated from the outermost panel mass and the integrand's configured
decay exponent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AsymmetryDetected, InvalidContour, TruncationNotConverged

_TWO_PI_I = 2.0j * np.pi

#: default per-panel Gauss-Legendre order when n_ray does not force one
DEFAULT_PANEL_ORDER = 10

#: deepest graded edge relative to min(1, R) when rho = 0 and no explicit
#: inner floor is given
DEFAULT_FLOOR_EXP = 2.0 ** -60


@dataclass(frozen=True)
class ContourSpec:
    """Parametrization of a (possibly shifted) sector-boundary path.

    Parameters
    ----------
    rho : float
        Arc radius; 0 collapses the arc and the rays meet at the origin.
    theta : float
        Ray half-opening angle, in (0, pi).
    R : float
        Radial truncation of the rays.
    n_ray : int
        Target node count per ray (distributed over graded panels).
    n_arc : int
        Node count on the arc (must be 0 when rho == 0).
    delta : float
        Additive shift of the whole path (signed; models +-delta + path).
    orientation : str
        "standard" or "negated"; negated flips every weight.
    r_floor : float or None
        Innermost graded edge for rho == 0 rays; below it a single stub
        panel reaches down to r = 0.
    focus : (float, float) or None
        Radial window that receives the finest panels.
    breaks : tuple of float
        Radii forced to be panel boundaries (spectral scales, split radii).
    """

    rho: float
    theta: float
    R: float
    n_ray: int = 0
    n_arc: int = 16
    delta: float = 0.0
    orientation: str = "standard"
    r_floor: float | None = None
    focus: tuple[float, float] | None = None
    breaks: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (0.0 < self.theta < np.pi):
            raise InvalidContour(f"theta must lie in (0, pi), got {self.theta}")
        if self.rho < 0:
            raise InvalidContour("rho must be nonnegative")
        if self.R < self.rho or self.R <= 0:
            raise InvalidContour(f"R={self.R} must be at least rho={self.rho}")
        if self.R == self.rho and self.n_arc == 0:
            raise InvalidContour("degenerate rays need arc nodes")
        if self.rho == 0.0 and self.n_arc != 0:
            raise InvalidContour("rho = 0 admits no arc nodes")
        if self.orientation not in ("standard", "negated"):
            raise InvalidContour(f"unknown orientation {self.orientation!r}")
        if self.n_ray and self.n_ray < 4 and self.R > self.rho:
            raise InvalidContour("n_ray must be at least 4")
        if self.rho > 0 and self.n_arc and self.n_arc < 4:
            raise InvalidContour("n_arc must be at least 4 when the arc is present")

    def with_orientation(self, orientation: str) -> "ContourSpec":
        return replace(self, orientation=orientation)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "theta": self.theta,
            "R": self.R,
            "n_ray": self.n_ray,
            "n_arc": self.n_arc,
            "delta": self.delta,
            "orientation": self.orientation,
            "r_floor": self.r_floor,
            "focus": list(self.focus) if self.focus else None,
            "breaks": list(self.breaks),
        }


@dataclass(frozen=True)
class QuadNode:
    """A contour point and its weight (path derivative and 1/(2 pi i) included)."""

    lam: complex
    weight: complex


#: widest admitted log-radial panel; keeps exponential-in-log integrands
#: resolvable by the default panel order
MAX_PANEL_WIDTH = 2.8


def _graded_edges(r_inner: float, R: float, focus, breaks) -> np.ndarray:
    """Radial panel edges: log-uniform inside the focus window, widths
    doubling (ratio 2) toward both r_inner and R outside it, capped at
    MAX_PANEL_WIDTH in log radius."""
    base = np.log(2.0)
    lo = np.log(r_inner)
    hi = np.log(R)
    if focus is None:
        f_lo, f_hi = lo, hi
    else:
        f_lo = np.clip(np.log(focus[0]), lo, hi)
        f_hi = np.clip(np.log(focus[1]), lo, hi)
        if f_hi < f_lo:
            f_lo = f_hi = 0.5 * (f_lo + f_hi)
    edges = []
    n_mid = max(1, int(np.ceil((f_hi - f_lo) / base)))
    edges.extend(np.linspace(f_lo, f_hi, n_mid + 1))
    w = base
    s = f_lo
    while s > lo:
        s = max(lo, s - w)
        edges.append(s)
        w = min(2.0 * w, MAX_PANEL_WIDTH)
    w = base
    s = f_hi
    while s < hi:
        s = min(hi, s + w)
        edges.append(s)
        w = min(2.0 * w, MAX_PANEL_WIDTH)
    r_edges = list(np.exp(np.array(sorted(set(edges)))))
    r_edges[0], r_edges[-1] = r_inner, R
    for b in breaks:
        if r_inner < b < R:
            r_edges.append(float(b))
    r_edges = np.array(sorted(r_edges))
    # drop slivers from floating-point log/exp round trips
    keep = np.concatenate([[True], np.diff(np.log(r_edges)) > 1e-9])
    r_edges = r_edges[keep]
    r_edges[-1] = R
    return r_edges


def build_nodes(spec: ContourSpec) -> list[QuadNode]:
    """Quadrature nodes for the contour, arc first, then the graded rays.

    Weights carry the positive-orientation signs (lower ray inward, arc
    with decreasing angle, upper ray outward) and the 1/(2 pi i) factor;
    a negated spec flips all of them.
    """
    lam_parts: list[np.ndarray] = []
    w_parts: list[np.ndarray] = []

    if spec.rho > 0 and spec.n_arc > 0:
        xg, wg = leggauss(spec.n_arc)
        half = np.pi - spec.theta
        phi = np.pi + half * xg
        lam = spec.rho * np.exp(1j * phi)
        lam_parts.append(lam)
        # d lambda = i rho e^{i phi} d phi, traversed with phi decreasing
        w_parts.append(-half * wg * 1j * lam / _TWO_PI_I)

    if spec.R > spec.rho:
        r_inner = spec.rho
        stub = None
        if spec.rho == 0.0:
            r_inner = spec.r_floor or min(1.0, spec.R) * DEFAULT_FLOOR_EXP
            stub = (0.0, r_inner)
        edges = _graded_edges(r_inner, spec.R, spec.focus, spec.breaks)
        panels = list(zip(edges[:-1], edges[1:]))
        q = DEFAULT_PANEL_ORDER
        if spec.n_ray:
            q = max(2, int(round(spec.n_ray / (len(panels) + (stub is not None)))))
        xg, wg = leggauss(q)
        up = np.exp(1j * spec.theta)
        dn = np.exp(-1j * spec.theta)
        if stub is not None:
            # innermost stub [0, r_floor], mapped linearly (integrable
            # endpoint power, tiny absolute mass)
            a, b = stub
            r = 0.5 * (b + a) + 0.5 * (b - a) * xg
            w = 0.5 * (b - a) * wg
            lam_parts.append(r * up)
            w_parts.append(w * up / _TWO_PI_I)
            lam_parts.append(r * dn)
            w_parts.append(-w * dn / _TWO_PI_I)
        for a, b in panels:
            # Gauss nodes in log radius: dr = r ds
            sa, sb = np.log(a), np.log(b)
            s = 0.5 * (sb + sa) + 0.5 * (sb - sa) * xg
            r = np.exp(s)
            w = 0.5 * (sb - sa) * wg * r
            lam_parts.append(r * up)
            w_parts.append(w * up / _TWO_PI_I)       # upper ray outward
            lam_parts.append(r * dn)
            w_parts.append(-w * dn / _TWO_PI_I)      # lower ray inward

    lam = np.concatenate(lam_parts) + spec.delta
    w = np.concatenate(w_parts)
    if spec.orientation == "negated":
        w = -w
    return [QuadNode(complex(l), complex(c)) for l, c in zip(lam, w)]


@dataclass
class DunfordResult:
    """Contour-quadrature value with its truncation-error estimate."""

    value: np.ndarray
    tail_estimate: float
    n_nodes: int
    last_panel_mass: float


def node_arrays(spec: ContourSpec) -> tuple[np.ndarray, np.ndarray]:
    """(lambda, weight) arrays for vectorized scalar integrands."""
    nodes = build_nodes(spec)
    lam = np.array([n.lam for n in nodes])
    w = np.array([n.weight for n in nodes])
    return lam, w


def dunford(
    spec: ContourSpec,
    integrand: Callable[[complex], np.ndarray],
    decay_exponent: float = 1.0,
    tol_tail: float | None = None,
) -> DunfordResult:
    """Evaluate (1/2 pi i) * integral of `integrand` over the contour.

    Parameters
    ----------
    integrand : callable
        Matrix- (or vector-) valued function of the contour point.  Any
        SingularShift raised by it propagates: the contour touches a
        spectrum and the caller chose a bad path.
    decay_exponent : float
        eta such that the integrand decays like |lambda|^(-1-eta); used
        to extrapolate the outermost panel mass into a tail estimate.
    tol_tail : float, optional
        If given, raise TruncationNotConverged when the tail estimate
        exceeds it.
    """
    nodes = build_nodes(spec)
    acc = None
    # outermost ray panel mass, estimated from the nodes with the largest
    # radii (one panel's worth on each ray)
    radii = np.array([abs(n.lam - spec.delta) for n in nodes])
    order = np.argsort(radii)
    tail_count = min(len(nodes), 2 * DEFAULT_PANEL_ORDER)
    tail_idx = set(order[-tail_count:].tolist())
    last_mass = 0.0
    for i, nd in enumerate(nodes):
        term = np.asarray(integrand(nd.lam), dtype=complex) * nd.weight
        acc = term if acc is None else acc + term
        if i in tail_idx:
            last_mass += float(np.linalg.norm(term.reshape(-1)))
    ratio = 2.0 ** max(decay_exponent, 1e-3)
    tail = last_mass / max(ratio - 1.0, 1e-3)
    if tol_tail is not None and tail > tol_tail:
        raise TruncationNotConverged(
            f"tail estimate {tail:.3e} exceeds tol_tail {tol_tail:.3e} "
            f"(R={spec.R:.3e}, decay exponent {decay_exponent})"
        )
    return DunfordResult(acc, tail, len(nodes), last_mass)


def tail_radius(decay_exponent: float, magnitude: float, tol: float) -> float:
    """Truncation radius from the a-priori bound C r^(-1-eta) on the integrand.

    The neglected tail is about C R^(-eta) / eta; solve for R at the
    requested tolerance.  Clipped to [1e2, 1e60].
    """
    eta = max(decay_exponent, 1e-3)
    R = (magnitude / (eta * max(tol, 1e-300))) ** (1.0 / eta)
    return float(np.clip(R, 1e2, 1e60))


# ------------------------------------------------------------ principal value


def pv_integral(
    kernel: Callable[[float], np.ndarray],
    cutoff: float,
    n_nodes: int = 200,
    asym_rtol: float = 1e-6,
) -> np.ndarray:
    """Principal value of integral over [-cutoff, cutoff] of a kernel with a
    single simple odd singularity at s = 0.

    Node-mirrored composite Gauss-Legendre panels: each positive node s
    is paired with -s so the odd divergent part cancels analytically.
    Panels are log-graded toward 0 with ratio 2.

    Raises
    ------
    AsymmetryDetected
        If s*kernel(s) and -s*kernel(-s) disagree as s -> 0, i.e. the
        divergent part is not odd.
    """
    # the mirrored pair kernel(s) + kernel(-s) is regular at 0 (the odd
    # divergent part cancels in exact arithmetic), so uniform panels
    # suffice; width <= 1 keeps oscillatory factors resolvable
    n_panels = max(8, int(np.ceil(cutoff)))
    edges = np.linspace(0.0, cutoff, n_panels + 1)
    q = int(np.clip(round(n_nodes / n_panels), 4, 16))
    xg, wg = leggauss(q)

    # odd-part consistency: s*kernel(s) and -s*kernel(-s) must share the
    # limit at 0.  At finite s they differ by O(s) from the regular part,
    # so probe two scales and demand the residual shrink with s.
    resids, scale = [], 0.0
    for s in (cutoff * 1e-7, cutoff * 1e-9):
        cp = s * np.asarray(kernel(s), dtype=complex)
        cm = -s * np.asarray(kernel(-s), dtype=complex)
        scale = max(scale, float(np.linalg.norm(cp.reshape(-1))))
        resids.append(float(np.linalg.norm((cp - cm).reshape(-1))))
    if resids[1] > asym_rtol * max(scale, 1.0) and resids[1] > 0.5 * resids[0]:
        raise AsymmetryDetected(
            f"divergent part not odd: residuals {resids[0]:.3e}, {resids[1]:.3e} "
            f"do not vanish toward s = 0"
        )

    acc = None
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b + a) + 0.5 * (b - a) * xg
        w = 0.5 * (b - a) * wg
        for si, wi in zip(s, w):
            term = wi * (np.asarray(kernel(si), dtype=complex)
                         + np.asarray(kernel(-si), dtype=complex))
            acc = term if acc is None else acc + term
    return acc
