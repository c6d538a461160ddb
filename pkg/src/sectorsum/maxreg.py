"""Time-derivative operator on a uniform grid and maximal-regularity
constants for the zero-initial-value parabolic problem f' + A f = g.

The derivative operator with domain {f(0) = 0} has empty spectrum on a
finite interval; its resolvent is the causal convolution

    ((B + lam)^{-1} g)(t) = int_0^t e^{lam (x - t)} g(x) dx,

valid for every complex lam, with the L^p bound
||(B+lam)^{-1}|| <= (1 - e^{-Re(lam) tau}) / Re(lam) for Re lam > 0 (the
L^1 norm of the kernel).  Both the scalar resolvent and the solution
map g -> f = int_0^t e^{(x-t)A} g dx are discretized by exact
integration of the exponential kernel against the piecewise-linear
interpolant of g, so quadrature error never pollutes the bound checks;
the only discretization error is O(dt^2) interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linops
from .errors import BoundViolated, DimensionMismatch
from .sector import MatrixOperator

ADVERSARIAL_SEED = 0x9D3A17  # recorded seed for worst-case probe searches


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, tau] with N_t intervals (N_t + 1 nodes) and an
    L^p exponent.  Periodic grids (for the circle of circumference tau)
    carry N_t nodes and uniform quadrature weights."""

    tau: float
    N_t: int
    p: float = 2.0
    periodic: bool = False

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.N_t < 16:
            raise ValueError("N_t must be at least 16")
        if not (1.0 < self.p < np.inf):
            raise ValueError(f"p must lie in (1, inf), got {self.p}")

    @property
    def dt(self) -> float:
        return self.tau / self.N_t

    @property
    def n_nodes(self) -> int:
        return self.N_t if self.periodic else self.N_t + 1

    def times(self) -> np.ndarray:
        if self.periodic:
            return np.arange(self.N_t) * self.dt
        return np.linspace(0.0, self.tau, self.N_t + 1)

    def weights(self) -> np.ndarray:
        w = np.full(self.n_nodes, self.dt)
        if not self.periodic:
            w[0] *= 0.5
            w[-1] *= 0.5
        return w


@dataclass
class GridFunction:
    """Vector-valued samples on a TimeGrid; `zero_start` tags membership
    in the derivative operator's domain {f(0) = 0}."""

    grid: TimeGrid
    values: np.ndarray
    zero_start: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.n_nodes:
            raise DimensionMismatch(
                f"{v.shape[0]} samples for a grid with {self.grid.n_nodes} nodes"
            )
        self.values = v

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def lp_norm(self, p: float | None = None) -> float:
        p = p or self.grid.p
        pointwise = np.linalg.norm(self.values, axis=1)
        return float(np.sum(self.grid.weights() * pointwise ** p) ** (1.0 / p))

    def map_values(self, fn) -> "GridFunction":
        return GridFunction(self.grid, fn(self.values), zero_start=self.zero_start)


# ------------------------------------------------- scalar derivative resolvent


def _pl_moments(lam: complex, h: float) -> tuple[complex, complex, complex]:
    """(e^{-lam h}, m0, m1) with m0 = int_0^h e^{lam(s-h)} ds and
    m1 the same integral weighted by s/h; exact piecewise-linear data."""
    z = lam * h
    if abs(z) > 1e-5:
        E = np.exp(-z)
        m0 = (1.0 - E) / lam
        m1 = (h - m0) / z
    else:
        # series in z keeps the cancellation (h - m0)/z accurate
        E = np.exp(-z)
        m0 = h * (1.0 - z / 2.0 + z * z / 6.0 - z ** 3 / 24.0 + z ** 4 / 120.0)
        m1 = (h / 2.0) * (1.0 - z / 3.0 + z * z / 12.0 - z ** 3 / 60.0)
    return E, m0, m1


def deriv_resolvent(lam: complex, g: GridFunction) -> GridFunction:
    """(B + lam)^{-1} g: the causal convolution with e^{lam(x-t)},
    integrated exactly against the piecewise-linear interpolant of g."""
    lam = complex(lam)
    grid = g.grid
    E, m0, m1 = _pl_moments(lam, grid.dt)
    c_cur, c_next = m0 - m1, m1
    out = np.zeros_like(g.values)
    for i in range(1, grid.n_nodes):
        out[i] = E * out[i - 1] + c_cur * g.values[i - 1] + c_next * g.values[i]
    return GridFunction(grid, out, zero_start=True)


def deriv_resolvent_matrix(lam: complex, grid: TimeGrid) -> np.ndarray:
    """Dense matrix of the scalar discrete resolvent (acts on node values)."""
    lam = complex(lam)
    E, m0, m1 = _pl_moments(lam, grid.dt)
    c_cur, c_next = m0 - m1, m1
    n = grid.n_nodes
    M = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        M[i] = E * M[i - 1]
        M[i, i - 1] += c_cur
        M[i, i] += c_next
    return M


def young_bound(lam: complex, tau: float) -> float:
    """(1 - e^{-Re(lam) tau}) / Re(lam); depends on Re(lam) only."""
    re = np.real(lam)
    if re <= 0:
        raise ValueError("the convolution bound needs Re(lam) > 0")
    return float((1.0 - np.exp(-re * tau)) / re)


def grid_operator_norm(M: np.ndarray, grid: TimeGrid, p: float | None = None,
                       n_iter: int = 40) -> float:
    """Operator norm on L^p(0,tau) of a node-value matrix.

    p = 2 is exact (weighted SVD); other p via Boyd's power-type
    iteration with the dual-exponent signum map.
    """
    p = p or grid.p
    w = grid.weights()
    if abs(p - 2.0) < 1e-12:
        ws = np.sqrt(w)
        return float(np.linalg.norm((ws[:, None] * M) / ws[None, :], 2))
    q = p / (p - 1.0)
    rng = np.random.default_rng(ADVERSARIAL_SEED)
    x = rng.standard_normal(M.shape[1]) + 0j
    x /= np.sum(w * np.abs(x) ** p) ** (1.0 / p)
    best = 0.0
    for _ in range(n_iter):
        y = M @ x
        ny = np.sum(w * np.abs(y) ** p) ** (1.0 / p)
        best = max(best, float(ny))
        if ny == 0.0:
            break
        z = np.abs(y) ** (p - 1.0) * _phase(y) * w  # dual element
        x = M.conj().T @ z
        x = np.abs(x) ** (q - 1.0) * _phase(x)
        nx = np.sum(w * np.abs(x) ** p) ** (1.0 / p)
        if nx == 0.0:
            break
        x = x / nx
    return best


def _phase(v: np.ndarray) -> np.ndarray:
    a = np.abs(v)
    return np.where(a > 0, v / np.where(a > 0, a, 1.0), 0.0)


def deriv_resolvent_bound_check(
    lam: complex,
    grid: TimeGrid,
    slack_per_dt: float = 5.0,
) -> dict:
    """Verify the measured grid norm of (B+lam)^{-1} against the
    convolution-kernel bound, with an O(dt) grid allowance."""
    lam = complex(lam)
    bound = young_bound(lam, grid.tau)
    M = deriv_resolvent_matrix(lam, grid)
    measured = grid_operator_norm(M, grid)
    allowed = bound * (1.0 + slack_per_dt * grid.dt)
    record = {
        "lam": [lam.real, lam.imag],
        "tau": grid.tau,
        "N_t": grid.N_t,
        "p": grid.p,
        "bound": bound,
        "measured": measured,
        "allowed": allowed,
        "passed": bool(measured <= allowed),
    }
    if not record["passed"]:
        raise BoundViolated(
            f"measured resolvent norm {measured:.8f} exceeds "
            f"{allowed:.8f} = bound (1 + {slack_per_dt} dt); quadrature bug"
        )
    return record


# ------------------------------------------------------------- Cauchy solver


def _cauchy_step_matrices(A: np.ndarray, h: float):
    """(E, C_cur, C_next) with E = e^{-hA} and the exact piecewise-linear
    update f_{i+1} = E f_i + C_cur g_i + C_next g_{i+1}."""
    n = A.shape[0]
    E = scipy.linalg.expm(-h * A)
    nrm = linops.operator_norm(A) * h
    eye = np.eye(n, dtype=complex)
    if nrm > 1e-2:
        Ainv = np.linalg.solve(A, eye)
        IE = eye - E
        C_next = Ainv - (Ainv @ Ainv @ IE) / h
        C_cur = Ainv @ IE - C_next
    else:
        # Taylor in hA; the closed form loses digits to cancellation here
        C_next = np.zeros_like(A)
        C_cur = np.zeros_like(A)
        power = eye
        fact = 2.0  # (j+2)!
        for j in range(10):
            C_next += h * power / fact
            C_cur += h * power * (j + 1) / fact
            power = power @ (-h * A)
            fact *= (j + 3)
    return E, C_cur, C_next


def solve_cauchy(A: MatrixOperator, g: GridFunction) -> GridFunction:
    """f(t) = int_0^t e^{(x-t)A} g(x) dx on the grid, by exact exponential
    integration of the piecewise-linear interpolant (f(0) = 0)."""
    if g.dim != A.dim:
        raise DimensionMismatch(f"g has dimension {g.dim}, operator {A.dim}")
    grid = g.grid
    E, C_cur, C_next = _cauchy_step_matrices(A.matrix, grid.dt)
    out = np.zeros_like(g.values)
    for i in range(1, grid.n_nodes):
        out[i] = g.values[i - 1] @ C_cur.T + g.values[i] @ C_next.T + out[i - 1] @ E.T
    return GridFunction(grid, out, zero_start=True)


def solve_cauchy_adjoint(A: MatrixOperator, h: GridFunction) -> GridFunction:
    """Exact adjoint of the solution map w.r.t. the weighted grid product.

    With the causal map written as f_i = sum_{k<=i} E^{i-k}(C_c g_{k-1}
    + C_n g_k), its conjugate transpose is evaluated by one anticausal
    sweep z_j = u_j + E^H z_{j+1} followed by y_j = C_c^H z_{j+1}
    + C_n^H z_j (endpoint rows adjusted), conjugated by the quadrature
    weights."""
    grid = h.grid
    n = grid.n_nodes
    w = grid.weights()[:, None]
    E, C_cur, C_next = _cauchy_step_matrices(A.matrix, grid.dt)
    Eh, Ch_cur, Ch_next = E.conj().T, C_cur.conj().T, C_next.conj().T
    u = w * h.values
    z = np.zeros_like(u)
    z[n - 1] = u[n - 1]
    for j in range(n - 2, -1, -1):
        z[j] = u[j] + z[j + 1] @ Eh.T
    y = np.zeros_like(u)
    y[n - 1] = z[n - 1] @ Ch_next.T
    for j in range(1, n - 1):
        y[j] = z[j + 1] @ Ch_cur.T + z[j] @ Ch_next.T
    y[0] = z[1] @ Ch_cur.T  # g_0 feeds only the first step's C_cur
    return GridFunction(grid, y / w)


def time_derivative(f: GridFunction) -> GridFunction:
    """Second-order differences: centered inside, one-sided at the ends."""
    v = f.values
    h = f.grid.dt
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return GridFunction(f.grid, out)


@dataclass
class MaxRegReport:
    """Measured maximal-regularity constants and their provenance."""

    constant_fprime: float
    constant_Af: float
    p: float
    tau: float
    N_t: int
    probe_labels: tuple[str, ...]
    per_probe_fprime: tuple[float, ...]
    per_probe_Af: tuple[float, ...]
    seed: int = ADVERSARIAL_SEED

    def to_dict(self) -> dict:
        return {
            "constant_fprime": self.constant_fprime,
            "constant_Af": self.constant_Af,
            "p": self.p,
            "tau": self.tau,
            "N_t": self.N_t,
            "probe_labels": list(self.probe_labels),
            "per_probe_fprime": list(self.per_probe_fprime),
            "per_probe_Af": list(self.per_probe_Af),
            "seed": self.seed,
        }


def default_probes(A: MatrixOperator, grid: TimeGrid) -> list[tuple[str, GridFunction]]:
    """Constant, single-frequency, and seeded random forcings."""
    t = grid.times()
    n = A.dim
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    rng = np.random.default_rng(ADVERSARIAL_SEED)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    probes = [
        ("constant", GridFunction(grid, np.ones_like(t)[:, None] * e1[None, :])),
        ("sin", GridFunction(grid, np.sin(2 * np.pi * t / grid.tau)[:, None] * e1[None, :])),
        ("random", GridFunction(grid, (np.cos(3 * t) + 0.5)[:, None] * x[None, :])),
    ]
    return probes


def _adversarial_probe(A: MatrixOperator, grid: TimeGrid, mode: str,
                       n_iter: int = 10) -> GridFunction:
    """Power iteration on the (weighted) composition  g -> D f  or
    g -> A f  to seek the worst forcing; fixed seed, fixed count."""
    rng = np.random.default_rng(ADVERSARIAL_SEED)
    v = rng.standard_normal((grid.n_nodes, A.dim)) + 1j * rng.standard_normal(
        (grid.n_nodes, A.dim)
    )
    g = GridFunction(grid, v)
    w = grid.weights()[:, None]

    def forward(u: GridFunction) -> GridFunction:
        f = solve_cauchy(A, u)
        if mode == "fprime":
            return time_derivative(f)
        return f.map_values(lambda vv: vv @ A.matrix.T)

    def backward(u: GridFunction) -> GridFunction:
        if mode == "fprime":
            # adjoint of the difference stencil w.r.t. the weighted product
            D = _derivative_matrix(grid)
            u = GridFunction(grid, (D.T @ (w * u.values)) / w)
        else:
            u = u.map_values(lambda vv: vv @ A.matrix.conj())
        return solve_cauchy_adjoint(A, u)

    for _ in range(n_iter):
        y = forward(g)
        z = backward(y)
        nrm = z.lp_norm(2.0)
        if nrm == 0.0:
            break
        g = GridFunction(grid, z.values / nrm)
    return g


def _derivative_matrix(grid: TimeGrid) -> np.ndarray:
    n = grid.n_nodes
    h = grid.dt
    D = np.zeros((n, n))
    for i in range(1, n - 1):
        D[i, i - 1], D[i, i + 1] = -1.0, 1.0
    D[0, 0:3] = (-3.0, 4.0, -1.0)
    D[-1, -3:] = (1.0, -4.0, 3.0)
    return D / (2.0 * h)


def maxreg_constant(
    A: MatrixOperator,
    grid: TimeGrid,
    probes=None,
    adversarial: bool = True,
) -> MaxRegReport:
    """sup ||f'||_p / ||g||_p and sup ||A f||_p / ||g||_p over the probe
    set (plus a seeded power-iteration worst-case search when p = 2)."""
    probes = list(probes) if probes is not None else default_probes(A, grid)
    if not probes:
        raise ValueError("probe set must be nonempty")
    if adversarial and abs(grid.p - 2.0) < 1e-12:
        probes = probes + [
            ("adversarial-fprime", _adversarial_probe(A, grid, "fprime")),
            ("adversarial-Af", _adversarial_probe(A, grid, "Af")),
        ]
    labels, r_fp, r_af = [], [], []
    for label, g in probes:
        ng = g.lp_norm()
        if ng == 0.0:
            raise ValueError(f"probe {label!r} is zero")
        f = solve_cauchy(A, g)
        fp = time_derivative(f)
        af = f.map_values(lambda vv: vv @ A.matrix.T)
        labels.append(label)
        r_fp.append(fp.lp_norm() / ng)
        r_af.append(af.lp_norm() / ng)
    return MaxRegReport(
        constant_fprime=float(max(r_fp)),
        constant_Af=float(max(r_af)),
        p=grid.p,
        tau=grid.tau,
        N_t=grid.N_t,
        probe_labels=tuple(labels),
        per_probe_fprime=tuple(map(float, r_fp)),
        per_probe_Af=tuple(map(float, r_af)),
    )


def p_independence_probe(
    A: MatrixOperator,
    tau: float,
    N_t: int,
    p_values=(1.5, 2.0, 3.0, 4.0),
) -> dict:
    """maxreg_constant across several p on a shared probe set; reports
    all constants and their spread."""
    for p in p_values:
        if not (1.0 < p < np.inf):
            raise ValueError(f"p must lie in (1, inf), got {p}")
    base_grid = TimeGrid(tau, N_t, p=2.0)
    shared = default_probes(A, base_grid)
    shared = shared + [
        ("adversarial-fprime", _adversarial_probe(A, base_grid, "fprime")),
    ]
    results = {}
    for p in p_values:
        grid = TimeGrid(tau, N_t, p=p)
        probes = [(lbl, GridFunction(grid, g.values)) for lbl, g in shared]
        rep = maxreg_constant(A, grid, probes=probes, adversarial=False)
        results[p] = rep
    consts = [results[p].constant_fprime for p in p_values]
    return {
        "p_values": list(p_values),
        "constants_fprime": [results[p].constant_fprime for p in p_values],
        "constants_Af": [results[p].constant_Af for p in p_values],
        "spread": float(max(consts) / max(min(consts), 1e-300)),
        "reports": results,
    }


class PointwiseOperator:
    """A acting pointwise in time on grid functions: (A f)(t) = A f(t)."""

    def __init__(self, A: MatrixOperator, grid: TimeGrid):
        self.A = A
        self.grid = grid

    def __call__(self, f: GridFunction) -> GridFunction:
        if f.dim != self.A.dim:
            raise DimensionMismatch("grid function dimension mismatch")
        return f.map_values(lambda v: v @ self.A.matrix.T)

    def commutator_with_resolvent(self, lam: complex, f: GridFunction) -> float:
        """|| [A, (B+lam)^{-1}] f ||_p on the grid."""
        a_then_r = deriv_resolvent(lam, self(f))
        r_then_a = self(deriv_resolvent(lam, f))
        return GridFunction(f.grid, a_then_r.values - r_then_a.values).lp_norm()


def extend_operator_to_lp(A: MatrixOperator, grid: TimeGrid) -> PointwiseOperator:
    """The natural extension of A to vector-valued L^p on the grid."""
    return PointwiseOperator(A, grid)
