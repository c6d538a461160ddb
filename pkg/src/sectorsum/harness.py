"""Operator generators, experiment configs, and pipeline runners.

Recipes generate certified test operators deterministically from their
parameters (and a seed where randomness is involved).  Experiments are
JSON configs with a versioned schema and strict key checking: unknown
keys are rejected so archived runs stay auditable.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import calculus, linops, maxreg, sums, tsector
from .errors import ConfigInvalid, InvalidRecipe
from .reports import CertificateReport
from .sector import MatrixOperator, SectorSampling, certify_sector

SCHEMA_VERSION = 1
DEFAULT_SEED = 0xC0FFEE

RECIPE_KINDS = (
    "diag-positive",
    "diag-rotated",
    "jordan",
    "laplacian-1d",
    "commuting-pair",
)


def generate(kind: str, certify_angle: float | None = None, seed: int = DEFAULT_SEED,
             **params) -> MatrixOperator:
    """Deterministic certified operator from a recipe.

    kinds and parameters:
      diag-positive   entries=list | (n=4, spread=10.0)
      diag-rotated    psi=pi/4 plus the diag-positive parameters
      jordan          a=2.0, size=2
      laplacian-1d    m=8  (gives (m+1)^2 tridiag(-1, 2, -1), m x m)
      commuting-pair  role="a"|"b", n=4, spread=4.0 (shared seeded basis)
    """
    rng = np.random.default_rng(seed)
    if kind == "diag-positive":
        entries = params.pop("entries", None)
        n = int(params.pop("n", 4))
        spread = float(params.pop("spread", 10.0))
        _no_extra(kind, params)
        d = np.array(entries, dtype=float) if entries is not None else np.geomspace(
            1.0, spread, n
        )
        if np.any(d <= 0):
            raise InvalidRecipe("diag-positive entries must be positive")
        M = np.diag(d.astype(complex))
        default_angle = 0.9 * np.pi
    elif kind == "diag-rotated":
        psi = float(params.pop("psi", np.pi / 4))
        entries = params.pop("entries", None)
        n = int(params.pop("n", 3))
        _no_extra(kind, params)
        if not (abs(psi) < np.pi):
            raise InvalidRecipe("rotation psi must satisfy |psi| < pi")
        d = np.array(entries, dtype=float) if entries is not None else np.arange(1.0, n + 1.0)
        M = np.diag(np.exp(1j * psi) * d)
        default_angle = 0.95 * (np.pi - abs(psi))
    elif kind == "jordan":
        a = complex(params.pop("a", 2.0))
        size = int(params.pop("size", 2))
        _no_extra(kind, params)
        if size < 1 or a == 0:
            raise InvalidRecipe("jordan needs size >= 1 and a != 0")
        M = a * np.eye(size, dtype=complex) + np.diag(np.ones(size - 1), 1)
        default_angle = 0.75 * np.pi
    elif kind == "laplacian-1d":
        m = int(params.pop("m", 8))
        _no_extra(kind, params)
        if m < 1:
            raise InvalidRecipe("laplacian-1d needs m >= 1")
        M = (m + 1) ** 2 * (
            2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
        ).astype(complex)
        default_angle = 0.9 * np.pi
    elif kind == "commuting-pair":
        role = params.pop("role", "a")
        n = int(params.pop("n", 4))
        spread = float(params.pop("spread", 4.0))
        _no_extra(kind, params)
        Q, _ = np.linalg.qr(
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        )
        da = np.geomspace(1.0, spread, n)
        db = np.geomspace(1.5, 2.0 * spread, n)
        d = da if role == "a" else db
        if role not in ("a", "b"):
            raise InvalidRecipe(f"commuting-pair role must be 'a' or 'b', got {role!r}")
        M = Q @ np.diag(d.astype(complex)) @ Q.conj().T
        default_angle = 0.85 * np.pi
    else:
        raise InvalidRecipe(f"unknown recipe kind {kind!r}")

    op = MatrixOperator(M)
    angle = default_angle if certify_angle is None else certify_angle
    certify_sector(op, angle, SectorSampling(n_boundary=48, interior_density=12))
    return op


def _no_extra(kind, params):
    if params:
        raise InvalidRecipe(f"unknown parameters for {kind}: {sorted(params)}")


def laplacian_eigenvalues(m: int) -> np.ndarray:
    """Closed-form Dirichlet eigenvalues 4 (m+1)^2 sin^2(k pi / (2(m+1)))."""
    k = np.arange(1, m + 1)
    return 4.0 * (m + 1) ** 2 * np.sin(k * np.pi / (2.0 * (m + 1))) ** 2


# ----------------------------------------------------------------- configs

_PIPELINES = ("certify", "power", "hinf", "sum", "t-sector", "maxreg", "sweep")

_COMMON_KEYS = {"schema_version", "pipeline", "seed", "out_prefix"}
_PIPELINE_KEYS = {
    "certify": {"matrix", "recipe", "theta", "sampling"},
    "power": {"matrix", "recipe", "re", "im"},
    "hinf": {"matrix", "recipe", "symbol", "theta"},
    "sum": {"matrix_a", "matrix_b", "recipe_a", "recipe_b", "theta_a", "theta_b",
            "check_identities", "certify"},
    "t-sector": {"matrix", "recipe", "phi", "r", "p", "n", "family", "N_t"},
    "maxreg": {"matrix", "recipe", "tau", "p", "nt", "sweep_p", "refine"},
    "sweep": {"kind", "sizes", "tau", "p", "nt"},
}

_REQUIRED_KEYS = {
    "certify": ({"theta"}, ({"matrix", "recipe"},)),
    "power": (set(), ({"matrix", "recipe"},)),
    "hinf": ({"symbol"}, ({"matrix", "recipe"},)),
    "sum": (set(), ({"matrix_a", "recipe_a"}, {"matrix_b", "recipe_b"})),
    "t-sector": (set(), ({"matrix", "recipe"},)),
    "maxreg": (set(), ({"matrix", "recipe"},)),
    "sweep": (set(), ()),
}


def validate_config(cfg: dict) -> dict:
    """Strict schema check; unknown fields rejected, required ones enforced."""
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigInvalid(
            f"schema_version must be {SCHEMA_VERSION}, got {cfg.get('schema_version')!r}"
        )
    pipeline = cfg.get("pipeline")
    if pipeline not in _PIPELINES:
        raise ConfigInvalid(f"pipeline must be one of {_PIPELINES}, got {pipeline!r}")
    allowed = _COMMON_KEYS | _PIPELINE_KEYS[pipeline]
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigInvalid(f"unknown config fields: {sorted(unknown)}")
    required, one_of_groups = _REQUIRED_KEYS[pipeline]
    missing = required - set(cfg)
    if missing:
        raise ConfigInvalid(f"missing required fields: {sorted(missing)}")
    for group in one_of_groups:
        if not group & set(cfg):
            raise ConfigInvalid(f"config needs one of {sorted(group)}")
    return cfg


def _load_operator(cfg: dict, key_matrix="matrix", key_recipe="recipe",
                   theta=None, seed=DEFAULT_SEED) -> MatrixOperator:
    if key_matrix in cfg:
        op = MatrixOperator(linops.read_matrix(cfg[key_matrix]))
        certify_sector(op, theta if theta is not None else 0.75 * np.pi)
        return op
    if key_recipe in cfg:
        r = dict(cfg[key_recipe])
        kind = r.pop("kind", None)
        if kind is None:
            raise ConfigInvalid(f"recipe under {key_recipe!r} needs a 'kind'")
        return generate(kind, certify_angle=theta, seed=seed, **r)
    raise ConfigInvalid(f"config needs either {key_matrix!r} or {key_recipe!r}")


def run_experiment(config_path: str, out_dir: str = ".") -> tuple[list[str], bool]:
    """Execute a config; write report JSON (and CSV for sweeps).

    Returns (written paths, all passed).  Config errors raise
    ConfigInvalid; numerical failures surface as passed=False.
    """
    try:
        with open(config_path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {config_path}: {exc}") from exc
    cfg = validate_config(cfg)
    seed = int(cfg.get("seed", DEFAULT_SEED))
    prefix = cfg.get("out_prefix", cfg["pipeline"])
    os.makedirs(out_dir, exist_ok=True)
    paths: list[str] = []

    pipeline = cfg["pipeline"]
    if pipeline == "certify":
        theta = float(cfg["theta"])
        sampling = SectorSampling(**cfg.get("sampling", {}))
        op = _load_operator(cfg, theta=theta, seed=seed)
        k_hat = certify_sector(op, theta, sampling)
        report = CertificateReport(
            operation="certify-sector",
            inputs={"theta": theta, "sampling": sampling.to_dict(), "seed": seed,
                    "dim": op.dim},
            tolerances={},
            node_counts={"samples": len(sampling.points(theta))},
            outputs={"K_hat": k_hat},
            passed=True,
        )
    elif pipeline == "power":
        op = _load_operator(cfg, seed=seed)
        z = complex(float(cfg.get("re", -0.5)), float(cfg.get("im", 0.0)))
        value, info = calculus.complex_power(op, z, with_info=True)
        report = CertificateReport(
            operation="complex-power",
            inputs={"z": z, "dim": op.dim, "seed": seed},
            tolerances={"tail": 1e-9},
            node_counts={"contour": info.n_nodes if info else 0},
            outputs={
                "norm": linops.operator_norm(value),
                "tail_estimate": info.tail_estimate if info else 0.0,
            },
            passed=True,
        )
    elif pipeline == "hinf":
        theta = float(cfg.get("theta", np.pi / 2))
        op = _load_operator(cfg, theta=min(0.95 * np.pi, theta + 0.3), seed=seed)
        registry = calculus.builtin_symbols(theta)
        name = cfg.get("symbol", "cayley-squared")
        if name not in registry:
            raise ConfigInvalid(f"unknown symbol {name!r}; builtins: {sorted(registry)}")
        sym = registry[name]
        value = calculus.hinf_apply(sym, op)
        report = CertificateReport(
            operation="hinf-apply",
            inputs={"symbol": name, "theta": theta, "dim": op.dim, "seed": seed},
            tolerances={"tail": 1e-9},
            node_counts={},
            outputs={"norm": linops.operator_norm(value)},
            passed=True,
        )
    elif pipeline == "sum":
        theta_a = cfg.get("theta_a")
        theta_b = cfg.get("theta_b")
        A = _load_operator(cfg, "matrix_a", "recipe_a",
                           theta=float(theta_a) if theta_a else None, seed=seed)
        B = _load_operator(cfg, "matrix_b", "recipe_b",
                           theta=float(theta_b) if theta_b else None, seed=seed + 1)
        pair = sums.CommutingPair(A, B)
        K = sums.sum_inverse(pair)
        direct = np.linalg.inv(A.matrix + B.matrix)
        err = linops.operator_norm(K - direct) / max(linops.operator_norm(direct), 1e-300)
        outputs = {"relative_error_vs_direct": err}
        passed = err <= 1e-6
        if cfg.get("check_identities"):
            wre, wim = cfg["check_identities"]
            _, _, dl = sums.weighted_identity_left(pair, complex(wre, wim))
            _, _, dr = sums.weighted_identity_right(pair, complex(wre, wim))
            outputs["identity_left_diff"] = dl
            outputs["identity_right_diff"] = dr
            passed = passed and dl <= 1e-6 and dr <= 1e-6
        if cfg.get("certify"):
            cert = sums.closedness_certificate(pair)
            outputs["C_AB"] = cert.C_AB
            outputs["residual_K"] = cert.residual_K
            outputs["theta_values"] = list(cert.theta_values)
        report = CertificateReport(
            operation="sum-inverse",
            inputs={"dim": pair.dim, "theta_a": A.angle(), "theta_b": B.angle(),
                    "seed": seed},
            tolerances={"relative": 1e-6},
            node_counts={},
            outputs=outputs,
            passed=bool(passed),
        )
    elif pipeline == "t-sector":
        op = _load_operator(cfg, seed=seed)
        phi = float(cfg.get("phi", 0.0))
        r = float(cfg.get("r", 1.0))
        p = float(cfg.get("p", 2.0))
        n = int(cfg.get("n", 1))
        N_t = int(cfg.get("N_t", 256))
        rng = np.random.default_rng(seed)
        xs = [rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
              for _ in range(n + 1)]
        fam = tsector.MultiplierFamily(kind=cfg.get("family", "pure-harmonics"))
        rep = tsector.witness_search(op, phi, r, xs, p, fam, N_t)
        report = CertificateReport(
            operation="t-sector",
            inputs={"phi": phi, "r": r, "p": p, "n": n, "N_t": N_t,
                    "family": fam.kind, "dim": op.dim, "seed": seed},
            tolerances={},
            node_counts={"N_t": N_t},
            outputs=rep.to_dict(),
            passed=True,
        )
    elif pipeline == "maxreg":
        op = _load_operator(cfg, seed=seed)
        tau = float(cfg.get("tau", 1.0))
        p = float(cfg.get("p", 2.0))
        nt = int(cfg.get("nt", 512))
        grid = maxreg.TimeGrid(tau, nt, p=p)
        rep = maxreg.maxreg_constant(op, grid)
        outputs = rep.to_dict()
        if cfg.get("sweep_p"):
            sweep = maxreg.p_independence_probe(op, tau, nt)
            outputs["p_sweep"] = {
                "p_values": sweep["p_values"],
                "constants_fprime": sweep["constants_fprime"],
                "spread": sweep["spread"],
            }
        if cfg.get("refine"):
            fine = maxreg.maxreg_constant(op, maxreg.TimeGrid(tau, 2 * nt, p=p))
            outputs["refined_constant_fprime"] = fine.constant_fprime
            csv_path = os.path.join(out_dir, f"{prefix}.csv")
            with open(csv_path, "w") as fh:
                fh.write("N_t,constant_fprime,constant_Af\n")
                for N, r in ((nt, rep), (2 * nt, fine)):
                    fh.write(f"{N},{format(r.constant_fprime, '.17g')},"
                             f"{format(r.constant_Af, '.17g')}\n")
            paths.append(csv_path)
        report = CertificateReport(
            operation="maxreg",
            inputs={"tau": tau, "p": p, "nt": nt, "dim": op.dim, "seed": seed},
            tolerances={},
            node_counts={"N_t": nt},
            outputs=outputs,
            passed=True,
        )
    else:  # sweep
        kind = cfg.get("kind", "maxreg-laplacian")
        if kind != "maxreg-laplacian":
            raise ConfigInvalid(f"unknown sweep kind {kind!r}")
        sizes = [int(s) for s in cfg.get("sizes", [8, 16, 32])]
        tau = float(cfg.get("tau", 1.0))
        p = float(cfg.get("p", 2.0))
        nt = int(cfg.get("nt", 256))
        rows = []
        for m in sizes:
            op = generate("laplacian-1d", m=m, seed=seed)
            rep = maxreg.maxreg_constant(op, maxreg.TimeGrid(tau, nt, p=p))
            rows.append((m, rep.constant_fprime, rep.constant_Af))
        csv_path = os.path.join(out_dir, f"{prefix}.csv")
        with open(csv_path, "w") as fh:
            fh.write("m,constant_fprime,constant_Af\n")
            for m, cf, ca in rows:
                fh.write(f"{m},{format(cf, '.17g')},{format(ca, '.17g')}\n")
        paths.append(csv_path)
        report = CertificateReport(
            operation="maxreg-sweep",
            inputs={"sizes": sizes, "tau": tau, "p": p, "nt": nt, "seed": seed},
            tolerances={},
            node_counts={"N_t": nt},
            outputs={"constants_fprime": [r[1] for r in rows],
                     "constants_Af": [r[2] for r in rows]},
            passed=True,
        )

    json_path = os.path.join(out_dir, f"{prefix}.json")
    report.save(json_path)
    paths.insert(0, json_path)
    return paths, report.passed
