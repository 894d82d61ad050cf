"""Command-line verification reports.

Exit status is 0 when every check passes, 1 when a mathematical check fails,
and 2 when the run never reached the mathematics (bad flags, unreadable or
invalid state files).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import correlations as corr
from . import linop, theorem
from .linop import Matrix, Vector
from .scalar import EXACT, FLOAT, ExactScalar, get_backend, parse_exact
from .spin import TWO_SPINS, Direction, singlet, singlet_projector, two_spins

SCHEMA_VERSION = 1
SEED_ENV = "TWINSPIN_SEED"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    backend: str = "exact"
    tol: float = linop.DEFAULT_TOL
    n_random_directions: int = 50
    seed: int = 0
    format: str = "text"
    input_state_path: Optional[str] = None
    count: int = 100_000
    third_yes_prob: Optional[float] = None

    def __post_init__(self):
        if self.backend not in ("exact", "float"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ConfigError("--tol must be a positive finite number")
        if self.n_random_directions < 0:
            raise ConfigError("--directions must be >= 0")
        if self.format not in ("json", "text"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.third_yes_prob is not None and not 0 <= self.third_yes_prob <= 1:
            raise ConfigError("--third-yes-prob must lie in [0, 1]")

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def direction_set(self, with_certifying: bool = False) -> theorem.DirectionSet:
        """Exact: the certifying set.  Float: seeded random directions, optionally after the certifying set."""
        if self.backend == "exact":
            return theorem.certifying_set(EXACT)
        if self.n_random_directions == 0:
            return theorem.certifying_set(FLOAT)
        random = theorem.random_set(self.n_random_directions, self.rng)
        return theorem.certifying_set(FLOAT) + random if with_certifying else random


# ---- output -----------------------------------------------------------------

def _encode(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite float in report")
        return "%.17g" % value
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        items = sorted((str(k), v) for k, v in value.items())
        return "{" + ",".join(json.dumps(k, ensure_ascii=False) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in value) + "]"
    raise TypeError(f"cannot encode {type(value).__name__}")


def dumps_canonical(obj) -> str:
    """JSON with sorted keys, no whitespace, and floats written with 17 significant digits."""
    return _encode(obj)


def _text(obj, indent: int = 0) -> list:
    pad = "  " * indent
    lines = []
    for key in sorted(obj, key=str):
        value = obj[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_text(value, indent + 1))
        elif isinstance(value, float):
            lines.append(f"{pad}{key}: {value!r}")
        else:
            lines.append(f"{pad}{key}: {json.dumps(value, ensure_ascii=False) if not isinstance(value, str) else value}")
    return lines


def emit(report: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(dumps_canonical(report) + "\n")
    else:
        out.write("\n".join(_text(report)) + "\n")


def _scalar_out(x):
    """Scalars for reports: exact values as strings, floats as numbers."""
    if isinstance(x, ExactScalar):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _direction_out(n: Direction) -> list:
    return [_scalar_out(c) for c in n.components]


def _envelope(command: str, config: RunConfig, body: dict, passed: bool) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": {
            "backend": config.backend,
            "tol": config.tol,
            "directions": config.n_random_directions,
            "seed": config.seed,
        },
        **body,
        "verdict": "pass" if passed else "fail",
    }


# ---- commands -----------------------------------------------------------------

def _fixed_third_state(backend) -> corr.DensityMatrix:
    if backend.exact:
        rows = [[Fraction(1, 2), Fraction(1, 6), 0], [Fraction(1, 6), Fraction(1, 3), 0], [0, 0, Fraction(1, 6)]]
        return corr.DensityMatrix(Matrix(rows, backend=EXACT))
    return random_density(3, np.random.default_rng(12345))


def random_density(dim: int, rng: np.random.Generator) -> corr.DensityMatrix:
    """Full-rank random state ``G G^dagger / Tr`` from a complex Gaussian ``G``."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return corr.DensityMatrix(Matrix(m / np.trace(m).real))


def correlation_suite(config: RunConfig) -> tuple:
    backend = get_backend(config.backend)
    threshold = 0.0 if backend.exact else config.tol
    n = theorem.certifying_set(backend)[5] if backend.exact else Direction.random(config.rng)
    n0 = theorem.certifying_set(backend)[2]
    twins = corr.DensityMatrix(singlet_projector(backend), validate=False)
    rho_c = _fixed_third_state(backend)
    rho = corr.product_state(twins, rho_c)

    gap = corr.factorization_gap(rho)
    dist = corr.joint_spin_zero_distribution(rho, [n, n, n0])
    indep = dist.independence_gap([0, 1], [2])
    pair = corr.joint_spin_zero_distribution(twins, [n, n])
    bound = corr.max_agreement_probability(n0, backend)
    pair_f = pair.as_floats()
    bound_f = bound.value.to_float().real if isinstance(bound.value, ExactScalar) else bound.value
    p_yes = corr.joint_spin_zero_distribution(twins, [n, None])["y"]

    if backend.exact:
        pair_ok = pair["yy"] == Fraction(1, 3) and pair["nn"] == Fraction(2, 3) and pair.discord() == 0
        bound_ok = bound.value == Fraction(2, 3)
        p_yes_ok = p_yes == Fraction(1, 3)
    else:
        pair_ok = (abs(pair_f["yy"] - 1 / 3) <= config.tol and abs(pair_f["nn"] - 2 / 3) <= config.tol
                   and abs(pair_f["yn"]) + abs(pair_f["ny"]) <= config.tol)
        bound_ok = abs(bound_f - 2 / 3) <= config.tol
        p_yes_ok = abs(p_yes - 1 / 3) <= config.tol
    checks = {
        "factorization_gap": gap <= threshold,
        "independence_gap": indep <= threshold,
        "twin_statistics": pair_ok,
        "single_spin_yes": p_yes_ok,
        "agreement_bound": bound_ok and not bound.cloning_feasible,
    }
    body = {
        "factorization_gap": gap,
        "independence_gap": indep,
        "twin_distribution": {k: _scalar_out(v) for k, v in pair.outcomes.items()},
        "single_spin_yes": _scalar_out(p_yes),
        "max_agreement_probability": _scalar_out(bound.value),
        "agreement_argmax": bound.argmax,
        "cloning_feasible": bound.cloning_feasible,
        "failing_checks": sorted(k for k, ok in checks.items() if not ok),
    }
    return body, all(checks.values())


def cmd_verify(config: RunConfig) -> tuple:
    backend = get_backend(config.backend)
    dirs = config.direction_set()
    report = theorem.verify_strong_theorem(dirs, config.tol, backend)
    corr_body, corr_ok = correlation_suite(config)
    passed = report.passed and corr_ok
    return _envelope("verify", config, {"theorem": report.to_dict(), "correlations": corr_body}, passed), passed


def _parse_entry(raw, backend):
    if isinstance(raw, list):
        if len(raw) != 2:
            raise ConfigError(f"complex entries are [re, im] pairs, got {raw!r}")
        re_, im_ = (_parse_entry(v, backend) for v in raw)
        return re_ + im_ * backend.i
    if isinstance(raw, str):
        try:
            value = parse_exact(raw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return value if backend.exact else value.to_float()
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"bad state entry {raw!r}")
    if backend.exact:
        if isinstance(raw, float):
            raise ConfigError("the exact backend needs integer or string entries, got a float")
        return backend.scalar(raw)
    return complex(raw)


def load_state(path: str, backend) -> corr.DensityMatrix:
    """Read a 9-entry state vector or 9x9 density matrix from a JSON file."""
    backend = get_backend(backend)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read state file {path}: {exc}") from None
    if not isinstance(data, list) or len(data) != 9:
        raise ConfigError("state must be a list of 9 entries or a 9x9 nested list")
    is_matrix = all(isinstance(r, list) and len(r) == 9 for r in data)
    try:
        if is_matrix:
            rows = [[_parse_entry(v, backend) for v in row] for row in data]
            arr = backend.zeros((9, 9))
            for i, row in enumerate(rows):
                for j, v in enumerate(row):
                    arr[i, j] = v
            return corr.DensityMatrix(Matrix(arr, shape=TWO_SPINS, backend=backend), tol=corr.PSD_TOL)
        amps = backend.zeros(9)
        for k, v in enumerate(data):
            amps[k] = _parse_entry(v, backend)
        return corr.DensityMatrix.from_vector(Vector(amps, shape=TWO_SPINS, backend=backend))
    except corr.InvalidStateError as exc:
        raise ConfigError(f"invalid state: {exc}") from None


def cmd_twin_test(config: RunConfig) -> tuple:
    if not config.input_state_path:
        raise ConfigError("twin-test needs --state PATH")
    backend = get_backend(config.backend)
    rho = load_state(config.input_state_path, backend)
    dirs = config.direction_set(with_certifying=True)
    verdict = theorem.classify_twin_state(rho, dirs, config.tol)
    body = {
        "classification": verdict.label,
        "max_functional": verdict.max_functional,
        "n_directions": len(dirs),
    }
    if verdict.twinned:
        body["singlet_gap"] = verdict.singlet_gap
        body["conclusion_holds"] = verdict.conclusion_holds
        passed = bool(verdict.conclusion_holds)
    else:
        body["witness_direction"] = _direction_out(verdict.witness)
        passed = True
    return _envelope("twin-test", config, body, passed), passed


def cmd_spectrum(config: RunConfig) -> tuple:
    backend = get_backend(config.backend)
    spectral, gap = theorem.ls_spectrum(backend, config.tol)
    dims = theorem.subspace_dims(backend)
    threshold = 0.0 if backend.exact else config.tol
    expected = [(-2, 1), (-1, 3), (1, 5)]
    mults_ok = [m for _, m in spectral] == [m for _, m in expected] and len(spectral) == 3
    passed = gap <= threshold and mults_ok and dims == {2: 5, 1: 3, 0: 1}
    body = {
        "spectrum": [{"eigenvalue": int(v) if backend.exact else v, "multiplicity": m}
                     for v, m in sorted(spectral, reverse=True)],
        "eigenvalue_gap": gap,
        "subspace_dims": {f"j={j}": d for j, d in dims.items()},
    }
    return _envelope("spectrum", config, body, passed), passed


def _aligned(k: Vector) -> Vector:
    """Kernel vector with its phase fixed by the singlet representative."""
    phi = singlet(k.backend)
    ov = phi.inner(k)
    if k.exact:
        return k * (phi.norm_squared() / ov) if ov else k
    if abs(ov) == 0:
        return k
    return k * (abs(ov) / ov)


def cmd_kernel(config: RunConfig) -> tuple:
    backend = get_backend(config.backend)
    dirs = config.direction_set()
    basis = theorem.joint_kernel(dirs, config.tol, backend)
    overlap = theorem.singlet_overlap(basis) if basis else 0.0
    overlap_f = overlap.to_float().real if isinstance(overlap, ExactScalar) else overlap
    if len(basis) == 1:
        basis = [_aligned(basis[0])]
    threshold = 0.0 if backend.exact else config.tol
    passed = len(basis) == 1 and overlap_f >= 1 - threshold
    body = {
        "dimension": len(basis),
        "basis": [[_scalar_out(v if backend.exact else complex(v)) for v in b.entries] for b in basis],
        "normalized": not backend.exact,
        "singlet_overlap": overlap_f,
        "n_directions": len(dirs),
    }
    return _envelope("kernel", config, body, passed), passed


def cmd_identities(config: RunConfig) -> tuple:
    backend = get_backend(config.backend)
    threshold = 0.0 if backend.exact else config.tol
    phi = singlet(backend)
    anti = {f"{'xyz'[i]}{'xyz'[j]}": theorem.residual_vec_norm(theorem.anticommutator_residual(phi, i, j))
           for i, j in theorem.AXIS_PAIRS}
    L, S = two_spins(backend)
    two = linop.identity(TWO_SPINS, backend) * backend.scalar(2)
    casimir = {"L^2-2I": linop.residual_norm(L.casimir() - two),
           "S^2-2I": linop.residual_norm(S.casimir() - two)}
    comm = theorem.commutator_residuals(backend)
    lhs, rhs = theorem.contraction_identity_check(backend)
    contraction = {"sum_LiLj{Si,Sj}-(2(L.S)^2+L.S)": lhs, "sum_LiLj{Li,Lj}-6I": rhs}
    tables = {"anticommutators_on_singlet": anti, "casimir": casimir,
              "commutators": comm, "contraction": contraction}
    passed = all(v <= threshold for table in tables.values() for v in table.values())
    return _envelope("identities", config, {"residuals": tables}, passed), passed


def cmd_simulate(config: RunConfig) -> tuple:
    if config.count < 1:
        raise ConfigError("--count must be >= 1")
    backend = get_backend(config.backend)
    n = theorem.certifying_set(backend)[5] if backend.exact else Direction.random(config.rng)
    twins = corr.DensityMatrix(singlet_projector(backend), validate=False)
    if config.third_yes_prob is None:
        rho, dirs = twins, [n, n]
    else:
        p = config.third_yes_prob
        # m = 0 with probability p, m = +1 otherwise, measured along z
        if backend.exact:
            p_exact = Fraction(str(p))
            third = linop.diag([1 - p_exact, p_exact, 0], backend=EXACT)
        else:
            third = linop.diag([1 - p, p, 0])
        rho = corr.product_state(twins, corr.DensityMatrix(third, validate=False))
        dirs = [n, n, theorem.certifying_set(backend)[2]]
    stats = corr.sample_outcomes(rho, dirs, config.count, config.seed)
    table = {}
    ok = True
    for key in sorted(stats.counts):
        p = stats.probabilities[key]
        freq = stats.frequency(key)
        sigma = math.sqrt(p * (1 - p) / stats.total)
        table[key] = {"expected": p, "observed": freq, "count": stats.counts[key]}
        ok = ok and abs(freq - p) <= 5 * sigma + 1 / stats.total
    twin_discord = sum(c for k, c in stats.counts.items() if k[0] != k[1])
    body = {
        "direction": list(n.as_floats()),
        "total": stats.total,
        "seed": stats.seed,
        "twin_discord_count": twin_discord,
        "outcomes": table,
    }
    return _envelope("simulate", config, body, ok and twin_discord == 0), ok and twin_discord == 0


COMMANDS = {
    "verify": cmd_verify,
    "twin-test": cmd_twin_test,
    "spectrum": cmd_spectrum,
    "kernel": cmd_kernel,
    "identities": cmd_identities,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinspin",
        description="Verify that twinned spin-1 pairs must be in the singlet state.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=("exact", "float"), default="exact")
    common.add_argument("--tol", type=float, default=linop.DEFAULT_TOL)
    common.add_argument("--directions", type=int, default=50,
                        help="random directions for the float backend (0: use the certifying set)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (falls back to ${SEED_ENV}, then 0)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run every check")
    tt = sub.add_parser("twin-test", parents=[common], help="classify a state from a JSON file")
    tt.add_argument("--state", required=True, help="JSON file with a 9-vector or 9x9 matrix")
    sub.add_parser("spectrum", parents=[common], help="L.S spectrum and subspace dimensions")
    sub.add_parser("kernel", parents=[common], help="joint kernel of the defect operators")
    sub.add_parser("identities", parents=[common], help="operator identity residuals")
    sim = sub.add_parser("simulate", parents=[common], help="sample spin-zero outcomes")
    sim.add_argument("--count", type=int, default=100_000)
    sim.add_argument("--third-yes-prob", type=float, default=None,
                     help="add a third spin answering yes with this probability")
    return parser


def _resolve_seed(arg: Optional[int]) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"${SEED_ENV} must be an integer, got {env!r}") from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        config = RunConfig(
            backend=args.backend,
            tol=args.tol,
            n_random_directions=args.directions,
            seed=_resolve_seed(args.seed),
            format=args.format,
            input_state_path=getattr(args, "state", None),
            count=getattr(args, "count", 100_000),
            third_yes_prob=getattr(args, "third_yes_prob", None),
        )
        report, passed = COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"twinspin: error: {exc}", file=sys.stderr)
        return 2
    emit(report, config.format)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
