"""Config-driven experiment pipeline: build hosts and watermark strategies,
attack them, and tabulate analytic and Monte Carlo results as CSV."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from .attack import solve_attack, watermark_wiener
from .core import (
    CovarianceMatrix,
    ar1_autocorr,
    average_power,
    load_covariance_csv,
    make_covariance,
    modulate,
    sample_ensemble,
    toeplitz_from_autocorr,
)
from .errors import ConfigError, InvalidParamError

CSV_HEADER = "strategy,r0,gamma,E,D,E_mc,D_mc,r_mc,se_E,se_D,se_r"

_HOST_KINDS = ("ar1", "ar1_modulated", "file")
_KNOWN_KEYS = (
    "host",
    "n",
    "pw",
    "strategies",
    "r_targets",
    "monte_carlo_m",
    "seed",
    "sigma2",
    "rho",
    "envelope",
    "host_file",
)

__all__ = [
    "ExperimentConfig",
    "ExperimentRow",
    "parse_config_text",
    "load_config",
    "build_host_covariance",
    "build_strategy_covariance",
    "gamma_residual_energy",
    "run_experiment",
    "emit_csv",
    "CSV_HEADER",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a host model, watermark strategies, and attack targets.

    ``monte_carlo_m = 0`` runs the analytic pipeline only. ``sigma2``,
    ``rho`` apply to the ar1 host kinds, ``envelope`` to ar1_modulated,
    ``host_file`` to the file kind.
    """

    host: str
    n: int
    p_w: float
    strategies: tuple[str, ...]
    r_targets: tuple[float, ...]
    monte_carlo_m: int = 0
    seed: int = 0
    sigma2: float = 1.0
    rho: float = 0.0
    envelope: str | None = None
    host_file: str | None = None

    def __post_init__(self) -> None:
        if self.host not in _HOST_KINDS:
            raise ConfigError(f"unknown host kind {self.host!r}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.p_w <= 0.0:
            raise ConfigError(f"pw must be positive, got {self.p_w}")
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        for strategy in self.strategies:
            _parse_strategy(strategy)
        if not self.r_targets:
            raise ConfigError("at least one r_target is required")
        if self.monte_carlo_m < 0:
            raise ConfigError(f"monte_carlo_m must be >= 0, got {self.monte_carlo_m}")
        if self.host == "ar1_modulated" and self.envelope is None:
            raise ConfigError("ar1_modulated host requires an envelope")
        if self.host == "file" and not self.host_file:
            raise ConfigError("file host requires host_file")


@dataclass(frozen=True)
class ExperimentRow:
    """Analytic metrics for one (strategy, r_target) cell, plus Monte Carlo
    estimates and their standard errors when sampling is enabled."""

    strategy: str
    r0: float
    gamma: float
    energy: float
    distortion: float
    e_mc: float | None = None
    d_mc: float | None = None
    r_mc: float | None = None
    se_e: float | None = None
    se_d: float | None = None
    se_r: float | None = None


def _parse_strategy(spec: str) -> tuple[str, float | None]:
    if spec == "white" or spec == "matched":
        return spec, None
    if spec.startswith("mismatched_ar1:"):
        try:
            rho = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad mismatched_ar1 parameter in {spec!r}") from exc
        if abs(rho) >= 1.0:
            raise ConfigError(f"mismatched_ar1 needs |rho| < 1, got {rho}")
        return "mismatched_ar1", rho
    raise ConfigError(f"unknown strategy {spec!r}")


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the plain-text key-value experiment format.

    One ``key = value`` pair per line; blank lines and ``#`` comments are
    ignored. Lists are comma-separated. See ExperimentConfig for the keys.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    for required in ("host", "n", "pw", "strategies", "r_targets"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")

    def as_int(key: str, default: int | None = None) -> int:
        if key not in raw:
            assert default is not None
            return default
        try:
            return int(raw[key])
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: expected integer, got {raw[key]!r}") from exc

    def as_float(key: str, default: float | None = None) -> float:
        if key not in raw:
            assert default is not None
            return default
        try:
            return float(raw[key])
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: expected number, got {raw[key]!r}") from exc

    try:
        r_targets = tuple(float(tok) for tok in raw["r_targets"].split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"key 'r_targets': expected numbers, got {raw['r_targets']!r}") from exc

    return ExperimentConfig(
        host=raw["host"],
        n=as_int("n"),
        p_w=as_float("pw"),
        strategies=tuple(tok.strip() for tok in raw["strategies"].split(",") if tok.strip()),
        r_targets=r_targets,
        monte_carlo_m=as_int("monte_carlo_m", 0),
        seed=as_int("seed", 0),
        sigma2=as_float("sigma2", 1.0),
        rho=as_float("rho", 0.0),
        envelope=raw.get("envelope"),
        host_file=raw.get("host_file"),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_config_text(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _parse_envelope(spec: str, n: int) -> np.ndarray:
    if spec.startswith("linear:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"envelope {spec!r}: expected linear:<lo>:<hi>")
        try:
            lo, hi = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ConfigError(f"envelope {spec!r}: expected numbers") from exc
        env = np.linspace(lo, hi, n)
    else:
        try:
            env = np.array([float(tok) for tok in spec.split(",")], dtype=np.float64)
        except ValueError as exc:
            raise ConfigError(f"envelope {spec!r}: expected comma-separated numbers") from exc
        if env.size != n:
            raise ConfigError(f"envelope has {env.size} entries, host needs {n}")
    if np.any(env <= 0.0):
        raise ConfigError("envelope entries must be positive")
    return env


def build_host_covariance(config: ExperimentConfig) -> CovarianceMatrix:
    """Materialize the configured host covariance."""
    if config.host == "ar1":
        return toeplitz_from_autocorr(ar1_autocorr(config.sigma2, config.rho, config.n))
    if config.host == "ar1_modulated":
        base = toeplitz_from_autocorr(ar1_autocorr(config.sigma2, config.rho, config.n))
        assert config.envelope is not None
        return modulate(base, _parse_envelope(config.envelope, config.n))
    assert config.host_file is not None
    try:
        host = load_covariance_csv(config.host_file)
    except OSError as exc:
        raise ConfigError(f"cannot read host file {config.host_file}: {exc}") from exc
    if host.dim != config.n:
        raise ConfigError(f"host file is {host.dim}x{host.dim}, config says n = {config.n}")
    return host


def build_strategy_covariance(
    strategy: str, c_host: CovarianceMatrix, p_w: float
) -> CovarianceMatrix:
    """Watermark covariance for a strategy, rescaled to trace N * p_w exactly.

    white is p_w * I, matched is the host-proportional optimum, and
    mismatched_ar1:<rho> is a stationary AR(1) shape regardless of the host.
    """
    if p_w <= 0.0:
        raise InvalidParamError(f"watermark power must be positive, got {p_w}")
    kind, rho = _parse_strategy(strategy)
    n = c_host.dim
    if kind == "white":
        entries = p_w * np.eye(n)
    elif kind == "matched":
        entries = (p_w / average_power(c_host)) * c_host.entries
    else:
        assert rho is not None
        entries = toeplitz_from_autocorr(ar1_autocorr(1.0, rho, n)).entries.copy()
    entries = entries * (n * p_w / float(np.trace(entries)))
    return make_covariance(entries)


def gamma_residual_energy(
    c_host: CovarianceMatrix, c_w: CovarianceMatrix, gamma: float
) -> float:
    """Residual watermark energy (1/N) E||w - gamma H y||^2 for any gamma.

    Extension of the removal-case formula to arbitrary attack strength:
    (1/N) [tr(C_w) - 2 gamma tr(H C_w) + gamma^2 tr(C_what)]; at gamma = 1
    it reduces to the removal-attack residual energy.
    """
    h = watermark_wiener(c_host, c_w).entries
    cw = c_w.entries
    cross = float(np.trace(h @ cw))
    what = float(np.trace(h @ c_host.entries @ h.T + h @ cw @ h.T))
    return (float(np.trace(cw)) - 2.0 * gamma * cross + gamma**2 * what) / c_host.dim


def run_experiment(config: ExperimentConfig) -> list[ExperimentRow]:
    """Attack every configured strategy at every correlation target.

    Rows come back in (strategy order, r_target order). Monte Carlo cells
    draw host and watermark ensembles from per-cell substreams of the
    config seed, so results do not depend on evaluation order.
    """
    c_host = build_host_covariance(config)
    rows: list[ExperimentRow] = []
    for strategy_index, strategy in enumerate(config.strategies):
        c_w = build_strategy_covariance(strategy, c_host, config.p_w)
        h = watermark_wiener(c_host, c_w).entries
        for target_index, r0 in enumerate(config.r_targets):
            solution = solve_attack(c_host, c_w, r0)
            gamma = solution.gamma
            row = ExperimentRow(
                strategy=strategy,
                r0=r0,
                gamma=gamma,
                energy=gamma_residual_energy(c_host, c_w, gamma),
                distortion=solution.distortion,
            )
            if config.monte_carlo_m > 0:
                cell = strategy_index * len(config.r_targets) + target_index
                m = config.monte_carlo_m
                x = sample_ensemble(c_host, m, config.seed, stream=2 * cell).data
                w = sample_ensemble(c_w, m, config.seed, stream=2 * cell + 1).data
                y = x + w
                hy = y @ h.T
                y_attacked = y - gamma * hy
                n = config.n
                e_terms = np.sum((w - gamma * hy) ** 2, axis=1) / n
                d_terms = np.sum((y_attacked - x) ** 2, axis=1) / n
                r_terms = np.sum(y_attacked * w, axis=1) / n
                scale = float(np.sqrt(m))
                row = ExperimentRow(
                    strategy=strategy,
                    r0=r0,
                    gamma=gamma,
                    energy=row.energy,
                    distortion=row.distortion,
                    e_mc=float(np.mean(e_terms)),
                    d_mc=float(np.mean(d_terms)),
                    r_mc=float(np.mean(r_terms)),
                    se_e=float(np.std(e_terms, ddof=1)) / scale,
                    se_d=float(np.std(d_terms, ddof=1)) / scale,
                    se_r=float(np.std(r_terms, ddof=1)) / scale,
                )
            rows.append(row)
    return rows


def _format_field(value: float | None) -> str:
    return "" if value is None else f"{value:.17g}"


def emit_csv(rows: list[ExperimentRow], destination) -> None:
    """Write rows as CSV with full-precision decimals; absent Monte Carlo
    columns stay empty. Refuses an empty row list before touching the
    destination."""
    if not rows:
        raise InvalidParamError("no rows to emit")
    lines = [CSV_HEADER]
    for row in rows:
        fields = [row.strategy] + [
            _format_field(value)
            for value in (
                row.r0,
                row.gamma,
                row.energy,
                row.distortion,
                row.e_mc,
                row.d_mc,
                row.r_mc,
                row.se_e,
                row.se_d,
                row.se_r,
            )
        ]
        lines.append(",".join(fields))
    payload = "\n".join(lines) + "\n"
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="") as handle:
            handle.write(payload)
    elif isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        destination.write(payload)
    else:
        raise InvalidParamError(f"unsupported destination {destination!r}")
