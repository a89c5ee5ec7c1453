"""
CLI Core

Parses flat JSON run configurations into RunConfig, validates them against the
preconditions of the modules they drive, and dispatches subcommands. Each
subcommand writes its JSON report (and CSV tables where it has them) under the
output directory.

Exit statuses: 0 success, 1 run-level failure, 2 configuration error.
"""

import json
from collections.abc import Callable, Mapping
from dataclasses import fields
from pathlib import Path
from typing import Any

import numpy as np

from cli.types import COMMANDS, RunConfig
from common.config import COEFF_BOUND_MAX, LIFESPAN_SIZE_MODES, MIN_NODES, TELESCOPING_K_MAX
from common.errors import AdmissibilityFailure, ConfigError, WaveLabError
from common.io import write_csv, write_json
from common.logging_config import get_logger
from common.pipeline import solve_and_measure
from estimate_harness.core import (
    build_instances,
    convolution_bound_check,
    energy_inequality_check,
    sobolev_checks,
    sweep,
)
from experiments.core import (
    check_lifespan_order,
    constants_ledger,
    continuation_run,
    continuity_directions,
    continuity_probe,
    default_lifespan_shape,
    lifespan_sweep,
    random_directions,
)
from experiments.types import lifespan_frame
from initial_data.core import profile, scale_to_epsilon, sobolev_norms, telescoping_increments
from initial_data.types import PROFILE_KINDS, DataPair
from multiplier_lab.core import (
    MULTIPLIER_VARIANTS,
    check_pointwise_inequalities,
    divergence_residual,
    dyadic_band_samples,
    log_samples,
    manufactured_scenario,
    multiplier_field,
    residual_refinement_ratio,
)
from picard import core as picard
from radial_grid.core import RadialGrid, build_grid, grid_policy
from spacetime_norms.core import finalize
from spacetime_norms.types import NormAccumulator
from wave_solver.core import solve_quasilinear
from wave_solver.sinks import LevelTable
from wave_solver.types import CoefficientField, Nonlinearity

logger = get_logger("cli")

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_CONFIG_ERROR = 2

# Fields whose default is None, with the type of their non-None values
_OPTIONAL: dict[str, type] = {
    "r_max": float,
    "nr": int,
    "eps": float,
    "mollify_k": int,
    "trace_stride": int,
}

# Grid used by verify-identity when no explicit grid is configured
_IDENTITY_R_MAX = 8.0
_IDENTITY_NR = 128


# =============================================================================
# Parsing and validation
# =============================================================================


def _kind(name: str, default: Any) -> type | str:
    if name in _OPTIONAL:
        return _OPTIONAL[name]
    if isinstance(default, list):
        return "float_list"
    return type(default)


def _field_kinds() -> dict[str, type | str]:
    kinds = {}
    template = RunConfig()
    for f in fields(RunConfig):
        kinds[f.name] = _kind(f.name, getattr(template, f.name))
    return kinds


def _coerce(key: str, value: Any, kind: type | str) -> Any:
    if value is None:
        if key in _OPTIONAL:
            return None
        raise ConfigError(f"'{key}' must not be null", key=key)
    if isinstance(value, bool):
        raise ConfigError(f"'{key}' must not be a boolean", key=key)
    if kind == "float_list":
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"'{key}' must be a list of numbers", key=key)
        return [float(v) for v in value]
    if kind is float:
        if not isinstance(value, (int, float)):
            raise ConfigError(f"'{key}' must be a number", key=key)
        return float(value)
    if kind is int:
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer", key=key)
        return value
    if not isinstance(value, str):
        raise ConfigError(f"'{key}' must be a string", key=key)
    return value


def _require(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(message, key=key)


def _decreasing(values: list[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def validate_config(cfg: RunConfig) -> RunConfig:
    """
    Check every field against the preconditions of the module it feeds.

    Raises:
        ConfigError: naming the offending key and the violated constraint
    """
    _require(cfg.command in COMMANDS, "command", f"command must be one of {COMMANDS}")
    _require(0.0 < cfg.mu < 0.5, "mu", "mu must lie in (0, 1/2)")
    _require(0.0 < cfg.cfl < 1.0, "cfl", "cfl must lie in (0, 1)")
    _require(0.0 <= cfg.h_bound <= COEFF_BOUND_MAX, "h_bound", "h_bound must lie in [0, 1/2]")
    _require(cfg.T > 0, "T", "T must be positive")
    _require(cfg.dr > 0, "dr", "dr must be positive")
    _require(cfg.r_max is None or cfg.r_max > 0, "r_max", "r_max must be positive")
    _require(cfg.nr is None or cfg.nr >= MIN_NODES, "nr", f"nr must be >= {MIN_NODES}")
    _require((cfg.r_max is None) == (cfg.nr is None), "nr", "r_max and nr must be given together")

    _require(cfg.profile in PROFILE_KINDS, "profile", f"profile must be one of {PROFILE_KINDS}")
    _require(cfg.width > 0, "width", "width must be positive")
    _require(cfg.eps is None or cfg.eps >= 0, "eps", "eps must be nonnegative")

    _require(cfg.h_kind in ("linear", "quadratic"), "h_kind", "h_kind must be 'linear' or 'quadratic'")
    _require(abs(cfg.h_amplitude) <= COEFF_BOUND_MAX, "h_amplitude", "|h_amplitude| must be <= 1/2")

    _require(cfg.variant in MULTIPLIER_VARIANTS, "variant", f"variant must be one of {MULTIPLIER_VARIANTS}")
    if cfg.variant == "kss":
        _require(0.0 < cfg.parameter < 1.0, "parameter", "kappa must lie in (0, 1)")
    else:
        _require(cfg.parameter > 0.0, "parameter", "rho must be positive")
    _require(cfg.samples >= 2, "samples", "samples must be >= 2")
    _require(cfg.bands >= 1, "bands", "bands must be >= 1")

    _require(cfg.k_max >= 0, "k_max", "k_max must be >= 0")
    _require(cfg.tol >= 0, "tol", "tol must be nonnegative")

    _require(bool(cfg.eps_list), "eps_list", "eps_list must not be empty")
    _require(all(e > 0 for e in cfg.eps_list), "eps_list", "eps_list values must be positive")
    _require(_decreasing(cfg.eps_list), "eps_list", "eps_list must be strictly decreasing")
    _require(
        cfg.lifespan_shape in ("plateau", "profile"),
        "lifespan_shape",
        "lifespan_shape must be 'plateau' or 'profile'",
    )
    _require(
        cfg.lifespan_size in LIFESPAN_SIZE_MODES,
        "lifespan_size",
        f"lifespan_size must be one of {LIFESPAN_SIZE_MODES}",
    )
    _require(cfg.T_budget > 0, "T_budget", "T_budget must be positive")
    _require(all(e > 0 for e in cfg.estimate_eps_list), "estimate_eps_list", "estimate_eps_list values must be positive")
    _require(all(t > 0 for t in cfg.T_list), "T_list", "T_list values must be positive")
    _require(all(abs(h) <= COEFF_BOUND_MAX for h in cfg.h_list), "h_list", "|h| values must be <= 1/2")
    _require(all(k >= 1 for k in cfg.k_list), "k_list", "k_list values must be >= 1")
    _require(all(0.0 <= a < 3.0 for a in cfg.alpha_list), "alpha_list", "alpha values must lie in [0, 3)")
    _require(all(d >= 0 for d in cfg.delta_list), "delta_list", "delta values must be nonnegative")
    _require(cfg.directions >= 1, "directions", "directions must be >= 1")

    _require(cfg.segments >= 1, "segments", "segments must be >= 1")
    _require(cfg.mollify_k is None or cfg.mollify_k >= 0, "mollify_k", "mollify_k must be >= 0")
    _require(cfg.trace_stride is None or cfg.trace_stride >= 1, "trace_stride", "trace_stride must be >= 1")
    _require(cfg.threads >= 1, "threads", "threads must be >= 1")
    _require(cfg.seed >= 0, "seed", "seed must be nonnegative")
    return cfg


def parse_config(source: str | Mapping[str, Any]) -> RunConfig:
    """
    Parse a flat JSON object (text or mapping) into a validated RunConfig.

    Missing keys take their defaults.

    Raises:
        ConfigError: malformed JSON, unknown key, wrong type or out-of-range value
    """
    if isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config is not valid JSON: {e}") from e
    else:
        data = dict(source)
    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object")

    kinds = _field_kinds()
    values = {}
    for key, value in data.items():
        if key not in kinds:
            raise ConfigError(f"Unknown config key '{key}'", key=key)
        values[key] = _coerce(key, value, kinds[key])
    return validate_config(RunConfig(**values))


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    return parse_config(text)


# =============================================================================
# Shared builders
# =============================================================================


def nonlinearity(cfg: RunConfig) -> Nonlinearity:
    return Nonlinearity(a=cfg.a, b=cfg.b, h_kind=cfg.h_kind, lam=cfg.lam)


def _shape(cfg: RunConfig) -> DataPair:
    return profile(cfg.profile, cfg.amplitude, cfg.center, cfg.width, cfg.velocity_amplitude)


def _grid(cfg: RunConfig, support: float, T: float) -> RadialGrid:
    if cfg.r_max is not None and cfg.nr is not None:
        return build_grid(cfg.r_max, cfg.nr, cfg.cfl, cfg.h_bound)
    return grid_policy(support, T, cfg.h_bound, dr=cfg.dr, cfl_factor=cfg.cfl)


def pair_and_grid(cfg: RunConfig, T: float | None = None) -> tuple[DataPair, RadialGrid]:
    """Profile data on a grid holding their light cone, rescaled to eps if configured."""
    shape = _shape(cfg)
    grid = _grid(cfg, shape.support, cfg.T if T is None else T)
    pair = shape if cfg.eps is None else scale_to_epsilon(shape, grid, cfg.eps)
    return pair, grid


def _coefficient(cfg: RunConfig) -> CoefficientField | None:
    return CoefficientField.gaussian(cfg.h_amplitude) if cfg.h_amplitude else None


# =============================================================================
# Subcommands
# =============================================================================


def _run_solve(cfg: RunConfig, out: Path) -> int:
    pair, grid = pair_and_grid(cfg)
    nl = nonlinearity(cfg)
    result = solve_and_measure(
        pair,
        cfg.T,
        grid,
        nl=None if nl.is_free else nl,
        h=_coefficient(cfg),
        trace_stride=cfg.trace_stride,
    )
    write_json(
        out / "solve.json",
        {
            "config": cfg.to_dict(),
            "grid": grid.describe(),
            "outcome": result.outcome.to_dict(),
            "norms": None if result.norms is None else result.norms.to_dict(),
        },
    )
    if result.trace is not None:
        result.trace.write_csv(out / "trace.csv")
    return EXIT_OK if result.outcome.completed else EXIT_RUN_FAILURE


def _run_norms(cfg: RunConfig, out: Path) -> int:
    pair, grid = pair_and_grid(cfg)
    data = sobolev_norms(pair, grid)
    telescoping = telescoping_increments(pair, grid, min(cfg.k_max, TELESCOPING_K_MAX))
    result = solve_and_measure(pair, cfg.T, grid, h=_coefficient(cfg))
    write_csv(out / "telescoping.csv", telescoping)
    write_json(
        out / "norms.json",
        {
            "config": cfg.to_dict(),
            "grid": grid.describe(),
            "data": data.to_dict(),
            "spacetime": None if result.norms is None else result.norms.to_dict(),
        },
    )
    return EXIT_OK


def _run_iterate(cfg: RunConfig, out: Path) -> int:
    pair, grid = pair_and_grid(cfg)
    nl = nonlinearity(cfg)
    try:
        report = picard.run(pair, nl, cfg.T, grid, k_max=cfg.k_max, tol=cfg.tol)
    except AdmissibilityFailure as e:
        logger.error(f"Iteration failed: {e}")
        partial = e.partial.to_dict() if e.partial is not None else None
        write_json(out / "iterate.json", {"config": cfg.to_dict(), "failed_stage": e.k, "partial": partial})
        return EXIT_RUN_FAILURE

    constants = picard.estimate_constants([report])
    ratios = picard.contraction_ratios(report) if len(report.records) >= 3 else None
    threshold = (
        picard.contraction_threshold(constants["C4"], constants["M1"], report.epsilon, cfg.T)
        if constants["C4"] and constants["M1"]
        else None
    )
    write_json(
        out / "iterate.json",
        {
            "config": cfg.to_dict(),
            "report": report.to_dict(),
            "contraction_ratios": ratios,
            "constants": constants,
            "threshold": threshold,
        },
    )
    ledger = constants_ledger("iterate", nl, picard_constants=constants)
    write_json(out / "ledger.json", ledger.to_dict())
    return EXIT_OK


def _run_verify_identity(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg.r_max or _IDENTITY_R_MAX, cfg.nr or _IDENTITY_NR, cfg.cfl, cfg.h_bound)
    mf = multiplier_field(cfg.variant, cfg.parameter)
    scenario = manufactured_scenario(cfg.phi_expr, hs=cfg.hs_expr)
    constant = manufactured_scenario("1", name="constant")

    refinement = residual_refinement_ratio(scenario, mf, grid, cfg.T)
    baseline = divergence_residual(constant, mf, grid, cfg.T)
    write_json(
        out / "identity.json",
        {
            "config": cfg.to_dict(),
            "multiplier": mf.describe(),
            "manufactured": refinement.to_dict(),
            "constant": baseline.to_dict(),
            "expressions": scenario.expressions,
        },
    )
    return EXIT_OK


def _run_check_inequalities(cfg: RunConfig, out: Path) -> int:
    reports = []
    if cfg.variant == "kss":
        mf = multiplier_field("kss", cfg.parameter)
        reports.append(check_pointwise_inequalities(mf, log_samples(1e-4, 1e3, cfg.samples)))
    else:
        for k in range(1, cfg.bands + 1):
            mf = multiplier_field("ms", 2.0**k)
            reports.append(check_pointwise_inequalities(mf, dyadic_band_samples(k, cfg.samples)))
    write_json(
        out / "inequalities.json",
        {
            "config": cfg.to_dict(),
            "violations": sum(r.violation_count for r in reports),
            "reports": [r.to_dict() for r in reports],
        },
    )
    return EXIT_OK


def _run_verify_estimate(cfg: RunConfig, out: Path) -> int:
    instances = build_instances(cfg.estimate_eps_list, cfg.T_list, cfg.h_list, mu=cfg.mu, dr=cfg.dr)
    frame = sweep(instances, threads=cfg.threads)
    write_csv(out / "estimates.csv", frame)

    by_T = frame.dropna(subset=["ratio"]).groupby("T")["ratio"].max()
    spread = float(by_T.max() / by_T.min()) if len(by_T) >= 2 and by_T.min() > 0 else None

    pair, grid = pair_and_grid(cfg)
    n_steps, _ = grid.steps_for(cfg.T)
    table = LevelTable(grid, stride=max(1, n_steps // 20))
    energy = energy_inequality_check(pair, _coefficient(cfg), None, cfg.T, grid, sinks=(table,))
    sobolev = sobolev_checks(table.snapshot(i) for i in range(len(table)))
    convolution = convolution_bound_check(cfg.k_list, cfg.alpha_list, np.geomspace(1e-2, 20.0, 25))

    best = float(by_T.max()) if len(by_T) else None
    ledger = constants_ledger(
        "verify-estimate", nonlinearity(cfg), sobolev=sobolev, energy=energy, estimate_ratio=best
    )
    write_json(
        out / "estimate_summary.json",
        {
            "config": cfg.to_dict(),
            "instances": len(instances),
            "max_ratio_by_T": {f"{T:g}": float(v) for T, v in by_T.items()},
            "uniformity_spread": spread,
            "energy_inequality": energy.to_dict(),
            "sobolev": sobolev.to_dict(),
            "convolution": convolution.to_dict(),
        },
    )
    write_json(out / "ledger.json", ledger.to_dict())
    return EXIT_OK


def _run_lifespan(cfg: RunConfig, out: Path) -> int:
    nl = nonlinearity(cfg)
    shape = default_lifespan_shape() if cfg.lifespan_shape == "plateau" else _shape(cfg)
    points, fit = lifespan_sweep(
        cfg.eps_list, nl, cfg.T_budget, shape=shape, dr=cfg.dr, threads=cfg.threads, size=cfg.lifespan_size
    )
    write_csv(out / "lifespan.csv", lifespan_frame(points))
    write_json(
        out / "lifespan_fit.json",
        {"config": cfg.to_dict(), "fit": fit.to_dict(), "points": [p.to_dict() for p in points]},
    )
    write_json(out / "ledger.json", constants_ledger("lifespan", nl, fit=fit).to_dict())
    # Artifacts stay on disk for inspection; a lifespan out of order fails the run
    check_lifespan_order(points)
    return EXIT_OK


def _run_continuity(cfg: RunConfig, out: Path) -> int:
    pair, grid = pair_and_grid(cfg)
    nl = nonlinearity(cfg)
    try:
        perturbation = random_directions(grid, 1, cfg.seed)[0]
        probe = continuity_probe(pair, perturbation, cfg.delta_list, nl, cfg.T, grid, threads=cfg.threads)
        positive = [d for d in cfg.delta_list if d > 0]
        spread = None
        if positive:
            spread = continuity_directions(
                pair, positive[0], nl, cfg.T, grid, count=cfg.directions, seed=cfg.seed, threads=cfg.threads
            )
    except AdmissibilityFailure as e:
        logger.error(f"Continuity probe failed: {e}")
        return EXIT_RUN_FAILURE

    write_csv(out / "continuity.csv", probe.to_frame())
    write_json(
        out / "continuity.json",
        {
            "config": cfg.to_dict(),
            "probe": probe.to_dict(),
            "directions": None if spread is None else spread.to_dict(),
        },
    )
    return EXIT_OK


def _run_continue(cfg: RunConfig, out: Path) -> int:
    pair, grid = pair_and_grid(cfg)
    nl = nonlinearity(cfg)
    segmented_norms = NormAccumulator(order=1)
    try:
        outcome = continuation_run(
            pair, nl, cfg.segments, grid, cfg.T, sinks=(segmented_norms,), mollify_k=cfg.mollify_k
        )
    except AdmissibilityFailure as e:
        logger.error(f"Continuation failed in segment {e.segment}: {e}")
        return EXIT_RUN_FAILURE

    direct_norms = NormAccumulator(order=1)
    direct = solve_quasilinear(pair, nl, cfg.T, grid, sinks=(direct_norms,))

    segmented_e1 = finalize(segmented_norms).E1 if outcome.completed else None
    direct_e1 = finalize(direct_norms).E1 if direct.completed else None
    write_json(
        out / "continuation.json",
        {
            "config": cfg.to_dict(),
            "outcome": outcome.to_dict(),
            "direct": direct.to_dict(),
            "E1_segmented": segmented_e1,
            "E1_direct": direct_e1,
            "E1_difference": None
            if segmented_e1 is None or direct_e1 is None
            else abs(segmented_e1 - direct_e1),
        },
    )
    return EXIT_OK if outcome.completed else EXIT_RUN_FAILURE


_HANDLERS: dict[str, Callable[[RunConfig, Path], int]] = {
    "solve": _run_solve,
    "iterate": _run_iterate,
    "verify-identity": _run_verify_identity,
    "check-inequalities": _run_check_inequalities,
    "verify-estimate": _run_verify_estimate,
    "norms": _run_norms,
    "lifespan": _run_lifespan,
    "continuity": _run_continuity,
    "continue": _run_continue,
}


def dispatch(cfg: RunConfig, out_dir: str | Path | None = None) -> int:
    """
    Run one subcommand and write its artifacts.

    Args:
        cfg: Validated RunConfig
        out_dir: Output directory (default cfg.out_dir)

    Returns:
        Exit status: 0 success, 1 run-level failure, 2 configuration error
    """
    try:
        validate_config(cfg)
    except ConfigError as e:
        logger.error(f"Invalid config ({e.key}): {e}")
        return EXIT_CONFIG_ERROR

    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    logger.info(f"Running '{cfg.command}' -> {out}")
    try:
        status = _HANDLERS[cfg.command](cfg, out)
    except ConfigError as e:
        logger.error(f"Invalid config ({e.key}): {e}")
        return EXIT_CONFIG_ERROR
    except WaveLabError as e:
        logger.error(f"'{cfg.command}' failed: {e}")
        return EXIT_RUN_FAILURE

    if status == EXIT_OK:
        logger.info(f"'{cfg.command}' finished, artifacts in {out}")
    return status

