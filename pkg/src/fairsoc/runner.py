"""Experiment orchestration and on-disk run logs.

Societies are the unit of parallelism. Each society derives every random
stream from (seed, strategy, society index), so results do not depend on
scheduling; the collector sorts by index before anything is written. Log
files are bit-identical across reruns and worker counts. Wall-clock
timestamps live only in meta.json, which is why that one file is allowed
to differ between otherwise identical runs.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._version import __version__
from .config import ExperimentConfig, config_digest, to_mapping
from .errors import ConfigError, StateError
from .evolution import (
    EvolutionSettings,
    GenerationRecord,
    SocietyResult,
    found_society,
    run_society,
)
from .metrics import ExperimentReport, build_report
from .strategies import StrategyKind

ARTIFACT = "fairsoc"

# One row per society-generation, in this column order.
ROW_FIELDS = (
    "society_index",
    "generation",
    "population",
    "births",
    "deaths",
    "total_labor",
    "total_output",
    "mean_consumption",
    "consumption_cv",
    "consumption_skewness",
    "min_utility",
    "mean_utility",
    "mean_fertility",
    "failed",
    "capped",
)
_INT_FIELDS = frozenset({"society_index", "generation", "population", "births", "deaths"})
_BOOL_FIELDS = frozenset({"failed", "capped"})

# report metadata keys that change run to run; kept out of report files
VOLATILE_METADATA = frozenset({"started", "finished"})

REPORT_FIELDS = (
    "strategy",
    "societies",
    "failed",
    "capped",
    "growth_pct",
    "recession_frequency_pct",
    "mortality_rate",
    "mortality_index_pct",
    "mean_cv",
    "cv_index_pct",
    "mean_skewness",
    "failed_pct",
)


def format_real(value: float) -> str:
    """17 significant digits: enough to round-trip any float64 exactly."""
    return f"{value:.17g}"


def _meta_lines(seed: int, digest: str) -> list[str]:
    return [
        f"# artifact={ARTIFACT} version={__version__}",
        f"# seed={seed}",
        f"# config_digest={digest}",
    ]


def _json_meta(seed: int, digest: str) -> dict:
    return {"artifact": ARTIFACT, "version": __version__, "seed": seed, "config_digest": digest}


def resolve_workers(config: ExperimentConfig) -> int:
    if config.workers >= 1:
        return config.workers
    return os.cpu_count() or 1


def run_one_society(config: ExperimentConfig, token: str, index: int) -> SocietyResult:
    """Run a single society end to end. Module-level so worker pools can pickle it."""
    strategy = StrategyKind.from_token(token)
    society = found_society(
        strategy,
        index,
        config.seed,
        config.initial_population,
        gamma_rate=config.gamma_rate,
        k_max=config.k_max,
        belief_floor=config.belief_floor,
        sigma_form=config.sigma_form,
    )
    settings = EvolutionSettings(
        mutation_sd=config.mutation_sd,
        mortality_mid=config.mortality_mid,
        mortality_scale=config.mortality_scale,
        population_cap=config.population_cap,
        warm_start=config.warm_start,
    )
    return run_society(society, config.generations, config.optimizer.simplex_options(), settings)


def simulate(config: ExperimentConfig) -> dict[str, list[SocietyResult]]:
    """Run every (strategy, society) job and collect results in index order."""
    tokens = config.effective_strategies()
    jobs = [(token, index) for token in tokens for index in range(config.societies)]
    workers = resolve_workers(config)
    collected: dict[tuple[str, int], SocietyResult] = {}
    if workers == 1:
        for token, index in jobs:
            collected[(token, index)] = run_one_society(config, token, index)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(run_one_society, config, token, index): (token, index)
                for token, index in jobs
            }
            for future, key in futures.items():
                collected[key] = future.result()
    return {
        token: [collected[(token, index)] for index in range(config.societies)]
        for token in tokens
    }


def _rows_for(result: SocietyResult) -> Iterable[dict]:
    for rec in result.records:
        yield {
            "society_index": result.index,
            "generation": rec.generation,
            "population": rec.population,
            "births": rec.births,
            "deaths": rec.deaths,
            "total_labor": rec.total_labor,
            "total_output": rec.total_output,
            "mean_consumption": rec.mean_consumption,
            "consumption_cv": rec.consumption_cv,
            "consumption_skewness": rec.consumption_skewness,
            "min_utility": rec.min_utility,
            "mean_utility": rec.mean_utility,
            "mean_fertility": rec.mean_fertility,
            "failed": result.failed,
            "capped": result.capped,
        }


def _write_rows_csv(
    path: Path,
    rows: Iterable[dict],
    field_names: Sequence[str],
    seed: int,
    digest: str,
    undefined_marker: str | None = None,
) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for line in _meta_lines(seed, digest):
            fh.write(line + "\n")
        fh.write(",".join(field_names) + "\n")
        for row in rows:
            cells = []
            for name in field_names:
                value = row[name]
                if isinstance(value, bool):
                    cells.append("true" if value else "false")
                elif isinstance(value, (int, np.integer)):
                    cells.append(str(int(value)))
                elif isinstance(value, str):
                    cells.append(value)
                elif undefined_marker is not None and not math.isfinite(float(value)):
                    cells.append(undefined_marker)
                else:
                    cells.append(format_real(float(value)))
            fh.write(",".join(cells) + "\n")


def _jsonable(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    return None if not math.isfinite(value) else value


def _write_rows_json(path: Path, rows: Iterable[dict], seed: int, digest: str) -> None:
    payload = {
        "meta": _json_meta(seed, digest),
        "rows": [{k: _jsonable(v) for k, v in row.items()} for row in rows],
    }
    path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8", newline="\n")


def write_generation_log(
    directory: Path, results: Sequence[SocietyResult], log_format: str, seed: int, digest: str
) -> Path:
    rows = [row for result in results for row in _rows_for(result)]
    if log_format == "csv":
        path = directory / "generations.csv"
        _write_rows_csv(path, rows, ROW_FIELDS, seed, digest)
    else:
        path = directory / "generations.json"
        _write_rows_json(path, rows, seed, digest)
    return path


def write_final_consumptions(
    directory: Path, results: Sequence[SocietyResult], seed: int, digest: str
) -> Path:
    """Final-generation consumption samples, one agent per row.

    Always CSV regardless of the log format; the histogram tool reads it back.
    """
    path = directory / "final_consumptions.csv"
    rows = [
        {"society_index": result.index, "position": pos, "consumption": float(value)}
        for result in results
        for pos, value in enumerate(result.final_consumptions)
    ]
    _write_rows_csv(path, rows, ("society_index", "position", "consumption"), seed, digest)
    return path


def write_report_files(
    out_dir: Path, report: ExperimentReport, log_format: str, seed: int, digest: str
) -> list[Path]:
    rows = []
    for token in sorted(report.rows):
        m = report.rows[token]
        rows.append({name: getattr(m, name) for name in REPORT_FIELDS})
    written = []
    if log_format == "csv":
        path = out_dir / "report.csv"
        _write_rows_csv(path, rows, REPORT_FIELDS, seed, digest, undefined_marker="undefined")
        written.append(path)
    else:
        path = out_dir / "report.json"
        # timestamps live in meta.json only, so report files stay
        # byte-identical across reruns of the same seed and config
        stable = {k: v for k, v in report.metadata.items() if k not in VOLATILE_METADATA}
        payload = {
            "meta": _json_meta(seed, digest),
            "baseline": report.baseline,
            "rows": [
                {k: (v if isinstance(v, str) else _jsonable(v)) for k, v in row.items()}
                for row in rows
            ],
            "metadata": stable,
        }
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8", newline="\n")
        written.append(path)
    return written


@dataclass(frozen=True)
class ExperimentOutcome:
    report: ExperimentReport
    results: Mapping[str, list[SocietyResult]]
    out_dir: Path
    files: tuple[Path, ...]


def run_experiment(config: ExperimentConfig, out_dir: str | Path) -> ExperimentOutcome:
    """Run the full experiment and persist logs, report, and metadata."""
    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_digest(config)
    started = datetime.now(timezone.utc)

    results = simulate(config)
    sim_finished = datetime.now(timezone.utc)

    files: list[Path] = []
    for token, society_results in results.items():
        strategy_dir = out / token
        strategy_dir.mkdir(parents=True, exist_ok=True)
        files.append(
            write_generation_log(strategy_dir, society_results, config.log_format, config.seed, digest)
        )
        files.append(write_final_consumptions(strategy_dir, society_results, config.seed, digest))

    report = build_report(
        results,
        metadata={
            "seed": str(config.seed),
            "config_digest": digest,
            "started": started.isoformat(),
            "finished": sim_finished.isoformat(),
        },
    )
    files.extend(write_report_files(out, report, config.log_format, config.seed, digest))

    finished = datetime.now(timezone.utc)
    echo_path = out / "config.echo.json"
    echo_path.write_text(
        json.dumps(to_mapping(config), indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    files.append(echo_path)

    meta = {
        "artifact": ARTIFACT,
        "version": __version__,
        "seed": config.seed,
        "config_digest": digest,
        "config": to_mapping(config),
        "workers": resolve_workers(config),
        "started_at": started.isoformat(),
        "finished_at": finished.isoformat(),
        "duration_seconds": (finished - started).total_seconds(),
        "strategies": {
            token: {
                "societies": len(society_results),
                "failed": sum(r.failed for r in society_results),
                "capped": sum(r.capped for r in society_results),
                "gammas": [r.gamma for r in society_results],
            }
            for token, society_results in results.items()
        },
    }
    meta_path = out / "meta.json"
    meta_path.write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8", newline="\n")
    files.append(meta_path)

    return ExperimentOutcome(report=report, results=results, out_dir=out, files=tuple(files))


# --- reading logs back (report / histogram subcommands) ---


def _parse_csv_rows(path: Path) -> list[dict[str, str]]:
    with path.open("r", encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(lines)
    return list(reader)


def _typed_row(raw: Mapping[str, object]) -> dict:
    """Coerce one generations-log row back to python types.

    Accepts both CSV strings and JSON-native values; JSON null means NaN.
    """
    row: dict = {}
    for name in ROW_FIELDS:
        value = raw[name]
        if name in _BOOL_FIELDS:
            row[name] = value if isinstance(value, bool) else str(value).lower() == "true"
        elif name in _INT_FIELDS:
            row[name] = int(value)  # type: ignore[arg-type]
        elif value is None:
            row[name] = math.nan
        else:
            row[name] = float(value)  # type: ignore[arg-type]
    return row


def read_generation_log(strategy_dir: Path) -> list[dict]:
    csv_path = strategy_dir / "generations.csv"
    json_path = strategy_dir / "generations.json"
    if csv_path.exists():
        return [_typed_row(raw) for raw in _parse_csv_rows(csv_path)]
    if json_path.exists():
        payload = json.loads(json_path.read_text(encoding="utf-8"))
        return [_typed_row(raw) for raw in payload["rows"]]
    raise StateError(f"no generation log under {strategy_dir}")


def read_final_consumptions(strategy_dir: Path) -> dict[int, np.ndarray]:
    path = strategy_dir / "final_consumptions.csv"
    if not path.exists():
        raise StateError(f"missing {path}")
    by_society: dict[int, list[float]] = {}
    for raw in _parse_csv_rows(path):
        by_society.setdefault(int(raw["society_index"]), []).append(float(raw["consumption"]))
    return {index: np.array(values) for index, values in sorted(by_society.items())}


def load_results(run_dir: str | Path) -> dict[str, list[SocietyResult]]:
    """Rebuild per-society results from a run directory's logs.

    gamma is not part of the log schema, so reloaded results carry NaN there;
    nothing downstream of the report needs it.
    """
    run_dir = Path(run_dir)
    tokens = [
        p.name for p in sorted(run_dir.iterdir()) if p.is_dir() and _has_generation_log(p)
    ]
    if not tokens:
        raise StateError(f"no strategy logs found under {run_dir}")
    out: dict[str, list[SocietyResult]] = {}
    for token in tokens:
        strategy = StrategyKind.from_token(token)
        rows = read_generation_log(run_dir / token)
        samples = read_final_consumptions(run_dir / token)
        by_society: dict[int, list[dict]] = {}
        for row in rows:
            by_society.setdefault(row["society_index"], []).append(row)
        results = []
        for index, society_rows in sorted(by_society.items()):
            society_rows.sort(key=lambda r: r["generation"])
            records = [
                GenerationRecord(**{k: r[k] for k in ROW_FIELDS if k not in ("society_index", "failed", "capped")})
                for r in society_rows
            ]
            results.append(
                SocietyResult(
                    index=index,
                    strategy=strategy,
                    gamma=math.nan,
                    records=records,
                    failed=society_rows[-1]["failed"],
                    capped=society_rows[-1]["capped"],
                    final_consumptions=samples.get(index, np.empty(0)),
                )
            )
        out[token] = results
    return out


def _has_generation_log(path: Path) -> bool:
    return (path / "generations.csv").exists() or (path / "generations.json").exists()
