"""Command-line front end: simulate, backtest, forecast, report, validate.

Exit codes: 0 success, 2 usage or data error, 3 I/O error. Every run is
reproducible from its flags and seed; output files are written atomically.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import click

from . import __version__
from .bars import (
    InvalidBarError,
    OhlcSeries,
    SanitizeConfig,
    read_csv,
    sanitize_series,
    write_csv,
)
from .metrics import compare_methods, evaluate
from .pipeline import (
    PipelineConfig,
    WindowSpec,
    naive_window_forecasts,
    rolling_backtest,
    run_window,
)
from .bars import inverse_transform_path, transform_series
from .report import GridCell, format_table, render_figures, write_tidy_csv
from .simulate import generate, load_preset
from .metrics import EvalReport

EXIT_DATA = 2
EXIT_IO = 3

OUT_ENV = "OHLC_FORECAST_OUT"


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_grid(text: str) -> list[int]:
    """Parse '40', '30,40,50', or '30:70:10' (inclusive range)."""
    text = text.strip()
    if ":" in text:
        parts = [int(v) for v in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(v) for v in text.split(",")]


def _load_series(input_path, scenario, seed) -> OhlcSeries:
    if (input_path is None) == (scenario is None):
        _fail(EXIT_DATA, "provide exactly one of --input or --scenario")
    if input_path is not None:
        try:
            raw = read_csv(input_path)
            return sanitize_series(raw, SanitizeConfig(rng_seed=seed))
        except FileNotFoundError as exc:
            _fail(EXIT_IO, str(exc))
        except (InvalidBarError, ValueError) as exc:
            _fail(EXIT_DATA, str(exc))
    try:
        spec = load_preset(scenario).with_seed(seed)
    except KeyError as exc:
        _fail(EXIT_DATA, f"{exc.args[0]}")
    _, series = generate(spec)
    return series


def _out_dir(out) -> Path:
    if out is not None:
        return Path(out)
    return Path(os.environ.get(OUT_ENV, "."))


@click.group()
@click.version_option(__version__)
def main():
    """Constraint-safe OHLC candlestick forecasting toolkit."""


@main.command()
@click.option("--scenario", required=True, help="Preset scenario number (1, 2, or 3).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
def simulate(scenario, seed, out_path):
    """Generate a synthetic OHLC series CSV plus a sidecar parameter JSON."""
    try:
        spec = load_preset(scenario).with_seed(seed)
    except KeyError as exc:
        _fail(EXIT_DATA, str(exc.args[0]))
    _, series = generate(spec)
    out = Path(out_path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_csv(series, out)
        _atomic_write(out.with_suffix(".params.json"), json.dumps(spec.to_json_dict(), indent=2))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"wrote {len(series)} bars to {out}")


@main.command()
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--scenario", default=None)
@click.option("--q", "q_text", default="50", show_default=True, help="Window lengths, e.g. 30:70:10.")
@click.option("--m", "m_text", default="1", show_default=True, help="Horizons, e.g. 1,2,3.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--p-max", type=int, default=None)
@click.option("--alpha-adf", type=float, default=0.05, show_default=True)
@click.option("--alpha-johansen", type=float, default=0.05, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--naive/--no-naive", default=True, show_default=True,
              help="Include the last-bar baseline and the one-sided t-test comparison.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--tag", default=None, help="Label used in output filenames.")
def backtest(input_path, scenario, q_text, m_text, seed, p_max,
             alpha_adf, alpha_johansen, workers, naive, out, tag):
    """Run rolling backtests over a (q, m) grid and write results + metrics."""
    if workers < 1:
        _fail(EXIT_DATA, "worker count must be >= 1")
    series = _load_series(input_path, scenario, seed)
    tag = tag or (f"scenario{scenario}" if scenario else Path(input_path).stem)
    out_dir = _out_dir(out)
    cfg = PipelineConfig(
        alpha_adf=alpha_adf, alpha_johansen=alpha_johansen, p_max=p_max,
        sanitize=SanitizeConfig(rng_seed=seed),
    )
    try:
        qs, ms = _parse_grid(q_text), _parse_grid(m_text)
    except ValueError as exc:
        _fail(EXIT_DATA, f"bad grid spec: {exc}")
    for q in qs:
        for m in ms:
            try:
                spec = WindowSpec(q=q, m=m)
                if len(series) < q + m:
                    raise ValueError(f"series of {len(series)} too short for q={q}, m={m}")
                result = rolling_backtest(series, spec, cfg, workers=workers)
            except ValueError as exc:
                _fail(EXIT_DATA, str(exc))
            stem = f"{tag}_q{q}_m{m}"
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
                _atomic_write(out_dir / f"{stem}.json", json.dumps(result.to_json_dict(), indent=2))
                result.write_csv(out_dir / f"{stem}.csv")
                payload = {
                    "tag": tag, "q": q, "m": m,
                    "model_counts": result.model_counts,
                    "failed": len(result.failed_indices),
                    "per_horizon": {},
                }
                for h in range(1, m + 1):
                    rep = evaluate(result.realized_bars_at(h), result.forecast_bars_at(h))
                    payload["per_horizon"][str(h)] = rep.to_json_dict()
                if naive:
                    naive_fc = naive_window_forecasts(series, spec, cfg)
                    kept = [naive_fc[w.window_index] for w in result.windows]
                    h = m
                    comparison = compare_methods(
                        result.realized_bars_at(h),
                        result.forecast_bars_at(h),
                        [bars[h - 1] for bars in kept],
                    )
                    payload["comparison_h%d" % h] = comparison.to_json_dict()
                _atomic_write(out_dir / f"{stem}.metrics.json", json.dumps(payload, indent=2))
            except OSError as exc:
                _fail(EXIT_IO, str(exc))
            click.echo(
                f"{stem}: {len(result.windows)} windows "
                f"(VAR={result.model_counts['VAR']} VEC={result.model_counts['VEC']} "
                f"DIFF_VAR={result.model_counts['DIFF_VAR']} failed={len(result.failed_indices)})"
            )


@main.command()
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--scenario", default=None)
@click.option("--q", type=int, default=50, show_default=True)
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--p-max", type=int, default=None)
@click.option("--alpha-adf", type=float, default=0.05, show_default=True)
@click.option("--alpha-johansen", type=float, default=0.05, show_default=True)
def forecast(input_path, scenario, q, m, seed, p_max, alpha_adf, alpha_johansen):
    """Forecast the next m bars from the trailing q periods; print JSON."""
    series = _load_series(input_path, scenario, seed)
    if len(series) < q:
        _fail(EXIT_DATA, f"series of {len(series)} too short for q={q}")
    cfg = PipelineConfig(
        alpha_adf=alpha_adf, alpha_johansen=alpha_johansen, p_max=p_max,
        sanitize=SanitizeConfig(rng_seed=seed),
    )
    clean = sanitize_series(series.bars, cfg.sanitize)
    sanitized_changed = any(
        a.as_tuple() != b.as_tuple() for a, b in zip(clean.bars, series.bars)
    )
    Y = transform_series(clean)
    try:
        outcome = run_window(Y[-q:], m, cfg)
        bars = inverse_transform_path(outcome.forecast_vectors, start_t=len(series) + 1)
    except Exception as exc:  # noqa: BLE001 - surface as data error
        _fail(EXIT_DATA, f"forecast failed: {exc}")
    doc = {
        "model": outcome.model_used,
        "p": outcome.p,
        "r": outcome.r,
        "sanitization_applied": sanitized_changed,
        "forecast": [
            {"horizon": h + 1, "open": b.open, "high": b.high, "low": b.low, "close": b.close}
            for h, b in enumerate(bars)
        ],
    }
    click.echo(json.dumps(doc, indent=2))


@main.command()
@click.option("--in", "in_dir", required=True, type=click.Path(file_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--figures/--no-figures", default=True, show_default=True)
def report(in_dir, out, figures):
    """Aggregate backtest metrics into tables, tidy CSV, and figures."""
    in_dir = Path(in_dir)
    metric_files = sorted(in_dir.glob("*.metrics.json"))
    if not metric_files:
        _fail(EXIT_DATA, f"no *.metrics.json files in {in_dir}")
    cells = []
    for path in metric_files:
        doc = json.loads(path.read_text())
        h = str(doc["m"])
        rep_doc = doc["per_horizon"][h]
        rep = EvalReport(
            k=rep_doc["k"], mape=rep_doc["mape_pct"], sd=rep_doc["sd"],
            rmse=rep_doc["rmse"], rmseh=rep_doc["rmseh"], ar=rep_doc["ar"],
        )
        cells.append(GridCell(doc["tag"], doc["q"], doc["m"], rep, doc.get("model_counts")))
    out_dir = _out_dir(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write(out_dir / "tables.txt", format_table(cells))
        write_tidy_csv(cells, out_dir / "metrics_tidy.csv")
        if figures:
            render_figures(cells, out_dir / "figures")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(format_table(cells))


@main.command(hidden=True)
@click.argument("csv_path", type=click.Path())
def validate(csv_path):
    """Check that every bar in a CSV satisfies the OHLC constraints."""
    try:
        raw = read_csv(csv_path)
    except FileNotFoundError as exc:
        _fail(EXIT_IO, str(exc))
    except (InvalidBarError, ValueError) as exc:
        _fail(EXIT_DATA, str(exc))
    bad = 0
    for i, r in enumerate(raw):
        valid = r.low > 0 and r.low < r.high and r.low <= r.open <= r.high and r.low <= r.close <= r.high
        if not valid:
            bad += 1
            click.echo(f"row {i + 1} ({r.label}): constraint violation", err=True)
    if bad:
        _fail(EXIT_DATA, f"{bad} of {len(raw)} bars violate the OHLC constraints")
    click.echo(f"{len(raw)} bars valid")


if __name__ == "__main__":
    main()
