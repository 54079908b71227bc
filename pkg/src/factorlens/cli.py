"""Operator entry points: synth, factors, train, serve, report."""
from __future__ import annotations

import datetime as dt
import json
import os
import sys

import click
import numpy as np

from .analytics import build_correlation_surface, surface_to_payload
from .catalog import DEFAULT_CATALOG
from .embedding import EmbedConfig, load_checkpoint, make_batches, save_checkpoint, train_autoencoder
from .errors import ConfigError, FactorLensError
from .factors import attach_derived_fields, estimate_panel_factor_returns
from .market_io import load_panel, load_portfolios, write_factor_returns, write_panel, write_portfolios
from .panel import parse_date
from .service import AnalysisSession, ServiceConfig, create_app
from .synthetic import SyntheticConfig, generate_synthetic_market

EXIT_DATA_ERROR = 1
EXIT_CONFIG_ERROR = 2


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _write_run_config(out_dir: str, command: str, values: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    payload = {"command": command, **values}
    with open(os.path.join(out_dir, "run-config.json"), "w", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def synthetic_config_from_file(path: str, seed_override: int | None = None) -> SyntheticConfig:
    with open(path) as fh:
        raw = json.load(fh)
    if seed_override is not None:
        raw["seed"] = seed_override
    if "start_date" in raw:
        raw["start_date"] = parse_date(raw["start_date"])
    for key in ("archetype_exposures", "archetype_sectors", "planted_factor_returns"):
        if raw.get(key) is not None:
            raw[key] = tuple(tuple(row) for row in raw[key])
    for key in ("stocks_per_portfolio", "cash_fraction_range", "trade_events", "span_range"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        return SyntheticConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@click.group()
def main():
    """Portfolio factor analytics toolkit."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
def synth(config_path, out_dir, seed):
    """Generate a synthetic market bundle with planted ground truth."""
    try:
        cfg = synthetic_config_from_file(config_path, seed)
        panel, portfolios, truth = generate_synthetic_market(cfg)
    except (ConfigError, FactorLensError, json.JSONDecodeError) as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    os.makedirs(out_dir, exist_ok=True)
    write_panel(panel, out_dir)
    write_portfolios(portfolios, out_dir)
    truth_payload = {
        "factor_returns": {
            d.isoformat(): [float(v) for v in truth.factor_returns[t]]
            for t, d in enumerate(panel.trading_days)
        },
        "residuals": {
            d.isoformat(): [float(v) for v in truth.residuals[t]]
            for t, d in enumerate(panel.trading_days)
        },
        "archetype_of": truth.archetype_of,
        "archetype_exposures": [[float(v) for v in row] for row in truth.archetype_exposures],
        "stocks": list(panel.stocks),
    }
    with open(os.path.join(out_dir, "planted-truth.json"), "w", newline="\n") as fh:
        json.dump(truth_payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    _write_run_config(out_dir, "synth", {"config": os.path.abspath(config_path), "seed": cfg.seed})
    click.echo(f"wrote bundle for {panel.n_stocks} stocks x {panel.n_days} days, "
               f"{len(portfolios)} portfolios -> {out_dir}")


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--start", default=None)
@click.option("--end", default=None)
@click.option("--window", default=20, show_default=True)
def factors(data_dir, out_dir, start, end, window):
    """Estimate daily factor returns and correlation surfaces from a bundle."""
    try:
        panel = load_panel(data_dir)
        frm = estimate_panel_factor_returns(panel)
    except FactorLensError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))
    s = parse_date(start) if start else panel.trading_days[0]
    e = parse_date(end) if end else panel.trading_days[-1]
    try:
        surface = build_correlation_surface(frm, s, e, window=window)
    except FactorLensError as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    os.makedirs(out_dir, exist_ok=True)
    write_factor_returns(frm, out_dir, residuals_stocks=panel.stocks)
    with open(os.path.join(out_dir, "correlations.json"), "w", newline="\n") as fh:
        json.dump(surface_to_payload(surface, DEFAULT_CATALOG), fh,
                  sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    _write_run_config(out_dir, "factors", {
        "data": os.path.abspath(data_dir), "start": s.isoformat(), "end": e.isoformat(),
        "window": window,
    })
    click.echo(f"median daily R^2 {float(np.median(frm.r_squared)):.4f}; wrote {out_dir}")


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=200, show_default=True)
@click.option("--lr", default=1e-3, show_default=True)
@click.option("--hidden", default=50, show_default=True)
@click.option("--batch-size", default=64, show_default=True)
@click.option("--start", default=None)
@click.option("--end", default=None)
def train(data_dir, out_dir, seed, epochs, lr, hidden, batch_size, start, end):
    """Train the sequence autoencoder and write a checkpoint plus loss curve."""
    try:
        panel = load_panel(data_dir)
        portfolios = attach_derived_fields(load_portfolios(data_dir, panel), panel)
        s = parse_date(start) if start else panel.trading_days[0]
        e = parse_date(end) if end else panel.trading_days[-1]
        batches, excluded = make_batches(portfolios, (s, e), batch_size)
        params = train_autoencoder(batches, epochs=epochs, lr=lr, seed=seed, hidden=hidden)
    except FactorLensError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))
    os.makedirs(out_dir, exist_ok=True)
    save_checkpoint(params, os.path.join(out_dir, "autoencoder.ckpt"))
    with open(os.path.join(out_dir, "loss_curve.csv"), "w", newline="\n") as fh:
        fh.write("epoch,loss\n")
        for i, loss in enumerate(params.loss_history, start=1):
            fh.write(f"{i},{repr(float(loss))}\n")
    _write_run_config(out_dir, "train", {
        "data": os.path.abspath(data_dir), "seed": seed, "epochs": epochs, "lr": lr,
        "hidden": hidden, "batch_size": batch_size,
        "start": s.isoformat(), "end": e.isoformat(), "excluded": excluded,
    })
    click.echo(f"final loss {params.loss_history[-1]:.6f}; checkpoint -> {out_dir}")


@main.command()
@click.option("--data", "data_dir", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--checkpoint", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--port", default=None, type=int)
@click.option("--host", default=None)
@click.option("--seed", default=None, type=int)
@click.option("--epochs", default=None, type=int)
@click.option("--lr", default=None, type=float)
@click.option("--perplexity", default=None, type=float)
@click.option("--retrain", is_flag=True, default=False,
              help="Retrain per brushed period instead of re-encoding with global weights.")
@click.option("--static", "static_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Also host the web UI from this directory (e.g. frontend/).")
def serve(data_dir, checkpoint, config_path, port, host, seed, epochs, lr, perplexity, retrain,
          static_dir):
    """Host the analysis API over the given bundle."""
    import uvicorn

    try:
        cfg = ServiceConfig.load(config_path)
    except (ValueError, json.JSONDecodeError) as exc:
        _fail(EXIT_CONFIG_ERROR, str(exc))
    if data_dir:
        cfg.data_dir = data_dir
    if checkpoint:
        cfg.checkpoint = checkpoint
    if port is not None:
        cfg.port = port
    if host:
        cfg.host = host
    if seed is not None:
        cfg.seed = seed
    if epochs is not None:
        cfg.epochs = epochs
    if lr is not None:
        cfg.lr = lr
    if perplexity is not None:
        cfg.perplexity = perplexity
    try:
        session = AnalysisSession.from_dir(
            cfg.data_dir, checkpoint=cfg.checkpoint,
            embed_cfg=EmbedConfig(seed=cfg.seed, epochs=cfg.epochs, lr=cfg.lr,
                                  perplexity=cfg.perplexity, retrain=retrain),
        )
    except FactorLensError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))
    app = create_app(session, static_dir=static_dir)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--start", default=None)
@click.option("--end", default=None)
@click.option("--top", default=10, show_default=True)
def report(data_dir, out_dir, start, end, top):
    """Write an offline HTML/CSV summary of correlations and top portfolios."""
    try:
        panel = load_panel(data_dir)
        portfolios = attach_derived_fields(load_portfolios(data_dir, panel), panel)
        frm = estimate_panel_factor_returns(panel)
    except FactorLensError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))
    s = parse_date(start) if start else panel.trading_days[0]
    e = parse_date(end) if end else panel.trading_days[-1]
    i0, i1 = panel.clip_days(s, e)
    if i1 - i0 < 3:
        _fail(EXIT_CONFIG_ERROR, f"period [{s}, {e}] has {i1 - i0} trading days; need >= 3")
    s, e = panel.trading_days[i0], panel.trading_days[i1 - 1]
    surface = build_correlation_surface(frm, s, e)

    rows = []
    for p in portfolios:
        idx = [t for t, d in enumerate(p.days) if s <= d <= e]
        if len(idx) < 2:
            continue
        acc = float(np.prod(1.0 + p.daily_return[idx[1:]]) - 1.0)
        rows.append((p.id, len(idx), acc))
    rows.sort(key=lambda r: -r[2])

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "top_portfolios.csv"), "w", newline="\n") as fh:
        fh.write("id,overlap_days,cumulative_return\n")
        for pid, ndays, acc in rows[:top]:
            fh.write(f"{pid},{ndays},{repr(acc)}\n")
    with open(os.path.join(out_dir, "correlations.json"), "w", newline="\n") as fh:
        json.dump(surface_to_payload(surface, DEFAULT_CATALOG), fh,
                  sort_keys=True, separators=(",", ":"))
        fh.write("\n")

    names = DEFAULT_CATALOG.style_factors
    cells = []
    for j in range(len(names)):
        row = []
        for k in range(len(names)):
            v = surface.period[j, k]
            row.append("" if np.isnan(v) else f"{v:+.2f}")
        cells.append(row)
    table = "\n".join(
        "<tr><th>{}</th>{}</tr>".format(names[j], "".join(f"<td>{c}</td>" for c in cells[j]))
        for j in range(len(names))
    )
    header = "".join(f"<th>{n}</th>" for n in names)
    top_rows = "\n".join(
        f"<tr><td>{pid}</td><td>{ndays}</td><td>{acc:+.4f}</td></tr>"
        for pid, ndays, acc in rows[:top]
    )
    html = f"""<!doctype html>
<html><head><meta charset="utf-8"><title>factor report {s} .. {e}</title>
<style>body{{font-family:sans-serif}}td,th{{padding:2px 6px;border:1px solid #ccc}}</style>
</head><body>
<h1>Factor report {s} .. {e}</h1>
<h2>Period factor-return correlations</h2>
<table><tr><th></th>{header}</tr>{table}</table>
<h2>Top portfolios by cumulative return</h2>
<table><tr><th>id</th><th>overlap days</th><th>return</th></tr>{top_rows}</table>
</body></html>
"""
    with open(os.path.join(out_dir, "report.html"), "w", newline="\n") as fh:
        fh.write(html)
    _write_run_config(out_dir, "report", {
        "data": os.path.abspath(data_dir), "start": s.isoformat(), "end": e.isoformat(),
        "top": top,
    })
    click.echo(f"report for [{s}, {e}] -> {out_dir}")


if __name__ == "__main__":
    main()
