import importlib
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import typer
from dotenv import load_dotenv
from pydantic import ValidationError

from packages.core.errors import SchemaError, SpilloverError

load_dotenv()

logger = logging.getLogger(__name__)

# typer re-exports the exceptions of the click it runs on, vendored or not
UsageError = importlib.import_module(typer.BadParameter.__module__).UsageError

app = typer.Typer(
    name="spillover",
    help="Bayesian heteroscedastic spatial Durbin panel estimation",
    add_completion=False,
    no_args_is_help=True,
)


@contextmanager
def _errors_to_exit_codes():
    try:
        yield
    except SpilloverError as e:
        typer.echo(f"❌ {type(e).__name__}: {e}", err=True)
        raise typer.Exit(e.exit_code)
    except ValidationError as e:
        typer.echo(f"❌ Invalid configuration:\n{e}", err=True)
        raise typer.Exit(1)
    except (np.linalg.LinAlgError, FloatingPointError) as e:
        logger.exception("Numerical failure")
        typer.echo(f"❌ Numerical failure: {e}", err=True)
        raise typer.Exit(3)


@app.callback()
def main_options(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="JSON run configuration"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for every random stream"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    format: Optional[str] = typer.Option(
        None, "--format", "-f", help="Report format: text or delimited"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    if format is not None and format not in ("text", "delimited"):
        raise typer.BadParameter("must be 'text' or 'delimited'", param_hint="--format")
    ctx.obj = {"config": config, "seed": seed, "output_dir": out, "format": format}


def _load_config(ctx: typer.Context, **overrides: Any):
    from packages.core.config import RunConfig

    opts: Dict[str, Any] = dict(ctx.obj or {})
    path = opts.pop("config", None)
    opts.update(overrides)
    return RunConfig.from_file(path, **opts)


def _load_weights(cfg, region_ids):
    """w from a triplet file, or k-NN on the coordinates file, aligned to region_ids."""
    from packages.weights import build_knn, load_coordinates, load_triplets

    if cfg.weights is not None:
        w = load_triplets(cfg.weights, n=len(region_ids), k=cfg.k)
        if w.region_ids is not None and tuple(w.region_ids) != tuple(region_ids):
            raise SchemaError("Weight-matrix region ids do not match the panel's region order")
        return w
    if cfg.coordinates is None:
        typer.echo("❌ Either 'weights' or 'coordinates' must be configured", err=True)
        raise typer.Exit(1)
    if cfg.k is None:
        typer.echo("❌ k is required (config 'k' or --k)", err=True)
        raise typer.Exit(1)
    coords = load_coordinates(cfg.coordinates, region_ids)
    return build_knn(coords, cfg.k, metric=cfg.knn_metric, region_ids=region_ids)


def _require(value, label: str):
    if value is None:
        typer.echo(f"❌ {label} is required", err=True)
        raise typer.Exit(1)
    return value


def _emit(table, cfg, name: str) -> Path:
    from packages.reporting import render, report_suffix, write_report

    path = write_report(table, cfg.output_dir / f"{name}{report_suffix(cfg.format)}", cfg.format)
    typer.echo(render(table, cfg.format), nl=False)
    return path


def _draws_dir(cfg, draws: Optional[Path]) -> Path:
    return draws if draws is not None else cfg.output_dir / "draws"


@app.command()
def simulate(
    ctx: typer.Context,
    k: Optional[int] = typer.Option(None, "--k", help="Neighbors in the generating k-NN matrix"),
):
    """Draw a synthetic panel, coordinates and weights from the configured DGP."""
    from packages.panel import write_panel
    from packages.reporting import build_manifest, write_manifest
    from packages.synthetic import generate, generate_coords, region_labels
    from packages.weights import build_knn, save_coordinates, save_triplets

    with _errors_to_exit_codes():
        cfg = _load_config(ctx, k=k)
        k_value = _require(cfg.k, "k (config 'k' or --k)")
        dgp = cfg.dgp
        ids = region_labels(dgp.N)
        coords = generate_coords(dgp)
        w = build_knn(coords, k_value, metric=cfg.knn_metric, region_ids=ids)
        panel, coords, truth = generate(dgp, w, coords=coords)

        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        panel_path = out / "panel.csv"
        coords_path = out / "coordinates.csv"
        weights_path = out / "weights.csv"
        truth_path = out / "truth.json"
        write_panel(panel, panel_path)
        save_coordinates(coords, ids, coords_path)
        save_triplets(w, weights_path)
        truth_path.write_text(json.dumps({"k": k_value, **truth.to_dict()}, indent=2))

        outputs = [panel_path, coords_path, weights_path, truth_path]
        write_manifest(build_manifest("simulate", cfg.echo(), outputs=outputs), out)
        typer.echo(f"✅ Simulated N={dgp.N}, T={dgp.T}, Q={dgp.Q}, k={k_value} into {out}")


@app.command("select-k")
def select_k_cmd(
    ctx: typer.Context,
    k_min: Optional[int] = typer.Option(None, "--k-min", help="Smallest candidate k"),
    k_max: Optional[int] = typer.Option(None, "--k-max", help="Largest candidate k"),
):
    """Score k-NN weight matrices by posterior model probability."""
    from packages.comparison import select_k
    from packages.panel import load_panel
    from packages.reporting import build_manifest, selection_table, write_manifest
    from packages.weights import load_coordinates

    with _errors_to_exit_codes():
        cfg = _load_config(ctx, k_min=k_min, k_max=k_max)
        panel_path = _require(cfg.panel, "panel file")
        coords_path = _require(cfg.coordinates, "coordinates file")
        panel = load_panel(panel_path, cfg.schema_)
        coords = load_coordinates(coords_path, panel.region_ids)

        result = select_k(
            coords,
            panel,
            cfg.k_range,
            prior=cfg.prior,
            npoints=cfg.logdet_npoints,
            method=cfg.logdet_method,
            metric=cfg.knn_metric,
            n_jobs=cfg.n_jobs,
            cache_dir=cfg.cache_dir,
        )
        report = _emit(selection_table(result), cfg, "model_comparison")
        manifest = build_manifest(
            "select-k",
            cfg.echo(),
            inputs=[panel_path, coords_path],
            outputs=[report],
            notes=["log-marginal likelihoods use the homoscedastic model (v = 1)"],
        )
        write_manifest(manifest, cfg.output_dir)
        typer.echo(f"selected k = {result.best_k}")


@app.command()
def fit(
    ctx: typer.Context,
    k: Optional[int] = typer.Option(None, "--k", help="Neighbors in the k-NN weight matrix"),
):
    """Run the MCMC sampler and write the estimate report and draws."""
    from packages.comparison import log_marginal_likelihood
    from packages.logdet import cached_logdet_grid
    from packages.panel import demean_two_way, load_panel, scale_variables, validate_panel
    from packages.reporting import build_manifest, estimate_table, write_manifest
    from packages.sampler import posterior_table, prepare_design, run_chain, save_draws

    with _errors_to_exit_codes():
        cfg = _load_config(ctx, k=k)
        panel_path = _require(cfg.panel, "panel file")
        panel = load_panel(panel_path, cfg.schema_)

        validation = validate_panel(panel, cfg.collinearity_threshold)
        for warning in validation.warnings:
            typer.echo(f"⚠️  {warning}", err=True)

        notes = []
        if cfg.scale:
            names = None if cfg.scale == ["all"] else cfg.scale
            panel = scale_variables(panel, names)
            notes.append(f"standardised variables: {', '.join(panel.scaled)}")

        demeaned = demean_two_way(panel)
        w = _load_weights(cfg, panel.region_ids)
        grid = cached_logdet_grid(
            w,
            npoints=cfg.logdet_npoints,
            method=cfg.logdet_method,
            cache_dir=cfg.cache_dir,
            n_jobs=cfg.n_jobs,
        )
        draws = run_chain(demeaned, w, cfg.prior, cfg.mcmc, grid)
        draws.metadata.update({"k": cfg.k, "scaled": list(panel.scaled)})

        log_ml = log_marginal_likelihood(demeaned, w, grid, cfg.prior)
        rows, stats = posterior_table(draws, prepare_design(demeaned, w), log_ml)

        draws_paths = save_draws(draws, cfg.output_dir / "draws")
        report = _emit(estimate_table(rows, stats, notes), cfg, "estimates")
        inputs = [p for p in (panel_path, cfg.coordinates, cfg.weights) if p is not None]
        manifest = build_manifest(
            "fit", cfg.echo(), inputs=inputs, outputs=[report, *draws_paths], notes=notes
        )
        write_manifest(manifest, cfg.output_dir)


@app.command()
def impacts(
    ctx: typer.Context,
    draws: Optional[Path] = typer.Option(None, "--draws", help="Directory written by 'fit'"),
    k: Optional[int] = typer.Option(None, "--k", help="Neighbors in the k-NN weight matrix"),
):
    """Direct, indirect and total impact estimates from a fitted chain."""
    from packages.core.errors import StaleDraws
    from packages.effects import coefficient_sum_summary, impact_inference
    from packages.reporting import build_manifest, impact_table, write_manifest
    from packages.sampler import load_draws

    with _errors_to_exit_codes():
        cfg = _load_config(ctx, k=k)
        draws_dir = _draws_dir(cfg, draws)
        chain = load_draws(draws_dir)
        if cfg.k is None and chain.metadata.get("k") is not None:
            cfg = cfg.model_copy(update={"k": int(chain.metadata["k"])})
        w = _load_weights(cfg, chain.region_ids)
        if chain.w_hash != w.content_hash:
            raise StaleDraws(expected=w.content_hash, found=chain.w_hash)

        summary = impact_inference(
            chain,
            w,
            ndraws=cfg.impact_ndraws,
            seed=cfg.seed,
            mode=cfg.impact_mode,
            rho_source=cfg.rho_source,
            method=cfg.effects_method,
            tol=cfg.series_tolerance,
            n_jobs=cfg.n_jobs,
        )
        table = impact_table(summary, coefficient_sum_summary(chain))
        report = _emit(table, cfg, "impacts")
        inputs = [draws_dir] + [p for p in (cfg.coordinates, cfg.weights) if p is not None]
        write_manifest(
            build_manifest("impacts", cfg.echo(), inputs=inputs, outputs=[report]),
            cfg.output_dir,
        )


@app.command()
def diagnose(
    ctx: typer.Context,
    draws: Optional[Path] = typer.Option(None, "--draws", help="Directory written by 'fit'"),
    frac_first: float = typer.Option(0.1, help="Leading fraction for the Geweke test"),
    frac_last: float = typer.Option(0.9, help="Trailing fraction for the Geweke test"),
):
    """Convergence diagnostics of a fitted chain."""
    from packages.diagnostics import diagnostics_report
    from packages.reporting import build_manifest, diagnostics_table, write_manifest
    from packages.sampler import load_draws

    with _errors_to_exit_codes():
        cfg = _load_config(ctx)
        draws_dir = _draws_dir(cfg, draws)
        chain = load_draws(draws_dir)
        rows = diagnostics_report(chain, frac_first, frac_last)
        report = _emit(diagnostics_table(rows, frac_first, frac_last), cfg, "diagnostics")
        write_manifest(
            build_manifest("diagnose", cfg.echo(), inputs=[draws_dir], outputs=[report]),
            cfg.output_dir,
        )


def main():
    """Console entry point: usage errors exit 1, data errors 2, numerical failures 3."""
    try:
        rc = app(standalone_mode=False)
    except UsageError as e:
        e.show()
        sys.exit(1)
    except typer.Abort:
        sys.exit(1)
    sys.exit(rc if isinstance(rc, int) else 0)


if __name__ == "__main__":
    main()
