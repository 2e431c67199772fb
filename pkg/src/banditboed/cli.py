"""Operator command line: simulate | optimize | validate | infer | explore | serve.

The commands compose into the full workflow: optimize a design, validate it in
silico against baselines, serve the live study, export its data, and compute
posteriors for every participant. Exit codes: 0 ok, 1 user error, 2 internal.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .analysis.plots import (
    MODEL_LABELS,
    plot_bo_trace,
    plot_confusion,
    plot_entropy_hist,
    plot_marginals,
    plot_slice,
)
from .analysis.recovery import recovery_study
from .analysis.reports import write_confusion_csv, write_entropy_csv, write_json
from .analysis.stats import posterior_correlations
from .analysis.entropy import differential_entropy, shannon_entropy
from .critic.network import load_critic, save_critic
from .critic.posterior import posterior_density, posterior_discrete
from .critic.training import train_ensemble
from .designs import Design, load_design, sample_baseline_design, save_design
from .models import ModelKind, PARAM_NAMES
from .profiles import get_profile, training_config
from .search.explore import (
    find_local_optima,
    slice_utility,
    write_optima_csv,
    write_slice_csv,
)
from .search.gp import gp_fit
from .search.loop import load_trace, optimize_design
from .tasks import get_task
from .runfiles import write_manifest

_MODEL_BY_NAME = {m.name: m for m in ModelKind}


def _load_json_config(path):
    if path is None:
        return {}
    raw = json.loads(Path(path).read_text())
    if raw.get("version") not in (None, 1):
        raise click.ClickException(f"unsupported config version {raw.get('version')}")
    raw.pop("version", None)
    return raw


def _out_dir(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_ensemble(ensemble_dir):
    paths = sorted(Path(ensemble_dir).glob("*.critic"))
    if not paths:
        raise click.ClickException(f"no .critic files found in {ensemble_dir}")
    return [load_critic(p) for p in paths]


@click.group()
def cli():
    """Optimal design of bandit experiments via neural mutual-information estimation."""


@cli.command()
@click.option("--task", "task_name", type=click.Choice(["md", "pe-wslts", "pe-aeg", "pe-gls"]), default="md")
@click.option("--design", "design_path", type=click.Path(exists=True), required=True)
@click.option("--n", "n_samples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def simulate(task_name, design_path, n_samples, seed, out):
    """Simulate synthetic participants at a design and export trajectories."""
    task = get_task(task_name)
    design = load_design(design_path)
    out = _out_dir(out)
    sim = task.sample_dataset(design, n_samples, seed=seed)
    from .critic.encoding import decode_experiment

    records_path = out / "trajectories.jsonl"
    count = 0
    with records_path.open("w") as fh:
        for i in range(n_samples):
            data = decode_experiment(sim.dataset.y[i], task.n_blocks, task.n_trials, task.n_arms)
            name = ModelKind(int(sim.models[i])).name
            theta = [float(x) for x in sim.thetas[i]]
            for b, block in enumerate(data.blocks):
                for t in range(block.n_trials):
                    fh.write(
                        json.dumps(
                            {
                                "sample_id": i,
                                "model": name,
                                "theta": theta,
                                "block": b,
                                "trial": t + 1,
                                "action": int(block.actions[t]),
                                "reward": int(block.rewards[t]),
                            }
                        )
                        + "\n"
                    )
                    count += 1
    write_manifest(
        out, "simulate", task_name, seed,
        {"n": n_samples, "design": design.to_lists(), "records": count},
        [records_path],
    )
    click.echo(f"wrote {count} trajectory records to {records_path}")


@cli.command()
@click.option("--task", "task_name", type=click.Choice(["md", "pe-wslts", "pe-aeg", "pe-gls"]), default="md")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--profile", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def optimize(task_name, config_path, profile, seed, out):
    """Search the design space for maximal mutual information."""
    task = get_task(task_name)
    prof = get_profile(profile)
    overrides = _load_json_config(config_path)
    samples = int(overrides.pop("samples", prof.samples))
    budget = int(overrides.pop("bo_budget", prof.bo_budget))
    n_initial = int(overrides.pop("bo_initial", prof.bo_initial))
    ensemble_size = int(overrides.pop("ensemble_size", prof.ensemble_size))
    if "holdout" not in overrides:
        # keep the paper's 1:5 held-out ratio when the sample budget shrinks
        overrides["holdout"] = min(prof.holdout, samples // 5)
    cfg = training_config(task, prof, **overrides)
    out = _out_dir(out)
    trace_path = out / "trace.jsonl"
    click.echo(
        f"optimizing {task_name} ({task.design_dim} design dims, {budget} evaluations, "
        f"{samples} samples/evaluation, profile {profile})"
    )
    result = optimize_design(
        task, samples, cfg, budget, n_initial, seed=seed, trace_path=trace_path
    )
    design_path = out / "design.json"
    save_design(result.best_design, design_path)
    report_path = out / "training_report.json"
    write_json(
        {
            "best_mi": result.state.incumbent_utility,
            "history": result.best_critic.history,
        },
        report_path,
    )
    ensemble_dir = out / "ensemble"
    ensemble_dir.mkdir(exist_ok=True)
    sim = task.sample_dataset(result.best_design, samples, seed=seed + 999983)
    members = train_ensemble(task.architecture(), cfg, sim.dataset, ensemble_size, seed=seed)
    member_paths = []
    for i, member in enumerate(members):
        path = ensemble_dir / f"{task_name}-member-{i:02d}.critic"
        save_critic(member.network, path)
        member_paths.append(path)
    trace_plot = out / "bo_trace.svg"
    plot_bo_trace(result.state.utilities, result.state.n_initial, trace_plot)
    write_manifest(
        out, "optimize", task_name, seed,
        {
            "profile": profile, "samples": samples, "budget": budget,
            "n_initial": n_initial, "ensemble_size": ensemble_size,
            "epochs": cfg.epochs, "best_mi": result.state.incumbent_utility,
        },
        [design_path, trace_path, report_path, trace_plot, *member_paths],
    )
    click.echo(f"best design (MI {result.state.incumbent_utility:.4f} nats): {result.best_design.to_lists()}")


DEFAULT_RECOVERY_THETAS = {
    ModelKind.WSLTS: [0.7, 0.8, 1.0],
    ModelKind.AEG: [0.1, 0.7],
    ModelKind.GLS: [0.8, 0.5, 0.5, 0.5, 0.5],
}


@cli.command()
@click.option("--task", "task_name", type=click.Choice(["md", "pe-wslts", "pe-aeg", "pe-gls"]), default="md")
@click.option("--design", "design_path", type=click.Path(exists=True), required=True)
@click.option("--ensemble", "ensemble_dir", type=click.Path(exists=True), required=True)
@click.option("--baselines", type=int, default=10, show_default=True, help="Beta(2,2) baseline designs to train and compare against")
@click.option("--n-sims", type=int, default=1000, show_default=True)
@click.option("--theta", "theta_json", default=None, help="ground-truth parameters for parameter-estimation recovery (JSON list or list of lists)")
@click.option("--samples", type=int, default=None, help="override training sample budget for baseline ensembles")
@click.option("--profile", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def validate(task_name, design_path, ensemble_dir, baselines, n_sims, theta_json, samples, profile, seed, out):
    """In-silico validation: recovery at a design versus baseline designs."""
    if task_name != "md":
        _validate_pe(task_name, design_path, ensemble_dir, n_sims, theta_json, seed, out)
        return
    task = get_task(task_name)
    design = load_design(design_path)
    members = _load_ensemble(ensemble_dir)
    prof = get_profile(profile)
    if samples is None:
        samples = prof.samples
    cfg = training_config(task, prof, holdout=min(prof.holdout, samples // 5))
    out = _out_dir(out)
    click.echo(f"recovery at the candidate design ({n_sims} simulations)")
    optimal = recovery_study(task, design, members, n_sims, seed=seed, condition="optimal")
    rng = np.random.default_rng(seed)
    base_entropies = []
    base_diagonals = []
    artifacts = []
    for b in range(baselines):
        base_design = sample_baseline_design(task.n_blocks, task.n_arms, rng)
        click.echo(f"training baseline ensemble {b + 1}/{baselines}")
        sim = task.sample_dataset(base_design, samples, seed=seed + 101 * b + 7)
        base_members = train_ensemble(
            task.architecture(), cfg, sim.dataset, len(members), seed=seed + 13 * b
        )
        res = recovery_study(
            task, base_design, base_members, n_sims, seed=seed + 31 * b, condition="baseline"
        )
        base_entropies.append(res.entropy)
        base_diagonals.append(res.confusion.mean_diagonal())
    confusion_csv = out / "confusion_optimal.csv"
    write_confusion_csv(optimal.confusion, confusion_csv)
    confusion_svg = out / "confusion_optimal.svg"
    plot_confusion(optimal.confusion.normalized(), confusion_svg)
    entropy_csv = out / "entropies.csv"
    write_entropy_csv([optimal.entropy, *base_entropies], entropy_csv)
    entropy_svg = out / "entropy_hist.svg"
    all_base = np.concatenate([r.entropies for r in base_entropies]) if base_entropies else np.array([])
    groups = {"optimal": optimal.entropy.entropies}
    if all_base.size:
        groups["baseline"] = all_base
    plot_entropy_hist(groups, entropy_svg, kind="shannon")
    report = {
        "task": task_name,
        "n_sims": n_sims,
        "optimal": {
            "design": design.to_lists(),
            "mean_diagonal": optimal.confusion.mean_diagonal(),
            "mean_entropy": optimal.entropy.mean,
        },
        "baseline": {
            "n_designs": baselines,
            "mean_diagonal": float(np.mean(base_diagonals)) if base_diagonals else None,
            "mean_entropy": float(all_base.mean()) if all_base.size else None,
        },
    }
    report_path = out / "report.json"
    write_json(report, report_path)
    artifacts += [confusion_csv, confusion_svg, entropy_csv, entropy_svg, report_path]
    write_manifest(out, "validate", task_name, seed, {"n_sims": n_sims, "baselines": baselines}, artifacts)
    click.echo(json.dumps(report["optimal"], indent=2))
    if base_diagonals:
        click.echo(json.dumps(report["baseline"], indent=2))


def _validate_pe(task_name, design_path, ensemble_dir, n_sims, theta_json, seed, out):
    """Parameter recovery at a design with a pretrained ensemble."""
    from .analysis.recovery import parameter_recovery

    task = get_task(task_name)
    design = load_design(design_path)
    members = _load_ensemble(ensemble_dir)
    thetas = (
        json.loads(theta_json)
        if theta_json is not None
        else [DEFAULT_RECOVERY_THETAS[ModelKind(task.model)]]
    )
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    out = _out_dir(out)
    result = parameter_recovery(
        task, design, members, thetas, n_sims=n_sims, seed=seed, condition="optimal"
    )
    names = PARAM_NAMES[ModelKind(task.model)]
    entropy_csv = out / "entropies.csv"
    write_entropy_csv([result.entropy], entropy_csv)
    entropy_svg = out / "entropy_hist.svg"
    plot_entropy_hist({"optimal": result.entropy.entropies}, entropy_svg, kind="differential")
    marginal_svgs = []
    for j in range(thetas.shape[0]):
        path = out / f"marginals_{j}.svg"
        plot_marginals(
            result.grid,
            {"optimal": result.mean_posteriors[j]},
            path,
            names,
            title=f"true theta = {np.round(thetas[j], 3).tolist()}",
        )
        marginal_svgs.append(path)
    report = {
        "task": task_name,
        "n_sims": n_sims,
        "true_thetas": thetas,
        "posterior_means": result.posterior_means,
        "mean_abs_errors": result.mean_abs_errors,
        "mean_entropy": result.entropy.mean,
    }
    report_path = out / "report.json"
    write_json(report, report_path)
    write_manifest(
        out, "validate", task_name, seed, {"n_sims": n_sims},
        [entropy_csv, entropy_svg, report_path, *marginal_svgs],
    )
    click.echo(
        f"posterior means {np.round(result.posterior_means, 3).tolist()} "
        f"(mean differential entropy {result.entropy.mean:.3f} nats)"
    )


@cli.command()
@click.option("--task", "task_name", type=click.Choice(["md", "pe-wslts", "pe-aeg", "pe-gls"]), default="md")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--ensemble", "ensemble_dir", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def infer(task_name, dataset_path, ensemble_dir, out):
    """Amortized posteriors for every participant in an exported dataset."""
    task = get_task(task_name)
    members = _load_ensemble(ensemble_dir)
    raw = json.loads(Path(dataset_path).read_text())
    records = raw["records"] if isinstance(raw, dict) else raw
    out = _out_dir(out)
    rows = []
    full = []
    for rec in records:
        blocks = rec["blocks"]
        if task.name == "md":
            use = blocks[:2]
        else:
            use = blocks[2:5]
        actions = np.asarray([b["actions"] for b in use], dtype=np.int64)[None, :, :]
        rewards = np.asarray([b["rewards"] for b in use], dtype=np.int64)[None, :, :]
        y = task.encode_data(actions, rewards)[0]
        if task.name == "md":
            post = posterior_discrete(members, y, task.class_features(), task.prior())
            rows.append(
                {
                    "session_id": rec["session_id"],
                    "condition": rec.get("condition"),
                    **{f"p_{m.lower()}": float(p) for m, p in zip(MODEL_LABELS, post)},
                    "map_model": MODEL_LABELS[int(np.argmax(post))],
                    "entropy_nats": shannon_entropy(post),
                }
            )
            full.append({"session_id": rec["session_id"], "posterior": post})
        else:
            grid = task.grid()
            dens = posterior_density(members, y, grid)
            corr = posterior_correlations(grid.nodes, grid.weights * dens)
            mean = grid.mean(dens)
            names = PARAM_NAMES[ModelKind(task.model)]
            row = {
                "session_id": rec["session_id"],
                "condition": rec.get("condition"),
                "entropy_nats": differential_entropy(dens, grid.weights),
            }
            row.update({f"mean_{n}": float(v) for n, v in zip(names, mean)})
            tril = np.tril_indices(len(names), k=-1)
            row.update(
                {
                    f"corr_{names[i]}_{names[j]}": float(corr.matrix[i, j])
                    for i, j in zip(*tril)
                }
            )
            rows.append(row)
            full.append(
                {
                    "session_id": rec["session_id"],
                    "marginals": {
                        names[k]: {
                            "values": grid.axes[k].values,
                            "density": grid.marginal(dens, k)[1],
                        }
                        for k in range(len(names))
                    },
                }
            )
    csv_path = out / "posteriors.csv"
    import csv as _csv

    with csv_path.open("w", newline="") as fh:
        if rows:
            writer = _csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        else:
            fh.write("session_id\n")
    json_path = out / "posteriors.json"
    write_json(full, json_path)
    click.echo(f"wrote posteriors for {len(rows)} participants")


@cli.command()
@click.option("--trace", "trace_path", type=click.Path(exists=True), required=True)
@click.option("--restarts", type=int, default=20, show_default=True)
@click.option("--slice", "slice_spec", default=None, help="comma-separated fixed design with 'x' marking the two free axes, e.g. 0,x,x,1,1,0")
@click.option("--resolution", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def explore(trace_path, restarts, slice_spec, resolution, seed, out):
    """Refit the utility surface from a BO trace; slice it and rank local optima."""
    trace = load_trace(trace_path)
    if len(trace) < 2:
        raise click.ClickException("trace has fewer than two evaluations")
    X = np.array([line["design"] for line in trace])
    y = np.array([line["mi"] for line in trace])
    gp = gp_fit(X, y, seed=seed)
    out = _out_dir(out)
    optima = find_local_optima(gp, n_restarts=restarts, seed=seed)
    optima_path = out / "optima.csv"
    write_optima_csv(optima, optima_path)
    artifacts = [optima_path]
    if slice_spec is not None:
        parts = [p.strip() for p in slice_spec.split(",")]
        if len(parts) != X.shape[1] or sum(p == "x" for p in parts) != 2:
            raise click.ClickException(
                f"slice must give {X.shape[1]} entries with exactly two 'x'"
            )
        axes = tuple(i for i, p in enumerate(parts) if p == "x")
        fixed = np.array([0.0 if p == "x" else float(p) for p in parts])
        sl = slice_utility(gp, fixed, axes, resolution=resolution)
        slice_csv = out / "slice.csv"
        write_slice_csv(sl, slice_csv)
        slice_svg = out / "slice.svg"
        plot_slice(sl, slice_svg)
        artifacts += [slice_csv, slice_svg]
    write_manifest(out, "explore", None, seed, {"restarts": restarts, "slice": slice_spec}, artifacts)
    for opt in optima:
        click.echo(f"rank {opt.rank}: MI {opt.utility:.3f} at {np.round(opt.design, 3).tolist()}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data-dir", default=None)
@click.option("--ensemble-dir", default=None)
@click.option("--static-dir", default=None, help="directory with the built task UI")
@click.option("--bind", default=None, help="host:port")
@click.option("--token", default=None, help="operator token for /export")
@click.option("--seed", type=int, default=None)
def serve(config_path, data_dir, ensemble_dir, static_dir, bind, token, seed):
    """Run the live study service."""
    import os

    import uvicorn

    from .service.app import (
        ENV_BIND,
        ENV_DATA_DIR,
        ENV_ENSEMBLE_DIR,
        ENV_OPERATOR_TOKEN,
        ENV_STATIC_DIR,
        EnsembleInference,
        create_app,
    )
    from .service.config import default_study_config, load_study_config

    data_dir = data_dir or os.environ.get(ENV_DATA_DIR, "study-data")
    ensemble_dir = ensemble_dir or os.environ.get(ENV_ENSEMBLE_DIR)
    static_dir = static_dir or os.environ.get(ENV_STATIC_DIR)
    token = token or os.environ.get(ENV_OPERATOR_TOKEN)
    bind = bind or os.environ.get(ENV_BIND, "127.0.0.1:8000")
    config = load_study_config(config_path) if config_path else default_study_config()
    inference = EnsembleInference.from_dir(ensemble_dir) if ensemble_dir else None
    app = create_app(
        config, data_dir, inference=inference, operator_token=token,
        service_seed=seed, static_dir=static_dir,
    )
    host, _, port = bind.partition(":")
    click.echo(f"serving on {host}:{port or 8000} (data: {data_dir})")
    uvicorn.run(app, host=host, port=int(port or 8000), log_level="warning")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ValueError, FileNotFoundError, FileExistsError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # internal failure
        click.echo(f"internal error: {exc!r}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
