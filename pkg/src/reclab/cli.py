"""Command line entry point: `reclab bench`, `reclab analyze`,
`reclab generate`.

Exit codes: 0 success, 1 input/config error, 2 numerical divergence.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

import click
import numpy as np

from . import analysis, evaluation, ingest, zeroshot
from .baselines import (CfConfig, CfPredictor, SimilarityKind, item_similarities,
                        mf_predict, mf_train)
from .core import (DatasetError, EvalEntry, EvalReport, RatingsDataset,
                   TrainConfig, TrainingError)
from .ingest import MovieLensFormat, ParseError, ParseResult, SchemaError, SplitSpec
from .zeroshot import (ZeroShotAlgo, ZeroShotPredictor, hybrid_train,
                       powermat_train, train_zeroshot)

ALGORITHMS = ("itemcf", "mf", "zeromat", "dotmat", "poissonmat", "powermat",
              "zeromat-hybrid", "dotmat-hybrid", "poissonmat-hybrid", "random")

EXIT_INPUT_ERROR = 1
EXIT_DIVERGENCE = 2

_FORMATS = {"tab100k": MovieLensFormat.TAB_100K,
            "colons1m": MovieLensFormat.COLONS_1M}


def _atomic_write(path: Path, content: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def _load_dataset(path: Path, fmt: str, context_columns) -> ParseResult:
    if fmt in _FORMATS:
        with open(path, "rb") as fh:
            return ingest.parse_movielens(fh, _FORMATS[fmt])
    if fmt == "comoda":
        with open(path, "rb") as fh:
            return ingest.parse_comoda(fh, context_columns or ["mood", "location"])
    raise ValueError(f"unknown dataset format {fmt!r}; expected one of "
                     f"{sorted(_FORMATS) + ['comoda']}")


# stable starting points per trainer. ZeroMat collapses to a uniform fixed
# point if over-trained, and PoissonMat's gradient coefficient is strictly
# positive, so both only tolerate a small step budget.
_ALGO_DEFAULTS: Dict[str, Dict] = {
    "zeromat": {"gamma": 0.002, "epochs": 2},
    "dotmat": {"gamma": 0.005, "epochs": 5},
    "poissonmat": {"gamma": 2e-5, "epochs": 2},
    "powermat": {"gamma": 0.0005, "epochs": 5},
    "zeromat-hybrid": {"gamma": 0.002, "epochs": 2},
    "dotmat-hybrid": {"gamma": 0.005, "epochs": 5},
    "poissonmat-hybrid": {"gamma": 2e-5, "epochs": 2},
}


def _train_config(config: dict, algo: str, seed: int, default_samples: int) -> TrainConfig:
    fields: Dict = {}
    fields.update(_ALGO_DEFAULTS.get(algo, {}))
    train_section = config.get("train", {})
    fields.update(train_section.get("default", {}))
    fields.update(train_section.get(algo, {}))
    fields.setdefault("samples_per_epoch", default_samples)
    fields["seed"] = seed
    return TrainConfig(**fields)


def _evaluate_algorithm(algo: str, config: dict, train: RatingsDataset,
                        test: RatingsDataset, contexts, seed: int) -> EvalEntry:
    default_samples = len(train)
    if algo == "random":
        return EvalEntry("random", evaluation.random_baseline_mae(test, seed), len(test))
    if algo == "itemcf":
        kind = SimilarityKind(config.get("similarity_kind", "cosine"))
        cf_cfg = CfConfig(neighborhood_size=config.get("neighborhood_size", 20),
                          similarity_kind=kind)
        sims = item_similarities(train, kind)
        predictor = CfPredictor(sims, train, cf_cfg)
    elif algo == "mf":
        model = mf_train(train, _train_config(config, algo, seed, default_samples))
        predictor = evaluation.NamedPredictor(
            "mf", lambda u, i, m=model: mf_predict(m, u, i, train.r_max))
    elif algo in ("zeromat", "dotmat", "poissonmat"):
        cfg = _train_config(config, algo, seed, default_samples)
        model = train_zeroshot(ZeroShotAlgo(algo), train.n_users, train.n_items, cfg)
        predictor = ZeroShotPredictor(model, train.r_max, cfg.eps_floor)
    elif algo == "powermat":
        if not contexts:
            raise ValueError("powermat: context required (use a comoda dataset)")
        cfg = _train_config(config, algo, seed, default_samples)
        train_cells = train.cells()
        train_contexts = [c for c in contexts
                          if (c.user_id, c.item_id) in train_cells]
        model = powermat_train(train_contexts, cfg,
                               sigma_u=config.get("sigma_u", 1.0),
                               sigma_v=config.get("sigma_v", 1.0))
        predictor = ZeroShotPredictor(model.factors, train.r_max, cfg.eps_floor)
    elif algo.endswith("-hybrid"):
        base = algo[: -len("-hybrid")]
        cfg = _train_config(config, algo, seed, default_samples)
        mf_cfg = _train_config(config, "mf", seed, default_samples)
        model = hybrid_train(train, ZeroShotAlgo(base), cfg,
                             fill_fraction=config.get("fill_fraction", 1.0),
                             mf_cfg=mf_cfg)
        predictor = evaluation.NamedPredictor(
            algo, lambda u, i, m=model: mf_predict(m, u, i, train.r_max))
    else:
        raise ValueError(f"unknown algorithm {algo!r}; registry: {ALGORITHMS}")
    return EvalEntry(algo, evaluation.mae(predictor, test), len(test))


def _run_seed(config: dict, parsed: ParseResult, seed: int,
              threads: int) -> EvalReport:
    dataset = parsed.dataset
    spec = SplitSpec(test_fraction=config["split"].get("test_fraction", 0.2),
                     seed=seed)
    train, test = ingest.split(dataset, spec)
    algorithms = config["algorithms"]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(
                lambda a: _evaluate_algorithm(a, config, train, test,
                                              parsed.contexts, seed),
                algorithms))
    else:
        entries = [_evaluate_algorithm(a, config, train, test, parsed.contexts, seed)
                   for a in algorithms]
    return EvalReport(entries=tuple(entries),
                      split_ratio=spec.test_fraction, seed=seed)


def run_bench(config: dict, out_dir: Path) -> List[EvalReport]:
    """Full benchmark: ingest, split, train and score every configured
    algorithm, once per repetition seed. Writes per-seed and aggregate
    reports plus a manifest into out_dir."""
    for key in ("dataset", "algorithms"):
        if key not in config:
            raise ValueError(f"config missing required key {key!r}")
    config.setdefault("split", {"test_fraction": 0.2, "seed": 42})
    unknown = [a for a in config["algorithms"] if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithms {unknown}; registry: {ALGORITHMS}")

    parsed = _load_dataset(Path(config["dataset"]["path"]),
                           config["dataset"].get("format", "tab100k"),
                           config.get("context_columns"))
    threads = int(os.environ.get("RECLAB_THREADS", "1"))
    repetitions = int(config.get("repetitions", 1))
    base_seed = int(config["split"].get("seed", 42))

    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "manifest.json",
                  json.dumps(config, sort_keys=True, indent=2) + "\n")

    reports = []
    for rep in range(repetitions):
        seed = base_seed + rep
        report = _run_seed(config, parsed, seed, threads)
        reports.append(report)
        _atomic_write(out_dir / f"report_seed{seed}.json", report.to_json() + "\n")
        _atomic_write(out_dir / f"report_seed{seed}.csv", report.to_csv())

    by_algo: Dict[str, List[float]] = {}
    for report in reports:
        for entry in report.entries:
            by_algo.setdefault(entry.algorithm, []).append(entry.mae)
    aggregate = {
        "repetitions": repetitions,
        "rows": [{"algo": algo,
                  "mae_mean": float(np.mean(vals)),
                  "mae_std": float(np.std(vals))}
                 for algo, vals in by_algo.items()],
    }
    _atomic_write(out_dir / "aggregate.json",
                  json.dumps(aggregate, sort_keys=True, indent=2) + "\n")
    return reports


@click.group()
def main():
    """Recommender benchmark harness: classic baselines, data-free
    cold-start trainers, MAE comparison, and distribution analyses."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None)
def bench(config_path: Path, out_dir: Optional[Path]):
    """Run the configured benchmark and write JSON/CSV reports."""
    try:
        config = json.loads(Path(config_path).read_text(encoding="utf-8"))
        target = out_dir or Path(config.get("out_dir", "reclab-out"))
        run_bench(config, target)
    except TrainingError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DIVERGENCE)
    except (OSError, ValueError, KeyError, DatasetError, ParseError, SchemaError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


@main.command()
@click.option("--mode", type=click.Choice(["zipf", "diversity"]), required=True)
@click.option("--dataset", "dataset_path", type=click.Path(path_type=Path))
@click.option("--format", "fmt", default="tab100k")
@click.option("--input", "input_path", type=click.Path(path_type=Path),
              help="diversity mode: JSON with groups [[K, M], ...] and n_market")
@click.option("--per-group-factorial", is_flag=True, default=False,
              help="diversity mode: divide each term by M_i! instead of N!")
@click.option("--out", "out_dir", type=click.Path(path_type=Path),
              default=Path("reclab-out"))
def analyze(mode, dataset_path, fmt, input_path, per_group_factorial, out_dir):
    """Zipf proportionality check or log-space diversity computation."""
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if mode == "zipf":
            if dataset_path is None:
                raise ValueError("zipf mode requires --dataset")
            parsed = _load_dataset(dataset_path, fmt, None)
            hist = analysis.rating_histogram(parsed.dataset)
            fit = analysis.fit_power_law(
                [(v, c) for v, c in sorted(hist.counts.items()) if c > 0])
            _atomic_write(out_dir / "histogram.json", hist.to_json() + "\n")
            _atomic_write(out_dir / "histogram.csv", hist.to_csv())
            _atomic_write(out_dir / "fit.json", fit.to_json() + "\n")
        else:
            if input_path is None:
                raise ValueError("diversity mode requires --input")
            obj = json.loads(Path(input_path).read_text(encoding="utf-8"))
            inp = analysis.DiversityInput(
                groups=tuple((g[0], g[1]) for g in obj["groups"]),
                n_market=int(obj["n_market"]))
            ordered = analysis.diversity_ordered(inp)
            invariant = analysis.diversity_order_invariant(
                inp, per_group_factorial=per_group_factorial)
            _atomic_write(out_dir / "diversity.json", json.dumps({
                "ordered_ln": ordered,
                "invariant_ln": invariant,
                "difference_ln": ordered - invariant,
            }, sort_keys=True) + "\n")
    except (OSError, ValueError, KeyError, TypeError, DatasetError,
            ParseError, SchemaError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


@main.command()
@click.option("--n-users", type=int, required=True)
@click.option("--n-items", type=int, required=True)
@click.option("--n-ratings", type=int, required=True)
@click.option("--exponent", type=float, default=1.0)
@click.option("--r-max", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def generate(n_users, n_items, n_ratings, exponent, r_max, seed, out_path):
    """Write a synthetic Zipf dataset in MovieLens tab format."""
    try:
        dataset = ingest.generate_zipf(n_users, n_items, n_ratings,
                                       exponent, r_max, seed)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(out_path, ingest.write_movielens(dataset))
    except (OSError, ValueError, DatasetError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


if __name__ == "__main__":
    main()
