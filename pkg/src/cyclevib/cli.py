"""Command-line interface.

Subcommands: gen-data, train, eval, traverse, sweep. Settings resolve in
three layers: dataclass defaults, then an INI config file (sections [data],
[model], [train], [loss]), then command-line flags. The resolved
configuration is echoed into the output directory so every run is
reproducible from its artifacts alone.

Exit codes: 0 success, 1 assertion failure, 2 configuration error,
3 numeric or runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import re
import sys
from pathlib import Path

import numpy as np

from .data import LevelSetSpec, generate, load_dataset, save_dataset
from .errors import ConfigError, CycleVibError, NumericError, ShapeError, TapeError
from .evaluation import (
    TraversalSpec,
    evaluate,
    save_sparsity,
    save_traversal,
    traverse,
)
from .model import CycleVibModel, ModelConfig, load_checkpoint
from .objectives import LossWeights
from .trainer import TrainConfig, fit, recommend_weights, run_sweep

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SHAPES = {"ellipse": 2, "ellipsoid": 3}


class AssertionFailed(CycleVibError):
    pass


def _load_ini(path: str | None) -> configparser.ConfigParser:
    ini = configparser.ConfigParser()
    if path:
        if not Path(path).exists():
            raise ConfigError(f"config file not found: {path}")
        ini.read(path)
    return ini


def _layered(defaults: dict, ini: configparser.ConfigParser, section: str,
             overrides: dict) -> dict:
    """defaults < ini[section] < non-None overrides, with type coercion."""
    out = dict(defaults)
    if ini.has_section(section):
        for key, raw in ini.items(section):
            if key not in out:
                raise ConfigError(f"unknown key '{key}' in [{section}]")
            out[key] = _coerce(raw, out[key])
    for key, val in overrides.items():
        if val is not None:
            out[key] = val
    return out


def _coerce(raw: str, template):
    if isinstance(template, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(template, int) and not isinstance(template, bool):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    if isinstance(template, (tuple, list)):
        return tuple(float(v) if "." in v else int(v) for v in raw.split(",") if v.strip())
    if template is None:
        return int(raw)
    return raw


def _echo_resolved(out_dir: Path, command: str, sections: dict[str, dict]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    ini = configparser.ConfigParser()
    for name, values in sections.items():
        ini[name] = {k: ("" if v is None else (",".join(map(str, v))
                                               if isinstance(v, (tuple, list)) else str(v)))
                     for k, v in values.items()}
    with open(out_dir / f"resolved-{command}.ini", "w") as fh:
        ini.write(fh)


def _floats_arg(text: str | None):
    if text is None:
        return None
    return [float(v) for v in text.split(",") if v.strip()]


def _ints_arg(text: str | None):
    if text is None:
        return None
    return [int(v) for v in text.split(",") if v.strip()]


# -- subcommands -------------------------------------------------------------------

def cmd_gen_data(args) -> int:
    ini = _load_ini(args.config)
    defaults = {"shape": "ellipse", "n": 10000, "seed": 0, "noise_std": 0.01,
                "rotation_deg": 45.0, "semi_axes": ()}
    vals = _layered(defaults, ini, "data", {
        "shape": args.shape, "n": args.n, "seed": args.seed,
        "noise_std": args.noise_std, "rotation_deg": args.rotation_deg,
        "semi_axes": tuple(_floats_arg(args.semi_axes) or ()) or None,
    })
    if vals["shape"] not in SHAPES:
        raise ConfigError(f"shape must be one of {sorted(SHAPES)}, got {vals['shape']!r}")
    spec = LevelSetSpec(
        dim=SHAPES[vals["shape"]],
        semi_axes=tuple(vals["semi_axes"]) or None,
        rotation_deg=float(vals["rotation_deg"]),
        property_noise_std=float(vals["noise_std"]),
        n_points=int(vals["n"]),
        seed=int(vals["seed"]),
    )
    ds = generate(spec)
    out = Path(args.out)
    csv_path, json_path = save_dataset(ds, out)
    _echo_resolved(out.parent, "gen-data", {"data": {**vals, "out": str(out)}})
    print(f"wrote {csv_path} ({ds.n} rows, {len(ds.train_idx)} train / "
          f"{len(ds.test_idx)} test), seed={spec.seed}")
    return EXIT_OK


def _model_train_values(args, ini):
    model_defaults = {
        "d_z0": 3, "d_z1": 5, "encoder_widths": (64, 64), "decx_widths": (64, 64),
        "decy_widths": (64, 64), "noise_mode": "fixed_unit", "encoder_output_gain": 8.0,
        "seed": 0,
    }
    train_defaults = {
        "epochs": TrainConfig.epochs, "batch_size": TrainConfig.batch_size,
        "lr": TrainConfig.lr, "log_every": TrainConfig.log_every,
        "checkpoint_every": TrainConfig.checkpoint_every,
        "warmup_steps": TrainConfig.warmup_steps, "compression": TrainConfig.compression,
        "anneal_start_step": TrainConfig.anneal_start_step,
        "anneal_floor": TrainConfig.anneal_floor,
        "anneal_threshold": TrainConfig.anneal_threshold,
        "seed": 0,
    }
    loss_defaults = {"lam": ModelConfig.lam, "beta": ModelConfig.beta}
    model_vals = _layered(model_defaults, ini, "model", {
        "d_z0": args.d_z0, "d_z1": args.d_z1, "noise_mode": args.noise_mode,
        "seed": args.seed,
    })
    train_vals = _layered(train_defaults, ini, "train", {
        "epochs": args.epochs, "batch_size": args.batch_size, "lr": args.lr,
        "warmup_steps": args.warmup_steps, "seed": args.seed,
        "compression": getattr(args, "compression", None),
        "log_every": getattr(args, "log_every", None),
        "anneal_start_step": getattr(args, "anneal_start_step", None),
        "anneal_floor": getattr(args, "anneal_floor", None),
        "anneal_threshold": getattr(args, "anneal_threshold", None),
    })
    loss_vals = _layered(loss_defaults, ini, "loss", {"lam": args.lam, "beta": args.beta})
    return model_vals, train_vals, loss_vals


def cmd_train(args) -> int:
    ini = _load_ini(args.config)
    model_vals, train_vals, loss_vals = _model_train_values(args, ini)
    if args.baseline == "beta-vae":
        loss_vals["beta"] = 0.0
        train_vals["compression"] = "standard_kl"
        model_vals["noise_mode"] = "learned_per_dim"
    ds = load_dataset(args.data)

    model_config = ModelConfig(
        d_in=ds.X.shape[1], d_y=ds.Y.shape[1],
        d_z0=int(model_vals["d_z0"]), d_z1=int(model_vals["d_z1"]),
        encoder_widths=tuple(model_vals["encoder_widths"]),
        decx_widths=tuple(model_vals["decx_widths"]),
        decy_widths=tuple(model_vals["decy_widths"]),
        noise_mode=model_vals["noise_mode"],
        encoder_output_gain=float(model_vals["encoder_output_gain"]),
        lam=float(loss_vals["lam"]), beta=float(loss_vals["beta"]),
        seed=int(model_vals["seed"]),
    )
    train_config = TrainConfig(
        epochs=int(train_vals["epochs"]), batch_size=int(train_vals["batch_size"]),
        lr=float(train_vals["lr"]), log_every=int(train_vals["log_every"]),
        checkpoint_every=int(train_vals["checkpoint_every"]),
        warmup_steps=int(train_vals["warmup_steps"]),
        anneal_start_step=int(train_vals["anneal_start_step"]),
        anneal_floor=float(train_vals["anneal_floor"]),
        anneal_threshold=float(train_vals["anneal_threshold"]),
        compression=train_vals["compression"], seed=int(train_vals["seed"]),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _echo_resolved(out, "train", {"model": model_vals, "train": train_vals,
                                  "loss": loss_vals,
                                  "paths": {"data": args.data, "out": str(out)}})
    initial = None
    if args.resume:
        initial, _manifest = load_checkpoint(args.resume)
    state = fit(ds, model_config, train_config,
                weights=LossWeights(lam=model_config.lam, beta=model_config.beta),
                curve_path=out / "curve.csv", checkpoint_path=out / "checkpoint",
                initial_model=initial)
    print(f"trained {state.step} steps ({state.epoch} epochs); "
          f"checkpoint at {out / 'checkpoint.json'}")
    return EXIT_OK


_ASSERT_RE = re.compile(r"^\s*(\w+)\s*(<=|>=|<|>)\s*([-+0-9.eE]+)\s*$")


def _check_assertions(exprs, metrics: dict) -> list[str]:
    failures = []
    for expr in exprs or []:
        m = _ASSERT_RE.match(expr)
        if not m:
            raise ConfigError(f"cannot parse assertion {expr!r}; "
                              "expected e.g. 'invariance<=0.02'")
        name, op, rhs = m.group(1), m.group(2), float(m.group(3))
        aliases = {"invariance": "invariance_mae"}
        key = aliases.get(name, name)
        if key not in metrics:
            raise ConfigError(f"unknown metric {name!r}; available: {sorted(metrics)}")
        lhs = metrics[key]
        ok = {"<=": lhs <= rhs, "<": lhs < rhs, ">=": lhs >= rhs, ">": lhs > rhs}[op]
        if not ok:
            failures.append(f"{name}={lhs:.6g} violates {expr.strip()}")
    return failures


def cmd_eval(args) -> int:
    ds = load_dataset(args.data)
    model, _manifest = load_checkpoint(args.checkpoint)
    report = evaluate(model, ds, n_samples=args.n_samples,
                      n_references=args.n_references, seed=args.eval_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.save(out / "report.json")
    save_sparsity(report.sigma_signal, report.sigma_noise, report.selected_dims,
                  report.d_z0, out / "sparsity.csv")
    _echo_resolved(out, "eval", {"eval": {
        "data": args.data, "checkpoint": args.checkpoint,
        "n_samples": args.n_samples, "n_references": args.n_references,
        "eval_seed": args.eval_seed,
    }})
    metrics = {
        "mae_x": report.mae_x, "mae_y": report.mae_y,
        "invariance_mae": report.invariance_mae,
        "selected_z0": int(np.sum(report.selected_dims[:report.d_z0])),
        "selected_z1": int(np.sum(report.selected_dims[report.d_z0:])),
    }
    print(json.dumps(metrics, indent=1))
    failures = _check_assertions(args.asserts, metrics)
    if failures:
        for f in failures:
            print(f"ASSERTION FAILED: {f}", file=sys.stderr)
        raise AssertionFailed("; ".join(failures))
    return EXIT_OK


def cmd_traverse(args) -> int:
    ds = load_dataset(args.data)
    model, _manifest = load_checkpoint(args.checkpoint)
    spec = TraversalSpec(
        z0_dim=args.z0_dim,
        z0_values=_floats_arg(args.z0_values),
        z1_dims=_ints_arg(args.z1_dims),
        steps=args.steps,
        extend=args.extend,
    )
    table = traverse(model, ds, spec)
    out = Path(args.out)
    save_traversal(table, out)
    _echo_resolved(out.parent, "traverse", {"traverse": {
        "data": args.data, "checkpoint": args.checkpoint,
        "z0_dim": table["z0_dim"], "z1_dims": ",".join(map(str, table["z1_dims"])),
        "steps": args.steps, "extend": args.extend,
    }})
    print(f"traversal over z0 dim {table['z0_dim']} and z1 dims {table['z1_dims']} "
          f"-> {out} ({table['rows'].shape[0]} rows)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    ini = _load_ini(args.config)
    model_vals, train_vals, _loss = _model_train_values(args, ini)
    ds = load_dataset(args.data)
    model_config = ModelConfig(
        d_in=ds.X.shape[1], d_y=ds.Y.shape[1],
        d_z0=int(model_vals["d_z0"]), d_z1=int(model_vals["d_z1"]),
        encoder_widths=tuple(model_vals["encoder_widths"]),
        decx_widths=tuple(model_vals["decx_widths"]),
        decy_widths=tuple(model_vals["decy_widths"]),
        noise_mode=model_vals["noise_mode"],
        encoder_output_gain=float(model_vals["encoder_output_gain"]),
        seed=int(model_vals["seed"]),
    )
    train_config = TrainConfig(
        epochs=int(train_vals["epochs"]), batch_size=int(train_vals["batch_size"]),
        lr=float(train_vals["lr"]), log_every=int(train_vals["log_every"]),
        warmup_steps=int(train_vals["warmup_steps"]),
        anneal_start_step=int(train_vals["anneal_start_step"]),
        anneal_floor=float(train_vals["anneal_floor"]),
        anneal_threshold=float(train_vals["anneal_threshold"]),
        compression=train_vals["compression"], seed=int(train_vals["seed"]),
    )
    lams = _floats_arg(args.lams) or [0.1, 1.0, 10.0, 100.0]
    betas = _floats_arg(args.betas) or [0.1, 1.0, 10.0]
    rows = run_sweep(ds, model_config, train_config, lams, betas,
                     max_workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    import csv as _csv
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = _csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    best = recommend_weights(rows, tol=args.tol)
    with open(out / "recommended.json", "w") as fh:
        json.dump(best, fh, indent=1)
        fh.write("\n")
    _echo_resolved(out, "sweep", {"sweep": {
        "data": args.data, "lams": ",".join(map(str, lams)),
        "betas": ",".join(map(str, betas)), "tol": args.tol,
    }, "model": model_vals, "train": train_vals})
    print(f"swept {len(rows)} configurations; recommended lam={best['lam']} "
          f"beta={best['beta']} (invariance {best['invariance_mae']:.5f})")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclevib",
                                     description="cycle-consistent conditional-invariance "
                                                 "bottleneck experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a level-set dataset (CSV + JSON sidecar)")
    p.add_argument("--config")
    p.add_argument("--shape", choices=sorted(SHAPES))
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-std", type=float, dest="noise_std")
    p.add_argument("--rotation-deg", type=float, dest="rotation_deg")
    p.add_argument("--semi-axes", dest="semi_axes", help="comma-separated, e.g. 1.0,0.5")
    p.add_argument("--out", required=True, help="output stem (writes .csv and .json)")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model on a generated dataset")
    p.add_argument("--config")
    p.add_argument("--data", required=True, help="dataset stem from gen-data")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--lr", type=float)
    p.add_argument("--warmup-steps", type=int, dest="warmup_steps")
    p.add_argument("--anneal-start-step", type=int, dest="anneal_start_step")
    p.add_argument("--anneal-floor", type=float, dest="anneal_floor")
    p.add_argument("--anneal-threshold", type=float, dest="anneal_threshold")
    p.add_argument("--log-every", type=int, dest="log_every")
    p.add_argument("--compression", choices=("sparse", "standard_kl"))
    p.add_argument("--d-z0", type=int, dest="d_z0")
    p.add_argument("--d-z1", type=int, dest="d_z1")
    p.add_argument("--noise-mode", choices=("fixed_unit", "learned_per_dim"),
                   dest="noise_mode")
    p.add_argument("--lam", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--baseline", choices=("beta-vae",),
                   help="beta-vae: cycle off, standard KL, learned noise")
    p.add_argument("--resume", help="checkpoint stem to continue from")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint (report JSON + sparsity CSV)")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True, help="checkpoint stem")
    p.add_argument("--out", required=True)
    p.add_argument("--n-samples", type=int, default=400, dest="n_samples")
    p.add_argument("--n-references", type=int, default=25, dest="n_references")
    p.add_argument("--eval-seed", type=int, default=0, dest="eval_seed")
    p.add_argument("--assert", action="append", dest="asserts", metavar="EXPR",
                   help="e.g. 'invariance<=0.02'; repeatable; exit 1 on violation")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("traverse", help="latent traversal table in original coordinates")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--z0-dim", type=int, dest="z0_dim")
    p.add_argument("--z0-values", dest="z0_values", help="comma-separated fixed values")
    p.add_argument("--z1-dims", dest="z1_dims", help="comma-separated dim indices")
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--extend", action="store_true",
                   help="sweep mean +/- 2 std instead of the observed range")
    p.set_defaults(func=cmd_traverse)

    p = sub.add_parser("sweep", help="train/eval a (lam, beta) grid and recommend weights")
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lams", help="comma-separated lambda grid")
    p.add_argument("--betas", help="comma-separated beta grid")
    p.add_argument("--tol", type=float, default=0.25)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--lr", type=float)
    p.add_argument("--warmup-steps", type=int, dest="warmup_steps")
    p.add_argument("--compression", choices=("sparse", "standard_kl"))
    p.add_argument("--d-z0", type=int, dest="d_z0")
    p.add_argument("--d-z1", type=int, dest="d_z1")
    p.add_argument("--noise-mode", choices=("fixed_unit", "learned_per_dim"),
                   dest="noise_mode")
    p.add_argument("--lam", type=float, help=argparse.SUPPRESS)
    p.add_argument("--beta", type=float, help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AssertionFailed:
        return EXIT_ASSERTION
    except (ConfigError, ShapeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, TapeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
