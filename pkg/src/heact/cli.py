"""Command-line entry point.

Subcommands regenerate the comparison tables as CSV/JSON:

  fit         kernel-smoothing pipeline -> polynomial JSON + fit report
  bench-dist  method MSE grid over normal distributions
  bench-file  method MSE table on a scalar CSV (embedding statistics)
  sweep       degree sweep: accuracy + encrypted cost per degree
  bench-nn    MLP accuracy per activation on synthetic blobs
  bench-he    plaintext vs encrypted inference for a saved model

Reproducibility contract: passing --seed explicitly freezes the volatile
fields (timestamps and wall times are written as 0.000000), which makes
the output files byte-identical across runs; without --seed the same
default seeds are used for data but real timings are written.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import approx, evalharness, nn
from . import poly as polymod
from .errors import (
    HeactError,
    NumericError,
    ParameterError,
    ParseError,
)
from .he import CkksEvaluator, params_for_depth, profile, serialize_ciphertext
from .poly import relu


def _parse_source(spec, what):
    """Source mini-language: normal:mean,sd,n,seed | grid:lo,hi,n | file:path."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "normal":
            mean, sd, n, seed = rest.split(",")
            return evalharness.sample_normal(int(n), float(mean), float(sd), int(seed))
        if kind == "grid":
            lo, hi, n = rest.split(",")
            return evalharness.sample_grid(float(lo), float(hi), int(n))
        if kind == "file":
            if not os.path.exists(rest):
                raise ParameterError(f"{what}: no such file: {rest}")
            return evalharness.load_scalars_csv(rest)
    except ValueError as exc:
        raise ParameterError(f"{what}: cannot parse source {spec!r}: {exc}") from exc
    raise ParameterError(
        f"{what}: unknown source kind {kind!r} (expected normal:, grid: or file:)"
    )


def _parse_list(text, cast):
    return [cast(part) for part in text.split(",") if part]


def _method_table(names, cheb_interval=(-1.0, 1.0)):
    available = dict(evalharness.default_methods(cheb_interval))
    if names == "all":
        return list(available.items())
    out = []
    for name in _parse_list(names, str):
        if name not in available:
            raise ParameterError(
                f"unknown method {name!r}; choose from {sorted(available)}"
            )
        out.append((name, available[name]))
    return out


def _activation_by_name(name):
    if name == "relu":
        return "relu"
    table = dict(evalharness.default_methods())
    if name not in table:
        raise ParameterError(f"unknown activation {name!r}")
    return table[name]


def _resolve_profile(args):
    name = os.environ.get("HEACT_PROFILE", args.profile)
    return profile(name)


def _fmt(x, frozen=False, volatile=False):
    if x is None:
        return ""
    if volatile and frozen:
        return "0.000000"
    if isinstance(x, float):
        return "%.6f" % x
    return str(x)


def _write_table(path, header, rows, frozen, volatile_cols):
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                _fmt(row.get(col), frozen, col in volatile_cols) for col in header
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# -- subcommands -----------------------------------------------------------


def _cmd_fit(args):
    train = _parse_source(args.train, "--train")
    val = _parse_source(args.val, "--val")
    p, report = approx.run_pipeline(train, val, args.degree, args.ridge_lambda)
    frozen = args.seed is not None
    payload = {
        "polynomial": {
            "coeffs": [round(c, 6) for c in p.coeffs],
            "interval": [round(p.interval[0], 6), round(p.interval[1], 6)],
        },
        "fit_report": {
            "degree": report.degree,
            "train_mse": round(report.train_mse, 6),
            "val_mse": round(report.val_mse, 6),
            "design_condition": round(report.design_condition, 6),
            "fit_seconds": 0.0 if frozen else round(report.fit_seconds, 6),
        },
    }
    import json

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(
        "fit degree %d: val_mse=%.6f coeffs=%s -> %s"
        % (report.degree, report.val_mse, payload["polynomial"]["coeffs"], args.out)
    )
    return 0


def _cmd_bench_dist(args):
    methods = _method_table(args.methods)
    sds = _parse_list(args.sds, float)
    if args.seeds:
        seeds = _parse_list(args.seeds, int)
    else:
        seeds = [args.seed if args.seed is not None else 0]
    frozen = args.seed is not None
    merged = evalharness.BenchReport(
        environment=evalharness.environment_info(frozen=frozen)
    )
    for sd in sds:
        for seed in seeds:
            samples = evalharness.sample_normal(args.n, 0.0, sd, seed)
            report = evalharness.compare_methods(samples, methods)
            merged.rows.extend(report.rows)
    if frozen:
        for row in merged.rows:
            row["wall_time_s"] = 0.0
    evalharness.emit_report(merged, "csv", args.out)
    print(
        "bench-dist: %d methods x %d sds x %d seeds -> %s"
        % (len(methods), len(sds), len(seeds), args.out)
    )
    return 0


def _cmd_bench_file(args):
    if not os.path.exists(args.input):
        raise ParameterError(f"no such input file: {args.input}")
    samples = evalharness.load_scalars_csv(args.input)
    methods = _method_table(args.methods)
    report = evalharness.compare_methods(samples, methods)
    frozen = args.seed is not None
    report.environment = evalharness.environment_info(frozen=frozen)
    if frozen:
        for row in report.rows:
            row["wall_time_s"] = 0.0
    evalharness.emit_report(report, "csv", args.out)
    best = min(report.rows, key=lambda r: r["mse"])
    print(
        "bench-file: %d methods on %d values; best=%s (mse=%.6f) -> %s"
        % (len(methods), len(samples), best["method"], best["mse"], args.out)
    )
    return 0


_SWEEP_HEADER = [
    "degree",
    "coeffs",
    "train_mse",
    "val_mse",
    "enc_mse",
    "levels",
    "enc_latency_s",
    "total_s",
    "ct_bytes",
    "selected",
    "note",
]


def _cmd_sweep(args):
    params = _resolve_profile(args)
    if args.train:
        train = _parse_source(args.train, "--train")
        val = _parse_source(args.val or args.train, "--val")
        train_x, val_x = train.values, val.values
    else:
        fixture = evalharness.load_scalars_csv(str(evalharness.bundled_embedding_fixture()))
        half = len(fixture.values) // 2
        train_x, val_x = fixture.values[:half], fixture.values[half:]
    degrees = _parse_list(args.degrees, int)
    rows = approx.degree_sweep(train_x, val_x, degrees, args.ridge_lambda, params)
    selected = approx.select_degree([rep for rep, _ in rows])
    frozen = args.seed is not None
    table = []
    for rep, cost in rows:
        table.append(
            {
                "degree": rep.degree,
                "coeffs": ";".join("%.6f" % c for c in rep.polynomial.coeffs),
                "train_mse": rep.train_mse,
                "val_mse": rep.val_mse,
                "enc_mse": cost.enc_mse,
                "levels": cost.levels,
                "enc_latency_s": cost.enc_latency_s,
                "total_s": cost.total_s,
                "ct_bytes": cost.ct_bytes,
                "selected": str(rep.degree == selected).lower(),
                "note": cost.error or "",
            }
        )
    _write_table(args.out, _SWEEP_HEADER, table, frozen, {"enc_latency_s", "total_s"})
    print(
        "sweep degrees %s on %d/%d samples: selected degree %s -> %s"
        % (degrees, len(train_x), len(val_x), selected, args.out)
    )
    return 0


_NN_HEADER = ["method", "dataset", "accuracy", "final_loss", "wall_time_s", "seed"]


def _blob_sets(args):
    npc, classes, dim, spread, seed = args.blobs.split(",")
    cfg = {
        "n_per_class": int(npc),
        "num_classes": int(classes),
        "dim": int(dim),
        "spread": float(spread),
        "seed": int(seed),
    }
    tag = "blobs(%(n_per_class)d,%(num_classes)d,%(dim)d,%(spread)g,%(seed)d)" % cfg
    train_set, test_set = evalharness.make_blobs(**cfg)
    return train_set, test_set, tag, cfg


def _cmd_bench_nn(args):
    train_set, test_set, tag, blob_cfg = _blob_sets(args)
    cal = nn.calibration()
    dims = [blob_cfg["dim"], cal["mlp_dims"][1], blob_cfg["num_classes"]]
    cfg = nn.TrainConfig(
        epochs=args.epochs,
        batch_size=cal["train"]["batch_size"],
        learning_rate=cal["train"]["learning_rate"],
        seed=args.seed if args.seed is not None else cal["train"]["seed"],
    )
    frozen = args.seed is not None
    rows = []
    saved = None
    for name in _parse_list(args.activations, str):
        activation = _activation_by_name(name)
        t0 = time.perf_counter()
        model = nn.init_mlp(dims, activation, seed=cfg.seed)
        model, history = nn.train(model, train_set, cfg)
        acc = nn.evaluate(model, test_set)
        rows.append(
            {
                "method": name,
                "dataset": tag,
                "accuracy": acc,
                "final_loss": history[-1],
                "wall_time_s": time.perf_counter() - t0,
                "seed": cfg.seed,
            }
        )
        if args.save_model and name == args.model_activation:
            with open(args.save_model, "w", encoding="utf-8", newline="") as fh:
                fh.write(nn.model_to_json(model))
            saved = args.save_model
    _write_table(args.out, _NN_HEADER, rows, frozen, {"wall_time_s"})
    accs = ", ".join("%s=%.3f" % (r["method"], r["accuracy"]) for r in rows)
    print("bench-nn: %s -> %s%s" % (accs, args.out, f" (model saved to {saved})" if saved else ""))
    return 0


_HE_HEADER = [
    "method",
    "dataset",
    "plain_acc",
    "enc_acc",
    "gap",
    "plain_time_s",
    "enc_time_s",
    "slowdown",
    "levels",
    "ct_bytes",
    "seed",
]


def _cmd_bench_he(args):
    if not os.path.exists(args.model):
        raise ParameterError(f"no such model file: {args.model}")
    with open(args.model, "r", encoding="utf-8") as fh:
        model = nn.model_from_json(fh.read())
    _, test_set, tag, _ = _blob_sets(args)
    base = _resolve_profile(args)
    depth = nn.depth_budget(model)
    params = params_for_depth(
        depth, ring_degree=base.ring_degree, security_note=base.security_note
    )
    seed = args.seed if args.seed is not None else 0
    frozen = args.seed is not None
    ev = CkksEvaluator(params, enc_seed=seed)
    keys = ev.keygen(seed)

    t0 = time.perf_counter()
    plain_logits = nn.forward(model, test_set.points)
    plain_time = time.perf_counter() - t0
    plain_acc = evalharness.accuracy(np.argmax(plain_logits, axis=1), test_set.labels)

    t0 = time.perf_counter()
    enc_logits = nn._encrypted_logits_batch(model, test_set.points, keys, ev)
    enc_time = time.perf_counter() - t0
    enc_acc = evalharness.accuracy(np.argmax(enc_logits, axis=1), test_set.labels)

    sample_ct = ev.encrypt(
        ev.encode(test_set.points[: params.slots, 0]), keys
    )
    name = (
        "relu"
        if model.activation == "relu"
        else "poly-deg%d" % model.activation.degree
    )
    row = {
        "method": name,
        "dataset": tag,
        "plain_acc": plain_acc,
        "enc_acc": enc_acc,
        "gap": enc_acc - plain_acc,
        "plain_time_s": plain_time,
        "enc_time_s": enc_time,
        "slowdown": 0.0 if frozen else enc_time / plain_time,
        "levels": depth,
        "ct_bytes": len(serialize_ciphertext(sample_ct, params)),
        "seed": seed,
    }
    _write_table(
        args.out, _HE_HEADER, [row], frozen, {"plain_time_s", "enc_time_s", "slowdown"}
    )
    print(
        "bench-he: plain=%.3f enc=%.3f gap=%+.3f slowdown=%.1fx levels=%d -> %s"
        % (plain_acc, enc_acc, row["gap"], enc_time / plain_time, depth, args.out)
    )
    return 0


# -- parser ----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="heact",
        description="Polynomial ReLU activations for encrypted inference: "
        "fitting, baselines and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="fix all volatile output fields (timings written as 0) so the "
            "output file is byte-identical across runs",
        )
        p.add_argument("--out", required=True, help="output file path")

    p = sub.add_parser("fit", help="run the kernel-smoothing pipeline")
    p.add_argument("--train", required=True, help="source, e.g. normal:0,1,2048,7")
    p.add_argument("--val", required=True, help="source, e.g. normal:0,1,2048,8")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--lambda", dest="ridge_lambda", type=float, default=1e-3)
    common(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("bench-dist", help="method MSE grid over normal distributions")
    p.add_argument("--sds", default="0.1,0.2,0.5,0.7,1.0")
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--seeds", default="", help="comma list; defaults to --seed or 0")
    p.add_argument("--methods", default="all")
    common(p)
    p.set_defaults(func=_cmd_bench_dist)

    p = sub.add_parser("bench-file", help="method MSE table on a scalar CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--methods", default="all")
    common(p)
    p.set_defaults(func=_cmd_bench_file)

    p = sub.add_parser("sweep", help="degree sweep with encrypted cost")
    p.add_argument("--degrees", default="2,3,4,5")
    p.add_argument("--train", default=None, help="defaults to the bundled fixture")
    p.add_argument("--val", default=None)
    p.add_argument("--lambda", dest="ridge_lambda", type=float, default=1e-3)
    p.add_argument("--profile", default="fast", choices=["fast", "default"])
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench-nn", help="MLP accuracy per activation")
    p.add_argument("--activations", default="relu,kernel-paper,x-squared")
    p.add_argument("--blobs", default="500,3,8,0.5,9", help="npc,classes,dim,spread,seed")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--save-model", default=None)
    p.add_argument("--model-activation", default="kernel-paper")
    common(p)
    p.set_defaults(func=_cmd_bench_nn)

    p = sub.add_parser("bench-he", help="plaintext vs encrypted inference")
    p.add_argument("--model", required=True, help="model JSON from bench-nn")
    p.add_argument("--blobs", default="500,3,8,0.5,9")
    p.add_argument("--profile", default="fast", choices=["fast", "default"])
    common(p)
    p.set_defaults(func=_cmd_bench_he)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, NumericError, HeactError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
