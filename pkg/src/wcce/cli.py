"""Command-line entry point (installed as ``wcce``).

Subcommands delegate to the owning modules; every file the CLI writes can be
read back by the matching CLI reader, and reruns with identical inputs and
seeds produce byte-identical outputs. Exit codes: 0 success, 2 usage error,
3 validation error, 4 I/O error. Errors print one machine-parsable line:
``error: <kind>: <message>``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import labeling, loss, metrics, simulation, taxonomy, trainer, weights
from .errors import ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 3
EXIT_IO = 4


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: str, content: str) -> None:
    Path(path).write_text(content)


def _names_arg(value: str) -> tuple[str, ...]:
    names = tuple(v.strip() for v in value.split(",") if v.strip())
    if not names:
        raise ValidationError("empty-input", f"no class names in {value!r}")
    return names


def _resolve_names(args, n: int) -> tuple[str, ...] | None:
    if getattr(args, "names", None):
        return _names_arg(args.names)
    if getattr(args, "classes", None):
        return taxonomy.parse_label_map(_read(args.classes)).class_names
    return None


# --------------------------------------------------------------------------
# weights subcommands
# --------------------------------------------------------------------------


def cmd_weights_ekl(args) -> int:
    tax = taxonomy.parse_taxonomy(_read(args.taxonomy))
    labels = taxonomy.parse_label_map(_read(args.labels))
    matrix = weights.from_taxonomy(tax, labels)
    _write(args.out, weights.weight_matrix_to_csv(matrix))
    print(f"wrote {matrix.n_classes}x{matrix.n_classes} matrix to {args.out}")
    return EXIT_OK


def cmd_weights_ihl(args) -> int:
    ratings, n = weights.parse_instance_ratings_csv(_read(args.ratings))
    matrix = weights.from_instance_ratings(
        ratings, n, _resolve_names(args, n), pool_counts=not args.per_instance
    )
    _write(args.out, weights.weight_matrix_to_csv(matrix))
    print(f"wrote {matrix.n_classes}x{matrix.n_classes} matrix to {args.out}")
    return EXIT_OK


def cmd_weights_chl(args) -> int:
    records = weights.parse_rating_records_csv(_read(args.ratings))
    names = _resolve_names(args, args.n)
    n = len(names) if names is not None else args.n
    if n is None:
        raise ValidationError("empty-input", "provide --n, --names or --classes")
    matrix = weights.from_class_ratings(records, n, names)
    _write(args.out, weights.weight_matrix_to_csv(matrix))
    print(f"wrote {matrix.n_classes}x{matrix.n_classes} matrix to {args.out}")
    return EXIT_OK


def cmd_weights_average(args) -> int:
    matrices = [weights.parse_weight_matrix_csv(_read(p)) for p in args.inputs]
    matrix = weights.average_matrices(matrices)
    _write(args.out, weights.weight_matrix_to_csv(matrix))
    print(f"wrote average of {len(matrices)} matrices to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# training / scoring subcommands
# --------------------------------------------------------------------------


def cmd_synth(args) -> int:
    centers = []
    for chunk in args.centers.split(";"):
        centers.append([float(v) for v in chunk.split(",")])
    data = trainer.generate_synthetic(
        n_classes=len(centers),
        per_class=args.per_class,
        dims=len(centers[0]) if centers else 0,
        centers=centers,
        spread=args.spread,
        seed=args.seed,
        class_names=_names_arg(args.names) if args.names else None,
    )
    _write(args.out, trainer.dataset_to_csv(data))
    print(f"wrote {data.n_samples} samples to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    if args.weights:
        matrix = weights.parse_weight_matrix_csv(_read(args.weights))
        names = matrix.class_names
    else:
        matrix = None
        names = _names_arg(args.names) if args.names else None
    data = trainer.parse_dataset_csv(_read(args.data), class_names=names)
    if matrix is None and args.identity:
        matrix = weights.identity(data.class_names)
    cfg = trainer.TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        hidden_units=args.hidden,
        l2=args.l2,
    )
    result = trainer.train(data, matrix, cfg)
    _write(args.out, trainer.model_to_text(result.model))
    if args.trace_out:
        lines = ["epoch,mean_loss"] + [
            f"{i},{v:.12g}" for i, v in enumerate(result.loss_trace)
        ]
        _write(args.trace_out, "\n".join(lines) + "\n")
    print(f"trained {args.epochs} epochs; final mean loss {result.loss_trace[-1]:.6f}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = trainer.parse_model_text(_read(args.model))
    data = trainer.parse_dataset_csv(_read(args.data), class_names=model.class_names)
    probs = trainer.predict_proba(model, data.features)
    ids = [str(i) for i in range(data.n_samples)]
    _write(args.out, trainer.predictions_to_csv(ids, data.labels, probs))
    preds = np.argmax(probs, axis=1)
    accuracy = float(np.mean(preds == data.labels))
    print(f"wrote {data.n_samples} predictions to {args.out} (accuracy {accuracy:.4f})")
    return EXIT_OK


def _load_prediction_sets(specs) -> list:
    sets = []
    for spec in specs:
        if "=" in spec:
            name, path = spec.split("=", 1)
        else:
            name, path = Path(spec).stem, spec
        sets.append(metrics.parse_predictions_csv(_read(path), name))
    return sets


def cmd_score(args) -> int:
    sets = _load_prediction_sets(args.pred)
    sim = weights.parse_weight_matrix_csv(_read(args.sim))
    mset = metrics.misclassified_intersection(sets)
    report = metrics.hard_soft_scores(mset, sim)
    _write(args.out, metrics.score_report_to_csv(report))
    print(f"|M|={report.intersection_size}; wrote scores to {args.out}")
    return EXIT_OK


def cmd_loss_table(args) -> int:
    sets = _load_prediction_sets(args.pred)
    losses = []
    for spec in args.loss:
        if "=" not in spec:
            raise ValidationError("malformed-line", f"--loss expects NAME=PATH, got {spec!r}")
        name, path = spec.split("=", 1)
        losses.append((name, weights.parse_weight_matrix_csv(_read(path))))
    table = metrics.loss_table(sets, losses)
    _write(args.out, metrics.loss_table_to_csv(table))
    print(f"wrote {len(sets)}x{len(losses)} loss table to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# verification / simulation subcommands
# --------------------------------------------------------------------------


def cmd_verify_lemmas(args) -> int:
    swap = loss.lemma1_suite(args.trials, args.seed)
    shift = loss.lemma2_suite(args.trials, args.seed)
    print(
        f"lemma1 pass={swap.passes} fail={swap.failures}; "
        f"lemma2 pass={shift.passes} fail={shift.failures} boundary={shift.boundary}"
    )
    return EXIT_OK if swap.failures == 0 and shift.failures == 0 else EXIT_VALIDATION


def cmd_simulate(args) -> int:
    grid = tuple(float(v) for v in args.p_true.split(","))
    config = simulation.SimConfig(
        w_c=args.wc, w_f=args.wf, w_correct=args.w_correct,
        p_true_grid=grid, p_f_step=args.step,
    )
    curves = simulation.sweep(config)
    verdict = simulation.regime_report(curves, config)
    _write(args.out, simulation.curves_to_csv(curves))
    if args.verdict_out:
        _write(args.verdict_out, simulation.verdict_to_csv([verdict]))
    print(
        f"regime={verdict.regime_label} monotone_overall={str(verdict.monotone_overall).lower()} "
        f"condition_consistent={str(verdict.condition_consistent).lower()} "
        f"violations={verdict.violations}"
    )
    return EXIT_OK


# --------------------------------------------------------------------------
# labeling server
# --------------------------------------------------------------------------


def cmd_label_serve(args) -> int:
    import uvicorn

    names = taxonomy.parse_label_map(_read(args.classes)).class_names
    attention = (
        labeling.parse_attention_csv(_read(args.attention)) if args.attention else ()
    )
    manifest = (
        labeling.build_image_manifest(args.images, names) if args.images else None
    )
    session = labeling.LabelingSession(
        session_id=args.session_id,
        class_names=names,
        seed=args.seed,
        attention_checks=attention,
        image_manifest=manifest,
    )
    store = labeling.RatingStore(args.out)
    report = labeling.AttentionReport(args.out + ".attention.csv") if attention else None
    app = labeling.create_app(session, store, report, images_dir=args.images)
    print(f"serving {len(names)}-class session on port {args.port}; ratings -> {args.out}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser wiring
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wcce",
        description="Weight matrices, weighted cross-entropy training, and explicability scores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="build weight matrices")
    wsub = w.add_subparsers(dest="source", required=True)

    ekl = wsub.add_parser("ekl", help="from a taxonomy's path similarity")
    ekl.add_argument("--taxonomy", required=True)
    ekl.add_argument("--labels", required=True)
    ekl.add_argument("--out", required=True)
    ekl.set_defaults(func=cmd_weights_ekl)

    ihl = wsub.add_parser("ihl", help="from per-instance label tallies")
    ihl.add_argument("--ratings", required=True)
    ihl.add_argument("--names")
    ihl.add_argument("--classes")
    ihl.add_argument("--per-instance", action="store_true",
                     help="normalize each instance before averaging")
    ihl.add_argument("--out", required=True)
    ihl.set_defaults(func=cmd_weights_ihl)

    chl = wsub.add_parser("chl", help="from per-pair 0..4 ratings")
    chl.add_argument("--ratings", required=True)
    chl.add_argument("--n", type=int)
    chl.add_argument("--names")
    chl.add_argument("--classes")
    chl.add_argument("--out", required=True)
    chl.set_defaults(func=cmd_weights_chl)

    avg = wsub.add_parser("average", help="element-wise mean of matrices")
    avg.add_argument("--in", dest="inputs", action="append", required=True)
    avg.add_argument("--out", required=True)
    avg.set_defaults(func=cmd_weights_average)

    synth = sub.add_parser("synth", help="generate a Gaussian-blob dataset CSV")
    synth.add_argument("--centers", required=True, help="per-class centers, e.g. '0,0;1,0;10,10'")
    synth.add_argument("--per-class", type=int, required=True)
    synth.add_argument("--spread", type=float, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--names")
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    tr = sub.add_parser("train", help="train a softmax classifier")
    tr.add_argument("--data", required=True)
    group = tr.add_mutually_exclusive_group(required=True)
    group.add_argument("--weights", help="weight matrix CSV")
    group.add_argument("--identity", action="store_true", help="identity matrix (vanilla targets)")
    tr.add_argument("--names")
    tr.add_argument("--lr", type=float, default=0.1)
    tr.add_argument("--epochs", type=int, default=100)
    tr.add_argument("--batch-size", type=int, default=32)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--hidden", type=int, default=0)
    tr.add_argument("--l2", type=float, default=0.0)
    tr.add_argument("--out", required=True)
    tr.add_argument("--trace-out")
    tr.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="write a prediction CSV for a dataset")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict)

    sc = sub.add_parser("score", help="hard/soft explicability scores")
    sc.add_argument("--sim", required=True, help="similarity matrix CSV")
    sc.add_argument("--pred", action="append", required=True, help="NAME=PATH or PATH")
    sc.add_argument("--out", required=True)
    sc.set_defaults(func=cmd_score)

    lt = sub.add_parser("loss-table", help="mean loss of each model under each matrix")
    lt.add_argument("--pred", action="append", required=True, help="NAME=PATH or PATH")
    lt.add_argument("--loss", action="append", required=True, help="NAME=PATH")
    lt.add_argument("--out", required=True)
    lt.set_defaults(func=cmd_loss_table)

    vl = sub.add_parser("verify-lemmas", help="run the randomized swap/shift suites")
    vl.add_argument("--trials", type=int, default=10_000)
    vl.add_argument("--seed", type=int, default=0)
    vl.set_defaults(func=cmd_verify_lemmas)

    sim = sub.add_parser("simulate", help="three-class loss sweep and regime verdict")
    sim.add_argument("--wc", type=float, required=True)
    sim.add_argument("--wf", type=float, required=True)
    sim.add_argument("--w-correct", type=float, default=1.0)
    sim.add_argument("--p-true", default="0.1,0.3,0.5,0.7")
    sim.add_argument("--step", type=float, default=0.01)
    sim.add_argument("--out", required=True)
    sim.add_argument("--verdict-out")
    sim.set_defaults(func=cmd_simulate)

    label = sub.add_parser("label", help="rating collection")
    lsub = label.add_subparsers(dest="action", required=True)
    serve = lsub.add_parser("serve", help="serve the labeling endpoints")
    serve.add_argument("--classes", required=True, help="label map CSV (index,name,node)")
    serve.add_argument("--images", help="directory with one subdirectory of images per class")
    serve.add_argument("--out", required=True, help="ratings CSV (appended, crash-safe)")
    serve.add_argument("--port", type=int, required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--session-id", default="session")
    serve.add_argument("--attention", help="attention-check CSV")
    serve.set_defaults(func=cmd_label_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
