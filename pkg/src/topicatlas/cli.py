"""Command-line pipeline: ingest/train, export the topic web, evaluate, serve."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation, inference, serve, topicweb

logger = logging.getLogger(__name__)


def _add_train_flags(parser):
    parser.add_argument("--kw", type=int, default=70, help="number of WordTopics")
    parser.add_argument("--ky", type=int, default=70, help="number of DocTopics")
    parser.add_argument("--alpha", type=float, default=0.01, help="Dirichlet prior per component")
    parser.add_argument("--inner-tol", type=float, default=1e-9)
    parser.add_argument("--inner-iters", type=int, default=100)
    parser.add_argument("--outer-tol", type=float, default=1e-4)
    parser.add_argument("--outer-iters", type=int, default=50)
    parser.add_argument("--eps", type=float, default=1e-10, help="M-step smoothing per cell")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--freeze-alpha", action="store_true",
                        help="keep alpha fixed instead of Newton updates")
    parser.add_argument("--min-count", type=int, default=5,
                        help="vocabulary frequency floor when ingesting records")


def _config_from_args(args):
    return inference.TrainConfig(
        K_w=args.kw, K_y=args.ky, alpha_init=args.alpha,
        inner_tol=args.inner_tol, inner_max_iters=args.inner_iters,
        outer_tol=args.outer_tol, outer_max_iters=args.outer_iters,
        smoothing_eps=args.eps, seed=args.seed,
        update_alpha=not args.freeze_alpha,
    )


def _load_corpus_any(path, min_count):
    """Accept either a versioned corpus dump or line-delimited JSON records."""
    with open(path, "rb") as fh:
        head = fh.readline().decode("utf-8", errors="replace").rstrip("\n")
    if head == corpus_mod.CORPUS_MAGIC:
        return corpus_mod.load_corpus(path)
    return corpus_mod.ingest_corpus(path, min_count=min_count)


def _write_manifest(out_path, command, args_snapshot, inputs, outputs, hashes, seed, elapsed):
    manifest = {
        "command": command,
        "config": args_snapshot,
        "inputs": inputs,
        "outputs": outputs,
        "hashes": hashes,
        "seed": seed,
        "elapsed_seconds": round(elapsed, 3),
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_train(args):
    started = time.perf_counter()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = _load_corpus_any(args.corpus, args.min_count)
    config = _config_from_args(args)
    model = inference.train(corpus, config)

    model_path = out_dir / "model.bin"
    inference.save_model(model, model_path)
    trace_path = out_dir / "elbo_trace.csv"
    with open(trace_path, "w", encoding="utf-8") as fh:
        fh.write("iteration,elbo\n")
        for i, value in enumerate(model.elbo_trace, start=1):
            fh.write(f"{i},{value!r}\n")

    _write_manifest(
        out_dir / "manifest.json", "train", asdict(config),
        {"corpus": str(args.corpus)},
        {"model": str(model_path), "elbo_trace": str(trace_path)},
        {"corpus": model.corpus_ref, "model": topicweb.params_hash(model.params)},
        config.seed, time.perf_counter() - started)
    print(f"trained {config.K_w}x{config.K_y} topics in {len(model.elbo_trace)} iterations; "
          f"final ELBO {model.elbo_trace[-1]:.4f}")
    return 0


def cmd_export_web(args):
    started = time.perf_counter()
    checkpoint = inference.load_model(args.model)
    corpus = _load_corpus_any(args.corpus, args.min_count)
    actual_hash = corpus_mod.corpus_hash(corpus)
    if actual_hash != checkpoint.corpus_hash:
        raise ValueError(
            f"refusing export: corpus hash {actual_hash[:12]} does not match "
            f"the model's training corpus {checkpoint.corpus_hash[:12]}")

    per_doc = inference.infer_documents(corpus, checkpoint.params, checkpoint.config)
    model = inference.TrainedModel(checkpoint.params, per_doc, checkpoint.elbo_trace,
                                   checkpoint.corpus_hash, checkpoint.config)
    prior = "auto" if args.prior == "auto" else float(args.prior)
    web = topicweb.build_topic_web(model, corpus, prior=prior,
                                   prune_threshold=args.threshold)
    out_path = Path(args.out)
    topicweb.export_graph(web, out_path)

    _write_manifest(
        out_path.with_suffix(out_path.suffix + ".manifest.json"), "export-web",
        {"prior": web.prior_edge_probability, "threshold": args.threshold},
        {"model": str(args.model), "corpus": str(args.corpus)},
        {"graph": str(out_path)},
        {"corpus": actual_hash, "model": topicweb.params_hash(checkpoint.params)},
        checkpoint.config.seed, time.perf_counter() - started)
    print(f"exported {len(web.nodes)} nodes, {len(web.edges)} edges to {out_path}")
    return 0


def cmd_evaluate(args):
    started = time.perf_counter()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = _load_corpus_any(args.corpus, args.min_count)
    if args.min_links > 0:
        corpus = corpus_mod.filter_by_link_count(corpus, args.min_links)
    config = _config_from_args(args)

    heldout = evaluation.run_cv(corpus, config, n_folds=args.folds)
    model = inference.train(corpus, config)
    reports = {"word": evaluation.coherence_report(model, corpus, kind="word")}
    if corpus.total_link_tokens:
        reports["doc"] = evaluation.coherence_report(model, corpus, kind="doc")

    outputs = {}
    for kind, report in reports.items():
        path = out_dir / f"{kind}_coherence.csv"
        path.write_text(evaluation.coherence_csv(report), encoding="utf-8")
        outputs[f"{kind}_coherence"] = str(path)
    heldout_path = out_dir / "heldout.csv"
    heldout_path.write_text(evaluation.heldout_csv(heldout), encoding="utf-8")
    outputs["heldout"] = str(heldout_path)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(evaluation.summary_json(reports, heldout), encoding="utf-8")
    outputs["summary"] = str(summary_path)

    _write_manifest(
        out_dir / "manifest.json", "evaluate",
        {**asdict(config), "folds": args.folds, "min_links": args.min_links},
        {"corpus": str(args.corpus)}, outputs,
        {"corpus": corpus_mod.corpus_hash(corpus)},
        config.seed, time.perf_counter() - started)
    print(f"evaluation done: {args.folds} folds, mean held-out total {heldout.mean_total:.4f}")
    return 0


def cmd_serve(args):
    corpus = None
    checkpoint = None
    if args.corpus:
        corpus = _load_corpus_any(args.corpus, args.min_count)
    if args.model:
        checkpoint = inference.load_model(args.model)
    server = serve.make_server(args.graph, corpus=corpus, checkpoint=checkpoint,
                               ui_dir=args.ui, host=args.host, port=args.port)
    host, port = server.server_address[:2]
    print(f"serving topic web on http://{host}:{port}/ (ctrl-c to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="topicatlas",
        description="Topic web construction and exploration for text networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit the model and write a checkpoint")
    p_train.add_argument("corpus", help="corpus dump or line-delimited JSON records")
    p_train.add_argument("--out", default="run", help="output directory")
    _add_train_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_export = sub.add_parser("export-web", help="build and export the topic web")
    p_export.add_argument("model", help="model checkpoint path")
    p_export.add_argument("corpus", help="the corpus the model was trained on")
    p_export.add_argument("--out", default="web.json")
    p_export.add_argument("--prior", default=str(topicweb.DEFAULT_EDGE_PRIOR),
                          help="prior edge probability, or 'auto' for 1/(Kw*Ky)")
    p_export.add_argument("--threshold", type=float, default=topicweb.DEFAULT_PRUNE_THRESHOLD,
                          help="drop edges with weight below this")
    p_export.add_argument("--min-count", type=int, default=5)
    p_export.set_defaults(func=cmd_export_web)

    p_eval = sub.add_parser("evaluate", help="coherence and held-out cross validation")
    p_eval.add_argument("corpus")
    p_eval.add_argument("--out", default="eval")
    p_eval.add_argument("--folds", type=int, default=5)
    p_eval.add_argument("--min-links", type=int, default=0,
                        help="drop documents with fewer links before evaluating")
    _add_train_flags(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_serve = sub.add_parser("serve", help="serve a graph JSON and the UI")
    p_serve.add_argument("graph", help="exported graph JSON path")
    p_serve.add_argument("--corpus", default=None, help="corpus for document snippets")
    p_serve.add_argument("--model", default=None, help="checkpoint for posterior rows")
    p_serve.add_argument("--ui", default=None, help="directory with the built UI bundle")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--min-count", type=int, default=5)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (corpus_mod.CorpusError, inference.NumericalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
