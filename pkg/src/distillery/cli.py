"""``distill`` command line: init, hop, prune, project, metrics, serve, export.

Every command operates on a project directory (``--project``, default ``.``)
containing ``project.json`` and ``embeddings.bin``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from distillery.config import SessionConfig
from distillery.errors import DistillError
from distillery.projection import ProjectionParams
from distillery.records import PaperId, PaperRecord
from distillery.runtime import SessionRuntime
from distillery.cycle import run_cycle


def _load_runtime(args: argparse.Namespace) -> SessionRuntime:
    return SessionRuntime.load(Path(args.project))


def _parse_core_file(path: Path) -> tuple[list[PaperRecord], list[PaperId]]:
    """A core file is a JSON array of record objects, id strings, or a mix."""
    data = json.loads(path.read_text())
    if not isinstance(data, list):
        raise DistillError(f"{path}: expected a JSON array")
    records, ids = [], []
    for item in data:
        if isinstance(item, str):
            ids.append(PaperId.from_str(item))
        elif isinstance(item, dict):
            records.append(PaperRecord.from_json({**item, "hop": 0, "is_core": True}))
        else:
            raise DistillError(f"{path}: unsupported core entry {item!r}")
    return records, ids


def cmd_init(args: argparse.Namespace) -> int:
    directory = Path(args.project)
    config = SessionConfig()
    if args.config:
        config = SessionConfig.from_json(json.loads(Path(args.config).read_text()))
    if args.seed is not None:
        config.seed = args.seed
    if args.dim is not None:
        config.embedding_dim = args.dim
    if args.fixtures:
        config.fixtures_dir = args.fixtures
    if args.subs:
        config.substitutions_file = args.subs

    runtime = SessionRuntime.create(config, base_dir=directory)
    if args.core:
        records, ids = _parse_core_file(Path(args.core))
        if ids:
            records = records + [runtime.client.fetch_paper(pid) for pid in ids]
        for rec in records:
            rec.hop, rec.is_core = 0, True
        runtime.add_core(records)
    runtime.save(directory)
    print(f"initialized project at {directory} with {len(runtime.session)} core papers")
    return 0


def cmd_hop(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    if args.preview:
        count = runtime.hop_preview(args.direction)
        print(f"hop preview ({args.direction}): {count} new papers")
        return 0
    result = runtime.hop(args.direction)
    runtime.save()
    print(f"hop {result.requested_at_hop} ({args.direction}): "
          f"+{len(result.new_ids)} papers, {len(result.failures)} failures, "
          f"corpus now {len(runtime.session)}")
    for pid, exc in sorted(result.failures.items(), key=lambda kv: str(kv[0]))[:10]:
        print(f"  failed {pid}: {exc}", file=sys.stderr)
    return 0


def cmd_prune(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    if args.mechanism == "manual":
        if not args.ids:
            raise DistillError("manual prune needs --ids id1,id2,...")
        ids = [PaperId.from_str(s.strip()) for s in args.ids.split(",") if s.strip()]
        result = runtime.prune_manual(ids=ids)
    elif args.mechanism == "hypersphere":
        result = runtime.prune_hypersphere()
    else:
        k_range = None
        if args.k_range:
            lo, _, hi = args.k_range.partition("..")
            k_range = list(range(int(lo), int(hi or lo) + 1))
        alpha = None if args.alpha in (None, "auto") else float(args.alpha)
        result = runtime.prune_topics(k_range=k_range, alpha=alpha)
        report_path = Path(args.project) / "topics_report.json"
        report_path.write_text(json.dumps(result, indent=2, default=str))
        result = {k: v for k, v in result.items() if k not in ("topics", "stability")}
        result["report"] = str(report_path)
    runtime.save()
    print(f"prune {args.mechanism}: {json.dumps(result, default=str)}")
    print(f"corpus now {len(runtime.session)} papers")
    return 0


def cmd_project(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    config = runtime.session.config
    params = ProjectionParams(
        n_neighbors=config.n_neighbors, min_dist=config.min_dist,
        n_epochs=config.n_epochs,
        seed=args.seed if args.seed is not None else config.seed)
    layout = runtime.layout(params)
    runtime.save()
    print(f"projected {len(layout.ids)} papers to 2-D (seed {params.seed})")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    report = runtime.compactness()
    print(f"compactness: {report.score:.6f} over {report.n_documents} documents")
    return 0


def cmd_preprocess(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    config = runtime.session.config
    changed = False
    if args.subs:
        config.substitutions_file = args.subs
        changed = True
    if args.stopwords:
        config.stopword_file = args.stopwords
        changed = True
    if changed:
        runtime = SessionRuntime(runtime.session, base_dir=runtime.base_dir)
    vocab = runtime.vocabulary()
    runtime.save()
    sample = ", ".join(vocab.tokens[:10])
    print(f"vocabulary: {len(vocab)} tokens derived from "
          f"{len(runtime.session.core_ids())} core papers")
    print(f"first tokens: {sample}")
    return 0


def cmd_cycle(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    plan = [s.strip() for s in args.plan.split(",") if s.strip()]
    report = run_cycle(runtime, plan, direction=args.direction, cycle_id=args.cycle_id)
    runtime.save()
    trace = " -> ".join(f"{c:.4f}" for c in report.compactness_trace)
    sizes = " -> ".join(str(s) for s in report.corpus_sizes)
    print(f"cycle {report.cycle_id}: compactness {trace}")
    print(f"corpus size {sizes}")
    return 0


def cmd_undo(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    runtime.undo()
    runtime.save()
    print(f"undid last entry; corpus now {len(runtime.session)} papers")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    runtime = _load_runtime(args)
    out = Path(args.out) if args.out else Path(args.project) / "export"
    out.mkdir(parents=True, exist_ok=True)
    runtime.save(out)
    (out / "corpus.jsonl").write_text(runtime.export_corpus_jsonl() + "\n")
    print(f"exported project and corpus.jsonl ({len(runtime.session)} papers) to {out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from distillery.service import create_app

    runtime = _load_runtime(args)
    app = create_app(runtime)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distill",
        description="Grow a core set of papers into a topically coherent corpus.")
    parser.add_argument("--project", default=".", help="project directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a project, optionally with a core file")
    p.add_argument("--core", help="JSON array of core records or id strings")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int, help="embedding dimension")
    p.add_argument("--fixtures", help="offline fixture directory")
    p.add_argument("--subs", help="substitution map JSON file")
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("hop", help="expand the corpus one citation-network step")
    p.add_argument("--direction", choices=("citations", "references"),
                   default="citations")
    p.add_argument("--preview", action="store_true",
                   help="report the delta size without mutating")
    p.set_defaults(fn=cmd_hop)

    p = sub.add_parser("prune", help="remove papers by one of the three mechanisms")
    p.add_argument("mechanism", choices=("manual", "hypersphere", "topics"))
    p.add_argument("--ids", help="comma-separated ids (manual)")
    p.add_argument("--k-range", dest="k_range", help="e.g. 2..12 (topics)")
    p.add_argument("--alpha", default="auto", help="coupling weight or 'auto' (topics)")
    p.set_defaults(fn=cmd_prune)

    p = sub.add_parser("project", help="recompute the 2-D layout")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("metrics", help="corpus quality metrics")
    p.add_argument("metric", choices=("compactness",))
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("preprocess", help="configure cleaning and rebuild the vocabulary")
    p.add_argument("--subs", help="substitution map JSON file")
    p.add_argument("--stopwords", help="stopword file, one token per line")
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("cycle", help="run hop + prune steps as one journaled cycle")
    p.add_argument("--plan", default="hop,hypersphere,topics",
                   help="comma-separated steps")
    p.add_argument("--direction", choices=("citations", "references"),
                   default="citations")
    p.add_argument("--cycle-id", dest="cycle_id", help="resume a crashed cycle")
    p.set_defaults(fn=cmd_cycle)

    p = sub.add_parser("undo", help="revert the last journal entry")
    p.set_defaults(fn=cmd_undo)

    p = sub.add_parser("export", help="write the project file plus corpus.jsonl")
    p.add_argument("--out", help="output directory (default PROJECT/export)")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("serve", help="serve the workbench HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DistillError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
