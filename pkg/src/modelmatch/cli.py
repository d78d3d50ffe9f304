"""Command-line front end.

Subcommands: `repo init|add|list`, `query`, `match`, `eval`, `gen-corpus`,
`import-xmi`. Every randomized command takes `--seed` and produces
byte-identical output for identical inputs. Exit codes: 0 success, 1 domain
error (one-line reason on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .canonical import load_spec, save_spec
from .config import EngineConfig, resolve_config
from .corpus import CorpusConfig, generate_corpus
from .errors import ModelMatchError
from .evaluation import (
    evaluate_rankings,
    format_judgments,
    format_report,
    load_judgments,
)
from .matching import Matcher, resolve_mapping
from .metadata import compute_metadata
from .model import RequirementSpec
from .repository import (
    RankedResult,
    add_model,
    init_repo,
    list_models,
    load_model,
    retrieve,
)
from .scoring import ViewWeights
from .xmi import import_xmi

_METHODS = {"ga": "ga", "exhaustive": "exhaustive", "hungarian-func": "hungarian-functional"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelmatch",
        description="Retrieve multi-view requirement models by similarity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    repo = sub.add_parser("repo", help="manage a model repository")
    repo_sub = repo.add_subparsers(dest="repo_command", required=True)

    p = repo_sub.add_parser("init", help="create an empty repository")
    p.add_argument("repo_dir")

    p = repo_sub.add_parser("add", help="add canonical model files")
    p.add_argument("repo_dir")
    p.add_argument("files", nargs="+")
    p.add_argument("--id", dest="model_id", help="explicit model id (single file only)")
    p.add_argument("--use-stem-id", action="store_true", help="use each file stem as its model id")
    p.add_argument("--check-duplicate", action="store_true")
    p.add_argument("--dup-threshold", type=float, default=0.98)
    p.add_argument("--force", action="store_true")
    _add_engine_flags(p)

    p = repo_sub.add_parser("list", help="list stored models")
    p.add_argument("repo_dir")
    p.add_argument("--format", choices=("table", "records"), default="table")

    p = sub.add_parser("query", help="rank repository models against a query model")
    p.add_argument("repo_dir")
    p.add_argument("query_file")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--no-prefilter", action="store_true")
    p.add_argument("--method", choices=sorted(_METHODS), default="ga")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.add_argument("--explain", action="store_true")
    p.add_argument("--verbose", action="store_true", help="also list pre-filtered models")
    p.add_argument("--jobs", type=int, default=1)
    _add_engine_flags(p)

    p = sub.add_parser("match", help="match and score two model files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--method", choices=sorted(_METHODS), default="ga")
    p.add_argument("--explain", action="store_true")
    p.add_argument("--format", choices=("table", "records"), default="table")
    _add_engine_flags(p)

    p = sub.add_parser("eval", help="evaluate retrieval quality versus judgments")
    p.add_argument("repo_dir")
    p.add_argument("--judgments", required=True)
    p.add_argument("--queries", required=True, help="directory of .rsq query files")
    p.add_argument("--top", type=int, default=0, help="0 ranks the whole repository")
    p.add_argument("--no-prefilter", action="store_true")
    p.add_argument("--keep-self", action="store_true", help="keep the query itself in its ranking")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.add_argument("--jobs", type=int, default=1)
    _add_engine_flags(p)

    p = sub.add_parser("gen-corpus", help="generate a synthetic corpus with judgments")
    p.add_argument("out_dir")
    p.add_argument("--bases", type=int, default=30)
    p.add_argument("--variants", type=int, default=3)
    p.add_argument("--ops", type=int, default=2)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("import-xmi", help="convert an XMI file to canonical format")
    p.add_argument("xmi_file")
    p.add_argument("out_file")
    return parser


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weights", help="view weights as wS,wF,wB (normalized)")
    p.add_argument("--seed", type=int, help="GA seed (default 42)")
    p.add_argument("--pop", type=int, help="GA population size")
    p.add_argument("--gens", type=int, help="GA generation limit")
    p.add_argument("--config", help="engine configuration file (or $MODELMATCH_CONFIG)")


def _engine_from_args(args: argparse.Namespace) -> EngineConfig:
    cfg = resolve_config(getattr(args, "config", None))
    if getattr(args, "weights", None):
        cfg = replace(cfg, weights=ViewWeights.parse(args.weights))
    ga = cfg.ga
    if getattr(args, "seed", None) is not None:
        ga = replace(ga, seed=args.seed)
    if getattr(args, "pop", None) is not None:
        ga = replace(ga, population_size=args.pop)
    if getattr(args, "gens", None) is not None:
        ga = replace(ga, max_generations=args.gens)
    return replace(cfg, ga=ga)


def _load_model_file(path: str) -> RequirementSpec:
    file = Path(path)
    if not file.exists():
        raise ModelMatchError(f"model file not found: {path}")
    return load_spec(file)


def _print_result_line(rank: int, r: RankedResult, fmt: str, out) -> None:
    s = r.scores
    if fmt == "records":
        out.write(
            f"rank={rank} model={r.model_id} aggregate={s.aggregate:.6f} "
            f"structural={s.structural:.6f} functional={s.functional:.6f} "
            f"behavioral={s.behavioral:.6f}\n"
        )
    else:
        out.write(
            f"{rank:>4}  {r.model_id:<28} {s.aggregate:9.6f} {s.structural:9.6f} "
            f"{s.functional:9.6f} {s.behavioral:9.6f}\n"
        )


def _print_explanation(query: RequirementSpec, candidate: RequirementSpec, mapping, out) -> None:
    resolved = resolve_mapping(query, candidate, mapping)
    names_q = {c.id: c.name for c in query.class_diagram.classes}
    names_c = {c.id: c.name for c in candidate.class_diagram.classes}
    out.write("  mapped classes:\n")
    for a, b in resolved.class_pairs:
        out.write(f"    {a} ({names_q.get(a, '?')}) <-> {b} ({names_c.get(b, '?')})\n")
    if not resolved.class_pairs:
        out.write("    (none)\n")
    out.write("  mapped sequence diagrams:\n")
    for a, b in resolved.sd_pairs:
        out.write(f"    {a} <-> {b}\n")
    if not resolved.sd_pairs:
        out.write("    (none)\n")
    unmapped_q = sorted(set(names_q) - {a for a, _ in resolved.class_pairs})
    unmapped_c = sorted(set(names_c) - {b for _, b in resolved.class_pairs})
    if unmapped_q:
        out.write(f"  unmapped query classes: {', '.join(unmapped_q)}\n")
    if unmapped_c:
        out.write(f"  unmapped candidate classes: {', '.join(unmapped_c)}\n")


def _cmd_repo(args: argparse.Namespace, out) -> int:
    if args.repo_command == "init":
        init_repo(args.repo_dir)
        out.write(f"initialized empty repository at {args.repo_dir}\n")
        return 0
    if args.repo_command == "add":
        if args.model_id and len(args.files) > 1:
            raise ModelMatchError("--id needs exactly one file")
        engine = _engine_from_args(args)
        for path in args.files:
            spec = _load_model_file(path)
            if args.model_id:
                model_id = args.model_id
            elif args.use_stem_id:
                model_id = Path(path).stem
            else:
                model_id = None
            assigned = add_model(
                args.repo_dir,
                spec,
                model_id=model_id,
                check_duplicate=args.check_duplicate,
                dup_threshold=args.dup_threshold,
                force=args.force,
                weights=engine.weights,
                ga_config=engine.ga,
                scoring=engine.scoring,
            )
            out.write(f"added {path} as {assigned}\n")
        return 0
    if args.repo_command == "list":
        entries = list_models(args.repo_dir)
        if args.format == "records":
            for e in entries:
                md = e.metadata
                out.write(
                    f"model={e.model_id} classes={md.class_count} "
                    f"sds={md.sequence_diagram_count} messages={md.total_message_count} "
                    f"hash={e.content_hash[:12]}\n"
                )
        else:
            out.write(f"{'model':<28} {'classes':>7} {'sds':>4} {'msgs':>5}  hash\n")
            for e in entries:
                md = e.metadata
                out.write(
                    f"{e.model_id:<28} {md.class_count:>7} {md.sequence_diagram_count:>4} "
                    f"{md.total_message_count:>5}  {e.content_hash[:12]}\n"
                )
        out.write(f"{len(entries)} model(s)\n")
        return 0
    raise ModelMatchError(f"unknown repo command {args.repo_command!r}")


def _cmd_query(args: argparse.Namespace, out) -> int:
    engine = _engine_from_args(args)
    query = _load_model_file(args.query_file)
    results = retrieve(
        args.repo_dir,
        query,
        weights=engine.weights,
        ga_config=engine.ga,
        scoring=engine.scoring,
        prefilter=engine.prefilter,
        use_prefilter=not args.no_prefilter,
        top_n=args.top if args.top > 0 else None,
        method=_METHODS[args.method],
        include_excluded=args.verbose,
        jobs=max(1, args.jobs),
    )
    scored = [r for r in results if r.prefiltered]
    skipped = [r for r in results if not r.prefiltered]
    if args.format == "table":
        out.write(f"{'rank':>4}  {'model':<28} {'aggregate':>9} {'struct':>9} {'funct':>9} {'behav':>9}\n")
    for rank, r in enumerate(scored, start=1):
        _print_result_line(rank, r, args.format, out)
        if args.explain and r.mapping is not None:
            candidate = load_model(args.repo_dir, r.model_id)
            _print_explanation(query, candidate, r.mapping, out)
    for r in skipped:
        out.write(f"   -  {r.model_id:<28} excluded: {r.reason}\n")
    return 0


def _cmd_match(args: argparse.Namespace, out) -> int:
    engine = _engine_from_args(args)
    a = _load_model_file(args.file_a)
    b = _load_model_file(args.file_b)
    matcher = Matcher(a, b, engine.weights, engine.scoring)
    method = _METHODS[args.method]
    if method == "exhaustive":
        result = matcher.exhaustive()
    elif method == "hungarian-functional":
        result = matcher.ga_hungarian_functional(engine.ga)
    else:
        result = matcher.ga(engine.ga)
    s = result.scores
    if args.format == "records":
        out.write(
            f"method={result.method} aggregate={s.aggregate:.6f} structural={s.structural:.6f} "
            f"functional={s.functional:.6f} behavioral={s.behavioral:.6f} "
            f"generations={result.generations_run} evaluations={result.evaluations}\n"
        )
    else:
        out.write(f"method      : {result.method}\n")
        out.write(f"aggregate   : {s.aggregate:.6f}\n")
        out.write(f"structural  : {s.structural:.6f}\n")
        out.write(f"functional  : {s.functional:.6f}\n")
        out.write(f"behavioral  : {s.behavioral:.6f}\n")
        out.write(f"generations : {result.generations_run}\n")
    if args.explain:
        _print_explanation(a, b, result.mapping, out)
    return 0


def _cmd_eval(args: argparse.Namespace, out) -> int:
    engine = _engine_from_args(args)
    judgments = load_judgments(args.judgments)
    queries_dir = Path(args.queries)
    if not queries_dir.is_dir():
        raise ModelMatchError(f"queries directory not found: {args.queries}")
    rankings: dict[str, list[str]] = {}
    for query_file in sorted(queries_dir.glob("*.rsq")):
        query_id = query_file.stem
        if query_id not in judgments:
            continue
        query = load_spec(query_file)
        results = retrieve(
            args.repo_dir,
            query,
            weights=engine.weights,
            ga_config=engine.ga,
            scoring=engine.scoring,
            prefilter=engine.prefilter,
            use_prefilter=not args.no_prefilter,
            top_n=args.top if args.top > 0 else None,
            jobs=max(1, args.jobs),
        )
        rankings[query_id] = [r.model_id for r in results if r.prefiltered]
    missing = sorted(set(judgments) - set(rankings))
    if missing:
        raise ModelMatchError(f"no query file for judged queries: {', '.join(missing)}")
    rows, map_value = evaluate_rankings(rankings, judgments, drop_query_id=not args.keep_self)
    out.write(format_report(rows, map_value, args.format))
    return 0


def _cmd_gen_corpus(args: argparse.Namespace, out) -> int:
    cfg = CorpusConfig(
        base_models=args.bases, variants_per_base=args.variants, ops_per_variant=args.ops
    )
    models, judgments = generate_corpus(cfg, seed=args.seed)
    out_dir = Path(args.out_dir)
    models_dir = out_dir / "models"
    queries_dir = out_dir / "queries"
    models_dir.mkdir(parents=True, exist_ok=True)
    queries_dir.mkdir(parents=True, exist_ok=True)
    by_id = dict(models)
    for model_id, spec in models:
        save_spec(spec, models_dir / f"{model_id}.rsq")
    for query_id in judgments:
        save_spec(by_id[query_id], queries_dir / f"{query_id}.rsq")
    (out_dir / "judgments.txt").write_text(format_judgments(judgments), encoding="utf-8")
    out.write(
        f"wrote {len(models)} models, {len(judgments)} queries and judgments to {out_dir}\n"
    )
    return 0


def _cmd_import_xmi(args: argparse.Namespace, out) -> int:
    source = Path(args.xmi_file)
    if not source.exists():
        raise ModelMatchError(f"XMI file not found: {args.xmi_file}")
    spec, warnings = import_xmi(source.read_bytes())
    for warning in warnings:
        sys.stderr.write(f"warning: {warning}\n")
    save_spec(spec, args.out_file)
    md = compute_metadata(spec)
    out.write(
        f"imported {md.class_count} classes, {md.sequence_diagram_count} sequence diagrams, "
        f"{len(spec.state_machines)} state machines -> {args.out_file}\n"
    )
    return 0


def run(argv: list[str] | None = None, out=None) -> int:
    """Dispatch a command line; returns the process exit code."""
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "repo":
            return _cmd_repo(args, out)
        if args.command == "query":
            return _cmd_query(args, out)
        if args.command == "match":
            return _cmd_match(args, out)
        if args.command == "eval":
            return _cmd_eval(args, out)
        if args.command == "gen-corpus":
            return _cmd_gen_corpus(args, out)
        if args.command == "import-xmi":
            return _cmd_import_xmi(args, out)
    except ModelMatchError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    parser.error(f"unknown command {args.command!r}")
    return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
