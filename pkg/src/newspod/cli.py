"""Command line interface: ingest stories, generate podcasts, serve the
API, and summarize interaction logs."""

import argparse
import json
import sys
from collections import Counter, defaultdict
from pathlib import Path

from .assembler import CONDITIONS, script_to_dict
from .config import EngineConfig
from .engine import Engine
from .errors import NewsPodError
from .speech import manifest_to_dict


def _engine(args) -> Engine:
    config = EngineConfig.from_env(
        data_dir=Path(args.data) if getattr(args, "data", None) else None,
        provider_url=getattr(args, "provider_url", None),
        reference_dir=Path(args.reference_dir) if getattr(args, "reference_dir", None) else None,
    )
    return Engine(config)


def cmd_ingest(args) -> int:
    engine = _engine(args)
    for file_name in args.files:
        raw = json.loads(Path(file_name).read_text(encoding="utf-8"))
        cluster = engine.store.save(raw)
        passing = len(cluster.filtered_paragraphs())
        print(f"ingested {cluster.story_id}: {len(cluster.articles)} articles, "
              f"{len(cluster.paragraphs)} paragraphs ({passing} pass filter)")
    return 0


def cmd_generate(args) -> int:
    engine = _engine(args)
    story_ids = [s for s in args.stories.split(",") if s]
    result = engine.generate(
        story_ids=story_ids,
        duration_s=args.duration,
        condition=args.condition,
        with_breaks=args.breaks,
        seed=args.seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "script.json").write_text(
        json.dumps(script_to_dict(result.script), indent=2, ensure_ascii=False),
        encoding="utf-8",
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest_to_dict(result.manifest), indent=2, ensure_ascii=False),
        encoding="utf-8",
    )
    print(f"generated {result.script.podcast_id}: "
          f"{len(result.script.segments)} segments, "
          f"{len(result.manifest.lines)} lines, "
          f"{result.manifest.total_duration_ms / 1000:.1f}s audio")
    print(f"script and manifest written to {out_dir}; "
          f"audio under {engine.audio_dir() / result.script.podcast_id}")
    return 0


def cmd_graph(args) -> int:
    """Debug dump of a story's Q&A graph as JSON or DOT."""
    from .qagraph import build_graph, generate_candidates, graph_to_json

    engine = _engine(args)
    cluster = engine.store.load(args.story)
    providers = engine.providers_for(cluster)
    candidates = generate_candidates(cluster, providers.question_generator,
                                     providers.parallelism)
    graph = build_graph(candidates, cluster.filtered_paragraphs(),
                        providers.question_answerer, providers.parallelism)
    if args.format == "dot":
        print(graph.to_dot())
    else:
        print(graph_to_json(graph))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    config = EngineConfig.from_env(
        data_dir=Path(args.data) if args.data else None,
        provider_url=args.provider_url,
        reference_dir=Path(args.reference_dir) if args.reference_dir else None,
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_stats(args) -> int:
    """Per-podcast counts of the logged interactions."""
    counts: dict[str, Counter] = defaultdict(Counter)
    path = Path(args.events)
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        event = json.loads(line)
        counts[event.get("podcast_id", "?")][event["kind"]] += 1

    for podcast_id in sorted(counts):
        kinds = counts[podcast_id]
        print(f"{podcast_id}: pauses={kinds['pause']} skips={kinds['skip']} "
              f"transcript_opens={kinds['transcript_open']} "
              f"questions={kinds['question_asked']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newspod")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="load story JSON files into the store")
    p_ingest.add_argument("files", nargs="+")
    p_ingest.add_argument("--data", help="data directory (default: env or ./data)")
    p_ingest.set_defaults(func=cmd_ingest)

    p_gen = sub.add_parser("generate", help="generate a podcast")
    p_gen.add_argument("--stories", required=True, help="comma-separated story ids")
    p_gen.add_argument("--duration", type=int, required=True, help="target seconds")
    p_gen.add_argument("--condition", choices=CONDITIONS, default="qa_best")
    p_gen.add_argument("--breaks", action="store_true", help="insert question breaks")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--data")
    p_gen.add_argument("--provider-url", dest="provider_url")
    p_gen.add_argument("--reference-dir", dest="reference_dir")
    p_gen.set_defaults(func=cmd_generate)

    p_graph = sub.add_parser("graph", help="dump a story's Q&A graph")
    p_graph.add_argument("--story", required=True)
    p_graph.add_argument("--format", choices=("json", "dot"), default="json")
    p_graph.add_argument("--data")
    p_graph.add_argument("--provider-url", dest="provider_url")
    p_graph.set_defaults(func=cmd_graph)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8400)
    p_serve.add_argument("--data")
    p_serve.add_argument("--provider-url", dest="provider_url")
    p_serve.add_argument("--reference-dir", dest="reference_dir")
    p_serve.set_defaults(func=cmd_serve)

    p_stats = sub.add_parser("stats", help="summarize an interaction event log")
    p_stats.add_argument("--events", required=True, help="events JSONL file")
    p_stats.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NewsPodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
