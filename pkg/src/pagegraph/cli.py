"""Operator command line: ingest, build-graph, stats, export-dot, retrieve, run, eval.

Exit codes: 0 success, 1 validation error, 2 oracle/backend failure. All
diagnostics go to standard error; data goes to files or standard output.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from pagegraph.agent import AgentRunner
from pagegraph.builder import BuildReport, GraphBuilder
from pagegraph.config import (
    agent_config,
    apply_overrides,
    build_embedder,
    build_oracle,
    load_config,
    retrieval_config,
)
from pagegraph.errors import OracleError, PageGraphError, ValidationError
from pagegraph.metrics import StepRecord, build_metric_report, graph_stats, render_stats_table
from pagegraph.model import ClickElement, PageGraph, ScreenRef
from pagegraph.retrieval import GuidelineRetriever, render_guidelines
from pagegraph.storage import (
    export_dot,
    import_benchmark,
    load_episodes,
    load_graph,
    load_world,
    save_episodes,
    save_graph,
    save_predictions,
    save_rejects,
    save_transcript,
)
from pagegraph.storage.serial import atomic_write_text, canonical_dumps, guideline_to_obj
from pagegraph.world.environment import EpisodeReplayerEnvironment, WorldEnvironment

logger = logging.getLogger("pagegraph.cli")

REPORT_FORMAT = "pagegraph-report"


class _Parser(argparse.ArgumentParser):
    """Argument errors (including unknown flags) are validation errors, exit 1."""

    def error(self, message: str):
        raise ValidationError(message)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pagegraph",
                     description="Build page graphs from GUI episodes, retrieve guidelines, "
                                 "and drive the agent loop.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[], help="import benchmark episodes")
    _common_flags(p)
    p.add_argument("--adapter", required=True,
                   choices=("generic", "aitw", "mind2web", "odyssey"))
    p.add_argument("--source", required=True, help="benchmark source JSON")
    p.add_argument("--out", required=True, help="episode file to write")
    p.add_argument("--scenario", default="", help="scenario tag stamped on screens")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("build-graph", help="construct a page graph from episodes")
    _common_flags(p)
    p.add_argument("--episodes", required=True)
    p.add_argument("--graph-out", required=True)
    p.add_argument("--report-out", help="machine-readable build report (default: <graph>.report.json)")
    p.add_argument("--sample-fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-policy", choices=("tuple", "episode"), default="tuple")
    p.add_argument("--scenario", default="", help="graph scenario tag (default: benchmark tag)")
    p.set_defaults(func=_cmd_build_graph)

    p = sub.add_parser("stats", help="graph and corpus statistics")
    _common_flags(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--manifest", help="build report file from build-graph")
    p.add_argument("--out", help="write machine-readable rows here")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("export-dot", help="export the graph for visualization")
    _common_flags(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--label-mode", choices=("summary", "id"), default="summary")
    p.add_argument("--max-label-chars", type=int, default=40)
    p.set_defaults(func=_cmd_export_dot)

    p = sub.add_parser("retrieve", help="retrieve guidelines for a screen or summary")
    _common_flags(p)
    p.add_argument("--graph", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--screen", help="screen locator (summarized by the oracle)")
    group.add_argument("--summary", help="raw screen summary text (skips the oracle)")
    p.add_argument("--k", type=int, help="max guidelines")
    p.add_argument("--n", type=int, help="retrieved nodes")
    p.add_argument("--l", type=int, dest="layers", help="BFS layers")
    p.add_argument("--out", help="write structured guidelines here")
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("run", help="run the agent loop on an environment")
    _common_flags(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--env", choices=("world", "replayer"), default="world")
    p.add_argument("--world", help="world file (defaults to paths.world)")
    p.add_argument("--episodes", help="episode file backing the replayer environment")
    p.add_argument("--episode-id", help="episode to replay")
    p.add_argument("--goal", help="task goal (replayer defaults to the episode's task)")
    p.add_argument("--transcript-out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="teacher-forced stepwise evaluation")
    _common_flags(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--episodes", required=True)
    p.add_argument("--metrics", choices=("mobile", "web"), default="mobile")
    p.add_argument("--predictions-out", required=True)
    p.add_argument("--report-out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--select-click-equivalence", action="store_true",
                   help="accept SELECT predictions for click-encoded gold steps")
    p.set_defaults(func=_cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        config = apply_overrides(load_config(args.config), args.set)
        logging.basicConfig(
            stream=sys.stderr,
            level=getattr(logging, config["logging"]["level"].upper(), logging.INFO),
            format="%(levelname)s %(name)s %(message)s",
        )
        return args.func(args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OracleError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return 2
    except PageGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _provenance(command: str, config: dict) -> dict:
    return {"command": command, "config": config}


def _world(args, config):
    path = getattr(args, "world", None) or config["paths"]["world"]
    if not path:
        return None
    return load_world(path)


def _cmd_ingest(args, config) -> int:
    episodes, rejects = import_benchmark(args.adapter, args.source, scenario=args.scenario)
    save_episodes(episodes, args.out, benchmark=args.adapter)
    rejects_path = args.out + ".rejects.jsonl"
    save_rejects(rejects, rejects_path)
    logger.info("ingest adapter=%s episodes=%d rejects=%d out=%s",
                args.adapter, len(episodes), len(rejects), args.out)
    for record in rejects:
        logger.warning("rejected record=%s reason=%s", record["record_id"], record["reason"])
    return 0


def _cmd_build_graph(args, config) -> int:
    benchmark, episodes = load_episodes(args.episodes)
    world = _world(args, config) if config["oracle"]["backend"] == "scripted" else None
    oracle = build_oracle(config, world=world)
    embedder = build_embedder(config)
    scenario = args.scenario or benchmark or "default"
    graph = PageGraph(scenario=scenario, meta={
        "embedder_id": embedder.embedder_id,
        "provenance": _provenance("build-graph", config),
    })
    builder = GraphBuilder(graph, oracle, embedder,
                           top_n=config["retrieval"]["n"], skip_policy=args.skip_policy)
    report = builder.ingest_corpus(episodes, sample_fraction=args.sample_fraction,
                                   seed=args.seed)
    save_graph(graph, args.graph_out)
    report_path = args.report_out or f"{args.graph_out}.report.json"
    atomic_write_text(report_path, canonical_dumps({
        "format": REPORT_FORMAT,
        "scenario": scenario,
        "report": report.as_dict(),
        "provenance": _provenance("build-graph", config),
    }))
    for key, value in report.as_dict().items():
        logger.info("build %s=%d", key, value)
    logger.info("build nodes=%d edges=%d graph=%s", len(graph.nodes), len(graph.edges),
                args.graph_out)
    return 0


def _load_manifest_report(path: str | None) -> BuildReport:
    if not path:
        return BuildReport()
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    if document.get("format") != REPORT_FORMAT:
        raise ValidationError(f"{path} is not a build report")
    return BuildReport(**document["report"])


def _cmd_stats(args, config) -> int:
    graph = load_graph(args.graph)
    rows = graph_stats(graph, _load_manifest_report(args.manifest))
    print(render_stats_table(rows))
    if args.out:
        atomic_write_text(args.out, canonical_dumps({
            "format": "pagegraph-stats",
            "rows": [row.__dict__ for row in rows],
            "provenance": _provenance("stats", config),
        }))
    return 0


def _cmd_export_dot(args, config) -> int:
    graph = load_graph(args.graph)
    export_dot(graph, args.out, label_mode=args.label_mode,
               max_label_chars=args.max_label_chars)
    logger.info("export-dot nodes=%d edges=%d out=%s", len(graph.nodes), len(graph.edges),
                args.out)
    return 0


def _cmd_retrieve(args, config) -> int:
    graph = load_graph(args.graph)
    cfg = retrieval_config(config)
    if args.k or args.n or args.layers:
        cfg = type(cfg)(
            k_max_guidelines=args.k or cfg.k_max_guidelines,
            n_nodes=args.n or cfg.n_nodes,
            l_bfs_layers=args.layers or cfg.l_bfs_layers,
        )
    embedder = build_embedder(config)
    if args.summary is not None:
        # The raw-summary path never calls the oracle.
        retriever = GuidelineRetriever(graph, embedder, None, cfg)
        guidelines = retriever.retrieve_for_summary(args.summary) if graph.nodes else []
    else:
        world = _world(args, config) if config["oracle"]["backend"] == "scripted" else None
        oracle = build_oracle(config, world=world)
        retriever = GuidelineRetriever(graph, embedder, oracle, cfg)
        guidelines = retriever.retrieve(ScreenRef(locator=args.screen,
                                                  scenario=graph.scenario))
    print(render_guidelines(guidelines))
    if args.out:
        atomic_write_text(args.out, canonical_dumps({
            "format": "pagegraph-guidelines",
            "guidelines": [guideline_to_obj(g) for g in guidelines],
            "provenance": _provenance("retrieve", config),
        }))
    logger.info("retrieve guidelines=%d", len(guidelines))
    return 0


def _cmd_run(args, config) -> int:
    graph = load_graph(args.graph)
    world = _world(args, config)
    if args.env == "world":
        if world is None:
            raise ValidationError("--env world needs --world or paths.world")
        env = WorldEnvironment(world)
        goal = args.goal
        if not goal:
            raise ValidationError("--goal is required with --env world")
    else:
        if not args.episodes or not args.episode_id:
            raise ValidationError("--env replayer needs --episodes and --episode-id")
        _, episodes = load_episodes(args.episodes)
        matching = [e for e in episodes if e.episode_id == args.episode_id]
        if not matching:
            raise ValidationError(f"episode {args.episode_id!r} not found")
        env = EpisodeReplayerEnvironment(matching[0])
        goal = args.goal or matching[0].task
    oracle = build_oracle(config, world=world)
    embedder = build_embedder(config)
    runner = AgentRunner(oracle, embedder, graph, agent_config(config))
    transcript = runner.run_task(env, goal)
    transcript.meta.update(_provenance("run", config))
    save_transcript(transcript, args.transcript_out)
    logger.info("run goal=%r steps=%d terminated_by=%s", goal, len(transcript.steps),
                transcript.terminated_by)
    if transcript.terminated_by == "error":
        return 2
    return 0


def _cmd_eval(args, config) -> int:
    graph = load_graph(args.graph)
    _, episodes = load_episodes(args.episodes)
    if not episodes:
        raise ValidationError("no episodes to evaluate")
    world = _world(args, config) if config["oracle"]["backend"] == "scripted" else None
    oracle = build_oracle(config, world=world)
    embedder = build_embedder(config)
    runner = AgentRunner(oracle, embedder, graph, agent_config(config))
    work = [
        (episode, step_index)
        for episode in episodes
        for step_index in range(len(episode.steps))
    ]

    def predict(item):
        episode, step_index = item
        return runner.run_step_prediction(episode, step_index)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            predictions = list(pool.map(predict, work))
    else:
        predictions = [predict(item) for item in work]
    rows = []
    records = []
    for (episode, step_index), predicted in zip(work, predictions):
        gold = episode.steps[step_index].action
        rows.append((episode.episode_id, step_index, predicted))
        records.append(StepRecord(
            gold=gold,
            predicted=predicted,
            scenario=episode.steps[step_index].screen.scenario or graph.scenario,
            gold_bbox=gold.bbox if isinstance(gold, ClickElement) else None,
        ))
    save_predictions(rows, args.predictions_out)
    report = build_metric_report(records, kind=args.metrics,
                                 select_click_equivalence=args.select_click_equivalence)
    atomic_write_text(args.report_out, canonical_dumps({
        "format": "pagegraph-metric-report",
        "report": report.as_dict(),
        "provenance": _provenance("eval", config),
    }))
    for name, value in sorted(report.overall.as_dict().items()):
        print(f"{name}: {value}")
    logger.info("eval steps=%d kind=%s", len(records), args.metrics)
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
