"""Command-line front end.

Each invocation opens the workspace archive (``--graph`` or the
``ATTACKGRAPH_WORKSPACE`` environment variable), runs one operation, prints a
JSON run report to stdout, and rewrites the workspace only on success.
Concurrent runs against the same workspace are rejected through an advisory
lock file.

    attackgraph load clinic.yaml patient.yaml --graph ws.ag
    attackgraph reach --scope ClinicTopology --graph ws.ag
    attackgraph attack --target ClinicTopology --label ClinicAttackGraph --graph ws.ag
    attackgraph merge PatientTopology ClinicTopology --vicinity "floor=floor 1" --graph ws.ag
    attackgraph reach --incremental 1 --graph ws.ag
    attackgraph attack --target ClinicTopology --label ClinicAttackGraph \\
        --merged --session 1 --graph ws.ag
    attackgraph metric --kind count --from "Smart Phone" --to Database \\
        --labels PatientAttackGraph ClinicAttackGraph MergedAttackGraphs --graph ws.ag
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from filelock import FileLock, Timeout

from . import archive, attackgen, dotexport, dynamics, metrics, reachability, scenario
from .graph import GraphError, PropertyGraph

WORKSPACE_ENV = "ATTACKGRAPH_WORKSPACE"


class CliError(Exception):
    pass


def _parse_kv(pairs: list) -> dict:
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise CliError(f"expected KEY=VALUE, got {pair!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attackgraph",
        description="Topology, reachability and attack graph toolkit",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph",
                        help=f"workspace archive file (default ${WORKSPACE_ENV})")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=lambda **kw: argparse.ArgumentParser(
                                    parents=[common], **kw))

    p_load = sub.add_parser("load", help="start a fresh workspace from scenario files")
    p_load.add_argument("scenarios", nargs="+", help="scenario YAML files, loaded in order")

    p_reach = sub.add_parser("reach", help="derive REACHES edges")
    p_reach.add_argument("--scope", nargs="*", default=[], help="label filters on end devices")
    p_reach.add_argument("--attr", action="append", default=[], help="attribute filter KEY=VALUE")
    p_reach.add_argument("--incremental", type=int, metavar="GEN",
                         help="recompute only for one merge generation")
    p_reach.add_argument("--sound", action="store_true",
                         help="with --incremental: also find mixed old/new paths")

    p_attack = sub.add_parser("attack", help="generate an attack graph")
    p_attack.add_argument("--target", required=True, help="target topology label")
    p_attack.add_argument("--label", required=True, help="attack graph label")
    p_attack.add_argument("--merged", action="store_true",
                          help="merge into existing attack graphs (requires --session)")
    p_attack.add_argument("--session", type=int, help="merge session for --merged")
    p_attack.add_argument("--prune-cycles", action="store_true",
                          help="remove cyclic exploits and orphan conditions afterwards")

    p_merge = sub.add_parser("merge", help="merge two topologies")
    p_merge.add_argument("joining", help="topology that joins (vicinity-free side)")
    p_merge.add_argument("host", help="topology being joined; vicinity filters this side")
    p_merge.add_argument("--vicinity", action="append", default=[],
                         help="attribute filter KEY=VALUE on the host side")

    p_demerge = sub.add_parser("demerge", help="undo a merge")
    group = p_demerge.add_mutually_exclusive_group(required=True)
    group.add_argument("--session", type=int, help="demerge this topology merge session")
    group.add_argument("--attack", action="store_true", help="demerge merged attack graphs")
    p_demerge.add_argument("--filter", help="with --attack: restrict to one label")

    p_metric = sub.add_parser("metric", help="evaluate a path metric")
    p_metric.add_argument("--kind", required=True,
                          choices=["shortest", "count", "histogram", "list"])
    p_metric.add_argument("--from", dest="start", required=True, help="start device name")
    p_metric.add_argument("--to", dest="end", required=True, help="end device name")
    p_metric.add_argument("--labels", nargs="+", required=True, help="attack graph labels")

    p_export = sub.add_parser("export", help="export the workspace")
    group = p_export.add_mutually_exclusive_group(required=True)
    group.add_argument("--dot", nargs="*", metavar="LABEL",
                       help="print a DOT document for the selected labels")
    group.add_argument("--save", help="copy the workspace archive to a file")

    return parser


def _workspace_path(args) -> str:
    path = args.graph or os.environ.get(WORKSPACE_ENV)
    if not path:
        raise CliError(f"no workspace: pass --graph or set ${WORKSPACE_ENV}")
    return path


def _open_workspace(path: str) -> PropertyGraph:
    if not os.path.exists(path):
        raise CliError(f"workspace {path!r} does not exist; run 'load' first")
    return archive.load_graph(path)


def _run(args) -> dict:
    path = _workspace_path(args)
    handler = _HANDLERS[args.command]
    report = {"command": args.command}
    started = time.perf_counter()
    handler(args, path, report)
    report["elapsed_ms"] = round((time.perf_counter() - started) * 1000, 3)
    return report


def _cmd_load(args, path, report) -> None:
    g = PropertyGraph()
    topologies = []
    for filename in args.scenarios:
        if not os.path.exists(filename):
            raise CliError(f"scenario file {filename!r} does not exist")
        doc = scenario.load_scenario_file(filename)
        topologies.append(scenario.load_scenario(doc, g))
    archive.save_graph(g, path)
    report["topologies"] = topologies
    report["nodes"] = sum(1 for _ in g.nodes())
    report["edges"] = sum(1 for _ in g.edges())
    report["visits"] = g.visits


def _cmd_reach(args, path, report) -> None:
    g = _open_workspace(path)
    if args.incremental is not None:
        if args.scope or args.attr:
            raise CliError("--scope/--attr do not apply to --incremental")
        result = reachability.compute_incremental(g, args.incremental, sound=args.sound)
    else:
        if args.sound:
            raise CliError("--sound only applies to --incremental")
        result = reachability.compute_full(g, args.scope, _parse_kv(args.attr))
    archive.save_graph(g, path)
    report["mode"] = result.mode
    report["edges_added"] = [list(pair) for pair in result.edges_added]
    report["edges_added_count"] = len(result.edges_added)
    report["visits"] = result.visits


def _cmd_attack(args, path, report) -> None:
    g = _open_workspace(path)
    visits_before = g.visits
    if args.merged:
        if args.session is None:
            raise CliError("--merged requires --session")
        stats = dynamics.merge_attack_graphs(g, args.session, args.target, args.label)
    else:
        params = attackgen.GenerationParams(args.target, args.label)
        stats = attackgen.generate(g, params)
    report["conditions_created"] = stats.conditions_created
    report["exploits_created"] = stats.exploits_created
    report["edges_created"] = stats.edges_created
    report["iterations"] = stats.iterations
    if args.prune_cycles:
        report["exploits_pruned"] = attackgen.prune_cycles(g, args.label)
        report["orphans_removed"] = attackgen.remove_orphan_conditions(g, args.label)
    archive.save_graph(g, path)
    report["visits"] = g.visits - visits_before


def _cmd_merge(args, path, report) -> None:
    g = _open_workspace(path)
    visits_before = g.visits
    session = dynamics.merge_topologies(g, args.joining, args.host, _parse_kv(args.vicinity))
    archive.save_graph(g, path)
    report["session"] = session.session_id
    report["edge_type"] = session.edge_type
    report["edges_created"] = session.created_edges
    report["nodes_labelled"] = sorted(session.labelled_nodes)
    report["visits"] = g.visits - visits_before


def _cmd_demerge(args, path, report) -> None:
    g = _open_workspace(path)
    visits_before = g.visits
    if args.attack:
        report["nodes_removed"] = dynamics.demerge_attack_graphs(g, args.filter)
    else:
        report["edges_removed"] = dynamics.demerge_topology(g, args.session)
    archive.save_graph(g, path)
    report["visits"] = g.visits - visits_before


def _cmd_metric(args, path, report) -> None:
    g = _open_workspace(path)
    visits_before = g.visits
    report["start"] = args.start
    report["end"] = args.end
    report["metric"] = args.kind
    if args.kind == "count":
        report["value"] = metrics.count_attack_paths(g, args.start, args.end, args.labels)
    elif args.kind == "histogram":
        histogram = metrics.path_length_histogram(g, args.start, args.end, args.labels)
        report["histogram"] = {str(k): v for k, v in histogram.items()}
    elif args.kind == "shortest":
        found = metrics.shortest_attack_path(g, args.start, args.end, args.labels)
        if found is None:
            report["value"] = None
        else:
            report["value"] = found[0]
            report["path"] = found[1].names
    else:
        paths = metrics.enumerate_attack_paths(g, args.start, args.end, args.labels)
        report["paths"] = [p.names for p in paths]
        report["value"] = len(paths)
    report["visits"] = g.visits - visits_before


def _cmd_export(args, path, report) -> None:
    g = _open_workspace(path)
    if args.save is not None:
        archive.save_graph(g, args.save)
        report["saved_to"] = args.save
    else:
        report["dot"] = dotexport.export_dot(g, args.dot)


_HANDLERS = {
    "load": _cmd_load,
    "reach": _cmd_reach,
    "attack": _cmd_attack,
    "merge": _cmd_merge,
    "demerge": _cmd_demerge,
    "metric": _cmd_metric,
    "export": _cmd_export,
}

_DOMAIN_ERRORS = (
    CliError,
    GraphError,
    scenario.ScenarioError,
    reachability.ReachabilityError,
    dynamics.DynamicsError,
    archive.ArchiveError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        path = _workspace_path(args)
        lock = FileLock(path + ".lock")
        try:
            with lock.acquire(timeout=0):
                report = _run(args)
        except Timeout:
            raise CliError(f"workspace {path!r} is in use by another invocation")
    except _DOMAIN_ERRORS as exc:
        print(f"attackgraph: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
