"""Command-line front end.

Subcommands: ``validate``, ``diff``, ``merge``, ``merge-driver``,
``stats``, ``simulate``. Exit codes follow one contract everywhere:
0 clean, 1 differences or unresolved conflicts, 2 usage or input error.

``merge-driver`` follows the version-control custom-driver convention:
invoked with the ancestor, current, and other file paths, it overwrites
the current file with the merged document and exits 0 on a clean merge,
1 when unresolved conflicts remain (the file still holds a loadable
document with conflicting items at ancestor state), 2 on bad input.
"""

from __future__ import annotations

import argparse
import sys

from .assets import BlobStore, CommandStrategy, merge_manifests
from .config import ConfigError, load_config
from .diff import ChangeClass, classify, diff_stats
from .graph import SceneMergeError, validate
from .levelfile import (
    FORMAT_VERSION,
    LevelDocument,
    ParseError,
    read_document,
    serialize,
    write_document,
)
from .merge import merge3
from .report import render_report
from .sim import PRESETS, SizeParams, run_simulation

EXIT_CLEAN = 0
EXIT_DIFFERENCES = 1
EXIT_ERROR = 2


def _cmd_validate(args) -> int:
    doc = read_document(args.file)
    report = validate(doc.graph)
    if report.ok:
        print("valid")
        return EXIT_CLEAN
    print(report)
    return EXIT_DIFFERENCES


def _describe_changes(diff) -> list[str]:
    from .merge import _describe_delta  # single authoritative delta renderer

    lines = []
    for node_id in diff.nodes_in_class(ChangeClass.ADDED):
        lines.append(f"add {node_id}")
    for node_id in diff.nodes_in_class(ChangeClass.DELETED):
        lines.append(f"delete {node_id}")
    for node_id in diff.nodes_in_class(ChangeClass.MODIFIED):
        delta = diff.deltas[node_id]
        if not delta.intrinsic:
            lines.append(f"modify {node_id} (propagated)")
            continue
        if delta.reparented:
            lines.append(f"reparent {node_id} under {delta.new_direct_parent or 'nothing'}")
        fragments = [
            f
            for f in _describe_delta(delta)
            if not f.startswith("reparent")
        ]
        if fragments and (delta.property_sets or delta.property_removals or delta.dep_kind_changes):
            lines.append(f"modify {node_id}: " + "; ".join(fragments))
        elif not delta.reparented:
            lines.append(f"modify {node_id}")
    return lines


def _cmd_diff(args) -> int:
    ancestor = read_document(args.ancestor)
    version = read_document(args.version)
    diff = classify(ancestor.graph, version.graph)
    stats = diff_stats(diff)
    print(
        f"{stats.added} added, {stats.deleted} deleted, "
        f"{stats.modified_intrinsic + stats.modified_propagated} modified "
        f"({stats.modified_intrinsic} intrinsic, {stats.modified_propagated} propagated)"
    )
    print(f"total edited nodes: {stats.total_edited}")
    for line in _describe_changes(diff):
        print(line)
    return EXIT_DIFFERENCES if stats.total_edited else EXIT_CLEAN


def _run_merge(args, out_path, report_path) -> int:
    config = load_config(getattr(args, "config", None))
    policy = config.merge_policy(getattr(args, "policy", None))

    ancestor = read_document(args.ancestor)
    mine = read_document(args.mine)
    theirs = read_document(args.theirs)

    manifest_merger = None
    if config.assets_dir is not None and (config.strategies or config.validators):
        store = BlobStore(config.assets_dir)
        strategies = {tag: CommandStrategy(argv) for tag, argv in config.strategies.items()}

        def manifest_merger(base, mine_m, theirs_m, pol):
            result = merge_manifests(
                base,
                mine_m,
                theirs_m,
                store,
                pol,
                strategies=strategies,
                validators=config.validators,
                type_map=config.asset_types,
            )
            return result.conflicts, result.manifest, result.dropped

    outcome = merge3(ancestor.graph, mine.graph, theirs.graph, policy, manifest_merger)

    merged_doc = LevelDocument(FORMAT_VERSION, outcome.merged)
    if out_path == "-":
        sys.stdout.write(serialize(merged_doc))
    else:
        write_document(merged_doc, out_path)
    if report_path:
        with open(report_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(render_report(outcome, policy, config.report_meta()))
    return EXIT_DIFFERENCES if outcome.unresolved else EXIT_CLEAN


def _cmd_merge(args) -> int:
    return _run_merge(args, args.output, args.report)


def _cmd_merge_driver(args) -> int:
    args.mine = args.current
    args.theirs = args.other
    return _run_merge(args, args.current, args.report)


def _cmd_stats(args) -> int:
    config = load_config(getattr(args, "config", None))
    policy = config.merge_policy(getattr(args, "policy", None))
    ancestor = read_document(args.ancestor)
    mine = read_document(args.mine)
    theirs = read_document(args.theirs)
    outcome = merge3(ancestor.graph, mine.graph, theirs.graph, policy)
    s = outcome.stats
    print(
        f"{s.ancestor_nodes} {s.ancestor_edges} {s.diff_a_edited} {s.diff_b_edited} "
        f"{s.merged_nodes} {s.merged_edges} {s.wall_time_s:.3f}"
    )
    return EXIT_CLEAN


def _cmd_simulate(args) -> int:
    if args.size == "custom":
        size = SizeParams(
            nodes=args.nodes, edges=args.edges, ops_per_branch=args.ops_per_branch
        )
    else:
        size = PRESETS[args.size]
    config = load_config(getattr(args, "config", None))
    policy = config.merge_policy(getattr(args, "policy", None))
    summary = run_simulation(args.seed, args.count, size, policy, args.out)
    passed = summary["count"] - summary["failures"]
    print(f"{passed}/{summary['count']} scenarios passed (size={args.size}, policy={policy.resolution.value})")
    for entry in summary["scenarios"]:
        if not entry["passed"]:
            print(f"seed {entry['seed']} FAILED: " + "; ".join(entry["violations"]))
    if args.out:
        print(f"results written to {args.out}")
    return EXIT_CLEAN if summary["failures"] == 0 else EXIT_DIFFERENCES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenemerge",
        description="Semantics-preserving 3-way diff and merge for game level files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a level file's structural invariants")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("diff", help="classify changes of a version against its ancestor")
    p.add_argument("ancestor")
    p.add_argument("version")
    p.set_defaults(func=_cmd_diff)

    def add_merge_options(p, with_output: bool):
        p.add_argument("--policy", choices=["manual", "prefer-a", "prefer-b"])
        p.add_argument("--config", help="explicit configuration file path")
        p.add_argument("--report", help="write the merge report to this path")
        if with_output:
            p.add_argument(
                "--output", default="-", help="merged document path (default: stdout)"
            )

    p = sub.add_parser("merge", help="3-way merge two versions against their ancestor")
    p.add_argument("ancestor")
    p.add_argument("mine")
    p.add_argument("theirs")
    add_merge_options(p, with_output=True)
    p.set_defaults(func=_cmd_merge)

    p = sub.add_parser(
        "merge-driver",
        help="version-control merge driver: merges in place over the current file",
    )
    p.add_argument("ancestor")
    p.add_argument("current")
    p.add_argument("other")
    add_merge_options(p, with_output=False)
    p.set_defaults(func=_cmd_merge_driver)

    p = sub.add_parser("stats", help="one-line merge statistics row")
    p.add_argument("ancestor")
    p.add_argument("mine")
    p.add_argument("theirs")
    p.add_argument("--policy", choices=["manual", "prefer-a", "prefer-b"])
    p.add_argument("--config")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("simulate", help="run seeded random merge scenarios")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=100)
    p.add_argument(
        "--size", default="custom", choices=["custom", *sorted(PRESETS)],
    )
    p.add_argument("--nodes", type=int, default=20)
    p.add_argument("--edges", type=int, default=24)
    p.add_argument("--ops-per-branch", type=int, default=4)
    p.add_argument("--policy", choices=["manual", "prefer-a", "prefer-b"])
    p.add_argument("--config")
    p.add_argument("--out", default="sim-results.json", help="machine-readable results file")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigError) as exc:
        print(f"scenemerge: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"scenemerge: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SceneMergeError as exc:
        print(f"scenemerge: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
