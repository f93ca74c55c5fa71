"""Command-line front end.

Subcommands: score (one tree against an alignment), count (tree-count
tables), search-cubic / search-mixed (exhaustive branch-and-bound),
compact (cubic search followed by contraction), bench (seeded trial
matrix comparing the two pipelines, emitted in a fixed column order).

Output goes to stdout in the format picked by --format; with `newick`
the trees are printed one per line and a short human summary goes to
stderr.  TSV and JSON outputs are deterministic for a fixed config and
seed, except for the *_ms timing columns.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

from .charmatrix import CharacterMatrix, parse_fasta, restrict_columns, subsample_species
from .contract import most_compact_pipeline
from .enumeration import (
    closed_form_estimate,
    count_cubic,
    count_mixed,
    count_total_mixed,
    enumerate_cubic,
    enumerate_mixed,
)
from .errors import AmbiguousSymbolError, ParsicompactError
from .parsimony import brute_force_best_fit, score_mixed_constrained
from .tree import parse_newick

BENCH_COLUMNS = [
    "n",
    "mtea_time_ms",
    "cteeca_time_ms",
    "compact_mixed_mp_trees",
    "cubic_mp_trees",
    "contracted_cubic_mp_trees_raw",
    "contracted_cubic_mp_trees_dedup",
    "mean_contractions",
    "mp_cost",
]


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    tree: str | None = None
    columns: int | None = None
    subset: int | None = None
    seed: int | None = None
    threads: int = 1
    order: str = "input"
    format: str = "tsv"
    no_prune: bool = False
    no_memo: bool = False
    oracle_check: bool = False
    allow_ambiguity: bool = False
    trees_out: str | None = None
    min_n: int = 4
    max_n: int = 8
    trials: int = 10
    progress: bool = False


@dataclass
class BenchRow:
    n: int
    mtea_time_ms: float
    cteeca_time_ms: float
    compact_mixed_mp_trees: float
    cubic_mp_trees: float
    contracted_cubic_mp_trees_raw: float
    contracted_cubic_mp_trees_dedup: float
    mean_contractions: float
    mp_cost: float


def _resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("PARSICOMPACT_THREADS")
        if env:
            value = int(env)
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise ParsicompactError(f"--threads must be >= 1, got {value}")
    return value


def _load_matrix(cfg: RunConfig) -> CharacterMatrix:
    if not cfg.input:
        raise ParsicompactError("this command needs --input FASTA")
    with open(cfg.input, encoding="utf-8") as fh:
        try:
            matrix = parse_fasta(fh, allow_ambiguity=cfg.allow_ambiguity)
        except AmbiguousSymbolError as exc:
            raise AmbiguousSymbolError(f"{exc} (flag: --allow-ambiguity)") from None
    if cfg.columns is not None:
        matrix = restrict_columns(matrix, cfg.columns)
    if cfg.subset is not None:
        if cfg.seed is None:
            raise ParsicompactError("--subset sampling requires --seed")
        matrix = subsample_species(matrix, cfg.subset, cfg.seed)
    return matrix


def _load_tree(cfg: RunConfig):
    if not cfg.tree:
        raise ParsicompactError("score needs --tree (Newick file or literal)")
    text = cfg.tree
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    elif "(" not in text and ";" not in text:
        raise ParsicompactError(f"--tree: no such file and not Newick text: {cfg.tree}")
    return parse_newick(text.strip())


def _emit_tsv(columns, rows):
    out = ["\t".join(columns)]
    for row in rows:
        out.append("\t".join(str(row[c]) for c in columns))
    sys.stdout.write("\n".join(out) + "\n")


def _emit_json(payload):
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _verified_newicks(trees, matrix, want_cost):
    """Serialize trees sorted canonically, re-checking each before emit."""
    out = []
    for key in sorted(trees, key=lambda k: k.data):
        item = trees[key]
        text = item if isinstance(item, str) else item.write_newick()
        reparsed = parse_newick(text)
        if reparsed.canonical_key() != key:
            raise ParsicompactError(f"serialization drift for {text}")
        got = score_mixed_constrained(reparsed, matrix).mp_cost
        if got != want_cost:
            raise ParsicompactError(
                f"emitted tree rescored to {got}, expected {want_cost}: {text}"
            )
        out.append(text)
    return out


def _write_trees(cfg, newicks):
    if cfg.trees_out:
        with open(cfg.trees_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(newicks) + "\n")
    if cfg.format == "newick":
        sys.stdout.write("\n".join(newicks) + "\n")


def _progress_printer(cfg):
    if not cfg.progress:
        return None

    def show(record):
        print(
            f"... visited={record.visited} pruned={record.pruned} "
            f"generated={record.generated}",
            file=sys.stderr,
        )

    return show


# -- commands --------------------------------------------------------------


def cmd_score(cfg: RunConfig) -> int:
    matrix = _load_matrix(cfg)
    tree = _load_tree(cfg)
    t0 = time.monotonic()
    result = score_mixed_constrained(tree, matrix)
    elapsed = (time.monotonic() - t0) * 1000.0
    if cfg.oracle_check:
        oracle = brute_force_best_fit(tree, matrix)
        if oracle.mp_cost != result.mp_cost:
            raise ParsicompactError(
                f"scorer {result.mp_cost} != oracle {oracle.mp_cost}"
            )
    row = {
        "mp_cost": result.mp_cost,
        "n": matrix.n,
        "m": matrix.m,
        "tree_nodes": tree.num_nodes,
        "tree_unlabelled": tree.n_unlabelled,
        "time_ms": f"{elapsed:.1f}",
    }
    if cfg.format == "newick":
        sys.stdout.write(tree.write_newick() + "\n")
        print(f"mp_cost={result.mp_cost}", file=sys.stderr)
    elif cfg.format == "json":
        row["tree"] = tree.write_newick()
        row["time_ms"] = elapsed
        _emit_json(row)
    else:
        _emit_tsv(list(row), [row])
    return 0


def cmd_count(cfg: RunConfig) -> int:
    if cfg.min_n < 1 or cfg.max_n < cfg.min_n:
        raise ParsicompactError(f"bad n range {cfg.min_n}..{cfg.max_n}")
    rows = []
    for n in range(cfg.min_n, cfg.max_n + 1):
        total = count_total_mixed(n)
        estimate = closed_form_estimate(n) if n >= 2 else float("nan")
        by_m = ",".join(str(count_mixed(n, m)) for m in range(max(n - 1, 1)))
        rows.append(
            {
                "n": n,
                "total_mixed": total,
                "closed_form_estimate": f"{estimate:.6g}",
                "estimate_over_exact": f"{estimate / total:.6g}",
                "cubic_count": count_cubic(n) if n >= 3 else 1,
                "t_n_m": by_m,
            }
        )
    if cfg.format == "json":
        _emit_json(rows)
    else:
        _emit_tsv(list(rows[0]), rows)
    return 0


def _cmd_search(cfg: RunConfig, kind: str) -> int:
    matrix = _load_matrix(cfg)
    runner = enumerate_cubic if kind == "cubic" else enumerate_mixed
    t0 = time.monotonic()
    record = runner(
        matrix,
        order=cfg.order,
        no_prune=cfg.no_prune,
        threads=cfg.threads,
        on_progress=_progress_printer(cfg),
    )
    elapsed = (time.monotonic() - t0) * 1000.0
    best = record.most_compact if kind == "mixed" else record.incumbents
    newicks = _verified_newicks(best, matrix, record.incumbent_cost)
    _write_trees(cfg, newicks)
    row = {
        "n": matrix.n,
        "m": matrix.m,
        "mp_cost": record.incumbent_cost,
        "mp_trees": len(record.incumbents),
        "most_compact_trees": len(best),
        "min_nodes": record.min_nodes,
        "visited": record.visited,
        "pruned": record.pruned,
        "generated": record.generated,
        "time_ms": f"{elapsed:.1f}",
    }
    if cfg.format == "newick":
        print(
            f"mp_cost={record.incumbent_cost} trees={len(best)} "
            f"visited={record.visited}",
            file=sys.stderr,
        )
    elif cfg.format == "json":
        row["trees"] = newicks
        row["time_ms"] = elapsed
        _emit_json(row)
    else:
        _emit_tsv(list(row), [row])
    return 0


def cmd_search_cubic(cfg: RunConfig) -> int:
    return _cmd_search(cfg, "cubic")


def cmd_search_mixed(cfg: RunConfig) -> int:
    return _cmd_search(cfg, "mixed")


def cmd_compact(cfg: RunConfig) -> int:
    matrix = _load_matrix(cfg)
    t0 = time.monotonic()
    result = most_compact_pipeline(
        matrix,
        order=cfg.order,
        threads=cfg.threads,
        no_memo=cfg.no_memo,
        oracle_check=cfg.oracle_check,
        on_progress=_progress_printer(cfg),
    )
    elapsed = (time.monotonic() - t0) * 1000.0
    newicks = _verified_newicks(result.trees, matrix, result.mp_cost)
    _write_trees(cfg, newicks)
    cubic = result.cubic_record
    row = {
        "n": matrix.n,
        "m": matrix.m,
        "mp_cost": result.mp_cost,
        "node_count": result.best_node_count,
        "compact_trees": result.dedup_count,
        "raw_arrivals": result.raw_count,
        "explored_states": result.explored_states,
        "contractions": result.contractions,
        "mean_contractions": f"{result.mean_contractions:.2f}",
        "cubic_mp_trees": len(cubic.incumbents),
        "cubic_visited": cubic.visited,
        "time_ms": f"{elapsed:.1f}",
    }
    if cfg.format == "newick":
        print(
            f"mp_cost={result.mp_cost} nodes={result.best_node_count} "
            f"trees={result.dedup_count}",
            file=sys.stderr,
        )
    elif cfg.format == "json":
        row["trees"] = newicks
        row["mean_contractions"] = result.mean_contractions
        row["time_ms"] = elapsed
        _emit_json(row)
    else:
        _emit_tsv(list(row), [row])
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    matrix = _load_matrix(cfg)
    seed = cfg.seed if cfg.seed is not None else 0
    if cfg.min_n < 2 or cfg.max_n < cfg.min_n:
        raise ParsicompactError(f"bad n range {cfg.min_n}..{cfg.max_n}")
    if cfg.max_n > matrix.n:
        raise ParsicompactError(
            f"--max-n {cfg.max_n} exceeds the {matrix.n} species available"
        )
    rows = []
    for n in range(cfg.min_n, cfg.max_n + 1):
        sums = {c: 0.0 for c in BENCH_COLUMNS[1:]}
        mtea_total = cteeca_total = 0.0
        for trial in range(cfg.trials):
            sub = subsample_species(matrix, n, seed + trial)
            t0 = time.monotonic()
            mixed = enumerate_mixed(sub, order=cfg.order, threads=cfg.threads)
            t_mtea = (time.monotonic() - t0) * 1000.0
            t0 = time.monotonic()
            pipe = most_compact_pipeline(
                sub,
                order=cfg.order,
                threads=cfg.threads,
                no_memo=cfg.no_memo,
                oracle_check=cfg.oracle_check,
            )
            t_cteeca = (time.monotonic() - t0) * 1000.0
            if mixed.incumbent_cost != pipe.mp_cost:
                raise ParsicompactError(
                    f"pipelines disagree at n={n} trial={trial}: "
                    f"{mixed.incumbent_cost} vs {pipe.mp_cost}"
                )
            if set(mixed.most_compact) != set(pipe.trees):
                raise ParsicompactError(
                    f"most compact tree sets disagree at n={n} trial={trial}"
                )
            mtea_total += t_mtea
            cteeca_total += t_cteeca
            sums["mtea_time_ms"] += t_mtea
            sums["cteeca_time_ms"] += t_cteeca
            sums["compact_mixed_mp_trees"] += len(mixed.most_compact)
            sums["cubic_mp_trees"] += len(pipe.cubic_record.incumbents)
            sums["contracted_cubic_mp_trees_raw"] += pipe.raw_count
            sums["contracted_cubic_mp_trees_dedup"] += pipe.dedup_count
            sums["mean_contractions"] += pipe.mean_contractions
            sums["mp_cost"] += pipe.mp_cost
            if cfg.progress:
                print(
                    f"... n={n} trial={trial} mtea={t_mtea:.0f}ms "
                    f"cteeca={t_cteeca:.0f}ms cost={pipe.mp_cost}",
                    file=sys.stderr,
                )
        k = cfg.trials
        rows.append(
            BenchRow(
                n=n,
                mtea_time_ms=round(sums["mtea_time_ms"] / k, 1),
                cteeca_time_ms=round(sums["cteeca_time_ms"] / k, 1),
                compact_mixed_mp_trees=round(sums["compact_mixed_mp_trees"] / k, 1),
                cubic_mp_trees=round(sums["cubic_mp_trees"] / k, 1),
                contracted_cubic_mp_trees_raw=round(
                    sums["contracted_cubic_mp_trees_raw"] / k, 1
                ),
                contracted_cubic_mp_trees_dedup=round(
                    sums["contracted_cubic_mp_trees_dedup"] / k, 1
                ),
                mean_contractions=round(sums["mean_contractions"] / k, 2),
                mp_cost=round(sums["mp_cost"] / k, 1),
            )
        )
        if cteeca_total:
            print(
                f"n={n}: contraction/search time ratio "
                f"{cteeca_total / mtea_total:.3f} "
                f"(speedup {mtea_total / cteeca_total:.1f}x)",
                file=sys.stderr,
            )
    dicts = [vars(r) for r in rows]
    if cfg.format == "json":
        _emit_json(dicts)
    else:
        _emit_tsv(BENCH_COLUMNS, dicts)
    return 0


# -- argument parsing ---------------------------------------------------------


def _add_common(sub, *, matrix=True, search=False):
    if matrix:
        sub.add_argument("--input", help="aligned FASTA file")
        sub.add_argument("--columns", type=int, help="keep only the first K characters")
        sub.add_argument("--subset", type=int, help="sample this many species (needs --seed)")
        sub.add_argument("--seed", type=int, help="seed for any randomized sampling")
        sub.add_argument(
            "--allow-ambiguity",
            action="store_true",
            help="treat gap/unknown symbols as ordinary states instead of erroring",
        )
    sub.add_argument(
        "--format",
        choices=["newick", "tsv", "json"],
        default="tsv",
        help="output format (default tsv)",
    )
    if search:
        sub.add_argument("--threads", type=int, default=None,
                         help="worker count (default: PARSICOMPACT_THREADS or CPU count)")
        sub.add_argument("--order", choices=["input", "diverse"], default="input",
                         help="species insertion order for the search")
        sub.add_argument("--trees-out", help="also write the result trees to this Newick file")
        sub.add_argument("--progress", action="store_true",
                         help="print progress counters to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parsicompact",
        description="Most compact maximum-parsimony trees over mixed-labelled topologies",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("score", help="MP-cost of one tree against an alignment")
    _add_common(p)
    p.add_argument("--tree", help="Newick file (or literal Newick text)")
    p.add_argument("--oracle-check", action="store_true",
                   help="cross-check the cost against the exhaustive oracle")
    p.set_defaults(func=cmd_score)

    p = subs.add_parser("count", help="tree-count table for a range of n")
    _add_common(p, matrix=False)
    p.add_argument("--min-n", type=int, default=1)
    p.add_argument("--max-n", type=int, default=12)
    p.set_defaults(func=cmd_count)

    p = subs.add_parser("search-cubic", help="exhaustive cubic-topology MP search")
    _add_common(p, search=True)
    p.add_argument("--no-prune", action="store_true", help="disable the cost bound")
    p.set_defaults(func=cmd_search_cubic)

    p = subs.add_parser("search-mixed", help="exhaustive mixed-tree MP search")
    _add_common(p, search=True)
    p.add_argument("--no-prune", action="store_true", help="disable the cost bound")
    p.set_defaults(func=cmd_search_mixed)

    p = subs.add_parser("compact", help="cubic MP search plus full contraction")
    _add_common(p, search=True)
    p.add_argument("--no-memo", action="store_true",
                   help="re-explore repeated contraction states instead of memoizing")
    p.add_argument("--oracle-check", action="store_true",
                   help="shadow-check every contraction's root sets against a rescore")
    p.set_defaults(func=cmd_compact)

    p = subs.add_parser("bench", help="seeded search-vs-contraction benchmark table")
    _add_common(p, search=True)
    p.add_argument("--min-n", type=int, default=4)
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--no-memo", action="store_true")
    p.add_argument("--oracle-check", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def _to_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in vars(cfg):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "threads"):
        cfg.threads = _resolve_threads(args.threads)
    if hasattr(args, "seed"):
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(_to_config(args))
    except ParsicompactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
