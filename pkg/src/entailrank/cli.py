"""Command-line entry point orchestrating the pipeline end to end.

Subcommands map one-to-one onto module operations: ingest, stats, index,
score-bm25, requests, ingest-scores, tune, select, ensemble, eval, augment.
All outputs are written atomically; exit codes distinguish usage (2),
validation (3), and I/O (4) failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import bm25, corpus, metrics, report, runs, selection, textproc
from .errors import EXIT_IO, EXIT_OK, EXIT_VALIDATION, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_SEED = 13


def _analyzer_from_args(args) -> textproc.Analyzer:
    stopwords = (
        textproc.load_wordlist_file(args.stopwords) if args.stopwords else None
    )
    return textproc.Analyzer(stopwords=stopwords, stem=not args.no_stem)


def _add_analyzer_flags(parser):
    parser.add_argument(
        "--stopwords", metavar="FILE", help="override the shipped stopword list"
    )
    parser.add_argument(
        "--abbreviations", metavar="FILE",
        help="override the shipped sentence-splitter abbreviation guard list",
    )
    parser.add_argument(
        "--no-stem", action="store_true", help="disable stemming (diagnostics)"
    )


def _abbreviations_from_args(args):
    if args.abbreviations:
        return textproc.load_wordlist_file(args.abbreviations)
    return None


def _load_grid(spec: str) -> selection.ParamGrid:
    if spec == "default":
        return selection.default_grid()
    with open(spec, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        return selection.ParamGrid(
            alphas=tuple(payload["alphas"]),
            betas=tuple(payload["betas"]),
            gammas=tuple(payload["gammas"]),
        )
    except (KeyError, TypeError):
        raise ValidationError(f"grid file {spec} must define alphas/betas/gammas") from None


def _load_params(spec: str) -> selection.SelectionParams:
    if "," in spec:
        return selection.SelectionParams.parse(spec)
    return selection.load_params(spec)


def _figure_path(out_path: str) -> Path:
    return Path(out_path).with_suffix(".png")


def cmd_ingest(args) -> int:
    dataset = corpus.load_coliee_layout(args.root, split_name=args.split_name)
    corpus.write_canonical(dataset, args.out)
    labeled = "labeled" if dataset.labeled else "unlabeled"
    print(f"wrote {len(dataset)} examples ({labeled}) to {args.out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    dataset = corpus.load_canonical(args.dataset)
    stats = corpus.dataset_stats(dataset)
    print(f"dataset {dataset.split_name}")
    print(f"  examples             {stats.example_count}")
    print(f"  avg candidates       {stats.avg_candidates:.2f}")
    print(f"  avg positives        {stats.avg_positives:.2f}")
    print(f"  avg fragment tokens  {stats.avg_fragment_tokens:.2f}")
    print(f"  avg candidate tokens {stats.avg_candidate_tokens:.2f}")
    if args.out:
        path = Path(args.out)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8")
        tmp.replace(path)
    return EXIT_OK


def cmd_index(args) -> int:
    analyzer = _analyzer_from_args(args)
    abbreviations = _abbreviations_from_args(args)
    passages = []
    for dataset_path in args.dataset:
        dataset = corpus.load_canonical(dataset_path)
        for ex in dataset.examples:
            for cand in ex.candidates:
                passages.append(
                    (
                        bm25.passage_id(dataset.split_name, ex.example_id, cand.candidate_id),
                        cand.text,
                    )
                )
    for aux_path in args.aux_docs or []:
        for doc_id, text in corpus.load_aux_documents(aux_path):
            sentences = textproc.segment_sentences(text, abbreviations)
            for k, window in enumerate(
                textproc.window_segments(sentences, args.window, args.stride)
            ):
                passages.append((bm25.aux_passage_id(doc_id, k), window))
    index = bm25.build_index(passages, analyzer)
    bm25.save_index(index, args.out)
    print(
        f"indexed {index.passage_count} passages "
        f"({len(index.postings)} terms, avgdl {index.avgdl:.2f}) to {args.out}"
    )
    return EXIT_OK


def cmd_score_bm25(args) -> int:
    analyzer = _analyzer_from_args(args)
    abbreviations = _abbreviations_from_args(args)
    index = bm25.load_index(args.index, analyzer=analyzer)
    dataset = corpus.load_canonical(args.dataset)

    def score_one(ex):
        scored = bm25.score_fragment(
            index, analyzer, ex, dataset.split_name,
            k1=args.k1, b=args.b, abbreviations=abbreviations,
        )
        return ex.example_id, bm25.normalize_run(scored, mode=args.normalize)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            scored_examples = list(pool.map(score_one, dataset.examples))
    else:
        scored_examples = [score_one(ex) for ex in dataset.examples]
    run = runs.Run(tag=args.tag, entries=dict(scored_examples))
    runs.write_run(run, args.out)
    print(f"scored {len(run)} examples to {args.out}")
    return EXIT_OK


def cmd_requests(args) -> int:
    dataset = corpus.load_canonical(args.dataset)
    count = runs.write_scoring_requests(dataset, args.out, limit=args.limit)
    print(f"wrote {count} scoring requests to {args.out}")
    return EXIT_OK


def cmd_ingest_scores(args) -> int:
    entries: dict[str, list[bm25.ScoredCandidate]] = {}
    with open(args.scores, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                raise ValidationError(f"line {lineno}: invalid JSON") from None
            has_logits = "logit_true" in record and "logit_false" in record
            if has_logits == ("score" in record):
                raise ValidationError(
                    f"line {lineno}: provide either logit_true/logit_false or score"
                )
            try:
                example_id = str(record["example_id"])
                candidate_id = str(record["candidate_id"])
                if has_logits:
                    score = runs.true_prob(
                        float(record["logit_true"]), float(record["logit_false"])
                    )
                else:
                    score = float(record["score"])
            except (KeyError, TypeError, ValueError):
                raise ValidationError(f"line {lineno}: malformed score record") from None
            entries.setdefault(example_id, []).append(
                bm25.ScoredCandidate(candidate_id, score)
            )
    if not entries:
        raise ValidationError(f"no score records in {args.scores}")
    run = runs.Run(tag=args.tag, entries=entries)
    runs.write_run(run, args.out)
    print(f"ingested scores for {len(run)} examples to {args.out}")
    return EXIT_OK


def cmd_tune(args) -> int:
    run = runs.read_run(args.run)
    gold = corpus.load_canonical(args.gold)
    grid = _load_grid(args.grid)
    table = selection.sweep(run, gold, grid, threads=args.threads)
    params, dev_f1 = selection.best_of(table)
    selection.save_params(params, args.out, dev_f1, run.tag, grid)
    if not args.no_figure:
        report.save_grid_figure(table, grid, _figure_path(args.out))
    print(
        f"tuned alpha={params.alpha:g} beta={params.beta} gamma={params.gamma:g} "
        f"dev F1 {dev_f1:.4f}"
    )
    return EXIT_OK


def cmd_select(args) -> int:
    run = runs.read_run(args.run)
    params = _load_params(args.params)
    chosen = selection.select_run(run, params)
    selection.write_predictions(chosen, args.out)
    if args.run_out:
        runs.write_run(chosen.to_run(args.tag or f"{run.tag}-sel"), args.run_out)
    total = sum(len(c) for c in chosen.entries.values())
    print(f"selected {total} candidates over {len(chosen.entries)} examples to {args.out}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    gold = corpus.load_canonical(args.gold)
    sel_a = _read_selection_file(args.a, fill_ids={ex.example_id for ex in gold.examples})
    sel_b = _read_selection_file(args.b, fill_ids={ex.example_id for ex in gold.examples})
    grid = _load_grid(args.grid)
    target_a = target_b = None
    if args.apply_a or args.apply_b:
        if not (args.apply_a and args.apply_b):
            raise ValidationError("provide both --apply-a and --apply-b or neither")
        ids_a = set(runs.read_run(args.apply_a).entries)
        ids_b = set(runs.read_run(args.apply_b).entries)
        target_a = _read_selection_file(args.apply_a, fill_ids=ids_a | ids_b)
        target_b = _read_selection_file(args.apply_b, fill_ids=ids_a | ids_b)
    final, params, dev_f1 = selection.ensemble_pipeline(
        sel_a, sel_b, gold, grid, target_a=target_a, target_b=target_b,
        threads=args.threads,
    )
    selection.write_predictions(final, args.out)
    if args.run_out:
        runs.write_run(final.to_run("ensemble"), args.run_out)
    if args.params_out:
        selection.save_params(params, args.params_out, dev_f1, "ensemble", grid)
    print(
        f"ensemble tuned alpha={params.alpha:g} beta={params.beta} "
        f"gamma={params.gamma:g} dev F1 {dev_f1:.4f}; wrote {args.out}"
    )
    return EXIT_OK


def _read_selection_file(path, fill_ids: set[str]) -> selection.Selection:
    """Read a score-bearing selection (run format); restore empty examples.

    Writing a selection as a run drops examples whose answer set is empty, so
    coverage is refilled from the known example ids.
    """
    sel = selection.Selection.from_run(runs.read_run(path))
    for example_id in fill_ids:
        sel.entries.setdefault(example_id, {})
    return sel


def cmd_eval(args) -> int:
    gold = corpus.load_canonical(args.gold)
    predictions = selection.read_predictions(args.pred)
    result = metrics.micro_prf(predictions, gold)
    print(metrics.format_report(result, title=f"evaluation against {gold.split_name}"))
    if args.out:
        path = Path(args.out)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8")
        tmp.replace(path)
        if not args.no_figure:
            report.save_eval_figure(result, _figure_path(args.out))
    return EXIT_OK


def cmd_augment(args) -> int:
    dataset = corpus.load_canonical(args.dataset)
    if not dataset.labeled:
        raise ValidationError("augmentation requires a labeled dataset")
    base_paragraphs = {}
    if args.base_paragraphs:
        for doc_id, text in corpus.load_aux_documents(args.base_paragraphs):
            base_paragraphs[doc_id] = text
    pairs = []
    records = []
    for ex in dataset.examples:
        fragments = [ex.fragment_text]
        base = base_paragraphs.get(ex.example_id)
        if base:
            fragments.extend(
                af.text
                for af in textproc.make_artificial_fragments(
                    base, ex.fragment_text, ex.gold, source_example_id=ex.example_id
                )
            )
        for fragment in fragments:
            for cand in ex.candidates:
                label = cand.candidate_id in ex.gold
                # candidate ids repeat across examples; scope the pair key
                key = f"{ex.example_id}/{cand.candidate_id}"
                pairs.append((fragment, key, label))
                records.append(
                    {
                        "example_id": ex.example_id,
                        "fragment": fragment,
                        "candidate_id": cand.candidate_id,
                        "candidate": cand.text,
                        "label": int(label),
                    }
                )
    by_key = {
        (r["fragment"], f"{r['example_id']}/{r['candidate_id']}"): r for r in records
    }
    sample = textproc.balanced_sample(pairs, n=args.n, seed=args.seed)
    out_path = Path(args.out)
    lines = [
        json.dumps(by_key[(fragment, key)], ensure_ascii=False)
        for fragment, key, _label in sample
    ]
    tmp = out_path.with_name(out_path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", "utf-8")
    tmp.replace(out_path)
    print(f"sampled {len(sample)} balanced pairs to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entailrank",
        description="Entailment-ranking pipeline: lexical first stage, pluggable "
        "relevance scorers, tuned answer selection, ensembles, micro-F1 evaluation.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a directory-tree dataset to canonical JSONL")
    p.add_argument("--root", required=True, help="dataset root directory")
    p.add_argument("--split-name", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default=None, help="also write the report as JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("index", help="build the inverted index")
    p.add_argument("--dataset", required=True, action="append",
                   help="canonical dataset whose candidates are indexed (repeatable)")
    p.add_argument("--aux-docs", action="append",
                   help="JSONL of long documents indexed as overlapping windows")
    p.add_argument("--window", type=int, default=10, help="aux window size in sentences")
    p.add_argument("--stride", type=int, default=5, help="aux window stride in sentences")
    _add_analyzer_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("score-bm25", help="score a dataset's candidate pools")
    p.add_argument("--dataset", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--k1", type=float, default=bm25.DEFAULT_K1)
    p.add_argument("--b", type=float, default=bm25.DEFAULT_B)
    p.add_argument("--normalize", choices=["none", "max"], default="max",
                   help="per-query score normalization (default max)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tag", default="bm25")
    _add_analyzer_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score_bm25)

    p = sub.add_parser("requests", help="write scoring requests for an external scorer")
    p.add_argument("--dataset", required=True)
    p.add_argument("--limit", type=int, default=512, help="whitespace-token budget")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_requests)

    p = sub.add_parser("ingest-scores", help="turn external scorer logits into a run")
    p.add_argument("--scores", required=True,
                   help="JSONL with example_id, candidate_id and logit_true/logit_false or score")
    p.add_argument("--tag", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest_scores)

    p = sub.add_parser("tune", help="grid-search selection parameters on a dev split")
    p.add_argument("--run", required=True)
    p.add_argument("--gold", required=True, help="labeled canonical dataset")
    p.add_argument("--grid", default="default", help="'default' or a grid JSON file")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--out", required=True, help="tuned parameter file")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("select", help="apply selection rules to a run")
    p.add_argument("--run", required=True)
    p.add_argument("--params", required=True,
                   help="parameter file or inline 'alpha,beta,gamma'")
    p.add_argument("--run-out", default=None,
                   help="also write the score-bearing selection in run format")
    p.add_argument("--tag", default=None)
    p.add_argument("--out", required=True, help="predictions TSV")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("ensemble", help="merge two selections, retune, re-select")
    p.add_argument("--a", required=True, help="first dev selection (run format)")
    p.add_argument("--b", required=True, help="second dev selection (run format)")
    p.add_argument("--gold", required=True, help="labeled dev dataset for retuning")
    p.add_argument("--apply-a", default=None, help="first target-split selection")
    p.add_argument("--apply-b", default=None, help="second target-split selection")
    p.add_argument("--grid", default="default")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--params-out", default=None)
    p.add_argument("--run-out", default=None)
    p.add_argument("--out", required=True, help="predictions TSV")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("eval", help="micro P/R/F1 of predictions against gold")
    p.add_argument("--pred", required=True, help="predictions TSV")
    p.add_argument("--gold", required=True)
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--out", default=None, help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("augment", help="sliding-window positives and balanced sampling")
    p.add_argument("--dataset", required=True, help="labeled canonical dataset")
    p.add_argument("--base-paragraphs", default=None,
                   help="JSONL of base-case paragraphs (doc_id = example_id)")
    p.add_argument("--n", type=int, default=20000, help="balanced sample size")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
