"""Pipeline command line: index -> segment -> annotate -> eval -> stats.

Every file-producing run drops a manifest next to its output recording
the resolved parameters, sha256 checksums of the inputs, the seed, and
the tool version, so any artifact can be traced back to what produced
it.  Apart from manifest timestamps, reruns with identical inputs and
seeds are byte-identical.

Exit codes: 0 success, 1 validation/usage problems, 2 internal errors.
Diagnostics go to stderr as JSON lines; results go to stdout or files.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .annotation.agreement import kappa_free
from .annotation.export import FORMAT as EXPORT_FORMAT
from .annotation.export import _dump as dump_table
from .annotation.export import _load as load_table
from .annotation.export import export_dataset
from .annotation.records import DIMENSIONS, Batch
from .annotation.store import AnnotationStore
from .errors import ArgumentError, CloseReadError, FitError, FormatError
from .evaluation.gold import SplitConfig as GoldSplitConfig
from .evaluation.gold import build_gold
from .evaluation.scoring import TASKS, load_predictions, score_predictions
from .ngram_index import (FLOOR_EPSILON, FLOOR_FLAG, MODE_BIGRAM, MODE_FULL,
                          SuffixIndex, build_index)
from .novelty import (NoveltyProfile, contamination_check, novelty_profile,
                      select_for_annotation)
from .segmentation import (ExpressionSpan, Passage, SplitConfig,
                           mark_pre_highlighted, split_atomic)
from .stats import (CROWD_GROUPS, EXPERT_GROUPS, PreferencePair,
                    fit_logit_varying_intercepts, fit_preference_model,
                    linear_hypothesis, log_standardize, nested_level,
                    per_word_delta, population_curve, quartile_report,
                    source_contrasts)
from .tokenization import encode, split_text, tokenize_corpus

STORE_ENV = "CLOSEREAD_STORE"
SECRET_ENV = "CLOSEREAD_SECRET"


# -- plumbing ----------------------------------------------------------------

@dataclass
class RunManifest:
    """Provenance sidecar written next to every file output."""

    subcommand: str
    config: dict
    inputs: dict          # input path -> sha256 of its bytes
    seed: int | None
    version: str
    started: str
    finished: str


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def _log(event: str, **fields) -> None:
    rec = {"event": event, **fields}
    print(json.dumps(rec, sort_keys=True, ensure_ascii=False, default=str),
          file=sys.stderr)


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, sort_keys=True, ensure_ascii=False, indent=2)
        f.write("\n")


def _write_manifest(ctx, target, inputs, seed=None, started=None) -> None:
    """Write the run manifest beside `target` (a file or a directory)."""
    target = Path(target)
    if target.is_dir():
        path = target / "manifest.json"
    else:
        path = target.with_name(target.name + ".manifest.json")
    manifest = RunManifest(
        subcommand=ctx.command_path,
        config={k: _jsonable(v) for k, v in sorted(ctx.params.items())},
        inputs={str(p): _sha256(p) for p in inputs},
        seed=seed,
        version=__version__,
        started=started or _utcnow(),
        finished=_utcnow(),
    )
    _write_json(path, asdict(manifest))


def _iter_records(path):
    """(lineno, record) pairs from a line-delimited JSON file."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None


def _read_corpus(path) -> list:
    """Documents from a plain text file (one per line) or a .jsonl of
    records carrying a 'text' field."""
    p = Path(path)
    if p.suffix in (".jsonl", ".ndjson"):
        docs = []
        for lineno, rec in _iter_records(p):
            if not isinstance(rec, dict) or "text" not in rec:
                raise FormatError(f"{p}:{lineno}: expected a record with 'text'")
            docs.append(rec["text"])
    else:
        with open(p, encoding="utf-8") as f:
            docs = [line.rstrip("\n") for line in f if line.strip()]
    if not docs:
        raise FormatError(f"{p}: no documents")
    return docs


def _read_passage_file(path) -> list:
    passages = []
    for lineno, rec in _iter_records(path):
        try:
            passages.append(Passage(rec["passage_id"], rec["text"],
                                    rec.get("source", "human"),
                                    rec.get("seed_passage_id")))
        except KeyError as exc:
            raise FormatError(f"{path}:{lineno}: missing field {exc}") from None
    if not passages:
        raise FormatError(f"{path}: no passage records")
    return passages


def _read_rows(path) -> list:
    """Plain JSONL rows; a leading export header line is tolerated."""
    rows = []
    for lineno, rec in _iter_records(path):
        if not isinstance(rec, dict):
            raise FormatError(f"{path}:{lineno}: expected an object")
        if rec.get("format") == EXPORT_FORMAT and "table" in rec:
            continue
        rows.append(rec)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return rows


def _parse_kv(items) -> list:
    pairs = []
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}")
        pairs.append((name, value))
    return pairs


# -- command tree ------------------------------------------------------------

@click.group(context_settings={"help_option_names": ("-h", "--help")})
@click.version_option(__version__, prog_name="closeread")
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file of per-subcommand flag defaults; "
                   "explicit flags win.")
@click.pass_context
def cli(ctx, config_path):
    """Measure n-gram novelty of text and run the close-reading pipeline."""
    if config_path:
        with open(config_path, encoding="utf-8") as f:
            try:
                ctx.default_map = json.load(f)
            except json.JSONDecodeError as exc:
                raise click.UsageError(f"--config {config_path}: {exc}")


@cli.group()
def index():
    """Build and query the reference-corpus suffix index."""


@index.command("build")
@click.option("--corpus", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Plain text (one document per line) or .jsonl with "
                   "a 'text' field per record.")
@click.option("--out", required=True,
              type=click.Path(dir_okay=False, path_type=Path))
@click.option("--tokenizer", default="ws_punct", show_default=True,
              type=click.Choice(("ws_punct", "whitespace")))
@click.pass_context
def index_build(ctx, corpus, out, tokenizer):
    """Tokenize a corpus and persist its suffix index."""
    started = _utcnow()
    docs = _read_corpus(corpus)
    idx = build_index(tokenize_corpus(docs, scheme=tokenizer))
    out.parent.mkdir(parents=True, exist_ok=True)
    idx.save(out)
    _write_manifest(ctx, out, [corpus], started=started)
    click.echo(json.dumps({"n_docs": len(docs), "n_tokens": idx.n_tokens,
                           "vocab_size": len(idx.vocab)}, sort_keys=True))


@index.command("count")
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--query", required=True)
def index_count(index_path, query):
    """Print the corpus occurrence count of a token sequence."""
    idx = SuffixIndex.load(index_path)
    click.echo(idx.count_text(query))


@index.command("ppl")
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--expr", required=True)
@click.option("--floor", default=FLOOR_EPSILON, show_default=True,
              type=click.Choice((FLOOR_EPSILON, FLOOR_FLAG)))
@click.option("--mode", default=MODE_FULL, show_default=True,
              type=click.Choice((MODE_FULL, MODE_BIGRAM)))
@click.option("--prefix", default="",
              help="Passage text conditioning the first tokens.")
def index_ppl(index_path, expr, floor, mode, prefix):
    """Expression perplexity under the unbounded-context model."""
    idx = SuffixIndex.load(index_path)
    scheme = idx.sequence.scheme
    ids = encode(expr, idx.vocab, scheme)
    pre = encode(prefix, idx.vocab, scheme) if prefix else []
    res = idx.expression_perplexity(ids, floor_policy=floor, mode=mode,
                                    prefix=pre)
    mean_n = sum(s.effective_n for s in res.steps) / len(res.steps)
    click.echo(json.dumps({
        "ppl": res.ppl, "infinite": res.infinite,
        "floored_tokens": res.floored_tokens, "n_tokens": res.n_tokens,
        "mean_effective_n": mean_n}, sort_keys=True))


@cli.command("segment")
@click.option("--passages", "passages_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Line-delimited {passage_id, text, source, "
                   "seed_passage_id} records.")
@click.option("--index", "index_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Suffix index; enables novelty profiles, pre-highlight "
                   "selection and the contamination check.")
@click.option("--threshold", default=0.15, show_default=True, type=float)
@click.option("--floor", default=FLOOR_EPSILON, show_default=True,
              type=click.Choice((FLOOR_EPSILON, FLOOR_FLAG)))
@click.option("--heuristics", is_flag=True, default=False,
              help="Enable the optional split heuristics (quote "
                   "protection, short-span merging, abbreviations).")
@click.option("--contamination/--no-contamination", default=True,
              show_default=True,
              help="Sample 15-grams from each passage and verify they "
                   "are absent from the index.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@click.pass_context
def segment(ctx, passages_path, index_path, threshold, floor, heuristics,
            contamination, seed, out):
    """Split passages into atomic expressions; with an index, also
    profile their novelty and mark the pre-highlight selection."""
    started = _utcnow()
    passages = _read_passage_file(passages_path)
    cfg = SplitConfig.with_heuristics() if heuristics else SplitConfig()

    spans_by_passage = {p.passage_id: split_atomic(p, cfg) for p in passages}

    profiles: list = []
    contamination_rows: list = []
    n_contaminated = 0
    if index_path is not None:
        idx = SuffixIndex.load(index_path)
        all_spans = [s for p in passages for s in spans_by_passage[p.passage_id]]
        profiles = [novelty_profile(s, idx, floor_policy=floor)
                    for s in all_spans]
        selected = select_for_annotation(profiles, threshold)
        for pid, spans in spans_by_passage.items():
            spans_by_passage[pid] = mark_pre_highlighted(spans, selected)
        if contamination:
            for p in passages:
                rep = contamination_check(p, idx, seed=seed)
                if not rep.passed:
                    n_contaminated += 1
                    _log("contaminated-passage", passage_id=p.passage_id,
                         offending=len(rep.offending))
                contamination_rows.append({
                    "passage_id": p.passage_id, "passed": rep.passed,
                    "n": rep.n, "k": rep.k, "seed": rep.seed,
                    "reduced_coverage": rep.reduced_coverage,
                    "n_offending": len(rep.offending)})

    out.mkdir(parents=True, exist_ok=True)
    dump_table([{"passage_id": p.passage_id, "text": p.text,
                 "source": p.source, "seed_passage_id": p.seed_passage_id,
                 "word_count": p.word_count} for p in passages],
               "passages", out / "passages.jsonl")
    spans = [s for p in passages for s in spans_by_passage[p.passage_id]]
    dump_table([{"expr_id": s.expr_id, "passage_id": s.passage_id,
                 "char_start": s.char_start, "char_end": s.char_end,
                 "pre_highlighted": bool(s.pre_highlighted)} for s in spans],
               "expressions", out / "expressions.jsonl")
    if index_path is not None:
        dump_table([{"expr_id": pr.expr_id, "n_star": pr.n_star,
                     "novel_pct": pr.novel_pct, "ppl": pr.ppl,
                     "ppl_log_std": pr.ppl_log_std} for pr in profiles],
                   "profiles", out / "profiles.jsonl")
        if contamination:
            dump_table(contamination_rows, "contamination",
                       out / "contamination.jsonl")

    inputs = [passages_path] + ([index_path] if index_path else [])
    _write_manifest(ctx, out, inputs, seed=seed, started=started)
    summary = {"n_passages": len(passages), "n_expressions": len(spans),
               "n_pre_highlighted": sum(bool(s.pre_highlighted) for s in spans)}
    if index_path is not None and contamination:
        summary["n_contaminated"] = n_contaminated
    click.echo(json.dumps(summary, sort_keys=True))


@cli.group()
def annotate():
    """Annotation store setup, service, agreement, and export."""


@annotate.command("init")
@click.option("--store", "store_path", required=True, envvar=STORE_ENV,
              show_envvar=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--segments", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory written by `closeread segment`.")
@click.option("--batch", "batch_id", required=True)
@click.option("--annotators", required=True,
              help="Comma-separated annotator ids assigned to the batch.")
@click.option("--training", is_flag=True, default=False)
@click.pass_context
def annotate_init(ctx, store_path, segments, batch_id, annotators, training):
    """Load segmenter output into a store and register a batch."""
    started = _utcnow()
    ids = [a.strip() for a in annotators.split(",") if a.strip()]
    if not ids:
        raise ArgumentError("--annotators names nobody")
    passages = load_table(segments / "passages.jsonl", "passages")
    expressions = load_table(segments / "expressions.jsonl", "expressions")
    profile_path = segments / "profiles.jsonl"
    profiles = (load_table(profile_path, "profiles")
                if profile_path.exists() else [])
    inputs = [segments / "passages.jsonl", segments / "expressions.jsonl"]
    if profile_path.exists():
        inputs.append(profile_path)
    with AnnotationStore(store_path) as store:
        for rec in passages:
            store.add_passage(Passage(rec["passage_id"], rec["text"],
                                      rec["source"], rec["seed_passage_id"],
                                      rec["word_count"]))
        store.add_expressions([
            ExpressionSpan(rec["expr_id"], rec["passage_id"],
                           rec["char_start"], rec["char_end"], [],
                           rec["pre_highlighted"]) for rec in expressions])
        for rec in profiles:
            store.add_profile(NoveltyProfile(rec["expr_id"], rec["n_star"],
                                             rec["novel_pct"], rec["ppl"],
                                             rec.get("ppl_log_std")))
        store.add_batch(Batch(batch_id, [r["passage_id"] for r in passages],
                              ids, training))
    _write_manifest(ctx, store_path, inputs, started=started)
    click.echo(json.dumps({"batch_id": batch_id, "annotators": ids,
                           "n_passages": len(passages),
                           "n_expressions": len(expressions)},
                          sort_keys=True))


@annotate.command("token")
@click.option("--secret", required=True, envvar=SECRET_ENV, show_envvar=True)
@click.option("--annotator", "annotator_id", required=True)
@click.option("--ttl", default=7 * 86400, show_default=True, type=int,
              help="Token lifetime in seconds.")
def annotate_token(secret, annotator_id, ttl):
    """Print a signed bearer token for one annotator."""
    from .service import issue_token    # defers the web-stack import
    click.echo(issue_token(secret, annotator_id, ttl_seconds=ttl))


@annotate.command("serve")
@click.option("--store", "store_path", required=True, envvar=STORE_ENV,
              show_envvar=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True, type=int)
@click.option("--secret", required=True, envvar=SECRET_ENV, show_envvar=True)
def annotate_serve(store_path, host, port, secret):
    """Run the /v1 annotation service until interrupted."""
    import uvicorn                      # heavy; only this command needs it

    from .service import create_app
    store = AnnotationStore(store_path)
    _log("serving", store=str(store_path), host=host, port=port)
    uvicorn.run(create_app(store, secret), host=host, port=port,
                log_level="warning")


@annotate.command("export")
@click.option("--store", "store_path", required=True, envvar=STORE_ENV,
              show_envvar=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@click.pass_context
def annotate_export(ctx, store_path, out):
    """Dump all store tables as line-delimited JSON."""
    started = _utcnow()
    with AnnotationStore(store_path) as store:
        result = export_dataset(store, out)
    _write_manifest(ctx, out, [store_path], started=started)
    click.echo(json.dumps(result["diagnostics"], sort_keys=True))


@annotate.command("kappa")
@click.option("--store", "store_path", required=True, envvar=STORE_ENV,
              show_envvar=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--batch", "batch_id", required=True)
@click.option("--dimension", default="novel", show_default=True,
              type=click.Choice(DIMENSIONS))
def annotate_kappa(store_path, batch_id, dimension):
    """Free-marginal inter-annotator agreement over one batch."""
    with AnnotationStore(store_path) as store:
        k = kappa_free(store, batch_id, dimension)
    click.echo(json.dumps({"batch_id": batch_id, "dimension": dimension,
                           "kappa": k}, sort_keys=True))


@cli.group("eval")
def eval_group():
    """Gold-standard construction and prediction scoring."""


@eval_group.command("build-gold")
@click.option("--store", "store_path", required=True, envvar=STORE_ENV,
              show_envvar=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--task", default="novel", show_default=True,
              type=click.Choice(TASKS))
@click.option("--few-shot", default=3, show_default=True, type=int)
@click.option("--eval-fraction", default=0.4, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@click.pass_context
def eval_build_gold(ctx, store_path, task, few_shot, eval_fraction, seed, out):
    """Aggregate annotations into a gold set and split the passages."""
    started = _utcnow()
    with AnnotationStore(store_path) as store:
        gs = build_gold(store, task,
                        GoldSplitConfig(few_shot, eval_fraction, seed))
    out.mkdir(parents=True, exist_ok=True)
    records = [{"passage_id": pid, "expressions": list(gs.gold[pid])}
               for pid in sorted(gs.gold)]
    dump_table(records, "gold", out / "gold.jsonl")
    _write_json(out / "split.json", {
        "format": "closeread-gold-split", "version": 1,
        "task": gs.task, "aggregation": gs.aggregation,
        "few_shot": list(gs.split.few_shot),
        "finetune": list(gs.split.finetune),
        "evaluation": list(gs.split.evaluation),
        "annotation_counts": gs.annotation_counts,
        "config": {"n_few_shot": few_shot, "eval_fraction": eval_fraction,
                   "seed": seed}})
    _write_manifest(ctx, out, [store_path], seed=seed, started=started)
    click.echo(json.dumps({
        "task": task, "n_passages": len(records),
        "n_gold_expressions": sum(len(r["expressions"]) for r in records),
        "n_few_shot": len(gs.split.few_shot),
        "n_finetune": len(gs.split.finetune),
        "n_evaluation": len(gs.split.evaluation)}, sort_keys=True))


@eval_group.command("score")
@click.option("--gold", "gold_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory written by `closeread eval build-gold`.")
@click.option("--preds", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--task", default="novel", show_default=True,
              type=click.Choice(TASKS))
@click.option("--split", "split_name", default="evaluation",
              show_default=True,
              type=click.Choice(("evaluation", "finetune", "few_shot", "all")))
@click.option("--one-to-one", is_flag=True, default=False,
              help="Consume each gold expression at most once.")
@click.option("--resamples", default=10000, show_default=True, type=int,
              help="Bootstrap resamples for the F1 CI; 0 disables it.")
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--out", "out_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
def eval_score(ctx, gold_dir, preds, task, split_name, one_to_one, resamples,
               seed, out_path):
    """Score predictions against a gold directory."""
    started = _utcnow()
    gold_records = load_table(gold_dir / "gold.jsonl", "gold")
    with open(gold_dir / "split.json", encoding="utf-8") as f:
        split = json.load(f)
    if split.get("task") != task:
        raise ArgumentError(
            f"gold directory was built for task {split.get('task')!r}")
    if split_name == "all":
        keep = {r["passage_id"] for r in gold_records}
    else:
        keep = set(split[split_name])
    gold_by_passage = {r["passage_id"]: tuple(r["expressions"])
                       for r in gold_records if r["passage_id"] in keep}
    pred_sets = [ps for ps in load_predictions(preds) if ps.task == task]
    report = score_predictions(pred_sets, gold_by_passage,
                               one_to_one=one_to_one, resamples=resamples,
                               seed=seed)
    if out_path:
        _write_json(out_path, {
            "format": "closeread-report", "version": 1,
            "task": task, "split": split_name, "matching": report.matching,
            "tp": report.tp, "fp": report.fp, "fn": report.fn,
            "precision": report.precision, "recall": report.recall,
            "f1": report.f1, "ci_low": report.ci_low,
            "ci_high": report.ci_high, "ci_method": report.ci_method,
            "resamples": resamples, "seed": seed,
            "per_passage": [asdict(c) for c in report.per_passage]})
        _write_manifest(ctx, out_path,
                        [gold_dir / "gold.jsonl", gold_dir / "split.json",
                         preds], seed=seed, started=started)
    lines = [
        f"task {task}  split {split_name}  matching {report.matching}",
        f"tp {report.tp}  fp {report.fp}  fn {report.fn}",
        f"precision {report.precision:.4f}  recall {report.recall:.4f}  "
        f"f1 {report.f1:.4f}",
    ]
    if report.ci_low is not None:
        lines.append(f"f1 95% CI [{report.ci_low:.4f}, {report.ci_high:.4f}] "
                     f"({report.ci_method}, {resamples} resamples)")
    click.echo("\n".join(lines))


@cli.group()
def stats():
    """Model fitting and summary reports."""


def _fit_record(fit) -> dict:
    return {
        "format": "closeread-fit", "version": 1,
        "formula": fit.formula,
        "coef_names": list(fit.coef_names),
        "coef": fit.coef, "se": fit.se,
        "odds_ratios": fit.odds_ratios(),
        "vcov": np.asarray(fit.vcov).tolist(),
        "group_variances": fit.group_variances,
        "n_groups": fit.n_groups,
        "loglik": fit.loglik, "aic": fit.aic, "n_obs": fit.n_obs,
        "converged": fit.converged, "boundary": fit.boundary,
        "warnings": list(fit.warnings),
        "dropped_terms": list(fit.dropped_terms),
        "levels": {k: list(v) for k, v in fit.levels.items()},
    }


def _wald_tests(fit) -> dict:
    tests = {}
    for name in fit.coef_names:
        try:
            h = linear_hypothesis(fit, {name: 1.0})
            tests[name] = {"chi2": h.chi2, "p": h.p}
        except FitError:
            tests[name] = None    # degenerate variance; leave untested
    return tests


def _coef_table(fit, tests) -> str:
    rows = [f"{'term':<28} {'estimate':>10} {'se':>9} {'odds':>9} {'p':>10}"]
    for name in fit.coef_names:
        t = tests.get(name)
        p = f"{t['p']:.3g}" if t else "--"
        rows.append(f"{name:<28} {fit.coef[name]:>10.4f} "
                    f"{fit.se[name]:>9.4f} "
                    f"{math.exp(fit.coef[name]):>9.4f} {p:>10}")
    sigmas = "  ".join(f"{g}={v:.4f}"
                       for g, v in sorted(fit.group_variances.items()))
    rows.append(f"group variances: {sigmas or 'none'}")
    tail = f"loglik {fit.loglik:.4f}  aic {fit.aic:.4f}  n {fit.n_obs}"
    if not fit.converged:
        tail += "  [not converged]"
    if fit.boundary:
        tail += "  [boundary]"
    rows.append(tail)
    return "\n".join(rows)


def _emit_fit(ctx, fit, out_path, inputs, extra=None, started=None) -> None:
    for w in fit.warnings:
        _log("fit-warning", message=w)
    tests = _wald_tests(fit)
    record = _fit_record(fit)
    record["wald"] = tests
    record.update(extra or {})
    _write_json(out_path, record)
    _write_manifest(ctx, out_path, inputs, started=started)
    click.echo(_coef_table(fit, tests))


@stats.command("fit")
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Line-delimited observation records.")
@click.option("--formula", required=True,
              help='e.g. "creative ~ ppl_log_std + (1|annot) + (1|src)"')
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False, path_type=Path))
@click.option("--reference", multiple=True, metavar="VAR=LEVEL",
              help="Reference level for a categorical; repeatable.")
@click.option("--pin-variance", multiple=True, metavar="GROUP=VALUE",
              help="Fix a group variance; 0 drops the factor. Repeatable.")
@click.option("--contrasts", "contrast_factors", multiple=True,
              metavar="FACTOR",
              help="Emit per-level odds ratios against the reference level; "
                   "repeatable.")
@click.option("--curve", default=None, metavar="VAR",
              help="Also emit a predicted-probability curve along VAR.")
@click.option("--curve-out", default=None,
              type=click.Path(dir_okay=False, path_type=Path))
@click.option("--curve-points", default=50, show_default=True, type=int)
@click.option("--curve-at", multiple=True, metavar="VAR=VALUE",
              help="Fixed values for the other covariates on the curve.")
@click.pass_context
def stats_fit(ctx, data_path, formula, out_path, reference, pin_variance,
              contrast_factors, curve, curve_out, curve_points, curve_at):
    """Fit the varying-intercept logistic model given by --formula."""
    started = _utcnow()
    rows = _read_rows(data_path)
    refs = dict(_parse_kv(reference))
    pins = {k: float(v) for k, v in _parse_kv(pin_variance)}
    fit = fit_logit_varying_intercepts(rows, formula,
                                       pinned_variances=pins or None,
                                       reference=refs or None)
    extra = {}
    if contrast_factors:
        extra["contrasts"] = {
            factor: [asdict(r) for r in source_contrasts(fit, factor)]
            for factor in contrast_factors}
    if curve:
        if not curve_out:
            raise click.UsageError("--curve requires --curve-out")
        xs = []
        for row in rows:
            if curve not in row:
                raise ArgumentError(f"--data rows lack column {curve!r}")
            xs.append(float(row[curve]))
        at = {}
        for k, v in _parse_kv(curve_at):
            try:
                at[k] = float(v)
            except ValueError:
                at[k] = v
        grid = np.linspace(min(xs), max(xs), curve_points)
        points = population_curve(fit, curve, grid, at=at or None)
        with open(curve_out, "w", encoding="utf-8") as f:
            f.write(f"{curve}\tprobability\n")
            for x, p in points:
                f.write(f"{x:.10g}\t{p:.10g}\n")
        _write_manifest(ctx, curve_out, [data_path], started=started)
    _emit_fit(ctx, fit, out_path, [data_path], extra, started=started)


@stats.command("quartiles")
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--value-col", default="ppl", show_default=True)
@click.option("--creative-col", default="creative", show_default=True)
@click.option("--standardized", is_flag=True, default=False,
              help="Values are already standardized log-perplexities.")
@click.option("--out", "out_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
def stats_quartiles(ctx, data_path, value_col, creative_col, standardized,
                    out_path):
    """Creative-label shares across the perplexity distribution."""
    started = _utcnow()
    rows = _read_rows(data_path)
    try:
        values = [row[value_col] for row in rows]
        creative = [bool(row[creative_col]) for row in rows]
    except KeyError as exc:
        raise ArgumentError(f"--data rows lack column {exc}") from None
    record = {"format": "closeread-quartiles", "version": 1,
              "value_col": value_col, "creative_col": creative_col}
    if standardized:
        vals = np.asarray(values, dtype=np.float64)
        labels = creative
    else:
        st = log_standardize(values)
        finite = np.isfinite(st.values)
        vals = st.values[finite]
        labels = [c for c, keep in zip(creative, finite) if keep]
        record.update({"n_excluded": st.n_excluded, "log_mean": st.log_mean,
                       "log_sd": st.log_sd})
    rep = quartile_report(vals, labels)
    record.update(asdict(rep))
    if out_path:
        _write_json(out_path, record)
        _write_manifest(ctx, out_path, [data_path], started=started)
    click.echo(json.dumps(
        {k: record[k] for k in ("top_quartile_noncreative_share",
                                "creative_below_mean_share",
                                "creative_lowest_quartile_share",
                                "n", "n_creative")}, sort_keys=True))


def _pair_from_record(rec, groups, where: str):
    try:
        if "delta_nov" in rec:
            delta = float(rec["delta_nov"])
        else:
            delta = per_word_delta(rec["count_a"], rec["words_a"],
                                   rec["count_b"], rec["words_b"])
        g = dict(rec.get("groups") or {})
        for name in groups:
            if name not in g and name in rec:
                g[name] = rec[name]
        # nested factor can be given directly or via its two components
        if ("author_in_seed" in groups and "author_in_seed" not in g
                and "seed_author" in g and "author" in rec):
            g["author_in_seed"] = nested_level(g["seed_author"], rec["author"])
        return PreferencePair(str(rec.get("pair_id", where)),
                              rec.get("passage_a", ""),
                              rec.get("passage_b", ""), rec["preferred"],
                              delta, float(rec.get("delta_prag", 0.0)), g)
    except KeyError as exc:
        raise FormatError(f"{where}: missing field {exc}") from None


@stats.command("prefs")
@click.option("--pairs", "pairs_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Line-delimited pairwise-preference records.")
@click.option("--crowd", is_flag=True, default=False,
              help="Crowd design: random intercepts for the two model "
                   "identities instead of annotator/author factors.")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
def stats_prefs(ctx, pairs_path, crowd, out_path):
    """Fit the pairwise-preference model on per-word novelty deltas."""
    started = _utcnow()
    rows = _read_rows(pairs_path)
    groups = CROWD_GROUPS if crowd else EXPERT_GROUPS
    prefs = [_pair_from_record(rec, groups, f"{pairs_path}: pair {i}")
             for i, rec in enumerate(rows, start=1)]
    fit = fit_preference_model(prefs, groups=groups)
    _emit_fit(ctx, fit, out_path, [pairs_path],
              {"design": "crowd" if crowd else "expert"}, started=started)


# -- entry point -------------------------------------------------------------

def main(argv=None) -> int:
    """Console entry; maps errors to the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        # click's default exit code for usage errors is 2; here every
        # validation problem exits 1 and only internal faults exit 2
        exc.show()
        return 1
    except CloseReadError as exc:
        _log("error", kind=type(exc).__name__, message=str(exc))
        return 1
    except Exception as exc:          # noqa: BLE001 - last-resort boundary
        _log("internal-error", kind=type(exc).__name__, message=str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
