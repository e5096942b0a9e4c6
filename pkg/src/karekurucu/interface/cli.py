"""Command-line interface: ingest, filter, stats, clues, puzzle, eval, serve.

Exit codes: 0 success, 1 validation error, 2 provider failure, 3 generation
failure.
"""
from __future__ import annotations

import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import click

from .. import clueforge, corpus, evalkit, gridengine
from ..clueforge import ClueRequest, ProviderConfig, PromptTemplate
from ..gridengine import GenConfig
from ..textnorm import to_grid_form
from .service import load_service_config, serve as run_service

EXIT_VALIDATION = 1
EXIT_PROVIDER = 2
EXIT_GENERATION = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _grid_word(raw: str) -> str:
    return to_grid_form("".join(raw.split()))


@click.group()
def main() -> None:
    """Turkish educational crossword toolkit."""


@main.command()
@click.argument("input_tsv", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True,
              help="Cleaned pairs TSV.")
@click.option("--report", type=click.Path(), help="Filter report JSON.")
@click.option("--sidecar/--no-sidecar", default=True,
              help="Write <input>.rejected.tsv with a rule column.")
@click.option("--min-len", default=3, show_default=True)
@click.option("--max-len", default=20, show_default=True)
def ingest(input_tsv, output, report, sidecar, min_len, max_len) -> None:
    """Ingest an answer-clue TSV: normalize, filter, deduplicate."""
    cfg = corpus.FilterConfig(min_answer_len=min_len, max_answer_len=max_len)
    collector = corpus.RejectSidecar(input_tsv) if sidecar else None
    try:
        rows = corpus.read_pair_rows(input_tsv)
        pairs, filter_report = corpus.ingest_pairs(
            rows, cfg, source=Path(input_tsv).name, on_reject=collector
        )
    except corpus.UnreadableSource as exc:
        _fail(EXIT_VALIDATION, str(exc))
    with open(output, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t")
        writer.writerow(["answer", "clue"])
        writer.writerows((p.answer, p.clue) for p in pairs)
    if collector is not None:
        collector.write()
    if report:
        Path(report).write_text(
            json.dumps(asdict(filter_report), ensure_ascii=False, indent=2),
            encoding="utf-8",
        )
    click.echo(
        f"accepted {filter_report.accepted_count} of {filter_report.input_count} rows"
    )


@main.command("filter")
@click.argument("records_tsv", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True,
              help="Accepted records TSV.")
@click.option("--report", type=click.Path(), help="Filter report JSON.")
@click.option("--min-views", default=0, show_default=True)
@click.option("--min-relevance", default=0.0, show_default=True)
@click.option("--min-words", default=50, show_default=True)
@click.option("--max-words", default=982, show_default=True)
def filter_records(records_tsv, output, report, min_views, min_relevance,
                   min_words, max_words) -> None:
    """Filter text records by popularity, relevance, and length."""
    cfg = corpus.FilterConfig(
        min_text_words=min_words,
        max_text_words=max_words,
        min_views=min_views,
        min_relevance=min_relevance,
    )
    collector = corpus.RejectSidecar(records_tsv)
    filter_report = corpus.FilterReport()
    accepted = []

    def on_malformed(row, rule):
        filter_report.add_reject(rule)
        collector(row, rule)

    try:
        for rec in corpus.read_text_records(records_tsv, on_reject=on_malformed):
            decision = corpus.filter_text_record(rec, cfg)
            if decision.accepted:
                filter_report.add_accept()
                accepted.append(rec)
            else:
                filter_report.add_reject(decision.rule)
                collector(
                    [rec.title, rec.text, rec.keyword, rec.category,
                     str(rec.views), str(rec.relevance), rec.url],
                    decision.rule,
                )
    except corpus.UnreadableSource as exc:
        _fail(EXIT_VALIDATION, str(exc))
    with open(output, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t")
        writer.writerow(list(corpus.RECORD_COLUMNS))
        for rec in accepted:
            writer.writerow([rec.title, rec.text, rec.keyword, rec.category,
                             rec.views, rec.relevance, rec.url])
    collector.write()
    if report:
        Path(report).write_text(
            json.dumps(asdict(filter_report), ensure_ascii=False, indent=2),
            encoding="utf-8",
        )
    click.echo(
        f"accepted {filter_report.accepted_count} of {filter_report.input_count} records"
    )


@main.group()
def stats() -> None:
    """Dataset statistics reports."""


@stats.command("lengths")
@click.argument("pairs_tsv", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True)
def stats_lengths(pairs_tsv, output) -> None:
    """Answer-length histogram CSV from a pairs TSV."""
    try:
        pairs, _ = corpus.ingest_pairs(corpus.read_pair_rows(pairs_tsv))
    except corpus.UnreadableSource as exc:
        _fail(EXIT_VALIDATION, str(exc))
    hist = corpus.answer_length_histogram(pairs)
    Path(output).write_text(corpus.histogram_csv(hist), encoding="utf-8")
    click.echo(f"{len(hist)} length buckets written to {output}")


@stats.command("categories")
@click.argument("records_tsv", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True)
def stats_categories(records_tsv, output) -> None:
    """Category distribution CSV from a records TSV."""
    try:
        records = list(corpus.read_text_records(records_tsv))
    except corpus.UnreadableSource as exc:
        _fail(EXIT_VALIDATION, str(exc))
    dist = corpus.category_distribution(records)
    Path(output).write_text(corpus.category_csv(dist), encoding="utf-8")
    click.echo(f"{len(dist)} categories written to {output}")


def _provider_from_options(kind, corpus_path, endpoint, model, fixtures,
                           timeout, max_retries, temperature):
    cfg = ProviderConfig(
        kind=kind,
        corpus_path=corpus_path,
        endpoint=endpoint,
        model_name=model,
        fixtures_dir=fixtures,
        timeout=timeout,
        max_retries=max_retries,
        temperature=temperature,
    )
    return clueforge.make_provider(cfg)


@main.command()
@click.option("--answer", "answers", multiple=True,
              help="Answer word; repeatable.")
@click.option("--inputs", "inputs_json", type=click.Path(),
              help="JSON list of {answer, text?, category?, n?} requests.")
@click.option("-n", "--count", default=3, show_default=True,
              help="Candidates per answer.")
@click.option("--provider", "kind", type=click.Choice(["static", "remote"]),
              default="static", show_default=True)
@click.option("--corpus", "corpus_path", type=click.Path(),
              help="Pairs TSV for the static provider.")
@click.option("--endpoint", help="Remote provider URL.")
@click.option("--model", default="remote-model", show_default=True)
@click.option("--fixtures", type=click.Path(),
              help="Scripted response directory (offline remote).")
@click.option("--prompt-file", type=click.Path(),
              help="Replacement prompt template for text requests.")
@click.option("--timeout", default=30.0, show_default=True)
@click.option("--max-retries", default=2, show_default=True)
@click.option("--temperature", default=0.7, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True,
              help="Candidates JSON.")
def clues(answers, inputs_json, count, kind, corpus_path, endpoint, model,
          fixtures, prompt_file, timeout, max_retries, temperature, output) -> None:
    """Generate clue candidates for answers or (text, answer) inputs."""
    requests: list[ClueRequest] = []
    try:
        for answer in answers:
            requests.append(ClueRequest(answer=_grid_word(answer), n=count))
        if inputs_json:
            for item in json.loads(Path(inputs_json).read_text(encoding="utf-8")):
                requests.append(
                    ClueRequest(
                        answer=_grid_word(item["answer"]),
                        text=item.get("text"),
                        category=item.get("category"),
                        n=item.get("n", count),
                    )
                )
    except (ValueError, KeyError, OSError) as exc:
        _fail(EXIT_VALIDATION, f"bad inputs: {exc}")
    if not requests:
        _fail(EXIT_VALIDATION, "no inputs: pass --answer or --inputs")
    try:
        provider = _provider_from_options(
            kind, corpus_path, endpoint, model, fixtures,
            timeout, max_retries, temperature,
        )
        if prompt_file and isinstance(provider, clueforge.RemoteProvider):
            provider.text_template = PromptTemplate.load(prompt_file)
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    results = []
    failures = 0
    for req in requests:
        try:
            if req.text is not None:
                found = clueforge.generate_from_text(req, provider)
            else:
                found = clueforge.generate_from_answer(req.answer, req.n, provider)
        except (clueforge.ProviderUnavailable, clueforge.NoCluesFound,
                clueforge.AnswerNotInText) as exc:
            failures += 1
            results.append(
                {"answer": req.answer, "error": type(exc).__name__,
                 "message": str(exc)}
            )
            continue
        results.append(
            {"answer": req.answer, "candidates": [asdict(c) for c in found]}
        )
    Path(output).write_text(
        json.dumps(results, ensure_ascii=False, indent=2), encoding="utf-8"
    )
    click.echo(f"{len(requests) - failures} of {len(requests)} inputs produced clues")
    if failures == len(requests):
        sys.exit(EXIT_PROVIDER)


@main.command()
@click.argument("pairs_tsv", type=click.Path())
@click.option("--width", default=11, show_default=True)
@click.option("--height", default=11, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--min-words", default=6, show_default=True)
@click.option("--target-fill", default=0.4, show_default=True)
@click.option("--max-adjustments", default=20, show_default=True)
@click.option("--time-budget", default=10.0, show_default=True)
@click.option("--removal-batch", default=2, show_default=True)
@click.option("--max-resets", default=3, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--priority", multiple=True, help="Prefer this answer; repeatable.")
@click.option("-o", "--output", type=click.Path(), required=True,
              help="Puzzle JSON.")
@click.option("--text-out", type=click.Path(), help="Monospace rendering.")
@click.option("--trace-out", type=click.Path(),
              help="Line-delimited search trace.")
def puzzle(pairs_tsv, width, height, seed, min_words, target_fill,
           max_adjustments, time_budget, removal_batch, max_resets, workers,
           priority, output, text_out, trace_out) -> None:
    """Generate a crossword from an answer-clue TSV."""
    try:
        pairs, _ = corpus.ingest_pairs(corpus.read_pair_rows(pairs_tsv))
    except corpus.UnreadableSource as exc:
        _fail(EXIT_VALIDATION, str(exc))
    if not pairs:
        _fail(EXIT_VALIDATION, "no usable answer-clue pairs in input")
    try:
        cfg = GenConfig(
            width=width,
            height=height,
            seed=seed,
            min_words=min_words,
            target_fill_ratio=target_fill,
            max_adjustments=max_adjustments,
            time_budget=time_budget,
            removal_batch=removal_batch,
            max_resets=max_resets,
        )
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    trace_lines: list[str] = []
    trace = (lambda rec: trace_lines.append(json.dumps(rec))) if trace_out else None
    try:
        result = gridengine.generate(
            pairs, cfg, priority=[_grid_word(p) for p in priority],
            workers=workers, trace=trace,
        )
    except gridengine.NoWordFits as exc:
        _fail(EXIT_GENERATION, str(exc))
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    clue_map = {}
    for pair in pairs:
        clue_map.setdefault(pair.answer, pair.clue)
    placed = {p.word for p in result.layout.placements}
    document = gridengine.number_and_render(
        result.layout, {a: c for a, c in clue_map.items() if a in placed}
    )
    Path(output).write_text(document.to_json(), encoding="utf-8")
    if text_out:
        Path(text_out).write_text(document.to_text(), encoding="utf-8")
    if trace_out:
        Path(trace_out).write_text("\n".join(trace_lines) + "\n", encoding="utf-8")
    s = result.score
    click.echo(
        f"placed {s.fw} words, {s.ll} crossings, fill {s.fr:.2f}, "
        f"score {s.score:.4f} ({result.reason.value})"
    )


@main.group("eval")
def eval_group() -> None:
    """Evaluation reports."""


@eval_group.command("rouge")
@click.argument("pairs_tsv", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True)
def eval_rouge(pairs_tsv, output) -> None:
    """ROUGE-1/2/L report from a candidate/reference TSV."""
    pairs = []
    try:
        rows = corpus._open_tsv(pairs_tsv)
        header = next(rows, None)
        if header is None:
            _fail(EXIT_VALIDATION, "empty evaluation file")
        idx = corpus._header_index(header, ("candidate", "reference"), pairs_tsv)
        for row in rows:
            if row:
                pairs.append((row[idx[0]], row[idx[1]]))
    except corpus.UnreadableSource as exc:
        _fail(EXIT_VALIDATION, str(exc))
    try:
        scores = evalkit.corpus_rouge(pairs)
    except evalkit.EmptyEvaluationSet as exc:
        _fail(EXIT_VALIDATION, str(exc))
    Path(output).write_text(evalkit.rouge_report_csv(scores), encoding="utf-8")
    for metric in evalkit.METRICS:
        click.echo(f"{metric} f1 {evalkit.format_percent(scores[metric].f1)}")


@eval_group.command("ratings")
@click.argument("ratings_tsv", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True)
def eval_ratings(ratings_tsv, output) -> None:
    """Acceptability report from a ratings TSV."""
    records = []
    try:
        rows = corpus._open_tsv(ratings_tsv)
        header = next(rows, None)
        if header is None:
            _fail(EXIT_VALIDATION, "empty ratings file")
        idx = corpus._header_index(
            header, ("candidate_id", "model_id", "accepted", "rater"), ratings_tsv
        )
        for row in rows:
            if row:
                records.append(
                    evalkit.RatingRecord(
                        candidate_id=row[idx[0]],
                        model_id=row[idx[1]],
                        accepted=row[idx[2]].strip().lower()
                        in ("1", "true", "yes", "accept", "accepted"),
                        rater=row[idx[3]],
                    )
                )
    except corpus.UnreadableSource as exc:
        _fail(EXIT_VALIDATION, str(exc))
    try:
        summary = evalkit.acceptability_rate(records)
    except evalkit.EmptyEvaluationSet as exc:
        _fail(EXIT_VALIDATION, str(exc))
    Path(output).write_text(evalkit.ratings_report_csv(summary), encoding="utf-8")
    click.echo(f"overall acceptability {summary.overall.display}")


@main.command()
@click.option("--config", "config_path", type=click.Path(),
              help="Service config JSON.")
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
def serve(config_path, host, port) -> None:
    """Run the HTTP service."""
    try:
        config = load_service_config(config_path)
    except (OSError, ValueError, TypeError) as exc:
        _fail(EXIT_VALIDATION, f"bad service config: {exc}")
    if host:
        config.host = host
    if port:
        config.port = port
    run_service(config)


if __name__ == "__main__":
    main()
