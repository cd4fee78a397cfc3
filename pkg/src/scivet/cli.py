"""Command-line surface for corpus building, detection runs, and reports.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 backend error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, apply_overrides, config_to_dict, load_config
from .corpus import (
    DEFAULT_KEYWORDS,
    DatasetError,
    dataset_stats,
    keyword_filter,
    load_abstracts,
    load_articles,
    load_pairings,
    save_articles,
    save_pairings,
    stats_to_dict,
)
from .detection import (
    Architecture,
    DetectorSettings,
    Strategy,
    detect_batch,
    verdict_from_dict,
    verdict_to_dict,
)
from .evaluation import breakdown, labels_and_origins, table_to_csv, table_to_json
from .gateway import (
    API_KEY_ENV,
    Cassette,
    CassetteBackend,
    ENDPOINT_ENV,
    GatewayError,
    HttpBackend,
    RequestDefaults,
)
from .generation import TRUE_SUFFIX, FALSE_SUFFIX, generate_pairs
from .prompts import TemplateError
from .reporting import emit_report
from .retrieval import build_index, load_index, pair_evidence, save_index
from .text_metrics import quality_gate

HISTOGRAM_BINS = 20


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors, not argparse's default exit 2
    def error(self, message):
        raise ConfigError(message)


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", dest="model_name", help="backend model name")
    parser.add_argument("--endpoint", help=f"chat-completions URL (or ${ENDPOINT_ENV})")
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--max-tokens", type=int, dest="max_tokens")
    parser.add_argument("--parallelism", type=int)
    parser.add_argument("--retries", type=int)
    parser.add_argument("--cassette", help="cassette JSONL for offline replay or recording")
    parser.add_argument("--cassette-mode", dest="cassette_mode",
                        choices=["replay", "record", "passthrough"])
    parser.add_argument("--templates-dir", dest="templates_dir")


def _resolve_config(args: argparse.Namespace, **extra) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {}
    for name in ("model_name", "endpoint", "temperature", "max_tokens", "parallelism",
                 "retries", "cassette", "cassette_mode", "templates_dir"):
        if hasattr(args, name):
            overrides[name] = getattr(args, name)
    overrides.update({k: v for k, v in extra.items() if v is not None})
    return apply_overrides(config, **overrides)


def _build_backend(config: RunConfig):
    """Returns (backend, cassette-to-save-or-None)."""
    if config.cassette and config.cassette_mode == "replay":
        return CassetteBackend(Cassette.load(config.cassette)), None
    endpoint = config.endpoint or os.environ.get(ENDPOINT_ENV, "")
    if not endpoint:
        raise ConfigError(
            f"no backend configured: give --endpoint (or ${ENDPOINT_ENV}) "
            "or a --cassette to replay")
    http = HttpBackend(endpoint, api_key=os.environ.get(API_KEY_ENV))
    if not config.cassette:
        return http, None
    cassette_path = Path(config.cassette)
    if config.cassette_mode == "record":
        cassette = (Cassette.load(cassette_path) if cassette_path.exists()
                    else Cassette(path=cassette_path))
        cassette.path = cassette_path
        return CassetteBackend(cassette, mode="record", inner=http), cassette
    return CassetteBackend(Cassette.load(cassette_path), mode="passthrough", inner=http), None


def _request_defaults(config: RunConfig) -> RequestDefaults:
    return RequestDefaults(
        model_name=config.model_name,
        temperature=config.temperature,
        max_tokens=config.max_tokens,
    )


def cmd_ingest(args) -> int:
    articles = load_articles(args.articles)
    kept = articles
    if not args.no_filter:
        keywords = ([k.strip() for k in args.keywords.split(",") if k.strip()]
                    if args.keywords else list(DEFAULT_KEYWORDS))
        kept = keyword_filter(articles, keywords)
    save_articles(kept, args.out)
    print(f"ingest: kept {len(kept)} of {len(articles)} articles -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    articles = load_articles(args.articles)
    payload = json.dumps(stats_to_dict(dataset_stats(articles)), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"stats: wrote {args.out}")
    else:
        print(payload)
    return 0


def cmd_index(args) -> int:
    config = _resolve_config(args, k1=args.k1, b=args.b)
    abstracts = load_abstracts(args.abstracts)
    index = build_index(abstracts, k1=config.k1, b=config.b)
    save_index(index, args.out)
    print(f"index: {index.doc_count} abstracts, {len(index.postings)} terms -> {args.out}")
    return 0


def cmd_pair(args) -> int:
    config = _resolve_config(args, pair_k=args.k)
    articles = load_articles(args.articles)
    index = load_index(args.index)
    pairings, unmatched = pair_evidence(articles, index, k=config.pair_k)
    save_pairings(pairings, args.out)
    if args.unmatched:
        Path(args.unmatched).write_text(
            "".join(i + "\n" for i in unmatched), encoding="utf-8")
    print(f"pair: {len(pairings)} articles paired, {len(unmatched)} unmatched -> {args.out}")
    return 0


def cmd_generate(args) -> int:
    config = _resolve_config(args, gate_threshold=args.threshold)
    abstracts = load_abstracts(args.abstracts)
    skip_ids: set[str] = set()
    existing = []
    if args.resume and Path(args.out).exists():
        existing = load_articles(args.out)
        for article in existing:
            for suffix in (TRUE_SUFFIX, FALSE_SUFFIX):
                if article.id.endswith(suffix):
                    skip_ids.add(article.id[:-len(suffix)])
    backend, cassette = _build_backend(config)
    try:
        result = generate_pairs(
            abstracts, backend, _request_defaults(config),
            gate_threshold=config.gate_threshold,
            rouge_variant=config.rouge_variant,
            parallelism=config.parallelism,
            skip_ids=skip_ids,
            templates_dir=config.templates_dir,
            retries=config.retries,
            backoff_base=config.backoff_base,
        )
    finally:
        if cassette is not None:
            cassette.save()
    save_articles(existing + result.articles, args.out)
    with open(args.rejects, "w", encoding="utf-8") as handle:
        for pair in result.rejected:
            handle.write(json.dumps({
                "source_abstract_id": pair.source_abstract_id,
                "true_article": pair.true_article,
                "false_article": pair.false_article,
                "generator": pair.generator,
                "score": {"precision": pair.gate_score.precision,
                          "recall": pair.gate_score.recall,
                          "f1": pair.gate_score.f1},
            }, ensure_ascii=False) + "\n")
    if args.quarantine:
        with open(args.quarantine, "w", encoding="utf-8") as handle:
            for failure in result.failures:
                handle.write(json.dumps({
                    "abstract_id": failure.abstract_id,
                    "error": failure.error,
                    "raw_text": failure.raw_text,
                }, ensure_ascii=False) + "\n")
    print(f"generate: {len(result.articles)} articles kept "
          f"({len(skip_ids)} abstracts skipped), {len(result.rejected)} pairs rejected, "
          f"{len(result.failures)} failures")
    return 0


def _load_gate_pairs(path: str) -> list[tuple[str, str]]:
    pairs = []
    source = Path(path)
    if not source.exists():
        raise DatasetError(f"{path}: file does not exist")
    with source.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                pairs.append((str(raw["generated"]), str(raw["source"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DatasetError(f"{path}:{lineno}: malformed pair ({exc})") from None
    return pairs


def cmd_gate(args) -> int:
    config = _resolve_config(args, gate_threshold=args.threshold,
                             rouge_variant=args.variant)
    pairs = _load_gate_pairs(args.pairs)
    kept, rejected = quality_gate(pairs, threshold=config.gate_threshold,
                                  variant=config.rouge_variant)

    def dump(rows, path):
        with open(path, "w", encoding="utf-8") as handle:
            for gated in rows:
                handle.write(json.dumps({
                    "generated": gated.candidate,
                    "source": gated.reference,
                    "precision": gated.score.precision,
                    "recall": gated.score.recall,
                    "f1": gated.score.f1,
                }, ensure_ascii=False) + "\n")

    dump(kept, args.kept)
    dump(rejected, args.rejected)
    if args.histogram:
        counts = [0] * HISTOGRAM_BINS
        for gated in kept + rejected:
            value = gated.score.value(config.rouge_variant)
            bin_idx = min(int(value * HISTOGRAM_BINS), HISTOGRAM_BINS - 1)
            counts[bin_idx] += 1
        lines = ["bin_low,bin_high,count"]
        for i, count in enumerate(counts):
            lines.append(f"{i / HISTOGRAM_BINS:.2f},{(i + 1) / HISTOGRAM_BINS:.2f},{count}")
        Path(args.histogram).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"gate: kept {len(kept)}, rejected {len(rejected)} "
          f"(threshold {config.gate_threshold}, variant {config.rouge_variant})")
    return 0


def cmd_detect(args) -> int:
    config = _resolve_config(args, architecture=args.arch, strategy=args.strategy,
                             m=args.m, extractive_mode=args.extractive_mode)
    articles = load_articles(args.articles)
    pairings = {p.article_id: [i for i, _ in p.evidence]
                for p in load_pairings(args.pairings)}
    abstracts = {a.id: a for a in load_abstracts(args.abstracts)}
    backend, cassette = _build_backend(config)
    settings = DetectorSettings(
        defaults=_request_defaults(config),
        m=config.m,
        extractive_mode=config.extractive_mode,
        templates_dir=config.templates_dir,
        retries=config.retries,
        backoff_base=config.backoff_base,
    )
    try:
        outcomes, failures = detect_batch(
            articles, pairings, abstracts,
            Architecture(config.architecture), Strategy(config.strategy),
            backend, settings, parallelism=config.parallelism,
        )
    finally:
        if cassette is not None:
            cassette.save()
    with open(args.out, "w", encoding="utf-8") as handle:
        for outcome in outcomes:
            handle.write(json.dumps(verdict_to_dict(outcome.verdict),
                                    ensure_ascii=False) + "\n")
    if args.failures:
        with open(args.failures, "w", encoding="utf-8") as handle:
            for failure in failures:
                handle.write(json.dumps({"article_id": failure.article_id,
                                         "error": failure.error}) + "\n")
    if args.audit_dir:
        audit_dir = Path(args.audit_dir)
        audit_dir.mkdir(parents=True, exist_ok=True)
        for outcome in outcomes:
            path = audit_dir / f"{outcome.verdict.article_id}.json"
            path.write_text(json.dumps(outcome.audit, ensure_ascii=False, indent=2) + "\n",
                            encoding="utf-8")
    print(f"detect: {len(outcomes)} verdicts, {len(failures)} failures -> {args.out}")
    return 0


def _load_verdicts(path: str):
    source = Path(path)
    if not source.exists():
        raise DatasetError(f"{path}: file does not exist")
    verdicts = []
    with source.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                verdicts.append(verdict_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: malformed verdict ({exc})") from None
    return verdicts


def cmd_evaluate(args) -> int:
    verdicts = _load_verdicts(args.verdicts)
    labels, origins = labels_and_origins(load_articles(args.articles))
    table = breakdown(verdicts, labels, origins)
    csv_text = table_to_csv(table)
    if args.out_csv:
        Path(args.out_csv).write_text(csv_text, encoding="utf-8")
    else:
        print(csv_text, end="")
    if args.out_json:
        Path(args.out_json).write_text(table_to_json(table), encoding="utf-8")
    if args.failures and Path(args.failures).exists():
        excluded = sum(1 for line in Path(args.failures).read_text(encoding="utf-8")
                       .splitlines() if line.strip())
        print(f"evaluate: excluded {excluded} unscored articles")
    return 0


def cmd_report(args) -> int:
    config = _resolve_config(args)
    verdicts = _load_verdicts(args.verdicts)
    labels, origins = labels_and_origins(load_articles(args.articles))
    table = breakdown(verdicts, labels, origins)
    unscored = []
    if args.failures and Path(args.failures).exists():
        with open(args.failures, encoding="utf-8") as handle:
            unscored = [json.loads(line) for line in handle if line.strip()]
    bundle = emit_report(
        verdicts, table, args.out_dir,
        run_config=config_to_dict(config),
        templates_dir=config.templates_dir,
        cassette_path=config.cassette,
        unscored=unscored,
    )
    print(f"report: wrote {bundle.manifest_path} "
          f"({len(bundle.radar_paths)} radar plots)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scivet",
                     description="Vet scientific news articles against research abstracts.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="filter raw articles by scientific keywords")
    p.add_argument("--articles", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keywords", help="comma-separated keyword overrides")
    p.add_argument("--no-filter", action="store_true", help="copy without filtering")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="sentence/word statistics of a corpus")
    p.add_argument("--articles", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("index", help="build the BM25 abstract index")
    p.add_argument("--abstracts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--config")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("pair", help="attach top-k evidence abstracts to articles")
    p.add_argument("--articles", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--unmatched", help="file for ids of articles with no match")
    p.add_argument("--config")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("generate", help="generate labeled true/false article pairs")
    p.add_argument("--abstracts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects", required=True)
    p.add_argument("--quarantine", help="file for unparseable generation outputs")
    p.add_argument("--threshold", type=float, help="quality gate threshold")
    p.add_argument("--resume", action="store_true",
                   help="skip abstracts already present in --out")
    p.add_argument("--config")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("gate", help="re-gate (generated, source) pairs by bigram overlap")
    p.add_argument("--pairs", required=True)
    p.add_argument("--kept", required=True)
    p.add_argument("--rejected", required=True)
    p.add_argument("--histogram", help="score histogram CSV")
    p.add_argument("--threshold", type=float)
    p.add_argument("--variant", choices=["f1", "recall", "precision"])
    p.add_argument("--config")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("detect", help="run a detection pipeline over paired articles")
    p.add_argument("--arch", choices=[a.value for a in Architecture])
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    p.add_argument("--articles", required=True)
    p.add_argument("--pairings", required=True)
    p.add_argument("--abstracts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--failures", help="file for per-article failure records")
    p.add_argument("--audit-dir", dest="audit_dir", help="directory for per-article audit JSON")
    p.add_argument("--m", type=int, help="extractive summary size")
    p.add_argument("--extractive-mode", dest="extractive_mode",
                   choices=["llm", "centrality"])
    p.add_argument("--config")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score verdicts against gold labels")
    p.add_argument("--verdicts", required=True)
    p.add_argument("--articles", required=True)
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--out-json", dest="out_json")
    p.add_argument("--failures", help="detect failure file, for the exclusion count")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="emit the full report bundle with radar plots")
    p.add_argument("--verdicts", required=True)
    p.add_argument("--articles", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--failures")
    p.add_argument("--config")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DatasetError, TemplateError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except GatewayError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
