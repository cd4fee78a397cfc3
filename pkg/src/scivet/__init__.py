"""scivet: vet scientific news articles against research abstracts.

Corpus building (keyword ingest, BM25 evidence pairing, LLM-generated
true/false pairs behind a quality gate), three detection pipelines over a
chat-completion backend, metric breakdowns, and radar-plot reports.
"""
from .corpus import (
    CorpusStats,
    DatasetError,
    EvidenceAbstract,
    EvidencePairing,
    Label,
    NewsArticle,
    Origin,
    dataset_stats,
    keyword_filter,
    load_abstracts,
    load_articles,
    load_pairings,
)
from .detection import (
    Architecture,
    DetectorSettings,
    DovScores,
    Strategy,
    Verdict,
    VerdictParseError,
    detect,
    detect_batch,
    parse_verdict,
)
from .evaluation import MetricsTable, breakdown, confusion, metrics_from_confusion
from .gateway import (
    Cassette,
    CassetteBackend,
    ChatRequest,
    ChatResponse,
    GatewayError,
    HttpBackend,
    RequestDefaults,
    complete,
    run_batch,
)
from .generation import GeneratedPair, PairParseError, generate_pairs, parse_generated_pair
from .reporting import emit_report, radar_svg
from .retrieval import Bm25Index, build_index, pair_evidence, top_k
from .text_metrics import Rouge2Score, quality_gate, rouge2, split_sentences, tokenize

__version__ = "0.1.0"
