from .index import ReportIndex, ReportRecord, build_index, load_index
from .tfidf import CorpusStats, compute_tie, fit_corpus_stats, spherical_project

__all__ = [
    "CorpusStats",
    "ReportIndex",
    "ReportRecord",
    "build_index",
    "compute_tie",
    "fit_corpus_stats",
    "load_index",
    "spherical_project",
]
