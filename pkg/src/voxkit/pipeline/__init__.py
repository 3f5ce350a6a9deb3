from .classifier import ClassifierClientConfig, ClassifierError, fetch_external_labels
from .config import PipelineConfig
from .manifest import ManifestError, ManifestRecord, read_manifest, write_manifest
from .runner import run_annotate, run_clean
from .stats import CorpusStats, StatsError, render_stats_text, run_stats

__all__ = [
    "ClassifierClientConfig",
    "ClassifierError",
    "fetch_external_labels",
    "PipelineConfig",
    "ManifestError",
    "ManifestRecord",
    "read_manifest",
    "write_manifest",
    "run_annotate",
    "run_clean",
    "CorpusStats",
    "StatsError",
    "render_stats_text",
    "run_stats",
]
