"""Client for external gender/age/emotion classifiers.

Labels are consumed, never computed: either joined from an offline sidecar
file or fetched from an HTTP endpoint in batches.

HTTP contract:
  request:  POST {"items": [{"utt_id": ..., "audio_path": ...}, ...]}
  response: {"items": [{"utt_id": ..., "label": ..., "confidence": ...}, ...]}
"""

import json
import time
from dataclasses import dataclass

import requests

from ..annotate import Gender


class ClassifierError(Exception):
    pass


@dataclass(frozen=True)
class ClassifierClientConfig:
    mode: str  # "sidecar_file" | "http_endpoint"
    path: str | None = None
    endpoint: str | None = None
    timeout_s: float = 10.0
    retry_count: int = 2
    batch_size: int = 16

    def __post_init__(self):
        if self.mode == "sidecar_file":
            if not self.path or self.endpoint:
                raise ClassifierError("sidecar_file mode needs exactly a path")
        elif self.mode == "http_endpoint":
            if not self.endpoint or self.path:
                raise ClassifierError("http_endpoint mode needs exactly an endpoint")
        else:
            raise ClassifierError(f"unknown classifier mode {self.mode!r}")


def _read_sidecar(path):
    labels = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            labels[doc["utt_id"]] = doc
    return labels


def _apply_label(record, doc):
    tags = dict(record.external_tags or {})
    for key in ("gender", "age", "emotion", "label", "confidence"):
        if key in doc and key != "utt_id":
            tags[key] = doc[key]
    record.external_tags = tags
    label = doc.get("gender", doc.get("label"))
    if label in ("male", "female"):
        record.gender = Gender(label)


def _fetch_http(records, config):
    session = requests.Session()
    for start in range(0, len(records), config.batch_size):
        batch = records[start : start + config.batch_size]
        payload = {
            "items": [{"utt_id": r.utt_id, "audio_path": r.audio_path} for r in batch]
        }
        response = None
        for attempt in range(config.retry_count + 1):
            try:
                resp = session.post(config.endpoint, json=payload, timeout=config.timeout_s)
                resp.raise_for_status()
                response = resp.json()
                break
            except (requests.RequestException, ValueError):
                if attempt < config.retry_count:
                    time.sleep(min(0.2 * (attempt + 1), 2.0))
        if response is None:
            for record in batch:
                record.flag("unlabeled")
            continue
        by_id = {item["utt_id"]: item for item in response.get("items", [])}
        for record in batch:
            if record.utt_id in by_id:
                _apply_label(record, by_id[record.utt_id])
            else:
                record.flag("unlabeled")


def fetch_external_labels(records, config):
    """Fill gender/external tags in place; records that cannot be labeled
    are flagged "unlabeled" and otherwise left alone."""
    records = list(records)
    if config.mode == "sidecar_file":
        sidecar = _read_sidecar(config.path)
        for record in records:
            if record.utt_id in sidecar:
                _apply_label(record, sidecar[record.utt_id])
            else:
                record.flag("unlabeled")
    else:
        _fetch_http(records, config)
    return records
