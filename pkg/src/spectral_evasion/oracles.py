"""Black-box label sources with query accounting.

Every oracle handle owns a :class:`QueryBudget`; ``query`` charges it before
asking the underlying model. Built-in models are nearest-centroid classifiers
over time-averaged MFCCs; :class:`RemoteOracle` POSTs audio to an HTTP
transcription endpoint.
"""
from __future__ import annotations

import base64
import json
import logging
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip, write_wav
from .features import MfccConfig, mean_mfcc
from .spectral import perturb_dft

log = logging.getLogger(__name__)

TRANSCRIPT = "transcript"
SPEAKER = "speaker"


class OracleError(RuntimeError):
    pass


class BudgetExhausted(OracleError):
    pass


class RetryableOracleError(OracleError):
    pass


class FieldPathError(OracleError):
    pass


_PUNCT = re.compile(r"[^\w\s]|_")


def normalize(text: str) -> str:
    text = _PUNCT.sub(" ", str(text).lower())
    return " ".join(text.split())


@dataclass(frozen=True)
class OracleLabel:
    kind: str
    text: str

    def __post_init__(self):
        object.__setattr__(self, "text", normalize(self.text))

    @property
    def words(self):
        return self.text.split()


class QueryBudget:
    """Thread-safe query counter; ``limit=None`` means unbounded."""

    def __init__(self, limit=None):
        if limit is not None and limit < 0:
            raise ValueError("budget limit must be >= 0")
        self.limit = limit
        self.used = 0
        self._lock = threading.Lock()

    @property
    def remaining(self):
        return None if self.limit is None else self.limit - self.used

    def charge(self):
        with self._lock:
            if self.limit is not None and self.used >= self.limit:
                raise BudgetExhausted(f"query budget of {self.limit} exhausted")
            self.used += 1

    def __repr__(self):
        return f"QueryBudget(limit={self.limit}, used={self.used})"


class Oracle:
    kind = TRANSCRIPT

    def __init__(self, budget=None):
        self.budget = budget if isinstance(budget, QueryBudget) else QueryBudget(budget)

    def query(self, clip: AudioClip) -> OracleLabel:
        self.budget.charge()
        return OracleLabel(self.kind, self._label(clip))

    def _label(self, clip) -> str:
        raise NotImplementedError


class CallableOracle(Oracle):
    """Wrap ``fn(clip) -> str`` as a budgeted oracle."""

    def __init__(self, fn, kind=TRANSCRIPT, budget=None):
        super().__init__(budget)
        self.fn = fn
        self.kind = kind

    def _label(self, clip):
        return self.fn(clip)


# --------------------------------------------------------------------------
# Nearest-centroid mock models
# --------------------------------------------------------------------------

class CentroidOracle(Oracle):
    """Nearest centroid (Euclidean) over time-averaged MFCC vectors."""

    def __init__(self, labels, centroids, cfg=MfccConfig(), kind=TRANSCRIPT,
                 augment_threshold=None, budget=None):
        super().__init__(budget)
        centroids = np.asarray(centroids, dtype=np.float64)
        if len(labels) < 2:
            raise ValueError("a centroid oracle needs at least 2 classes")
        if centroids.shape != (len(labels), cfg.n_coeffs):
            raise ValueError("centroid matrix does not match labels/config")
        if not np.all(np.isfinite(centroids)):
            raise ValueError("centroids must be finite")
        self.labels = list(labels)
        self.centroids = centroids
        self.cfg = cfg
        self.kind = kind
        self.augment_threshold = augment_threshold

    def classify(self, clip: AudioClip) -> str:
        """Label without charging the budget (for evaluation only)."""
        feat = mean_mfcc(clip, self.cfg)
        dist = np.sum((self.centroids - feat) ** 2, axis=1)
        return self.labels[int(np.argmin(dist))]

    _label = classify

    def with_budget(self, limit=None) -> "CentroidOracle":
        """Fresh handle on the same model with its own budget."""
        return CentroidOracle(self.labels, self.centroids, self.cfg, self.kind,
                              self.augment_threshold, QueryBudget(limit))

    def to_dict(self):
        return {
            "kind": self.kind,
            "labels": self.labels,
            "centroids": self.centroids.tolist(),
            "mfcc": self.cfg.to_dict(),
            "augment_threshold": self.augment_threshold,
        }

    @classmethod
    def from_dict(cls, d, budget=None):
        return cls(d["labels"], d["centroids"], MfccConfig.from_dict(d["mfcc"]),
                   d.get("kind", TRANSCRIPT), d.get("augment_threshold"), budget)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path, budget=None):
        with open(path) as fh:
            return cls.from_dict(json.load(fh), budget)


def _train_centroids(corpus, cfg, augment_threshold, kind):
    if not corpus:
        raise ValueError("training corpus is empty")
    feats = {}
    for clip, label in corpus:
        feats.setdefault(str(label), []).append(mean_mfcc(clip, cfg))
        if augment_threshold is not None:
            feats[str(label)].append(mean_mfcc(perturb_dft(clip, augment_threshold), cfg))
    if len(feats) < 2:
        raise ValueError(f"need at least 2 classes, got {len(feats)}")
    labels = sorted(feats)
    centroids = np.array([np.mean(feats[lab], axis=0) for lab in labels])
    return CentroidOracle(labels, centroids, cfg, kind, augment_threshold)


def train_keyword_oracle(corpus, augment_threshold=None, cfg=MfccConfig()) -> CentroidOracle:
    """Fit a keyword classifier on ``[(clip, label), ...]``.

    With ``augment_threshold`` set, every clip also contributes its
    DFT-thresholded copy (adversarial-training analogue).
    """
    if augment_threshold is not None and not 0.0 <= augment_threshold <= 1.0:
        raise ValueError("augment_threshold must lie in [0, 1]")
    return _train_centroids(corpus, cfg, augment_threshold, TRANSCRIPT)


def train_speaker_oracle(corpus, cfg=MfccConfig()) -> CentroidOracle:
    return _train_centroids(corpus, cfg, None, SPEAKER)


# --------------------------------------------------------------------------
# Remote transcription endpoint
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RemoteConfig:
    url: str
    request_encoding: str = "wav"  # "wav" or "json"
    response_field_path: str = "transcript"
    retries: int = 2
    min_interval: float = 0.0
    timeout: float = 30.0
    token: str | None = None
    backoff: float = 0.5

    def __post_init__(self):
        if not re.match(r"^https?://[^\s/]+", self.url or ""):
            raise ValueError(f"malformed oracle URL: {self.url!r}")
        if self.request_encoding not in ("wav", "json"):
            raise ValueError("request_encoding must be 'wav' or 'json'")
        if self.retries < 0 or self.min_interval < 0:
            raise ValueError("retries and min_interval must be non-negative")


def extract_field(obj, path: str):
    """Follow a dot-separated path; numeric parts index into lists."""
    cur = obj
    for part in path.split(".") if path else []:
        try:
            if isinstance(cur, list):
                cur = cur[int(part)]
            elif isinstance(cur, dict):
                cur = cur[part]
            else:
                raise KeyError(part)
        except (KeyError, IndexError, ValueError):
            raise FieldPathError(f"response has no field at {path!r} (failed at {part!r})") from None
    if isinstance(cur, (dict, list)) or cur is None:
        raise FieldPathError(f"field {path!r} is not a scalar")
    return str(cur)


class _Channel:
    """Serializes requests to one endpoint and remembers the last send time."""

    def __init__(self):
        self.lock = threading.Lock()
        self.last_sent = None


class RemoteOracle(Oracle):
    def __init__(self, config: RemoteConfig, kind=TRANSCRIPT, budget=None, _channel=None):
        super().__init__(budget)
        self.config = config
        self.kind = kind
        self._channel = _channel or _Channel()

    def with_budget(self, limit=None) -> "RemoteOracle":
        """New handle with its own budget; requests still share one channel."""
        return RemoteOracle(self.config, self.kind, QueryBudget(limit), self._channel)

    def _request(self, clip):
        cfg = self.config
        wav = write_wav(clip)
        if cfg.request_encoding == "wav":
            body, ctype = wav, "audio/wav"
        else:
            body = json.dumps({"audio_b64": base64.b64encode(wav).decode("ascii"),
                               "sample_rate": clip.sample_rate}).encode()
            ctype = "application/json"
        headers = {"Content-Type": ctype, "Accept": "application/json"}
        if cfg.token:
            headers["Authorization"] = f"Bearer {cfg.token}"
        return urllib.request.Request(cfg.url, data=body, headers=headers, method="POST")

    def _wait_interval(self):
        ch = self._channel
        if ch.last_sent is not None and self.config.min_interval > 0:
            delay = ch.last_sent + self.config.min_interval - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        ch.last_sent = time.monotonic()

    def _label(self, clip):
        cfg = self.config
        req = self._request(clip)
        last = None
        with self._channel.lock:
            for attempt in range(cfg.retries + 1):
                if attempt:
                    time.sleep(cfg.backoff * attempt)
                self._wait_interval()
                try:
                    with urllib.request.urlopen(req, timeout=cfg.timeout) as resp:
                        payload = resp.read()
                except urllib.error.HTTPError as exc:
                    if exc.code >= 500 or exc.code == 429:
                        last = f"HTTP {exc.code}"
                        log.warning("oracle %s returned %s (attempt %d)", cfg.url, exc.code, attempt + 1)
                        continue
                    raise OracleError(f"oracle rejected request: HTTP {exc.code}") from exc
                except (urllib.error.URLError, OSError) as exc:
                    last = str(exc)
                    log.warning("oracle transport failure: %s (attempt %d)", exc, attempt + 1)
                    continue
                try:
                    data = json.loads(payload)
                except ValueError as exc:
                    raise OracleError("oracle response is not JSON") from exc
                return extract_field(data, cfg.response_field_path)
        raise RetryableOracleError(f"oracle failed after {cfg.retries + 1} attempts: {last}")


def remote_oracle(config: RemoteConfig, budget=None) -> RemoteOracle:
    return RemoteOracle(config, budget=budget)
