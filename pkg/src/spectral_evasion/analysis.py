"""Distortion, transcript similarity, detection and transferability metrics."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .kernels import levenshtein
from .oracles import normalize

# Reference MSE levels reported for real channels / attacks.
GSM_BASELINE_MSE = 0.0100
LTE_MSE = 0.0181
PHONEME_ATTACK_MEAN_MSE = 0.0067


def mse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def snr_db(signal, noisy) -> float:
    signal = np.asarray(signal, dtype=np.float64)
    noise = np.asarray(noisy, dtype=np.float64) - signal
    pn = np.mean(noise ** 2)
    if pn == 0.0:
        return math.inf
    return float(10.0 * np.log10(np.mean(signal ** 2) / pn))


def _tokens(text):
    if isinstance(text, (list, tuple)):
        return [str(t) for t in text]
    return normalize(text).split()


def cosine_similarity(text_a, text_b) -> float:
    """Bag-of-words cosine similarity of two transcripts.

    Two empty texts score 1; an empty text against a non-empty one scores 0.
    """
    a, b = Counter(_tokens(text_a)), Counter(_tokens(text_b))
    if not a or not b:
        return 1.0 if not a and not b else 0.0
    dot = sum(a[w] * b[w] for w in a.keys() & b.keys())
    na2 = sum(v * v for v in a.values())
    nb2 = sum(v * v for v in b.values())
    return min(1.0, dot / math.sqrt(na2 * nb2))


def wer(ref_words, hyp_words) -> float:
    """Word-level edit distance divided by the reference length."""
    ref, hyp = _tokens(ref_words), _tokens(hyp_words)
    if not ref:
        raise ValueError("WER needs a non-empty reference")
    return levenshtein(ref, hyp) / len(ref)


def phoneme_edit_distance(ref_phonemes, hyp_phonemes):
    """Return ``(phi, accuracy)``: normalized phoneme edit distance and
    1 if it is zero else 0."""
    ref, hyp = list(ref_phonemes), list(hyp_phonemes)
    if not ref:
        raise ValueError("phoneme edit distance needs a non-empty reference")
    phi = levenshtein(ref, hyp) / len(ref)
    return phi, int(phi == 0)


@dataclass
class TransferSet:
    """MSEs of successful attacks against one model; the mean is its hardness."""

    model: str
    mse_values: list = field(default_factory=list)

    def __post_init__(self):
        self.mse_values = [float(v) for v in self.mse_values]
        if any(v < 0 or not math.isfinite(v) for v in self.mse_values):
            raise ValueError("MSE values must be finite and non-negative")

    @property
    def mean_mse(self):
        return float(np.mean(self.mse_values)) if self.mse_values else 0.0


def transfer_probability(from_set: TransferSet, to_set: TransferSet) -> float:
    """Share of ``from_set`` attacks whose MSE reaches ``to_set``'s mean."""
    if not from_set.mse_values:
        raise ValueError(f"transfer set {from_set.model!r} is empty")
    hard = to_set.mean_mse
    return sum(v >= hard for v in from_set.mse_values) / len(from_set.mse_values)


def transfer_matrix(sets, conventional_diagonal=True):
    """Pairwise probabilities ``P[i][j]`` from ``sets[i]`` to ``sets[j]``.

    With ``conventional_diagonal`` self-transfer is reported as 1.0.
    """
    n = len(sets)
    out = np.empty((n, n))
    for i, f in enumerate(sets):
        for j, g in enumerate(sets):
            if i == j and conventional_diagonal:
                out[i, j] = 1.0
            else:
                out[i, j] = transfer_probability(f, g)
    return out


def per_layer_change(baseline_activation, perturbed_activation) -> float:
    """Relative L2 change of a layer activation under perturbation."""
    h = np.asarray(baseline_activation, dtype=np.float64).ravel()
    h_adv = np.asarray(perturbed_activation, dtype=np.float64).ravel()
    if h.shape != h_adv.shape:
        raise ValueError("activation length mismatch")
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise ValueError("baseline activation has zero norm")
    return float(np.linalg.norm(h - h_adv) / norm)


def roc_auc(benign_scores, adversarial_scores) -> float:
    """P(adversarial > benign) + 0.5 P(tie), via the Mann-Whitney rank sum."""
    neg = np.asarray(benign_scores, dtype=np.float64).ravel()
    pos = np.asarray(adversarial_scores, dtype=np.float64).ravel()
    if neg.size == 0 or pos.size == 0:
        raise ValueError("roc_auc needs non-empty benign and adversarial scores")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[:pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


# --------------------------------------------------------------------------
# Temporal-dependency detection
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DetectionVerdict:
    wer_score: float
    adversarial: bool
    full_transcript: str = ""
    half_transcript: str = ""

    @property
    def no_transcription(self):
        return not self.full_transcript and not self.half_transcript


def prefix_wer(full_words, half_words) -> float:
    """WER of the half-clip transcript against the same-length prefix of the
    full-clip transcript; 0 when both are empty."""
    full, half = list(full_words), list(half_words)
    if not full and not half:
        return 0.0
    ref = full[:len(half)] if half else full
    if not ref:
        # words appear only in the half clip
        return 1.0
    return levenshtein(ref, half) / len(ref)


def temporal_dependency_detect(clip, oracle, wer_threshold=0.5) -> DetectionVerdict:
    """Compare transcripts of the full clip and of its first half (2 queries)."""
    if len(clip) < 2:
        raise ValueError("clip too short to halve")
    full = oracle.query(clip)
    half = oracle.query(clip.with_samples(clip.samples[:len(clip) // 2]))
    score = prefix_wer(full.words, half.words)
    return DetectionVerdict(score, score > wer_threshold, full.text, half.text)


def filter_zero_wer(verdicts, enabled=True):
    """Drop verdicts scoring exactly 0 (e.g. no transcription at all)."""
    if not enabled:
        return list(verdicts)
    return [v for v in verdicts if v.wer_score != 0.0]


def detection_auc(benign, adversarial, drop_zero_wer_adversarial=False) -> float:
    """AUC of WER scores; optionally discard zero-WER adversarial verdicts."""
    adversarial = filter_zero_wer(adversarial, drop_zero_wer_adversarial)
    return roc_auc([v.wer_score for v in benign], [v.wer_score for v in adversarial])
