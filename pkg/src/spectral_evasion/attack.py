"""Attack engine: budgeted rank-space bisection, single-segment perturbation,
and the impulse / white-noise baselines."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import mse as _mse
from .audio_io import AudioClip, PhonemeSegment, clamp, segment_samples, splice
from .oracles import OracleError, OracleLabel
from .spectral import DftLadder, perturb_dft
from .ssa import SsaLadder, default_window, perturb_ssa

DEFAULT_BUDGET = 15


class PerturbMethod(str, enum.Enum):
    DFT = "dft"
    SSA = "ssa"


def make_ladder(samples, method, L=None):
    method = PerturbMethod(method)
    if method is PerturbMethod.DFT:
        return DftLadder(samples)
    return SsaLadder(samples, L)


@dataclass
class AttackResult:
    perturbed: AudioClip
    success: bool
    queries_used: int
    final_threshold: float
    mse: float
    baseline_label: OracleLabel | None
    attack_label: OracleLabel | None
    retained_components: int | None = None
    total_components: int | None = None
    method: str | None = None
    error: str | None = None
    probes: list = field(default_factory=list)  # (retained, flipped) in query order

    def record(self, **extra):
        rec = {
            "method": self.method,
            "queries_used": self.queries_used,
            "success": self.success,
            "final_threshold": self.final_threshold,
            "retained_components": self.retained_components,
            "mse": self.mse,
            "baseline_label": None if self.baseline_label is None else self.baseline_label.text,
            "attack_label": None if self.attack_label is None else self.attack_label.text,
        }
        if self.error:
            rec["error"] = self.error
        rec.update(extra)
        return rec


def bisect_retained(flips, size, max_probes):
    """Largest ``r`` in ``[0, size)`` with ``flips(r)`` true, by bisection.

    ``flips(size)`` is assumed false (nothing discarded) and is never probed.
    Returns ``(best, probes)``; ``best`` is the largest flipping ``r`` probed,
    or None. ``flips`` may raise to abort the search early.
    """
    lo, hi = -1, size
    best = None
    probes = []
    while hi - lo > 1 and len(probes) < max_probes:
        mid = (lo + hi) // 2
        flipped = flips(mid)
        probes.append((mid, flipped))
        if flipped:
            best = mid if best is None else max(best, mid)
            lo = mid
        else:
            hi = mid
    return best, probes


def word_attack(clip: AudioClip, oracle, method=PerturbMethod.DFT,
                budget=DEFAULT_BUDGET, L=None) -> AttackResult:
    """Find the most components that can be kept while the label still changes.

    Query 1 labels the untouched clip. Each further query probes a
    reconstruction from the ``r`` strongest components; a mislabel moves the
    search toward larger ``r``, a correct label toward smaller ``r``.
    """
    if budget < 2:
        raise ValueError("word_attack needs a budget of at least 2 queries")
    method = PerturbMethod(method)
    ladder = make_ladder(clip.samples, method, L)
    used = 0
    labels = {}

    def ask(samples):
        nonlocal used
        label = oracle.query(clip.with_samples(samples))
        used += 1
        return label

    def fail(error, baseline=None):
        return AttackResult(clip, False, used, 0.0, 0.0, baseline, baseline,
                            None, ladder.size, method.value, error)

    try:
        baseline = ask(clip.samples)
    except OracleError as exc:
        return fail(str(exc))

    probed = {}

    def flips(r):
        samples = clamp(ladder.reconstruct(r))
        label = ask(samples)
        probed[r] = samples
        labels[r] = label
        return label != baseline

    error = None
    try:
        best, probes = bisect_retained(flips, ladder.size, budget - 1)
    except OracleError as exc:
        error = str(exc)
        flipped = [r for r in probed if labels[r] != baseline]
        best = max(flipped) if flipped else None
        probes = [(r, labels[r] != baseline) for r in probed]

    if best is None:
        if not probed:
            return fail(error or "no probe was issued", baseline)
        r = min(probed)
        success = False
    else:
        r = best
        success = True
    perturbed = clip.with_samples(probed[r])
    return AttackResult(
        perturbed=perturbed,
        success=success,
        queries_used=used,
        final_threshold=ladder.threshold_for(r),
        mse=_mse(clip.samples, perturbed.samples),
        baseline_label=baseline,
        attack_label=labels[r],
        retained_components=r,
        total_components=ladder.size,
        method=method.value,
        error=error,
        probes=probes,
    )


def perturb(clip: AudioClip, method, t, L=None) -> AudioClip:
    if PerturbMethod(method) is PerturbMethod.DFT:
        return perturb_dft(clip, t)
    return perturb_ssa(clip, t, L)


def threshold_attack(clip: AudioClip, oracle, method=PerturbMethod.DFT, t=0.05,
                     L=None) -> AttackResult:
    """Single fixed-threshold probe: baseline query plus one perturbed query."""
    method = PerturbMethod(method)
    perturbed = perturb(clip, method, t, L)
    return _single_probe(clip, perturbed, oracle, float(t), None, None, method.value)


def _single_probe(clip, perturbed, oracle, threshold, kept, total, method):
    used = 0
    baseline = attack_label = None
    error = None
    try:
        baseline = oracle.query(clip)
        used += 1
        attack_label = oracle.query(perturbed)
        used += 1
    except OracleError as exc:
        error = str(exc)
    success = attack_label is not None and attack_label != baseline
    return AttackResult(perturbed, success, used, threshold,
                        _mse(clip.samples, perturbed.samples), baseline, attack_label,
                        kept, total, method, error)


def discard_weakest(samples, method, factor=0.5, L=None):
    """Rebuild ``samples`` from the strongest ``floor(d * (1 - factor))``
    of its ``d`` components. Returns ``(reconstruction, kept, d, threshold)``."""
    if not 0.0 <= factor <= 1.0:
        raise ValueError("factor must lie in [0, 1]")
    method = PerturbMethod(method)
    if method is PerturbMethod.SSA and L is None:
        L = default_window(len(samples))
    ladder = make_ladder(samples, method, L)
    kept = int(math.floor(ladder.size * (1.0 - factor) + 1e-9))
    return ladder.reconstruct(kept), kept, ladder.size, ladder.threshold_for(kept)


def phoneme_attack(clip: AudioClip, segment: PhonemeSegment, oracle,
                   method=PerturbMethod.DFT, factor=0.5, L=None) -> AttackResult:
    """Discard the weaker ``factor`` share of one segment's components and
    splice it back; exactly two queries (baseline, probe)."""
    method = PerturbMethod(method)
    original = segment_samples(clip, segment)
    rebuilt, kept, total, threshold = discard_weakest(original, method, factor, L)
    perturbed = splice(clip, segment, clamp(rebuilt))
    return _single_probe(clip, perturbed, oracle, threshold, kept, total, method.value)


def impulse_attack(clip: AudioClip, segment: PhonemeSegment, fraction=1.0) -> AudioClip:
    """Set the first ``ceil(fraction * len(segment))`` samples of the segment
    to the clip's peak absolute amplitude."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    segment_samples(clip, segment)
    count = math.ceil(fraction * len(segment) - 1e-9)
    out = clip.samples.copy()
    out[segment.start:segment.start + count] = np.max(np.abs(clip.samples))
    return clip.with_samples(out)


def white_noise_baseline(clip: AudioClip, snr_db: float, seed=0) -> AudioClip:
    """Add zero-mean uniform noise at exactly ``snr_db`` (before clamping).

    ``snr_db = inf`` returns the clip unchanged.
    """
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    if snr_db == math.inf:
        return clip
    x = clip.samples
    power = np.mean(x ** 2)
    if power == 0.0:
        raise ValueError("cannot set an SNR on a silent clip")
    noise = np.random.default_rng(seed).uniform(-1.0, 1.0, x.size)
    noise -= noise.mean()
    noise *= np.sqrt(power / 10.0 ** (snr_db / 10.0) / np.mean(noise ** 2))
    return clip.with_samples(clamp(x + noise))
