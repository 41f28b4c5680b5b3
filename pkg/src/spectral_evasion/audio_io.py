"""WAV I/O, phoneme annotations and segment splicing.

Only RIFF/WAVE PCM 16-bit mono is supported. Samples live in memory as
float64 in [-1, 1); writing clamps and rounds back to int16.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

PCM_SCALE = 32768.0


class WavError(ValueError):
    pass


class AnnotationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("AudioClip needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(x)):
            raise ValueError("AudioClip samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.sample_rate

    def with_samples(self, samples) -> "AudioClip":
        return AudioClip(np.asarray(samples, dtype=np.float64), self.sample_rate)


@dataclass(frozen=True)
class PhonemeSegment:
    start: int
    end: int
    label: str

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid segment bounds [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start


def clamp(samples):
    return np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)


# --------------------------------------------------------------------------
# RIFF/WAVE
# --------------------------------------------------------------------------

def _chunks(data):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise WavError(f"truncated {cid!r} chunk")
        yield cid, body
        pos += 8 + size + (size & 1)


def read_wav(data: bytes) -> AudioClip:
    """Decode a PCM16 mono RIFF/WAVE byte string."""
    if len(data) < 12:
        raise WavError("file too short for a RIFF header")
    riff, _, wave = struct.unpack_from("<4sI4s", data, 0)
    if riff != b"RIFF" or wave != b"WAVE":
        raise WavError("not a RIFF/WAVE file")

    fmt = None
    fmt_body = b""
    payload = None
    for cid, body in _chunks(data):
        if cid == b"fmt ":
            if len(body) < 16:
                raise WavError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            fmt_body = body
        elif cid == b"data":
            payload = body
            break
    if fmt is None:
        raise WavError("missing fmt chunk")
    if payload is None:
        raise WavError("missing data chunk")

    tag, channels, rate, _, _, bits = fmt
    if tag == 0xFFFE and len(fmt_body) >= 26:
        # WAVE_FORMAT_EXTENSIBLE: the real tag leads the sub-format GUID
        tag = struct.unpack_from("<H", fmt_body, 24)[0]
    if tag != 1:
        raise WavError(f"unsupported encoding (format tag {tag}); only PCM is accepted")
    if channels != 1:
        raise WavError(f"unsupported channel count {channels}; only mono is accepted")
    if bits != 16:
        raise WavError(f"unsupported bit depth {bits}; only 16-bit PCM is accepted")
    if rate <= 0:
        raise WavError("sample rate must be positive")
    if len(payload) % 2:
        payload = payload[:-1]
    if not payload:
        raise WavError("empty data chunk")

    ints = np.frombuffer(payload, dtype="<i2")
    return AudioClip(ints.astype(np.float64) / PCM_SCALE, rate)


def to_pcm16(samples):
    scaled = np.round(clamp(samples) * PCM_SCALE)
    return np.clip(scaled, -32768, 32767).astype("<i2")


def write_wav(clip: AudioClip) -> bytes:
    """Encode ``clip`` as PCM16 mono WAV, clamping to [-1, 1] first."""
    payload = to_pcm16(clip.samples).tobytes()
    buf = io.BytesIO()
    buf.write(struct.pack("<4sI4s", b"RIFF", 36 + len(payload), b"WAVE"))
    buf.write(struct.pack("<4sIHHIIHH", b"fmt ", 16, 1, 1, clip.sample_rate,
                          clip.sample_rate * 2, 2, 16))
    buf.write(struct.pack("<4sI", b"data", len(payload)))
    buf.write(payload)
    return buf.getvalue()


def load_wav(path) -> AudioClip:
    with open(path, "rb") as fh:
        return read_wav(fh.read())


def save_wav(path, clip: AudioClip):
    with open(path, "wb") as fh:
        fh.write(write_wav(clip))


# --------------------------------------------------------------------------
# Annotations
# --------------------------------------------------------------------------

def parse_phoneme_annotations(text: str) -> list[PhonemeSegment]:
    """Parse TIMIT-style ``start end label`` lines into ordered segments."""
    segments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 3:
            raise AnnotationError(f"expected 'start end label' at line {lineno}")
        try:
            start, end = int(fields[0]), int(fields[1])
        except ValueError:
            raise AnnotationError(f"non-numeric bounds at line {lineno}") from None
        if start < 0 or start >= end:
            raise AnnotationError(f"start must be >= 0 and < end at line {lineno}")
        if segments and start < segments[-1].end:
            raise AnnotationError(f"overlap at line {lineno}")
        segments.append(PhonemeSegment(start, end, fields[2]))
    return segments


def format_phoneme_annotations(segments) -> str:
    return "".join(f"{s.start} {s.end} {s.label}\n" for s in segments)


def _check_segment(clip, segment):
    if segment.end > len(clip):
        raise ValueError(
            f"segment [{segment.start}, {segment.end}) exceeds clip length {len(clip)}")


def segment_samples(clip: AudioClip, segment: PhonemeSegment) -> np.ndarray:
    _check_segment(clip, segment)
    return clip.samples[segment.start:segment.end]


def splice(clip: AudioClip, segment: PhonemeSegment, replacement, crossfade=False) -> AudioClip:
    """Replace ``clip[start:end]`` with ``replacement``.

    With ``crossfade=True`` the first and last 2 ms of the replacement are
    linearly blended with the original samples; the default is a hard cut.
    """
    _check_segment(clip, segment)
    replacement = np.asarray(replacement, dtype=np.float64)
    if replacement.shape != (len(segment),):
        raise ValueError(
            f"replacement length {replacement.size} != segment length {len(segment)}")
    out = clip.samples.copy()
    if crossfade:
        original = out[segment.start:segment.end]
        n = min(len(segment) // 2, max(1, int(round(0.002 * clip.sample_rate))))
        ramp = np.ones(len(segment))
        ramp[:n] = np.linspace(0.0, 1.0, n + 2)[1:-1]
        ramp[len(segment) - n:] = np.linspace(1.0, 0.0, n + 2)[1:-1]
        replacement = ramp * replacement + (1.0 - ramp) * original
    out[segment.start:segment.end] = replacement
    return clip.with_samples(out)
