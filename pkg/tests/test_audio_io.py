import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spectral_evasion.audio_io import (AnnotationError, AudioClip, PhonemeSegment, WavError,
                                       format_phoneme_annotations, load_wav,
                                       parse_phoneme_annotations, read_wav, save_wav,
                                       segment_samples, splice, to_pcm16, write_wav)
from conftest import make_clip


def wav_bytes(ints, rate=8000, channels=1, bits=16, tag=1, extra_chunks=b"", ext_tag=None):
    payload = np.asarray(ints, dtype="<i2").tobytes()
    if ext_tag is None:
        fmt = struct.pack("<HHIIHH", tag, channels, rate, rate * 2 * channels, 2 * channels, bits)
    else:
        fmt = struct.pack("<HHIIHHHHI", 0xFFFE, channels, rate, rate * 2, 2, bits, 22, bits, 4)
        fmt += struct.pack("<H", ext_tag) + b"\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"
    body = b"WAVE" + struct.pack("<4sI", b"fmt ", len(fmt)) + fmt + extra_chunks
    body += struct.pack("<4sI", b"data", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_read_known_values():
    clip = read_wav(wav_bytes([0, 16384, -32768, 32767], rate=16000))
    assert clip.sample_rate == 16000
    np.testing.assert_array_equal(clip.samples, [0.0, 0.5, -1.0, 32767 / 32768])


def test_skips_unknown_chunks_and_reads_extensible():
    junk = struct.pack("<4sI", b"LIST", 3) + b"abc\x00"
    assert len(read_wav(wav_bytes([1, 2, 3], extra_chunks=junk))) == 3
    assert len(read_wav(wav_bytes([1, 2], ext_tag=1))) == 2
    with pytest.raises(WavError, match="unsupported encoding"):
        read_wav(wav_bytes([1, 2], ext_tag=3))


@pytest.mark.parametrize("kw,msg", [
    ({"channels": 2}, "unsupported channel count 2"),
    ({"bits": 8}, "unsupported bit depth"),
    ({"tag": 3}, "unsupported encoding"),
])
def test_rejects_unsupported_formats(kw, msg):
    with pytest.raises(WavError, match=msg):
        read_wav(wav_bytes([1, 2, 3, 4], **kw))


@pytest.mark.parametrize("data", [b"", b"RIFX\x00\x00\x00\x00WAVE", b"RIFF\x04\x00\x00\x00WAVE"])
def test_rejects_malformed(data):
    with pytest.raises(WavError):
        read_wav(data)


@given(arrays(np.int16, st.integers(1, 200)))
@settings(max_examples=50, deadline=None)
def test_pcm_round_trip_is_exact(ints):
    clip = read_wav(wav_bytes(ints))
    assert read_wav(write_wav(clip)).samples.tobytes() == clip.samples.tobytes()


def test_write_clamps_out_of_range():
    np.testing.assert_array_equal(to_pcm16([2.0, -3.0, 0.5]), [32767, -32768, 16384])


def test_file_round_trip(tmp_path):
    clip = make_clip([0.25, -0.25, 0.0])
    save_wav(tmp_path / "a.wav", clip)
    np.testing.assert_array_equal(load_wav(tmp_path / "a.wav").samples, clip.samples)


def test_clip_validation():
    for bad in ([], [np.nan], [[0.1]]):
        with pytest.raises(ValueError):
            AudioClip(np.asarray(bad, dtype=float), 8000)
    with pytest.raises(ValueError):
        AudioClip(np.zeros(3), 0)
    clip = make_clip([0.1, 0.2])
    with pytest.raises(ValueError):
        clip.samples[0] = 1.0
    assert clip.duration == 2 / 8000


def test_annotations_round_trip():
    text = "0 100 h#\n100 250 aa\n\n250 400 s\n"
    segs = parse_phoneme_annotations(text)
    assert [s.label for s in segs] == ["h#", "aa", "s"]
    assert parse_phoneme_annotations(format_phoneme_annotations(segs)) == segs


@pytest.mark.parametrize("text,msg", [
    ("0 10 a\n5 20 b\n", "overlap at line 2"),
    ("0 x a\n", "non-numeric bounds at line 1"),
    ("10 10 a\n", "start must be >= 0 and < end at line 1"),
    ("-1 10 a\n", "line 1"),
    ("0 10\n", "line 1"),
])
def test_annotation_errors(text, msg):
    with pytest.raises(AnnotationError, match=msg):
        parse_phoneme_annotations(text)


def test_splice_touches_only_segment(rng):
    clip = make_clip(rng.uniform(-0.5, 0.5, 100))
    seg = PhonemeSegment(20, 60, "aa")
    out = splice(clip, seg, np.zeros(40))
    np.testing.assert_array_equal(out.samples[:20], clip.samples[:20])
    np.testing.assert_array_equal(out.samples[60:], clip.samples[60:])
    assert not np.any(out.samples[20:60])
    with pytest.raises(ValueError):
        splice(clip, seg, np.zeros(39))
    with pytest.raises(ValueError):
        segment_samples(clip, PhonemeSegment(90, 101, "x"))


def test_crossfade_blends_edges():
    clip = make_clip(np.ones(200))
    out = splice(clip, PhonemeSegment(50, 150, "aa"), np.zeros(100), crossfade=True).samples
    assert 0 < out[50] < 1 and 0 < out[149] < 1
    assert out[100] == 0.0
    np.testing.assert_array_equal(out[:50], 1.0)
