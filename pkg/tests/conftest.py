import numpy as np
import pytest

from spectral_evasion import synth
from spectral_evasion.audio_io import AudioClip
from spectral_evasion.oracles import train_keyword_oracle, train_speaker_oracle


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_clip(samples, sr=8000):
    return AudioClip(np.asarray(samples, dtype=np.float64), sr)


@pytest.fixture(scope="session")
def keyword_oracle():
    return train_keyword_oracle(synth.keyword_corpus(per_class=20, seed=0))


@pytest.fixture(scope="session")
def speaker_oracle():
    return train_speaker_oracle(synth.breath_speaker_corpus(per_speaker=10, seed=0))


ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
