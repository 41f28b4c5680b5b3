"""Spectral-decomposition evasion attacks on speech models."""
from .analysis import (cosine_similarity, detection_auc, mse, phoneme_edit_distance,
                       roc_auc, temporal_dependency_detect, transfer_matrix,
                       transfer_probability, wer)
from .attack import (AttackResult, PerturbMethod, impulse_attack, phoneme_attack,
                     threshold_attack, white_noise_baseline, word_attack)
from .audio_io import AudioClip, PhonemeSegment, load_wav, read_wav, save_wav, write_wav
from .features import MfccConfig, mfcc
from .oracles import (CentroidOracle, OracleLabel, QueryBudget, RemoteConfig,
                      remote_oracle, train_keyword_oracle, train_speaker_oracle)
from .spectral import forward_dft, inverse_dft, perturb_dft, threshold_spectrum
from .ssa import ssa_decompose, ssa_reconstruct, perturb_ssa

__version__ = "0.1.0"

__all__ = [
    "AttackResult",
    "AudioClip",
    "CentroidOracle",
    "MfccConfig",
    "OracleLabel",
    "PerturbMethod",
    "PhonemeSegment",
    "QueryBudget",
    "RemoteConfig",
    "cosine_similarity",
    "detection_auc",
    "forward_dft",
    "impulse_attack",
    "inverse_dft",
    "load_wav",
    "mfcc",
    "mse",
    "perturb_dft",
    "perturb_ssa",
    "phoneme_attack",
    "phoneme_edit_distance",
    "read_wav",
    "remote_oracle",
    "roc_auc",
    "save_wav",
    "ssa_decompose",
    "ssa_reconstruct",
    "temporal_dependency_detect",
    "threshold_attack",
    "threshold_spectrum",
    "train_keyword_oracle",
    "train_speaker_oracle",
    "transfer_matrix",
    "transfer_probability",
    "wer",
    "white_noise_baseline",
    "word_attack",
    "write_wav",
]
