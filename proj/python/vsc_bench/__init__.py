"""Spectrogram rendering, DSP and scoring from the vsc C++ core."""

from ._core import (
    VscError,
    cohen_kappa,
    colormap_lookup,
    colormap_table,
    corpus_hash,
    decode_png,
    default_config,
    hz_to_mel,
    kmeans,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    mfcc,
    parse_label,
    render_clip,
    spectrogram,
    stft_magnitude,
)

__all__ = [
    "VscError",
    "cohen_kappa",
    "colormap_lookup",
    "colormap_table",
    "corpus_hash",
    "decode_png",
    "default_config",
    "hz_to_mel",
    "kmeans",
    "mel_filterbank",
    "mel_spectrogram",
    "mel_to_hz",
    "mfcc",
    "parse_label",
    "render_clip",
    "spectrogram",
    "stft_magnitude",
]
