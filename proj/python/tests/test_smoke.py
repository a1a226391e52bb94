import numpy as np
import pytest

import vsc_bench as vb

SR = 22050


def tone(seconds=1.0, hz=440.0):
    t = np.arange(int(SR * seconds)) / SR
    return np.sin(2 * np.pi * hz * t)


def reference_stft(x, n_fft, hop):
    pad = n_fft // 2
    padded = np.pad(x, pad, mode="reflect")
    window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n_fft) / n_fft)
    n_frames = 1 + len(x) // hop
    frames = np.stack([padded[i * hop : i * hop + n_fft] * window for i in range(n_frames)], axis=1)
    return np.abs(np.fft.rfft(frames, axis=0))


def test_stft_matches_numpy():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(SR // 2)
    got = vb.stft_magnitude(x, SR, {"n_fft": 1024, "hop": 256})
    want = reference_stft(x, 1024, 256)
    assert got.shape == want.shape
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9)


def test_tone_peaks_at_its_bin():
    m = vb.stft_magnitude(tone(hz=1000.0), SR)
    peak = int(np.argmax(m[:, m.shape[1] // 2]))
    assert abs(peak * SR / 2048 - 1000.0) < SR / 2048


def test_mel_and_mfcc_shapes():
    x = tone()
    mel = vb.mel_spectrogram(x, SR, {"n_mels": 64})
    assert mel.shape == (64, 1 + len(x) // 512)
    assert mel.max() == pytest.approx(0.0)
    assert mel.min() >= -80.0 - 1e-9
    coeffs = vb.mfcc(x, SR, {"n_mels": 64, "n_mfcc": 13})
    assert coeffs.shape == (13, mel.shape[1])


def test_filterbank_is_nonnegative_and_covers_bands():
    fb = vb.mel_filterbank(SR, 2048, 40, SR / 2)
    assert fb.shape == (40, 1025)
    assert (fb >= 0).all()
    assert (fb.sum(axis=1) > 0).all()
    assert vb.mel_to_hz(vb.hz_to_mel(3210.0)) == pytest.approx(3210.0)


@pytest.mark.parametrize("name", ["viridis", "magma"])
def test_colormaps_match_matplotlib(name):
    cm = pytest.importorskip("matplotlib").colormaps[name]
    want = np.asarray(cm(np.arange(256))[:, :3])
    np.testing.assert_allclose(vb.colormap_table(name), want, atol=1e-6)
    for i in (0, 17, 128, 255):
        assert vb.colormap_lookup(i / 255, name) == tuple(int(round(c * 255)) for c in want[i])


def test_render_is_deterministic_png():
    x = tone(seconds=2.0)
    png, h = vb.render_clip(x, SR, {}, "a.wav")
    again, h2 = vb.render_clip(x, SR, {}, "a.wav")
    assert png == again and h == h2
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    img = vb.decode_png(png)
    assert img.shape == (480, 640, 3)
    _, other = vb.render_clip(x, SR, {}, "b.wav")
    assert other != h
    assert vb.corpus_hash({}) != vb.corpus_hash({"colormap": "magma"})


def test_bad_config_raises():
    with pytest.raises(vb.VscError):
        vb.stft_magnitude(tone(), SR, {"hop": 0})
    with pytest.raises(ValueError):
        vb.render_clip(tone(), SR, {"style": "nonsense"})


def test_parse_label():
    classes = ["dog", "rain", "crying_baby"]
    assert vb.parse_label("  Crying baby. ", classes) == ("crying_baby", "ok")
    assert vb.parse_label("I'm sorry, I can't tell.", classes)[1] == "refused"
    assert vb.parse_label("dog or rain", classes) == (None, "unparseable")


def test_kappa_matches_sklearn():
    metrics = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(11)
    labels = ["a", "b", "c", "d"]
    for _ in range(20):
        a = list(rng.choice(labels, 60))
        b = [x if rng.random() < 0.6 else str(rng.choice(labels)) for x in a]
        assert vb.cohen_kappa(a, b) == pytest.approx(metrics.cohen_kappa_score(a, b), abs=1e-12)


def test_kappa_rejects_unanswered():
    with pytest.raises(vb.VscError):
        vb.cohen_kappa(["a", None], ["a", "b"])


def test_kmeans_not_worse_than_sklearn():
    cluster = pytest.importorskip("sklearn.cluster")
    rng = np.random.default_rng(5)
    pts = np.concatenate([rng.normal(c, 1.0, (15, 2)) for c in ([0, 0], [8, 1], [3, 9])])
    _, assignments, inertia = vb.kmeans(pts.tolist(), 3, seed=1)
    ref = cluster.KMeans(3, n_init=10, random_state=0).fit(pts)
    assert inertia <= ref.inertia_ * (1 + 1e-9)
    assert sorted(np.bincount(assignments)) == sorted(np.bincount(ref.labels_))
