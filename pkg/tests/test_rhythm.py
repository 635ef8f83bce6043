import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amt_metrics.model import make_notes
from amt_metrics.rhythm import (COARSE_EDGES, FINE_EDGES, NOISY, QUANT, QUANT_CONSTANT,
                                IoiHistogram, PerturbationSpec, compute_ioi,
                                flatness_features, histogram_peaks, ioi_histogram,
                                kmeans_1d, perturb, read_beat_grid, rhythm_dispersion,
                                snap, spectral_flatness)

from oracles import bin_oracle, lloyd_reference, random_notes


def test_bin_layout():
    assert len(FINE_EDGES) - 1 == 29
    assert np.allclose(np.diff(FINE_EDGES)[:10], 0.01) and np.allclose(np.diff(FINE_EDGES)[10:], 0.1)
    assert len(COARSE_EDGES) - 1 == 15
    assert COARSE_EDGES[-1] == 2.0 and COARSE_EDGES[-2] == 1.9


def test_ioi_examples():
    assert compute_ioi(make_notes([(0, 1, 60), (0.5, 1, 62), (1.0, 2, 64)])).tolist() == [0.5, 0.5]
    assert compute_ioi(make_notes([(0, 1, 60)])).size == 0
    assert compute_ioi(make_notes([(0, 1, 60), (0, 1, 64)])).tolist() == [0.0]


def test_histogram_examples():
    h = ioi_histogram([0.5, 0.5, 0.5])
    assert h.weights.sum() == 1.0 and np.count_nonzero(h.weights) == 1
    h = ioi_histogram([0.005, 0.015])
    assert h.weights[:2].tolist() == [0.5, 0.5]
    # grid values land in the bin they open, IOIs of 2 s or more are dropped
    assert ioi_histogram([0.07, 2.0, 3.5]).weights[7] == 1.0


@pytest.mark.parametrize("binning", ["fine", "coarse"])
def test_histogram_against_membership(binning):
    rng = np.random.default_rng(0)
    edges = FINE_EDGES if binning == "fine" else COARSE_EDGES
    for _ in range(20):
        iois = np.round(rng.uniform(0, 2.5, 40), 3)
        h = ioi_histogram(iois, binning)
        counts = bin_oracle(iois, edges)
        assert h.n_values == sum(counts)
        assert np.allclose(h.weights * h.n_values, counts)


def test_flatness_closed_forms():
    assert abs(spectral_flatness(np.full(29, 1 / 29))) < 1e-12
    single = np.zeros(29)
    single[3] = 1.0
    eps = 1e-5
    closed = (math.log(1 + eps) + 28 * math.log(eps)) / 29 - math.log((1 + 29 * eps) / 29)
    assert spectral_flatness(single, eps) == pytest.approx(closed, abs=1e-12)
    assert closed == pytest.approx(-7.75, abs=0.01)


@given(st.lists(st.floats(0, 1), min_size=29, max_size=29))
def test_flatness_never_positive(weights):
    assert spectral_flatness(np.array(weights)) <= 1e-12


def test_flatness_identity_difference():
    notes = random_notes(np.random.default_rng(1), 20)
    assert flatness_features(notes, notes).difference == 0.0


def test_peaks_examples():
    edges = COARSE_EDGES
    one = np.zeros(15)
    one[4] = 1.0
    assert histogram_peaks(IoiHistogram(edges, one, 1)).tolist() == [pytest.approx(0.09)]
    two = np.zeros(15)
    two[[1, 6]] = [0.6, 0.4]
    assert len(histogram_peaks(IoiHistogram(edges, two, 5))) == 2
    plateau = np.zeros(15)
    plateau[[5, 6, 7]] = 0.2
    plateau[8] = 0.1
    peaks = histogram_peaks(IoiHistogram(edges, plateau, 5))
    assert peaks.tolist() == [pytest.approx((edges[5] + edges[6]) / 2)]


def _peaks_oracle(w, centers):
    """A bin is a peak if it is the leftmost of a run of equal positive bins
    whose neighbours outside the run are both lower."""
    out = []
    for i in range(len(w)):
        if w[i] <= 0 or (i > 0 and w[i - 1] == w[i]):
            continue
        j = i
        while j + 1 < len(w) and w[j + 1] == w[i]:
            j += 1
        if (i == 0 or w[i - 1] < w[i]) and (j == len(w) - 1 or w[j + 1] < w[i]):
            out.append(centers[i])
    return out


def test_peaks_against_neighbour_comparison():
    rng = np.random.default_rng(2)
    for _ in range(200):
        w = rng.integers(0, 4, 15).astype(float)
        h = IoiHistogram(COARSE_EDGES, w, 1)
        assert histogram_peaks(h).tolist() == _peaks_oracle(w, h.centers.tolist())


def test_kmeans_examples():
    fit = kmeans_1d([0.5, 0.5, 1.0, 1.0], [0.5, 1.0])
    assert fit.centers.tolist() == [0.5, 1.0] and fit.stds == (0.0, 0.0)
    fit = kmeans_1d([0.3] * 4, [0.7])
    assert fit.centers.tolist() == [0.3] and fit.stds == (0.0,)


def test_kmeans_against_reference_lloyd():
    rng = np.random.default_rng(3)
    for _ in range(50):
        values = np.round(rng.uniform(0, 2, int(rng.integers(2, 30))), 3)
        seeds = np.sort(rng.choice(values, size=int(rng.integers(1, 4)), replace=False))
        fit = kmeans_1d(values, seeds, max_iter=1000)
        centers, labels = lloyd_reference(values.tolist(), seeds.tolist())
        assert fit.centers == pytest.approx(sorted(centers), abs=1e-9)
        assert fit.labels.tolist() == labels


def test_dispersion_identity_and_absence():
    notes = random_notes(np.random.default_rng(4), 30)
    d = rhythm_dispersion(notes, notes)
    assert d == (0.0,) * 6
    assert rhythm_dispersion(notes, make_notes([(0, 1, 60)])) is None


def test_dispersion_hand_example():
    # two clusters at 0.25 and 1.0; the output widens the first and moves the second
    t = make_notes([(x, x + 0.1, 60) for x in (0, 0.25, 0.5, 0.75, 1.75, 2.75)])
    o = make_notes([(x, x + 0.1, 60) for x in (0, 0.2, 0.5, 0.8, 1.9, 2.9)])
    d = rhythm_dispersion(t, o)
    ti, oi = np.diff([0, 0.25, 0.5, 0.75]), np.diff([0, 0.2, 0.5, 0.8])
    assert d.drift_min == pytest.approx(abs(oi.mean() - ti.mean()), abs=1e-12)
    assert d.std_change_min == pytest.approx(oi.std() - ti.std(), abs=1e-12)
    assert d.std_change_max == pytest.approx(np.std([1.1, 1.0]), abs=1e-12)
    assert d.drift_max == pytest.approx(abs(np.mean([1.1, 1.0]) - 1.0), abs=1e-12)


def test_snap_ties_go_earlier():
    grid = np.array([0.0, 1.0, 2.0])
    assert snap([0.5, 0.51, 1.9, 5.0], grid).tolist() == [0.0, 1.0, 2.0, 2.0]


def test_perturb_identities():
    notes = make_notes([(0.0, 0.25, 60, 80), (0.25, 0.75, 64, 70), (1.0, 1.5, 67, 90)])
    assert perturb(notes, PerturbationSpec(NOISY, noise=0.0)).notes == notes.notes
    assert perturb(notes, PerturbationSpec(QUANT_CONSTANT, tempo=60.0)).notes == notes.notes
    grid = tuple(np.arange(0, 2.01, 0.25))
    assert perturb(notes, PerturbationSpec(QUANT, beat_grid=grid)).notes == notes.notes


def test_quantisation_snaps_to_grid():
    notes = make_notes([(0.11, 0.37, 60), (0.52, 0.61, 62)])
    q = perturb(notes, PerturbationSpec(QUANT_CONSTANT, beat_grid=(0.0, 0.25, 0.5, 0.75)))
    assert [(n.onset, n.offset) for n in q] == [(0.0, 0.25), (0.5, 0.75)]
    grid = (0.0, 0.1, 0.3, 0.6)
    q = perturb(notes, PerturbationSpec(QUANT, beat_grid=grid))
    assert [(n.onset, n.offset) for n in q] == [(0.1, 0.3), (0.6, 0.6 + 0.3)]


def test_perturb_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        PerturbationSpec(QUANT)
    with pytest.raises(ValueError):
        PerturbationSpec(NOISY, noise=-0.1)
    with pytest.raises(ValueError):
        PerturbationSpec(QUANT, beat_grid=(0.0, 0.0))
    path = tmp_path / "g.grid"
    path.write_text("# grid\n0.0\n0.25\n0.5\n")
    assert read_beat_grid(path) == (0.0, 0.25, 0.5)
    path.write_text("0.0\n0.0\n")
    with pytest.raises(ValueError, match="increase"):
        read_beat_grid(path)


def test_noise_is_uniform_and_keeps_durations():
    # every note gets its own duration (in whole ms) so notes can be paired after re-sorting
    notes = make_notes([(5.0 + 0.01 * i, 5.0 + 0.01 * i + 0.1 + 0.001 * i, 60 + i % 12)
                        for i in range(2000)])
    out = perturb(notes, PerturbationSpec(NOISY, noise=0.3), np.random.default_rng(0))
    before = {round(n.offset - n.onset, 6): n for n in notes}
    after = {round(n.offset - n.onset, 6): n for n in out}
    assert before.keys() == after.keys()
    assert all(before[k].pitch == after[k].pitch for k in before)
    shifts = np.array([after[k].onset - before[k].onset for k in before])
    assert np.all(np.abs(shifts) <= 0.3 + 1e-12)
    # Kolmogorov-Smirnov distance to U(-0.3, 0.3); 1.63/sqrt(n) is the 1% critical value
    x = np.sort(shifts)
    cdf = (x + 0.3) / 0.6
    n = len(x)
    ks = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
    assert ks < 1.63 / np.sqrt(n)


def test_noise_clips_onsets_at_zero():
    notes = make_notes([(0.0, 0.5, 60)])
    out = perturb(notes, PerturbationSpec(NOISY, noise=0.3), np.random.default_rng(1))
    assert out[0].onset >= 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_seeded_noise_is_reproducible(seed):
    notes = random_notes(np.random.default_rng(0), 10)
    a = perturb(notes, PerturbationSpec(NOISY, noise=0.1), np.random.default_rng(seed))
    b = perturb(notes, PerturbationSpec(NOISY, noise=0.1), np.random.default_rng(seed))
    assert a.notes == b.notes
