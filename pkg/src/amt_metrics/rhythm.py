"""Inter-onset-interval statistics and rhythm perturbations.

IOIs are binned on a non-uniform grid: fine steps for very short intervals
(chords, grace notes, fast runs) and coarse steps up to 2 s.  IOIs of 2 s
or more fall outside both grids and are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .model import OUTPUT, Note, NoteList

EPSILON = 1e-5
MAX_IOI = 2.0
KMEANS_TOL = 1e-9
KMEANS_MAX_ITER = 100

# 10 x 10 ms, then 19 x 100 ms
FINE_EDGES = np.round(np.concatenate((np.arange(0, 10) * 0.01,
                                      0.1 + np.arange(0, 20) * 0.1)), 9)
# 5 x 20 ms, 9 x 200 ms, and a last 100 ms bin up to 2 s
COARSE_EDGES = np.round(np.concatenate((np.arange(0, 5) * 0.02,
                                        0.1 + np.arange(0, 10) * 0.2, [MAX_IOI])), 9)

QUANT_CONSTANT = "quant-constant"
QUANT = "quant"
NOISY = "noisy"


def compute_ioi(notes: NoteList) -> np.ndarray:
    onsets = np.sort(notes.onsets)
    return np.diff(onsets)


@dataclass(frozen=True)
class IoiHistogram:
    edges: np.ndarray
    weights: np.ndarray  # normalised counts, sum to 1 unless empty
    n_values: int

    @property
    def centers(self) -> np.ndarray:
        return (self.edges[:-1] + self.edges[1:]) / 2


def ioi_histogram(iois, binning="fine") -> IoiHistogram:
    """Normalised IOI histogram; ``binning`` is "fine", "coarse" or an edge array.

    Bins are right-open.  IOIs are rounded to the nanosecond first so that
    grid-aligned values land in the bin they start.
    """
    if isinstance(binning, str):
        edges = {"fine": FINE_EDGES, "coarse": COARSE_EDGES}[binning]
    else:
        edges = np.asarray(binning, dtype=float)
    iois = np.round(np.asarray(iois, dtype=float), 9)
    iois = iois[(iois >= edges[0]) & (iois < edges[-1])]
    counts = np.bincount(np.searchsorted(edges, iois, side="right") - 1,
                         minlength=len(edges) - 1).astype(float)
    if len(iois):
        counts /= len(iois)
    return IoiHistogram(edges, counts, len(iois))


def spectral_flatness(hist, eps: float = EPSILON) -> float:
    """Log of geometric over arithmetic mean of the (offset) histogram; <= 0."""
    h = np.asarray(getattr(hist, "weights", hist), dtype=float) + eps
    return float(np.mean(np.log(h)) - np.log(np.mean(h)))


class Flatness(NamedTuple):
    output: float
    difference: float


def flatness_features(targets: NoteList, outputs: NoteList, binning="fine",
                      eps: float = EPSILON) -> Flatness:
    out = spectral_flatness(ioi_histogram(compute_ioi(outputs), binning), eps)
    tgt = spectral_flatness(ioi_histogram(compute_ioi(targets), binning), eps)
    return Flatness(out, out - tgt)


def histogram_peaks(hist: IoiHistogram) -> np.ndarray:
    """Centres of the histogram's local maxima.

    A run of equal bins is a peak when both bins around it are lower (the
    histogram edges count as lower); its leftmost bin stands for it.  Empty
    bins are never peaks.
    """
    w = hist.weights
    centers = hist.centers
    peaks = []
    i = 0
    while i < len(w):
        j = i
        while j + 1 < len(w) and w[j + 1] == w[i]:
            j += 1
        left_lower = i == 0 or w[i - 1] < w[i]
        right_lower = j == len(w) - 1 or w[j + 1] < w[i]
        if w[i] > 0 and left_lower and right_lower:
            peaks.append(centers[i])
        i = j + 1
    return np.array(peaks)


@dataclass(frozen=True)
class ClusterSet:
    centers: np.ndarray
    stds: tuple  # population std per cluster, None when empty
    labels: np.ndarray
    n_iter: int

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)


def kmeans_1d(values, initial_centers, tol: float = KMEANS_TOL,
              max_iter: int = KMEANS_MAX_ITER) -> ClusterSet:
    """Lloyd's algorithm on a line.

    Empty clusters keep their previous centre.  Ties in distance go to the
    lower centre.
    """
    values = np.asarray(values, dtype=float)
    centers = np.sort(np.asarray(initial_centers, dtype=float))
    if centers.size == 0:
        raise ValueError("kmeans_1d needs at least one initial centre")

    def assign(c):
        if values.size == 0:
            return np.zeros(0, dtype=int)
        return np.argmin(np.abs(values[:, None] - c[None, :]), axis=1)

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        labels = assign(centers)
        new = centers.copy()
        for k in range(len(centers)):
            mine = values[labels == k]
            if mine.size:
                new[k] = mine.mean()
        moved = np.max(np.abs(new - centers))
        centers = new
        if moved < tol:
            break
    labels = assign(centers)
    order = np.argsort(centers, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    centers = centers[order]
    labels = rank[labels] if labels.size else labels
    stds = tuple(float(values[labels == k].std()) if np.any(labels == k) else None
                 for k in range(len(centers)))
    return ClusterSet(centers, stds, labels, n_iter)


class Dispersion(NamedTuple):
    drift_mean: float
    drift_min: float
    drift_max: float
    std_change_mean: float
    std_change_min: float
    std_change_max: float


def _cluster_stats(values, labels, k):
    mine = values[labels == k]
    return mine.mean(), mine.std()


def rhythm_dispersion(targets: NoteList, outputs: NoteList,
                      tol: float = KMEANS_TOL, max_iter: int = KMEANS_MAX_ITER,
                      binning="coarse") -> Optional[Dispersion]:
    """How far output IOI clusters drift from the target's, and how their
    spread changes (signed, in seconds).

    Clusters are seeded from the peaks of the target's coarse IOI histogram,
    fitted on the target, then refitted on the output starting from the
    target centres.  Clusters left empty on either side are skipped.
    Returns None when there is nothing to compare.
    """
    tgt = compute_ioi(targets)
    out = compute_ioi(outputs)
    tgt = tgt[np.round(tgt, 9) < MAX_IOI]
    out = out[np.round(out, 9) < MAX_IOI]
    if tgt.size == 0 or out.size == 0:
        return None
    seeds = histogram_peaks(ioi_histogram(tgt, binning))
    if seeds.size == 0:
        return None
    fit_t = kmeans_1d(tgt, seeds, tol, max_iter)
    fit_o = kmeans_1d(out, fit_t.centers, tol, max_iter)

    drifts, changes = [], []
    for k in range(len(fit_t.centers)):
        if fit_t.stds[k] is None or fit_o.stds[k] is None:
            continue
        mu_t, sd_t = _cluster_stats(tgt, fit_t.labels, k)
        mu_o, sd_o = _cluster_stats(out, fit_o.labels, k)
        drifts.append(abs(mu_o - mu_t))
        changes.append(sd_o - sd_t)
    if not drifts:
        return None
    d, c = np.array(drifts), np.array(changes)
    return Dispersion(float(d.mean()), float(d.min()), float(d.max()),
                      float(c.mean()), float(c.min()), float(c.max()))


# ---------------------------------------------------------------------------
# Perturbations


@dataclass(frozen=True)
class PerturbationSpec:
    """How to degrade the rhythm of a note list.

    ``quant-constant`` snaps to an evenly spaced 16th-note grid, taken from
    ``tempo`` (BPM) if given, else from the average spacing of
    ``beat_grid``.  ``quant`` snaps to ``beat_grid`` itself.  ``noisy`` adds
    uniform onset noise in ``[-noise, noise]`` seconds.
    """

    kind: str
    noise: float = 0.0
    beat_grid: Optional[tuple] = None
    tempo: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (QUANT_CONSTANT, QUANT, NOISY):
            raise ValueError(f"unknown perturbation {self.kind!r}")
        if self.kind == NOISY and self.noise < 0:
            raise ValueError("noise half-width must be non-negative")
        if self.kind == QUANT and not self.beat_grid:
            raise ValueError("quant needs a beat grid")
        if self.kind == QUANT_CONSTANT and not self.beat_grid and not self.tempo:
            raise ValueError("quant-constant needs a tempo or a beat grid")
        if self.beat_grid is not None:
            grid = np.asarray(self.beat_grid, dtype=float)
            if grid.size < 2 or np.any(np.diff(grid) <= 0):
                raise ValueError("beat grid must hold at least two increasing times")


def read_beat_grid(path) -> tuple:
    """One 16th-note time per line, strictly increasing; ``#`` comments."""
    times = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                t = float(line)
            except ValueError:
                raise ValueError(f"{path}:{number}: not a time: {line!r}") from None
            if times and t <= times[-1]:
                raise ValueError(f"{path}:{number}: grid times must increase")
            times.append(t)
    return tuple(times)


def constant_grid(period: float, origin: float, until: float) -> np.ndarray:
    n = int(np.ceil((until - origin) / period)) + 2
    start = -int(np.ceil(origin / period)) if origin > 0 else 0
    return origin + np.arange(start, n) * period


def _extend_grid(grid: np.ndarray, until: float) -> np.ndarray:
    """Continue a grid past its ends with its edge spacing."""
    head = grid[1] - grid[0]
    tail = grid[-1] - grid[-2]
    n_before = int(np.ceil(grid[0] / head)) if grid[0] > 0 else 0
    before = grid[0] - np.arange(n_before, 0, -1) * head
    n_after = max(int(np.ceil((until - grid[-1]) / tail)) + 1, 0)
    after = grid[-1] + np.arange(1, n_after + 1) * tail
    return np.concatenate((before, grid, after))


def snap(times, grid: np.ndarray) -> np.ndarray:
    """Nearest grid point for each time; halfway goes to the earlier one."""
    times = np.asarray(times, dtype=float)
    k = np.clip(np.searchsorted(grid, times), 1, len(grid) - 1)
    left, right = grid[k - 1], grid[k]
    return np.where(times - left <= right - times, left, right)


def perturb(notes: NoteList, spec: PerturbationSpec, rng=None) -> NoteList:
    """Return a rhythmically degraded copy of ``notes`` with the output role.

    Noise shifts whole notes (durations kept); onsets are clipped at 0.
    Quantisation snaps onsets and offsets to the grid, keeping at least one
    grid step per note.
    """
    if len(notes) == 0:
        return NoteList((), notes.pedal, OUTPUT)
    if spec.kind == NOISY:
        rng = np.random.default_rng(spec.seed) if rng is None else rng
        shift = rng.uniform(-spec.noise, spec.noise, size=len(notes)) if spec.noise else \
            np.zeros(len(notes))
        onsets = np.maximum(notes.onsets + shift, 0.0)
        offsets = onsets + (notes.offsets - notes.onsets)
    else:
        until = notes.duration
        if spec.kind == QUANT_CONSTANT:
            if spec.tempo:
                grid = constant_grid(60.0 / spec.tempo / 4, 0.0, until)
            else:
                beat = np.asarray(spec.beat_grid, dtype=float)
                period = (beat[-1] - beat[0]) / (len(beat) - 1)
                grid = constant_grid(period, beat[0], until)
        else:
            grid = _extend_grid(np.asarray(spec.beat_grid, dtype=float), until)
        grid = grid[grid >= 0]
        onsets = snap(notes.onsets, grid)
        offsets = snap(notes.offsets, grid)
        short = offsets <= onsets
        if short.any():
            k = np.searchsorted(grid, onsets[short], side="right")
            k = np.minimum(k, len(grid) - 1)
            offsets[short] = np.where(grid[k] > onsets[short], grid[k],
                                      onsets[short] + (grid[1] - grid[0]))
    perturbed = tuple(Note(float(s), float(e), n.pitch, n.velocity)
                      for s, e, n in zip(onsets, offsets, notes.notes))
    return NoteList(perturbed, notes.pedal, OUTPUT)
