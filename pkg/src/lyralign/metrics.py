"""Word-onset evaluation metrics, deviation histograms, confidence triage.

All metrics are song-level; dataset aggregates are unweighted means of the
per-song values. End times default to the next word's onset; the final
word falls back to onset + DEFAULT_LAST_WORD_SEC capped at song duration.
"""

from dataclasses import dataclass, field

import numpy as np

from lyralign.errors import EmptyInput, EmptySong, NonpositiveDuration

DEFAULT_LAST_WORD_SEC = 0.5


@dataclass
class WordTiming:
    word_index: int
    t_ref: float
    t_pred: float
    e_ref: float = None
    e_pred: float = None
    confidence: float = 1.0

    @property
    def deviation(self):
        return self.t_pred - self.t_ref


def pair_words(ref_onsets, pred_onsets, confidences=None, duration=None,
               default_last=DEFAULT_LAST_WORD_SEC):
    """Build WordTimings from parallel onset lists, deriving end times."""
    if len(ref_onsets) != len(pred_onsets):
        raise ValueError("reference and prediction word counts differ")
    if confidences is None:
        confidences = [1.0] * len(ref_onsets)
    words = []
    n = len(ref_onsets)
    for i in range(n):
        e_ref = ref_onsets[i + 1] if i + 1 < n else _last_end(ref_onsets[i], duration, default_last)
        e_pred = pred_onsets[i + 1] if i + 1 < n else _last_end(pred_onsets[i], duration, default_last)
        words.append(WordTiming(
            word_index=i, t_ref=ref_onsets[i], t_pred=pred_onsets[i],
            e_ref=e_ref, e_pred=e_pred, confidence=confidences[i],
        ))
    return words


def _last_end(onset, duration, default_last):
    end = onset + default_last
    if duration is not None:
        end = min(end, duration)
    return end


def _require_words(words):
    if not words:
        raise EmptySong("metric requested over zero words")


def mae(words):
    """Mean absolute onset deviation in seconds."""
    _require_words(words)
    return float(np.mean([abs(w.deviation) for w in words]))


def medae(words):
    """Median absolute deviation; even counts average the central pair."""
    _require_words(words)
    return float(np.median([abs(w.deviation) for w in words]))


def perc(words, duration):
    """Fraction of total duration covered by ref/pred interval overlap."""
    _require_words(words)
    if duration <= 0:
        raise NonpositiveDuration(f"duration must be > 0, got {duration}")
    overlap = 0.0
    for w in words:
        overlap += max(min(w.e_ref, w.e_pred) - max(w.t_ref, w.t_pred), 0.0)
    return float(overlap / duration)


def mauch(words, tau):
    """Fraction of words with |deviation| strictly below tau."""
    _require_words(words)
    if tau <= 0:
        raise ValueError("tau must be > 0")
    hits = sum(1 for w in words if abs(w.deviation) < tau)
    return hits / len(words)


def deviation_histogram(words, bins=80, value_range=2.0):
    """Signed deviations binned uniformly over [-range, +range].

    The two end bins also capture overflow, so counts always sum to the
    word count. Returns (counts, edges).
    """
    if not words:
        raise EmptyInput("histogram over zero words")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    width = 2.0 * value_range / bins
    counts = np.zeros(bins, dtype=np.int64)
    for w in words:
        index = int(np.floor((w.deviation + value_range) / width))
        counts[min(max(index, 0), bins - 1)] += 1
    edges = np.linspace(-value_range, value_range, bins + 1)
    return counts, edges


@dataclass
class TriageRow:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    accepted_mae: float = None

    def rates(self):
        total = self.tp + self.fp + self.tn + self.fn
        return {k: getattr(self, k) / total for k in ("tp", "fp", "tn", "fn")}


def f1_from_rates(tp, fp, fn):
    """F1 from confusion entries given as counts or rates."""
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def triage_sweep(words, true_bound, thresholds):
    """Accept/reject sweep: accept when confidence >= threshold.

    A word counts as True when |deviation| < true_bound. Each row reports
    the confusion counts, precision/recall/F1 over True items, and the MAE
    over accepted words (None when nothing is accepted).
    """
    words = list(words)
    if not words:
        raise EmptyInput("triage over zero words")
    if true_bound <= 0:
        raise ValueError("true_bound must be > 0")
    rows = []
    for threshold in thresholds:
        tp = fp = tn = fn = 0
        accepted = []
        for w in words:
            accept = w.confidence >= threshold
            true = abs(w.deviation) < true_bound
            if accept and true:
                tp += 1
            elif accept:
                fp += 1
            elif true:
                fn += 1
            else:
                tn += 1
            if accept:
                accepted.append(w)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = f1_from_rates(tp, fp, fn)
        rows.append(TriageRow(
            threshold=threshold, tp=tp, fp=fp, tn=tn, fn=fn,
            precision=precision, recall=recall, f1=f1,
            accepted_mae=mae(accepted) if accepted else None,
        ))
    return rows


@dataclass
class MetricsReport:
    per_song: dict = field(default_factory=dict)
    aggregate: dict = field(default_factory=dict)
    histogram: dict = field(default_factory=dict)
    triage: list = field(default_factory=list)

    def to_dict(self):
        return {
            "per_song": self.per_song,
            "aggregate": self.aggregate,
            "histogram": self.histogram,
            "triage": [
                {**{k: getattr(row, k) for k in
                    ("threshold", "tp", "fp", "tn", "fn", "precision", "recall", "f1")},
                 "accepted_mae": row.accepted_mae}
                for row in self.triage
            ],
        }


def evaluate_songs(song_words, taus=(0.2, 0.3), durations=None, bins=80,
                   histogram_range=2.0, true_bound=0.2, thresholds=None):
    """Per-song metrics + unweighted aggregate + histogram + triage rows.

    song_words: mapping song_id -> list of WordTiming. durations: mapping
    song_id -> seconds (required for Perc).
    """
    if not song_words:
        raise EmptyInput("no songs to evaluate")
    report = MetricsReport()
    all_words = []
    for song_id, words in sorted(song_words.items()):
        entry = {
            "mae": mae(words),
            "medae": medae(words),
            "n_words": len(words),
            "mauch": {str(tau): mauch(words, tau) for tau in taus},
        }
        if durations and song_id in durations:
            entry["perc"] = perc(words, durations[song_id])
        report.per_song[song_id] = entry
        all_words.extend(words)

    songs = list(report.per_song.values())
    report.aggregate = {
        "mae": float(np.mean([s["mae"] for s in songs])),
        "medae": float(np.mean([s["medae"] for s in songs])),
        "mauch": {str(tau): float(np.mean([s["mauch"][str(tau)] for s in songs])) for tau in taus},
        "n_songs": len(songs),
        "n_words": int(sum(s["n_words"] for s in songs)),
    }
    with_perc = [s["perc"] for s in songs if "perc" in s]
    if with_perc:
        report.aggregate["perc"] = float(np.mean(with_perc))

    counts, edges = deviation_histogram(all_words, bins=bins, value_range=histogram_range)
    report.histogram = {"counts": counts.tolist(), "edges": edges.tolist()}

    if thresholds is None:
        thresholds = [round(t, 4) for t in np.linspace(0.0, 1.0, 101)]
    report.triage = triage_sweep(all_words, true_bound, thresholds)
    return report
