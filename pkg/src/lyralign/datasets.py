"""Manifest ingestion, label persistence, and the correction audit trail.

Everything is flat files: JSON-lines manifest, one labels JSON per song,
JSON-lines audit log. Replaying the audit log over the original machine
labels reproduces the current labels exactly.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from lyralign.errors import DuplicateId, IllegalTransition, ParseError, UnknownSong, UnknownUnit

STATUSES = ("unlabeled", "machine_labeled", "verified", "rejected")
STATUS_FLOW = {
    "unlabeled": {"machine_labeled"},
    "machine_labeled": {"verified", "rejected"},
    "verified": set(),
    "rejected": {"machine_labeled"},
}


@dataclass
class SongRecord:
    id: str
    audio_ref: str = None
    feature_ref: str = None
    lyrics_ref: str = None
    labels_ref: str = None
    language: str = "en"
    duration_sec: float = 0.0
    status: str = "unlabeled"
    extra: dict = field(default_factory=dict)


def load_manifest(path):
    """Parse a JSON-lines manifest into validated SongRecords."""
    records = []
    seen = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from exc
        if "id" not in obj:
            raise ParseError("record missing required field 'id'", line=lineno)
        if not obj.get("audio_path") and not obj.get("feature_cache_path"):
            raise ParseError("record missing 'audio_path' or 'feature_cache_path'", line=lineno)
        if "lyrics_path" not in obj:
            raise ParseError("record missing required field 'lyrics_path'", line=lineno)
        song_id = str(obj["id"])
        if song_id in seen:
            raise DuplicateId(f"duplicate song id {song_id!r} at line {lineno}")
        seen.add(song_id)
        known = {"id", "audio_path", "feature_cache_path", "lyrics_path",
                 "labels_path", "language", "duration_sec", "status"}
        records.append(SongRecord(
            id=song_id,
            audio_ref=obj.get("audio_path"),
            feature_ref=obj.get("feature_cache_path"),
            lyrics_ref=obj["lyrics_path"],
            labels_ref=obj.get("labels_path"),
            language=obj.get("language", "en"),
            duration_sec=float(obj.get("duration_sec", 0.0)),
            status=obj.get("status", "unlabeled"),
            extra={k: v for k, v in obj.items() if k not in known},
        ))
    return records


def save_manifest(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {"id": r.id, "lyrics_path": r.lyrics_ref, "language": r.language}
            if r.audio_ref:
                obj["audio_path"] = r.audio_ref
            if r.feature_ref:
                obj["feature_cache_path"] = r.feature_ref
            if r.labels_ref:
                obj["labels_path"] = r.labels_ref
            if r.duration_sec:
                obj["duration_sec"] = r.duration_sec
            obj.update(r.extra)
            fh.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


def load_labels(path):
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if "sentences" not in obj:
        raise ParseError(f"{path}: labels file missing 'sentences'")
    return obj


def save_labels(path, labels):
    Path(path).write_text(
        json.dumps(labels, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def labels_from_canonical(canonical):
    """Convert a cascade output dict into the labels-file schema."""
    return {
        "sentences": [
            {"start_sec": s["onset_sec"], "text": s["text"]} for s in canonical["sentences"]
        ],
        "words": [
            {"start_sec": w["onset_sec"], "text": w["text"]} for w in canonical["words"]
        ],
    }


def parse_unit_ref(unit_ref):
    """'word:3' or 'sentence:2' -> (kind, index)."""
    try:
        kind, index = unit_ref.split(":")
        index = int(index)
    except ValueError as exc:
        raise UnknownUnit(f"malformed unit ref {unit_ref!r} (want 'word:N' or 'sentence:N')") from exc
    if kind not in ("word", "sentence"):
        raise UnknownUnit(f"unknown unit kind {kind!r}")
    return kind, index


def apply_correction(labels, unit_ref, onset_sec):
    """Return (updated labels, old onset). Raises UnknownUnit when absent."""
    kind, index = parse_unit_ref(unit_ref)
    key = "words" if kind == "word" else "sentences"
    units = labels.get(key) or []
    if not 0 <= index < len(units):
        raise UnknownUnit(f"{unit_ref}: song has {len(units)} {key}")
    updated = json.loads(json.dumps(labels))
    old = updated[key][index]["start_sec"]
    updated[key][index]["start_sec"] = onset_sec
    return updated, old


class Workspace:
    """Flat-file store for songs, labels, alignments, statuses, audit log.

    Layout under `root`: manifest.jsonl, labels/<id>.json (current),
    labels/<id>.machine.json (as first written), alignments/<id>.json,
    matrices/<id>.npz, status.json, corrections.jsonl.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "labels").mkdir(exist_ok=True)
        (self.root / "alignments").mkdir(exist_ok=True)
        (self.root / "matrices").mkdir(exist_ok=True)
        self._request_ids = self._load_request_ids()

    # --- paths ---

    @property
    def manifest_path(self):
        return self.root / "manifest.jsonl"

    def labels_path(self, song_id):
        return self.root / "labels" / f"{song_id}.json"

    def machine_labels_path(self, song_id):
        return self.root / "labels" / f"{song_id}.machine.json"

    def alignment_path(self, song_id):
        return self.root / "alignments" / f"{song_id}.json"

    def matrix_path(self, song_id):
        return self.root / "matrices" / f"{song_id}.npz"

    @property
    def status_path(self):
        return self.root / "status.json"

    @property
    def audit_path(self):
        return self.root / "corrections.jsonl"

    # --- manifest / songs ---

    def manifest(self):
        if not self.manifest_path.exists():
            return []
        return load_manifest(self.manifest_path)

    def song_ids(self):
        ids = {r.id for r in self.manifest()}
        ids.update(p.stem for p in (self.root / "alignments").glob("*.json"))
        return sorted(ids)

    def require_song(self, song_id):
        if song_id not in self.song_ids():
            raise UnknownSong(f"unknown song {song_id!r}")

    # --- statuses ---

    def statuses(self):
        if self.status_path.exists():
            return json.loads(self.status_path.read_text(encoding="utf-8"))
        return {}

    def get_status(self, song_id):
        return self.statuses().get(song_id, "unlabeled")

    def set_status(self, song_id, new_status):
        if new_status not in STATUSES:
            raise IllegalTransition(f"unknown status {new_status!r}")
        current = self.get_status(song_id)
        if new_status != current and new_status not in STATUS_FLOW[current]:
            raise IllegalTransition(f"{current} -> {new_status} is not a legal transition")
        statuses = self.statuses()
        statuses[song_id] = new_status
        self.status_path.write_text(
            json.dumps(statuses, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return new_status

    # --- labels + corrections ---

    def save_machine_labels(self, song_id, labels):
        """First write wins for the machine snapshot; current always updated."""
        if not self.machine_labels_path(song_id).exists():
            save_labels(self.machine_labels_path(song_id), labels)
        save_labels(self.labels_path(song_id), labels)
        if self.get_status(song_id) == "unlabeled":
            self.set_status(song_id, "machine_labeled")

    def get_labels(self, song_id):
        path = self.labels_path(song_id)
        if not path.exists():
            raise UnknownSong(f"no labels stored for {song_id!r}")
        return load_labels(path)

    def _load_request_ids(self):
        ids = set()
        if self.audit_path.exists():
            for line in self.audit_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    rid = json.loads(line).get("request_id")
                    if rid:
                        ids.add(rid)
        return ids

    def record_correction(self, song_id, unit_ref, onset_sec, reviewer, request_id=None):
        """Write-through correction plus one append-only audit entry.

        Identical request ids are deduplicated: the correction is applied
        once and replays return the stored labels unchanged.
        """
        if request_id and request_id in self._request_ids:
            return self.get_labels(song_id)
        labels = self.get_labels(song_id)
        updated, old = apply_correction(labels, unit_ref, onset_sec)
        save_labels(self.labels_path(song_id), updated)
        entry = {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "reviewer": reviewer,
            "song_id": song_id,
            "unit_ref": unit_ref,
            "old": old,
            "new": onset_sec,
        }
        if request_id:
            entry["request_id"] = request_id
            self._request_ids.add(request_id)
        with open(self.audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")
        return updated

    def audit_entries(self, song_id=None):
        if not self.audit_path.exists():
            return []
        entries = [json.loads(line) for line in
                   self.audit_path.read_text(encoding="utf-8").splitlines() if line.strip()]
        if song_id is not None:
            entries = [e for e in entries if e["song_id"] == song_id]
        return entries

    def replay_corrections(self, song_id):
        """Machine labels + audit log -> labels as they should currently be."""
        labels = load_labels(self.machine_labels_path(song_id))
        for entry in self.audit_entries(song_id):
            labels, _ = apply_correction(labels, entry["unit_ref"], entry["new"])
        return labels
