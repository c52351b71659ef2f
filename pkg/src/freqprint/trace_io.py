"""On-disk corpus layout and the log formats a monitoring script would emit.

DVFS logs are headerless ASCII CSV, one ``start_us,end_us,freq_khz`` record
per line. EM traces are a little-endian float32 payload (``.bin``) next to a
text sidecar header (``.hdr``). A JSON manifest at the corpus root lists
every entry plus the frequency tables the corpus was captured against.

Parsing is strict: any malformed line aborts the whole trace. Corrupt
side-channel data silently degrades classifiers, so fail loudly.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyTraceError,
    HeaderMismatchError,
    IoError,
    ParseError,
    UnknownFrequencyError,
)
from .model import (
    ClusterSamples,
    DvfsTrace,
    EmTrace,
    FrequencyTable,
    freqs_to_indexes,
    validate_trace_frequencies,
)
from .util import atomic_write_bytes, atomic_write_text, pmap

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


def write_dvfs_log(samples: ClusterSamples, path) -> None:
    """One CSV record per sample, bit-exact format: start,end,freq + LF."""
    if len(samples) == 0:  # unreachable via ClusterSamples, kept for raw use
        raise EmptyTraceError("refusing to write an empty log")
    lines = [
        f"{s},{e},{f}\n"
        for s, e, f in zip(samples.start_us, samples.end_us, samples.freq_khz)
    ]
    atomic_write_text(path, "".join(lines))


def read_dvfs_log(path, cluster_id: int, table: FrequencyTable) -> ClusterSamples:
    """Parse one cluster's log, validating against the frequency table."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    starts, ends, freqs = [], [], []
    for line_no, line in enumerate(text.splitlines(), start=1):
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(path, line_no, f"expected 3 fields, got {len(parts)}")
        try:
            s, e, f = (int(p) for p in parts)
        except ValueError:
            raise ParseError(path, line_no, f"non-integer field in {line!r}") from None
        starts.append(s)
        ends.append(e)
        freqs.append(f)
    if not starts:
        raise EmptyTraceError(f"{path} contains no samples")
    freq_arr = np.array(freqs, dtype=np.int64)
    try:
        freqs_to_indexes(table, freq_arr)
    except UnknownFrequencyError as exc:
        raise UnknownFrequencyError(f"{path}: {exc} (cluster {cluster_id})") from None
    return ClusterSamples(np.array(starts), np.array(ends), freq_arr)


def _format_float(x: float) -> str:
    return repr(float(x))


def write_em_trace(trace: EmTrace, base_path) -> None:
    """Write ``<base>.hdr`` (text sidecar) and ``<base>.bin`` (float32 LE)."""
    base = Path(base_path)
    header = (
        f"duration_s={_format_float(trace.duration_s)}\n"
        f"label={trace.app_label or ''}\n"
        f"n_samples={len(trace)}\n"
        f"sample_rate_hz={_format_float(trace.sample_rate_hz)}\n"
    )
    atomic_write_text(base.with_suffix(base.suffix + ".hdr"), header)
    payload = np.ascontiguousarray(trace.samples, dtype="<f4").tobytes()
    atomic_write_bytes(base.with_suffix(base.suffix + ".bin"), payload)


def read_em_trace(base_path) -> EmTrace:
    """Inverse of write_em_trace; payload must agree with the header."""
    base = Path(base_path)
    hdr_path = base.with_suffix(base.suffix + ".hdr")
    bin_path = base.with_suffix(base.suffix + ".bin")
    fields = {}
    try:
        hdr_text = hdr_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {hdr_path}: {exc}") from exc
    for line_no, line in enumerate(hdr_text.splitlines(), start=1):
        if "=" not in line:
            raise ParseError(hdr_path, line_no, f"expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        fields[key] = value
    try:
        duration_s = float(fields["duration_s"])
        n_samples = int(fields["n_samples"])
        sample_rate_hz = float(fields["sample_rate_hz"])
        label = fields["label"] or None
    except KeyError as exc:
        raise ParseError(hdr_path, 0, f"missing header field {exc}") from None
    except ValueError as exc:
        raise ParseError(hdr_path, 0, str(exc)) from None
    try:
        payload = bin_path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {bin_path}: {exc}") from exc
    samples = np.frombuffer(payload, dtype="<f4")
    if samples.size != n_samples:
        raise HeaderMismatchError(
            f"{bin_path}: payload has {samples.size} samples, header says {n_samples}"
        )
    if abs(n_samples - round(sample_rate_hz * duration_s)) > 1:
        raise HeaderMismatchError(
            f"{hdr_path}: n_samples={n_samples} inconsistent with "
            f"{sample_rate_hz} Hz x {duration_s} s"
        )
    return EmTrace(label, samples, sample_rate_hz, duration_s)


@dataclass(frozen=True)
class ManifestEntry:
    app_label: str
    trace_id: int
    dvfs_paths: tuple[str, ...]  # relative to corpus root, one per cluster
    em_path: str | None  # base path without .hdr/.bin extension


@dataclass(frozen=True)
class CorpusManifest:
    root: Path
    tables: tuple[FrequencyTable, ...]
    duration_us: int
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            key = (entry.app_label, entry.trace_id)
            if key in seen:
                raise ValueError(f"duplicate trace id {key}")
            seen.add(key)

    @property
    def app_labels(self) -> list[str]:
        return sorted({e.app_label for e in self.entries})


def _manifest_to_dict(manifest: CorpusManifest) -> dict:
    return {
        "version": MANIFEST_VERSION,
        "duration_us": manifest.duration_us,
        "tables": [
            {"cluster_id": t.cluster_id, "levels": t.levels.tolist()}
            for t in manifest.tables
        ],
        "entries": [
            {
                "app": e.app_label,
                "trace_id": e.trace_id,
                "dvfs": list(e.dvfs_paths),
                "em": e.em_path,
            }
            for e in manifest.entries
        ],
    }


def save_manifest(manifest: CorpusManifest) -> None:
    text = json.dumps(_manifest_to_dict(manifest), indent=1, sort_keys=True) + "\n"
    atomic_write_text(Path(manifest.root) / MANIFEST_NAME, text)


def load_manifest(root) -> CorpusManifest:
    root = Path(root)
    path = root / MANIFEST_NAME
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    if raw.get("version") != MANIFEST_VERSION:
        raise ParseError(path, 0, f"unsupported manifest version {raw.get('version')}")
    tables = tuple(
        FrequencyTable(t["cluster_id"], np.array(t["levels"], dtype=np.int64))
        for t in raw["tables"]
    )
    entries = tuple(
        ManifestEntry(e["app"], int(e["trace_id"]), tuple(e["dvfs"]), e["em"])
        for e in raw["entries"]
    )
    manifest = CorpusManifest(root, tables, int(raw["duration_us"]), entries)
    for entry in manifest.entries:
        for rel in entry.dvfs_paths:
            if not (root / rel).is_file():
                raise IoError(f"manifest references missing file {root / rel}")
        if entry.em_path is not None:
            for suffix in (".hdr", ".bin"):
                if not (root / (entry.em_path + suffix)).is_file():
                    raise IoError(
                        f"manifest references missing file {root / entry.em_path}{suffix}"
                    )
    return manifest


def _safe_label(label: str) -> str:
    if not label or any(ch in label for ch in "/\\\0") or label in (".", ".."):
        raise ValueError(f"app label {label!r} is not filesystem-safe")
    return label


def save_corpus(root, tables, dvfs_traces, em_traces=None) -> CorpusManifest:
    """Write traces in the per-app directory layout plus a manifest.

    ``em_traces`` when given must align 1:1 with ``dvfs_traces``.
    """
    root = Path(root)
    if em_traces is not None and len(em_traces) != len(dvfs_traces):
        raise ValueError("em_traces must align with dvfs_traces")
    if not dvfs_traces:
        raise EmptyTraceError("nothing to save")
    root.mkdir(parents=True, exist_ok=True)

    counters: dict[str, int] = {}
    entries = []
    duration_us = dvfs_traces[0].duration_us
    for i, trace in enumerate(dvfs_traces):
        if trace.duration_us != duration_us:
            raise ValueError("all traces in a corpus must share one duration")
        label = _safe_label(trace.app_label)
        trace_id = counters.get(label, 0)
        counters[label] = trace_id + 1
        stem = f"trace_{trace_id:03d}"
        dvfs_rel = []
        for c, samples in enumerate(trace.clusters):
            rel = f"{label}/{stem}.cluster{c}.csv"
            write_dvfs_log(samples, root / rel)
            dvfs_rel.append(rel)
        em_rel = None
        if em_traces is not None and em_traces[i] is not None:
            em_rel = f"{label}/{stem}.em"
            write_em_trace(em_traces[i], root / em_rel)
        entries.append(ManifestEntry(label, trace_id, tuple(dvfs_rel), em_rel))
    manifest = CorpusManifest(root, tuple(tables), duration_us, tuple(entries))
    save_manifest(manifest)
    return manifest


def load_corpus(root, with_em: bool = False):
    """Load every manifest entry, or fail hard; never skips silently.

    Returns (manifest, dvfs_traces, em_traces); em_traces entries are None
    unless the entry has an EM file and ``with_em`` is set.
    """
    manifest = load_manifest(root)
    root = Path(manifest.root)

    def load_entry(entry: ManifestEntry):
        clusters = tuple(
            read_dvfs_log(root / rel, c, manifest.tables[c])
            for c, rel in enumerate(entry.dvfs_paths)
        )
        trace = DvfsTrace(entry.app_label, clusters, manifest.duration_us)
        validate_trace_frequencies(trace, manifest.tables)
        em = None
        if with_em and entry.em_path is not None:
            em = read_em_trace(root / entry.em_path)
            if em.app_label != entry.app_label:
                raise HeaderMismatchError(
                    f"{entry.em_path}: header label {em.app_label!r} does not "
                    f"match manifest label {entry.app_label!r}"
                )
        return trace, em

    loaded = pmap(load_entry, manifest.entries)
    dvfs_traces = [t for t, _ in loaded]
    em_traces = [e for _, e in loaded]
    return manifest, dvfs_traces, em_traces
