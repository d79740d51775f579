"""Data sourcing, metrics, timing and report emission.

Sample sets are tagged with their provenance so emitted tables are
self-describing and regenerable.  Normal sampling is Box-Muller over a
splitmix64 stream (bit-identical across platforms and numpy versions);
see ``_rng``.  Reports serialize bit-stably: sorted keys, 6-decimal
floats, LF line endings.
"""

import csv
import io
import json
import platform
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from . import poly as polymod
from .errors import ParameterError, ParseError
from .poly import relu

CSV_HEADER = ["method", "dataset", "mse", "accuracy", "levels", "wall_time_s", "ct_bytes", "seed"]


@dataclass(frozen=True)
class SampleSet:
    values: np.ndarray
    provenance: dict

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.isfinite(v).all():
            raise ParameterError("sample values must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def tag(self):
        p = self.provenance
        kind = p.get("kind")
        if kind == "normal":
            return f"normal({p['mean']},{p['sd']})n={p['n']}s={p['seed']}"
        if kind == "file":
            return f"file:{p['path']}"
        if kind == "grid":
            return f"grid({p['lo']},{p['hi']})n={p['n']}"
        return "unknown"


@dataclass(frozen=True)
class LabeledSet:
    points: np.ndarray
    labels: np.ndarray
    split: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        lbl = np.asarray(self.labels, dtype=int)
        if len(pts) != len(lbl):
            raise ParameterError("points and labels must have equal length")
        if self.split not in ("train", "test"):
            raise ParameterError("split must be 'train' or 'test'")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lbl)

    def __len__(self):
        return len(self.labels)


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    def add_row(self, **kwargs):
        row = {k: kwargs.get(k) for k in CSV_HEADER}
        for metric in ("mse", "accuracy", "wall_time_s"):
            if row[metric] is not None and row[metric] < 0:
                raise ParameterError(f"{metric} must be nonnegative")
        self.rows.append(row)


def environment_info(params_digest=None, frozen=False):
    return {
        "timestamp": "1970-01-01T00:00:00Z"
        if frozen
        else time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "platform": "frozen" if frozen else platform.platform(),
        "params_digest": params_digest or "",
    }


def sample_normal(n, mean, sd, seed):
    """n deterministic N(mean, sd) draws (splitmix64 + Box-Muller)."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if sd <= 0:
        raise ParameterError("sd must be positive")
    values = _rng.normal(seed, n, mean, sd)
    return SampleSet(values, {"kind": "normal", "mean": mean, "sd": sd, "seed": seed, "n": n})


def sample_grid(lo, hi, n):
    if n < 1 or not lo < hi:
        raise ParameterError("need n >= 1 and lo < hi")
    return SampleSet(np.linspace(lo, hi, n), {"kind": "grid", "lo": lo, "hi": hi, "n": n})


def load_scalars_csv(path):
    """One finite decimal per line, optional 'value' header."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if lineno == 1 and line.lower() == "value":
                continue
            try:
                x = float(line)
            except ValueError:
                raise ParseError(f"{path}: cannot parse line {lineno}: {line!r}", line=lineno)
            if not np.isfinite(x):
                raise ParseError(f"{path}: non-finite value on line {lineno}", line=lineno)
            values.append(x)
    if not values:
        raise ParameterError(f"{path}: no values found")
    return SampleSet(np.array(values), {"kind": "file", "path": str(path), "count": len(values)})


def bundled_embedding_fixture():
    """Path of the embedding-statistics scalar fixture shipped with the package."""
    from importlib.resources import files

    return files("heact").joinpath("data/embedding_scalars.csv")


def mse(pred, truth):
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape or len(p) == 0:
        raise ParameterError(f"length mismatch or empty: {p.shape} vs {t.shape}")
    return float(np.mean((p - t) ** 2))


def accuracy(pred_labels, truth):
    p = np.asarray(pred_labels)
    t = np.asarray(truth)
    if p.shape != t.shape or len(p) == 0:
        raise ParameterError(f"length mismatch or empty: {p.shape} vs {t.shape}")
    return float(np.mean(p == t))


def make_blobs(n_per_class, num_classes, dim, spread, seed):
    """Balanced Gaussian clusters at deterministic centers, stratified
    80/20 train/test split, deterministic shuffles."""
    if min(n_per_class, num_classes, dim) < 1 or spread <= 0:
        raise ParameterError("all blob parameters must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = np.zeros((num_classes, dim))
    for c in range(num_classes):
        centers[c, c % dim] = 3.0 * (1 + c // dim)
    tr_pts, tr_lbl, te_pts, te_lbl = [], [], [], []
    n_train = int(round(n_per_class * 0.8))
    for c in range(num_classes):
        pts = centers[c] + rng.normal(0.0, spread, (n_per_class, dim))
        tr_pts.append(pts[:n_train])
        te_pts.append(pts[n_train:])
        tr_lbl.append(np.full(n_train, c))
        te_lbl.append(np.full(n_per_class - n_train, c))

    def _bundle(pts, lbl, split):
        pts = np.concatenate(pts)
        lbl = np.concatenate(lbl)
        order = rng.permutation(len(lbl))
        return LabeledSet(pts[order], lbl[order], split)

    return _bundle(tr_pts, tr_lbl, "train"), _bundle(te_pts, te_lbl, "test")


def default_methods(interval=(-1.0, 1.0)):
    """The five comparison methods, all as monomial polynomials."""
    return [
        ("kernel-paper", polymod.make_kernel_paper(interval)),
        ("x-squared", polymod.make_x_squared(interval)),
        ("fastercryptonets", polymod.make_fastercryptonets(interval)),
        ("chebyshev-3", polymod.cheb_to_monomial(polymod.chebyshev_relu(3, interval))),
        ("chebyshev-5", polymod.cheb_to_monomial(polymod.chebyshev_relu(5, interval))),
    ]


def compare_methods(samples, methods):
    """One row per method: MSE against ReLU over the samples, plus wall time."""
    if len(samples) == 0 or not methods:
        raise ParameterError("need non-empty samples and at least one method")
    truth = relu(samples.values)
    report = BenchReport(environment=environment_info())
    for name, p in methods:
        t0 = time.perf_counter()
        pred = polymod.eval_batch(p, samples.values)
        err = mse(pred, truth)
        report.add_row(
            method=name,
            dataset=samples.tag,
            mse=err,
            wall_time_s=time.perf_counter() - t0,
            seed=samples.provenance.get("seed"),
        )
    return report


_measure_lock = threading.Lock()


def measure(op, repetitions=5, payload_bytes=None):
    """Monotonic-clock timing of a no-argument callable.

    Single measurement at a time per process; bytes (when given) report
    serialized-object sizes, never OS resident memory.
    """
    if repetitions < 3:
        raise ParameterError("repetitions must be >= 3")
    if not _measure_lock.acquire(blocking=False):
        raise ParameterError("another measurement is already running in this process")
    try:
        times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            op()
            times.append(time.perf_counter() - t0)
    finally:
        _measure_lock.release()
    times.sort()
    out = {
        "wall_time_s": times[len(times) // 2],
        "min": times[0],
        "max": times[-1],
    }
    if payload_bytes is not None:
        out["bytes"] = payload_bytes
    return out


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return "%.6f" % x
    return str(x)


def report_to_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report.rows:
        writer.writerow([_fmt(row.get(k)) for k in CSV_HEADER])
    return buf.getvalue()


def _round_floats(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def report_to_json(report):
    payload = {
        "environment": report.environment,
        "rows": _round_floats(report.rows),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_from_json(text):
    obj = json.loads(text)
    return BenchReport(rows=obj["rows"], environment=obj["environment"])


def report_from_csv(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ParseError(f"unexpected CSV header: {header}", line=1)
    report = BenchReport()
    for fields in reader:
        row = {}
        for key, val in zip(CSV_HEADER, fields):
            if val == "":
                row[key] = None
            elif key in ("mse", "accuracy", "wall_time_s"):
                row[key] = float(val)
            elif key in ("levels", "ct_bytes", "seed"):
                row[key] = int(val)
            else:
                row[key] = val
        report.rows.append(row)
    return report


def emit_report(report, format, path):
    """Write the report; emission of equal reports is byte-identical."""
    if format == "csv":
        text = report_to_csv(report)
    elif format == "json":
        text = report_to_json(report)
    else:
        raise ParameterError(f"unknown format {format!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ParameterError(f"cannot write report to {path}: {exc}") from exc
    return path
