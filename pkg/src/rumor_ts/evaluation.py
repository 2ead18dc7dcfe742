"""Leave-one-event-out cross-validation over the full pipeline.

Each fold holds out every conversation of one event, trains the preprocessing
models and the ensemble on the remaining events, and scores the held-out
event.  The count matrix is built once over all events (the padded width
depends only on timestamps), but the SVD and scaler are fitted per fold on
training rows only unless ``fit_on_all`` asks for the leaky variant.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .ensemble import MajorityVoteEnsemble
from .errors import ConfigError, DataError, TrainingError
from .ingest import RawDataset
from .metrics import confusion, macro_f1, micro_f1
from .preprocess import MinMaxScaler, TruncatedSVD, class_weights, remove_conflicting_duplicates
from .timeseries import IntervalConfig, TimeSeriesDataset, build_matrix

REPORT_VERSION = 1


@dataclass(frozen=True)
class RunSettings:
    """Everything one evaluation run depends on, embedded into every report."""

    interval_minutes: int = 60
    svd_rank: int = 32
    impl: str = "i1"
    learning_rate: float = 1e-5
    batch_size: int = 32
    epochs: int = 300
    seed: int = 0
    fit_on_all: bool = False
    bootstrap: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.interval_minutes <= 0:
            raise ConfigError("interval must be positive")
        if self.svd_rank < 1:
            raise ConfigError("svd rank must be at least 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning rate must be positive")
        if self.batch_size < 1 or self.epochs < 0 or self.jobs < 1:
            raise ConfigError("batch size, epochs and jobs must be positive")


@dataclass
class FoldResult:
    event: str
    n_train: int = 0
    n_test: int = 0
    micro_p: float = 0.0
    micro_r: float = 0.0
    micro_f1: float = 0.0
    macro_p: float = 0.0
    macro_r: float = 0.0
    macro_f1: float = 0.0
    confusion: dict = field(default_factory=dict)
    effective_rank: int = 0
    fold_seed: int = 0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class EvalReport:
    settings: dict
    folds: list[FoldResult]
    mean_micro_f1: float
    mean_macro_f1: float
    means: dict
    excluded: list[str]

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": REPORT_VERSION,
                "settings": self.settings,
                "folds": [asdict(f) for f in self.folds],
                "means": self.means,
                "excluded_folds": self.excluded,
            },
            indent=2,
            sort_keys=True,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["event", "microP", "microR", "microF1",
                         "macroP", "macroR", "macroF1"])
        for f in self.folds:
            if f.failed:
                writer.writerow([f.event, "", "", "", "", "", ""])
            else:
                writer.writerow([f.event] + [repr(v) for v in (
                    f.micro_p, f.micro_r, f.micro_f1,
                    f.macro_p, f.macro_r, f.macro_f1)])
        writer.writerow(["mean"] + [repr(self.means[k]) for k in (
            "micro_p", "micro_r", "micro_f1", "macro_p", "macro_r", "macro_f1")])
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path = out_dir / "report.json"
        csv_path = out_dir / "report.csv"
        json_path.write_text(self.to_json(), encoding="utf-8")
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        return json_path, csv_path


def fit_preprocessors(fit_matrix: np.ndarray, rank: int,
                      ) -> tuple[TruncatedSVD, MinMaxScaler]:
    """Fit the reduction and scaling models; sees only the rows it is given."""
    svd = TruncatedSVD(rank=rank).fit(fit_matrix)
    scaler = MinMaxScaler().fit(svd.transform(fit_matrix))
    return svd, scaler


def effective_rank(requested: int, n_fit_rows: int, width: int) -> int:
    """Clamp the requested rank to what the fitted matrix admits."""
    return min(requested, n_fit_rows - 1, width - 1)


def run_fold(ds: TimeSeriesDataset, held_out_event: str,
             settings: RunSettings, fold_seed: int) -> FoldResult:
    """Train on every other event, score the held-out one.

    Failures that are properties of the split (a missing class, a matrix too
    small to reduce) are reported on the result, not raised.
    """
    result = FoldResult(event=held_out_event, fold_seed=fold_seed)
    is_test = np.array([e == held_out_event for e in ds.events])
    train = ds.select(~is_test)
    test = ds.select(is_test)
    result.n_train = train.n_samples
    result.n_test = test.n_samples

    if len(np.unique(train.labels)) < 2:
        result.error = "training split lacks a class"
        return result

    fit_matrix = ds.matrix if settings.fit_on_all else train.matrix
    rank = effective_rank(settings.svd_rank, fit_matrix.shape[0], ds.seq_len)
    if rank < 1:
        result.error = f"matrix too small for rank-{settings.svd_rank} reduction"
        return result
    result.effective_rank = rank

    svd, scaler = fit_preprocessors(fit_matrix, rank)
    train_red = train.replace_matrix(scaler.transform(svd.transform(train.matrix)))
    test_matrix = scaler.transform(svd.transform(test.matrix))

    train_red = remove_conflicting_duplicates(train_red)
    if len(np.unique(train_red.labels)) < 2:
        result.error = "training split lacks a class after duplicate removal"
        return result
    weights = class_weights(train_red.labels)

    ensemble = MajorityVoteEnsemble(
        impl=settings.impl, learning_rate=settings.learning_rate,
        batch_size=settings.batch_size, epochs=settings.epochs,
        seed=fold_seed, class_weight=weights, bootstrap=settings.bootstrap)
    try:
        ensemble.fit(train_red.matrix, train_red.labels)
    except TrainingError as exc:
        raise TrainingError(f"fold {held_out_event}: {exc}") from exc
    predictions = ensemble.predict(test_matrix)

    counts = confusion(test.labels, predictions)
    result.micro_p, result.micro_r, result.micro_f1 = micro_f1(counts)
    result.macro_p, result.macro_r, result.macro_f1 = macro_f1(counts)
    result.confusion = counts.to_dict()
    return result


def leave_one_event_out(raw: RawDataset, settings: RunSettings) -> EvalReport:
    """Run one fold per event and aggregate unweighted fold means."""
    events = sorted({c.event for c in raw.conversations})
    if len(events) < 2:
        raise DataError(f"leave-one-event-out needs at least 2 events, got {len(events)}")
    ds = build_matrix(list(raw.conversations),
                      IntervalConfig.from_minutes(settings.interval_minutes))

    tasks = [(event, settings.seed + 1000 * i) for i, event in enumerate(events)]
    if settings.jobs > 1:
        folds = Parallel(n_jobs=settings.jobs)(
            delayed(run_fold)(ds, event, settings, fold_seed)
            for event, fold_seed in tasks)
    else:
        folds = [run_fold(ds, event, settings, fold_seed)
                 for event, fold_seed in tasks]

    return summarize(folds, settings)


def summarize(folds: list[FoldResult], settings: RunSettings) -> EvalReport:
    scored = [f for f in folds if not f.failed]
    if not scored:
        raise DataError("every fold failed; nothing to report")

    def mean(attr: str) -> float:
        return sum(getattr(f, attr) for f in scored) / len(scored)

    means = {k: mean(k) for k in ("micro_p", "micro_r", "micro_f1",
                                  "macro_p", "macro_r", "macro_f1")}
    return EvalReport(
        settings=asdict(settings),
        folds=folds,
        mean_micro_f1=means["micro_f1"],
        mean_macro_f1=means["macro_f1"],
        means=means,
        excluded=[f.event for f in folds if f.failed],
    )
