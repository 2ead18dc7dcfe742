"""Six-member ensembles combined by majority vote.

Three fixed line-ups are provided.  ``i1`` mixes architectures (both
bidirectional models, the single-layer GRU/LSTM/RNN and the LSTM-then-GRU
hybrid); ``i2`` is all simple-RNN and GRU variants; ``i3`` all simple-RNN and
LSTM variants.  Members train independently on the same rows (optionally on
bootstrap resamples) and each casts one hard vote per sample.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ConfigError, TrainingError
from .models import BASE_LEARNERS, LearnerSpec, SequenceClassifier

IMPLEMENTATIONS: dict[str, tuple[str, ...]] = {
    "i1": ("BiGRU_1", "BiLSTM_1", "GRU_1", "LSTM_1", "LG_1", "RNN_1"),
    "i2": ("RNN_1", "RNN_2", "RNN_3", "GRU_1", "GRU_2", "GRU_3"),
    "i3": ("RNN_1", "RNN_2", "RNN_3", "LSTM_1", "LSTM_2", "LSTM_3"),
}
ENSEMBLE_SIZE = 6


@dataclass(frozen=True)
class EnsembleSpec:
    impl_id: str
    member_specs: tuple[LearnerSpec, ...]

    def __post_init__(self) -> None:
        if len(self.member_specs) != ENSEMBLE_SIZE:
            raise ConfigError(
                f"an ensemble has exactly {ENSEMBLE_SIZE} members, "
                f"got {len(self.member_specs)}"
            )

    @classmethod
    def from_impl(cls, impl_id: str) -> "EnsembleSpec":
        key = impl_id.lower().replace("-", "")
        if key not in IMPLEMENTATIONS:
            raise ConfigError(
                f"unknown ensemble implementation {impl_id!r}; known: i1, i2, i3")
        return cls(impl_id=key,
                   member_specs=tuple(BASE_LEARNERS[n] for n in IMPLEMENTATIONS[key]))


def majority_vote(votes: Sequence[int]) -> int:
    """1 iff at least floor(n/2) + 1 of the n binary votes are 1, else 0."""
    n = len(votes)
    if n == 0:
        raise ValueError("cannot vote over zero predictions")
    return 1 if sum(votes) >= n // 2 + 1 else 0


class MajorityVoteEnsemble(BaseEstimator, ClassifierMixin):
    """Train all members of one implementation and predict by majority vote.

    Member ``i`` trains with seed ``seed + i`` so that same-architecture
    members in i2/i3 do not collapse onto identical parameters.  With
    ``bootstrap=True`` each member draws its own with-replacement resample of
    the training rows; by default all members see the identical training set.
    """

    def __init__(self, impl: str = "i1", learning_rate: float = 1e-5,
                 batch_size: int = 32, epochs: int = 300, seed: int = 0,
                 class_weight: dict[int, float] | None = None,
                 bootstrap: bool = False):
        self.impl = impl
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.class_weight = class_weight
        self.bootstrap = bootstrap

    def fit(self, X, y) -> "MajorityVoteEnsemble":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        spec = (EnsembleSpec.from_impl(self.impl) if isinstance(self.impl, str)
                else self.impl)
        self.spec_ = spec
        self.members_ = []
        self.member_seeds_ = []
        for idx, member_spec in enumerate(spec.member_specs):
            member_seed = self.seed + idx
            rows_X, rows_y = X, y
            if self.bootstrap:
                resample_rng = np.random.default_rng([self.seed, idx, 1])
                picks = resample_rng.integers(0, len(y), size=len(y))
                rows_X, rows_y = X[picks], y[picks]
            clf = SequenceClassifier(
                spec=member_spec, learning_rate=self.learning_rate,
                batch_size=self.batch_size, epochs=self.epochs,
                seed=member_seed, class_weight=self.class_weight)
            try:
                clf.fit(rows_X, rows_y)
            except TrainingError as exc:
                raise TrainingError(f"member {member_spec.name}: {exc}") from exc
            self.members_.append(clf)
            self.member_seeds_.append(member_seed)
        self.classes_ = np.array([0, 1])
        return self

    def member_predictions(self, X) -> np.ndarray:
        """Hard votes of every member, shaped (n_members, n_samples)."""
        check_is_fitted(self, "members_")
        return np.stack([m.predict(X) for m in self.members_])

    def predict(self, X) -> np.ndarray:
        votes = self.member_predictions(X)
        return np.apply_along_axis(majority_vote, 0, votes).astype(np.int64)

    def save_bundle(self, directory: str | Path,
                    manifest_extra: dict | None = None) -> None:
        """One checkpoint per member plus a bundle manifest JSON."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        names = []
        for idx, member in enumerate(self.members_):
            stem = f"member_{idx}_{member.spec_.name}"
            member.save(directory / f"{stem}.npz")
            names.append(stem)
        manifest = {
            "impl_id": self.spec_.impl_id,
            "members": names,
            "member_seeds": self.member_seeds_,
            "seed": self.seed,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "bootstrap": self.bootstrap,
            "class_weight": {str(k): v for k, v in (self.class_weight or {}).items()},
        }
        if manifest_extra:
            manifest.update(manifest_extra)
        (directory / "ensemble.json").write_text(
            json.dumps(manifest, indent=2), encoding="utf-8")

    @classmethod
    def load_bundle(cls, directory: str | Path) -> "MajorityVoteEnsemble":
        directory = Path(directory)
        manifest = json.loads((directory / "ensemble.json").read_text(encoding="utf-8"))
        ens = cls(impl=manifest["impl_id"],
                  learning_rate=manifest["learning_rate"],
                  batch_size=manifest["batch_size"], epochs=manifest["epochs"],
                  seed=manifest["seed"], bootstrap=manifest["bootstrap"],
                  class_weight={int(k): v for k, v in manifest["class_weight"].items()})
        ens.spec_ = EnsembleSpec.from_impl(manifest["impl_id"])
        ens.members_ = [SequenceClassifier.load(directory / f"{stem}.npz")
                        for stem in manifest["members"]]
        ens.member_seeds_ = manifest["member_seeds"]
        ens.classes_ = np.array([0, 1])
        return ens
