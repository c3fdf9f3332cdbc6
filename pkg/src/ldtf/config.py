"""Run configuration: one JSON file, flag overrides, three named seeds."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .embedding import ROW_SCHEMES, WAVELET_FAMILIES
from .model import ModelConfig


@dataclass
class PreprocessConfig:
    train_fraction: float = 0.8
    smote_k: int = 5
    split_seed: int = 1
    smote_seed: int = 2
    half_width: int = 120

    def validate(self) -> None:
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.smote_k < 1 or self.half_width < 1:
            raise ValueError("smote_k and half_width must be >= 1")


@dataclass
class LdeConfig:
    wavelet: str = "db4"
    drop_detail_levels: tuple[int, ...] = (1,)
    row_scheme: str = "as_printed"

    def validate(self) -> None:
        if self.wavelet not in WAVELET_FAMILIES:
            raise ValueError(f"wavelet must be one of {WAVELET_FAMILIES}")
        if self.row_scheme not in ROW_SCHEMES:
            raise ValueError(f"row_scheme must be one of {ROW_SCHEMES}")
        if any(not 1 <= lev <= 4 for lev in self.drop_detail_levels):
            raise ValueError("drop_detail_levels must lie in 1..4")


@dataclass
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.001
    batch_size: int = 64
    track_validation: bool = False

    def validate(self) -> None:
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate < 0:
            raise ValueError("epochs/batch_size/learning_rate out of range")


@dataclass
class RunConfig:
    records_dir: str = "."
    annotations_dir: str | None = None   # defaults to records_dir
    output_dir: str = "out"
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    lde: LdeConfig = field(default_factory=LdeConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self, check_paths: bool = True) -> None:
        self.preprocess.validate()
        self.lde.validate()
        self.train.validate()
        if check_paths:
            if not Path(self.records_dir).is_dir():
                raise FileNotFoundError(f"records_dir does not exist: {self.records_dir}")
            if self.annotations_dir and not Path(self.annotations_dir).is_dir():
                raise FileNotFoundError(
                    f"annotations_dir does not exist: {self.annotations_dir}")
            Path(self.output_dir).mkdir(parents=True, exist_ok=True)

    @property
    def annotations_path(self) -> str:
        return self.annotations_dir or self.records_dir

    def seeds(self) -> dict[str, int]:
        return {"split": self.preprocess.split_seed,
                "smote": self.preprocess.smote_seed,
                "model": self.model.seed}

    def to_dict(self) -> dict:
        return {
            "records_dir": self.records_dir,
            "annotations_dir": self.annotations_dir,
            "output_dir": self.output_dir,
            "preprocess": vars(self.preprocess).copy(),
            "lde": {"wavelet": self.lde.wavelet,
                    "drop_detail_levels": list(self.lde.drop_detail_levels),
                    "row_scheme": self.lde.row_scheme},
            "model": {f.name: getattr(self.model, f.name) for f in fields(ModelConfig)},
            "train": vars(self.train).copy(),
        }


def _build_section(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {where} config keys: {sorted(unknown)}")
    return cls(**data)


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus flag overrides.

    Override keys use dotted section paths ("model.num_layers"); flags win
    over the file, the file wins over defaults.
    """
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise ValueError("config file must contain a JSON object")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, leaf = key.partition(".")
        if leaf:
            data.setdefault(section, {})[leaf] = value
        else:
            data[section] = value

    lde_data = dict(data.get("lde", {}))
    if "drop_detail_levels" in lde_data:
        lde_data["drop_detail_levels"] = tuple(lde_data["drop_detail_levels"])
    config = RunConfig(
        records_dir=data.get("records_dir", "."),
        annotations_dir=data.get("annotations_dir"),
        output_dir=data.get("output_dir", "out"),
        preprocess=_build_section(PreprocessConfig, data.get("preprocess", {}), "preprocess"),
        lde=_build_section(LdeConfig, lde_data, "lde"),
        model=_build_section(ModelConfig, data.get("model", {}), "model"),
        train=_build_section(TrainConfig, data.get("train", {}), "train"),
    )
    top_known = {"records_dir", "annotations_dir", "output_dir",
                 "preprocess", "lde", "model", "train"}
    unknown = set(data) - top_known
    if unknown:
        raise ValueError(f"unknown top-level config keys: {sorted(unknown)}")
    return config
