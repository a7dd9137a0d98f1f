"""Simulation configuration documents, presets and their validation."""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..core.errors import AudioIOError, ConfigurationError, SchemaError
from ..dsp.chain import METHODS, DecorrelatorConfig
from ..dsp.decorrelators import AllpassBaselineConfig, ScalConfig, SmoothedAbsConfig
from ..dsp.psynoise import NoiseInjectorConfig
from ..dsp.windows import WindowSpec
from ..io.reports import atomic_path
from ..io.wavfile import read_wav
from ..sim.aecsim import EchoSimConfig
from ..sim.mdf import MdfConfig
from ..sim.material import MATERIAL_KINDS, MaterialSpec
from ..sim.rooms import ImpulseResponse

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WindowModel(_Model):
    length: int = 1024
    kind: Literal["vorbis"] = "vorbis"

    def to_config(self) -> WindowSpec:
        return WindowSpec(length=self.length, kind=self.kind)

    @model_validator(mode="after")
    def _check(self):
        self.to_config()
        return self


class ScalModel(_Model):
    beta: float = 0.43
    n_min: int = 5
    n_max: int = 10
    r_max: float = 0.6
    epsilon: float = 0.01
    mode: Literal["flat", "literal"] = "flat"
    alpha_init: float = 0.0


class AllpassModel(_Model):
    alpha_min: float = -0.985
    variation: Literal["per_sample_random_walk", "constant"] = "per_sample_random_walk"
    step: float = 0.01


class SmoothedAbsModel(_Model):
    alpha_abs: float = 0.3
    smoothing_delta: float = 1e-3


class NoiseModel(_Model):
    lowband_emphasis_db: float = 6.0
    highband_rolloff_db: float = -12.0
    threshold_offset_db: float = -18.0


class DecorrelatorModel(_Model):
    method: Literal[METHODS] = "scal"
    noise: bool = False
    window: WindowModel = Field(default_factory=WindowModel)
    scal: ScalModel = Field(default_factory=ScalModel)
    comb_order: int = 7
    allpass: AllpassModel = Field(default_factory=AllpassModel)
    smoothed_abs: SmoothedAbsModel = Field(default_factory=SmoothedAbsModel)
    noise_params: NoiseModel = Field(default_factory=NoiseModel)

    def to_config(self, seed: int = 0) -> DecorrelatorConfig:
        window = self.window.to_config()
        return DecorrelatorConfig(
            method=self.method,
            noise=self.noise,
            seed=seed,
            scal=ScalConfig(window=window, seed=seed, **self.scal.model_dump()),
            comb_order=self.comb_order,
            allpass=AllpassBaselineConfig(seed=seed, **self.allpass.model_dump()),
            smoothed_abs=SmoothedAbsConfig(**self.smoothed_abs.model_dump()),
            noise_cfg=NoiseInjectorConfig(window=window, seed=seed, **self.noise_params.model_dump()),
        )

    @model_validator(mode="after")
    def _check(self):
        self.to_config().validate()
        return self


class MdfModel(_Model):
    filter_length_taps: int = 1024
    block_size: int = 256
    learning_rate: float = 0.5
    regularization: float = 1e-2
    power_smoothing: float = 0.8

    def to_config(self) -> MdfConfig:
        return MdfConfig(**self.model_dump())

    @model_validator(mode="after")
    def _check(self):
        self.to_config().validate()
        return self


class RoomModel(_Model):
    n_mics: int = Field(2, ge=1)
    remote_ir_length: int = Field(256, ge=2)
    remote_rt60_ms: float = Field(30.0, gt=0)
    near_ir_length: int = Field(1024, ge=2)
    near_rt60_ms: float = Field(60.0, gt=0)
    remote_snr_db: Optional[float] = None
    remote_ir_paths: Optional[List[str]] = None
    near_ir_paths: Optional[List[List[str]]] = None


class VariantModel(_Model):
    name: str
    mode: Literal["stereo", "mono"] = "stereo"
    decorrelator: Optional[DecorrelatorModel] = None

    @model_validator(mode="after")
    def _check(self):
        if self.mode == "mono" and self.decorrelator is not None:
            raise ValueError("mono variants take no decorrelator")
        return self


class MaterialModel(_Model):
    name: str
    kind: Literal[MATERIAL_KINDS + ("wav",)] = "speech_like"
    duration_s: float = Field(10.0, gt=0)
    seed: int = 0
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "wav" and not self.path:
            raise ValueError("wav material needs a path")
        return self

    def to_spec(self) -> MaterialSpec:
        return MaterialSpec(**self.model_dump())


class SimulationDocument(_Model):
    """Top-level simulation or comparison document, ``schema_version`` 1."""

    schema_version: Literal[1]
    name: str = "comparison"
    description: str = ""
    sample_rate: int = Field(16000, ge=8000, le=48000)
    seed: int = 0
    snr_db: float = 40.0
    duration_s: float = Field(10.0, gt=0)
    misalignment_interval_s: float = Field(0.5, gt=0)
    divergence_margin_db: float = Field(20.0, gt=0)
    coherence_fft_size: int = Field(4096, ge=2)
    room: RoomModel = Field(default_factory=RoomModel)
    aec: MdfModel = Field(default_factory=MdfModel)
    variants: List[VariantModel] = Field(min_length=1)
    material: List[MaterialModel] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self):
        for field_name, items in (("variants", self.variants), ("material", self.material)):
            names = [item.name for item in items]
            duplicates = sorted({n for n in names if names.count(n) > 1})
            if duplicates:
                raise ValueError(f"{field_name} names must be unique, repeated: {duplicates}")
        return self


def _format_errors(exc: ValidationError) -> List[str]:
    messages = []
    for error in exc.errors():
        path = ".".join(str(part) for part in error["loc"]) or "<root>"
        messages.append(f"{path}: {error['msg']}")
    return messages


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _variant(name: str, method: Optional[str] = None, noise: bool = False,
             window: int = 512, mode: str = "stereo") -> Dict[str, Any]:
    variant: Dict[str, Any] = {"name": name, "mode": mode}
    if method is not None:
        variant["decorrelator"] = {"method": method, "noise": noise, "window": {"length": window}}
    return variant


def _four_algorithms(window: int) -> List[Dict[str, Any]]:
    return [
        _variant("scal", "scal", noise=True, window=window),
        _variant("comb_allpass", "comb_allpass", noise=True, window=window),
        _variant("smoothed_abs", "smoothed_abs", window=window),
        _variant("first_order_allpass", "first_order_allpass", window=window),
    ]


def _load_templates() -> Dict[str, Dict[str, Any]]:
    desk_room = {"remote_ir_length": 256, "remote_rt60_ms": 30.0, "near_ir_length": 1024, "near_rt60_ms": 60.0}
    return {
        "mono_sanity": {
            "schema_version": SCHEMA_VERSION,
            "name": "mono_sanity",
            "description": "Single loudspeaker, white noise, 512-tap echo path and filter",
            "sample_rate": 16000,
            "room": {"n_mics": 1, "near_ir_length": 512, "near_rt60_ms": 30.0},
            "aec": {"filter_length_taps": 512, "block_size": 128},
            "variants": [_variant("mono", mode="mono")],
            "material": [{"name": "white", "kind": "white", "duration_s": 10.0}],
        },
        "stereo_desk": {
            "schema_version": SCHEMA_VERSION,
            "name": "stereo_desk",
            "description": "Stereo echo cancellation with and without SCAL at 16 kHz",
            "sample_rate": 16000,
            "room": desk_room,
            "aec": {"filter_length_taps": 1024, "block_size": 256},
            "variants": [_variant("none"), _variant("scal", "scal", window=512)],
            "material": [{"name": "speech", "kind": "speech_like", "duration_s": 10.0}],
        },
        "compare_desk": {
            "schema_version": SCHEMA_VERSION,
            "name": "compare_desk",
            "description": "Four decorrelators at desk scale, 16 kHz and 1024 taps",
            "sample_rate": 16000,
            "room": desk_room,
            "aec": {"filter_length_taps": 1024, "block_size": 256},
            "variants": _four_algorithms(512),
            "material": [
                {"name": "speech", "kind": "speech_like", "duration_s": 10.0, "seed": 1},
                {"name": "pink", "kind": "pink", "duration_s": 10.0, "seed": 2},
            ],
        },
        "compare_full": {
            "schema_version": SCHEMA_VERSION,
            "name": "compare_full",
            "description": "Four decorrelators plus reference at 44.1 kHz with 8192-tap filters",
            "sample_rate": 44100,
            "room": {"remote_ir_length": 2048, "remote_rt60_ms": 80.0, "near_ir_length": 8192, "near_rt60_ms": 220.0},
            "aec": {"filter_length_taps": 8192, "block_size": 1024},
            "coherence_fft_size": 8192,
            "variants": [_variant("none")] + _four_algorithms(1024),
            "material": [{"name": "speech", "kind": "speech_like", "duration_s": 10.0, "seed": 1}],
        },
        "large_room": {
            "schema_version": SCHEMA_VERSION,
            "name": "large_room",
            "description": "Heavyweight run with 16384-tap remote responses and 8192-tap filters",
            "sample_rate": 44100,
            "room": {"remote_ir_length": 16384, "remote_rt60_ms": 220.0, "near_ir_length": 16384, "near_rt60_ms": 220.0},
            "aec": {"filter_length_taps": 8192, "block_size": 1024},
            "coherence_fft_size": 8192,
            "duration_s": 20.0,
            "variants": [_variant("none")] + _four_algorithms(1024),
            "material": [{"name": "speech", "kind": "speech_like", "duration_s": 20.0, "seed": 1}],
        },
    }


def _load_ir(path: str, label: str) -> ImpulseResponse:
    wav = read_wav(path)
    if wav.channels != 1:
        raise AudioIOError(f"Impulse response {path} must be mono, got {wav.channels} channels")
    return ImpulseResponse(wav.samples[:, 0], wav.sample_rate, label)


class ConfigManager:
    """Loads, validates and saves simulation documents; owns the presets."""

    def __init__(self):
        self.templates = _load_templates()

    def list_templates(self) -> List[str]:
        return sorted(self.templates)

    def get_template(self, name: str) -> Dict[str, Any]:
        if name not in self.templates:
            raise ConfigurationError(f"Unknown preset '{name}', expected one of {self.list_templates()}")
        return copy.deepcopy(self.templates[name])

    def create_config_from_template(self, name: str, **overrides) -> SimulationDocument:
        """Preset with top-level overrides; nested mappings are merged."""
        return self.parse_simulation_config(_deep_merge(self.get_template(name), overrides))

    def validate_simulation_config(self, data: Dict[str, Any]) -> List[str]:
        """Every schema violation as ``"<dotted.path>: <message>"``; empty when valid."""
        try:
            SimulationDocument.model_validate(data)
        except ValidationError as exc:
            return _format_errors(exc)
        return []

    def parse_simulation_config(self, data: Dict[str, Any]) -> SimulationDocument:
        if not isinstance(data, dict):
            raise SchemaError([f"<root>: expected a mapping, got {type(data).__name__}"])
        try:
            return SimulationDocument.model_validate(data)
        except ValidationError as exc:
            raise SchemaError(_format_errors(exc)) from exc

    def load_simulation_config(self, config_path: Union[str, Path]) -> SimulationDocument:
        config_path = Path(config_path)
        if not config_path.exists():
            raise AudioIOError(f"Configuration file not found: {config_path}")
        suffix = config_path.suffix.lower()
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                if suffix == ".json":
                    data = json.load(f)
                elif suffix in (".yml", ".yaml"):
                    data = yaml.safe_load(f)
                else:
                    raise ConfigurationError(f"Unsupported configuration file format: {config_path.suffix}")
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise SchemaError([f"<root>: cannot parse {config_path.name}: {exc}"]) from exc
        except OSError as exc:
            raise AudioIOError(f"Cannot read {config_path}: {exc}") from exc
        logger.info(f"Loaded configuration '{config_path}'")
        return self.parse_simulation_config(data)

    def save_simulation_config(self, document: SimulationDocument, config_path: Union[str, Path]) -> None:
        config_path = Path(config_path)
        data = document.model_dump(mode="json", exclude_none=True)
        suffix = config_path.suffix.lower()
        if suffix not in (".json", ".yml", ".yaml"):
            raise ConfigurationError(f"Unsupported configuration file format: {config_path.suffix}")
        with atomic_path(config_path) as tmp:
            with open(tmp, "w", encoding="utf-8") as f:
                if suffix == ".json":
                    json.dump(data, f, indent=2, sort_keys=True)
                else:
                    yaml.safe_dump(data, f, default_flow_style=False, sort_keys=True)

    def build_suite(self, document: SimulationDocument) -> Tuple[List[EchoSimConfig], List[MaterialSpec]]:
        """Translate a validated document into simulation variants and sources."""
        room = document.room
        remote_irs = None
        if room.remote_ir_paths:
            remote_irs = [_load_ir(p, f"remote_{i}") for i, p in enumerate(room.remote_ir_paths)]
        near_irs = None
        if room.near_ir_paths:
            near_irs = [
                [_load_ir(p, f"near_mic{m}_from_spk{s}") for s, p in enumerate(row)]
                for m, row in enumerate(room.near_ir_paths)
            ]

        suite = []
        for variant in document.variants:
            mono = variant.mode == "mono"
            cfg = EchoSimConfig(
                sample_rate=document.sample_rate,
                mode=variant.mode,
                n_mics=room.n_mics,
                remote_ir_length=room.remote_ir_length,
                remote_rt60_ms=room.remote_rt60_ms,
                near_ir_length=room.near_ir_length,
                near_rt60_ms=room.near_rt60_ms,
                snr_db=document.snr_db,
                remote_snr_db=room.remote_snr_db,
                decorrelator=variant.decorrelator.to_config(document.seed) if variant.decorrelator else None,
                aec=document.aec.to_config(),
                duration_s=document.duration_s,
                misalignment_interval_s=document.misalignment_interval_s,
                divergence_margin_db=document.divergence_margin_db,
                coherence_fft_size=document.coherence_fft_size,
                seed=document.seed,
                label=variant.name,
                remote_irs=None if mono else remote_irs,
                near_irs=None if mono else near_irs,
            )
            try:
                cfg.validate()
            except ConfigurationError as exc:
                raise SchemaError([f"variants.{variant.name}: {exc}"]) from exc
            suite.append(cfg)
        return suite, [m.to_spec() for m in document.material]
