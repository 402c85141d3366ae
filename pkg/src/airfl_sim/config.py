"""Experiment-config files: strict JSON schema, dBm conversion at the edge.

All dBm-valued fields carry explicit ``_dbm`` / ``_dbm_hz`` / ``_db`` key
suffixes and are converted to linear units exactly once, here.  Unknown
keys are rejected with their full path so typos cannot silently change an
experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .channel import DEFAULT_REFERENCE_GAIN, SystemConfig
from .harness import SWEEP_AXES, CASE_REGISTRY
from .models import MODEL_KINDS, SOFTMAX
from .training import IDEAL, OTA, AggregatorSpec, TrainSetup

SCHEMA_VERSION = 1

AGGREGATOR_NAMES = ("ideal",) + tuple(CASE_REGISTRY)


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2 at the CLI)."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def db_to_amplitude(db: float) -> float:
    return 10.0 ** (db / 20.0)


@dataclass(frozen=True)
class GradientModel:
    source: str = "fixed_synthetic"   # or "recorded_training"
    dim: int = 100
    power: float = 1.0
    cross_correlation: float = 0.5
    recorded_rounds: int = 50


@dataclass(frozen=True)
class TrainSection:
    rounds: int = 300
    learning_rate: float = 0.005
    batch_size: int = 50
    model: str = SOFTMAX
    hidden: int = 32
    dataset: str = "synthetic"
    mnist_images: str | None = None
    train_size: int = 4000
    test_size: int = 2000
    features: int = 16
    classes: int = 4
    separation: float = 3.0
    labels_per_client: int = 2
    seeds: tuple[int, ...] = (1, 2, 3)
    aggregators: tuple[str, ...] = ("ideal", "power_inversion",
                                    "weighted_full_power", "bev_random")


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    seed: int = 1
    trials: int = 100_000
    workers: int | None = None
    output_dir: str = "out"
    lambda_scale: float = 1.0      # deliberate-fault knob for --check runs
    schemes: tuple[str, ...] = ("power_inversion", "weighted_full_power")
    gradients: GradientModel = field(default_factory=GradientModel)
    interference_mode: str = "random_unit"
    sweep_axis: str | None = None
    sweep_values: tuple[float | None, ...] = ()
    train: TrainSection = field(default_factory=TrainSection)
    bound_T: int = 300
    bound_pilot_rounds: int = 50


def _take(raw: dict, path: str, known: dict):
    """Pop known keys with type checks; reject anything left over."""
    out = {}
    for key, (types, required, default) in known.items():
        if key in raw:
            val = raw.pop(key)
            if types is not None and not isinstance(val, types) \
                    or isinstance(val, bool) and bool not in (
                        types if isinstance(types, tuple) else (types,)):
                raise ConfigError(f"{path}{key}: expected {types}, "
                                  f"got {type(val).__name__}")
            out[key] = val
        elif required:
            raise ConfigError(f"{path}{key}: missing required key")
        else:
            out[key] = default
    if raw:
        raise ConfigError(f"{path}: unknown key(s) {sorted(raw)}")
    return out


_NUM = (int, float)


def _parse_system(raw: dict) -> SystemConfig:
    vals = _take(dict(raw), "system.", {
        "targets": (int, True, None),
        "interferers": (int, True, None),
        "ris_elements": (int, True, None),
        "max_power_dbm": (_NUM, False, None),
        "max_power_w": (_NUM, False, None),
        "noise_psd_dbm_hz": (_NUM, False, None),
        "noise_psd_w_hz": (_NUM, False, None),
        "bandwidth_hz": (_NUM, False, 1e6),
        "gradient_bound": (_NUM, False, 1.0),
        "pathloss_exponent": (_NUM, False, 2.2),
        "ps_ris_distance_m": (_NUM, False, 200.0),
        "device_disk_radius_m": (_NUM, False, 300.0),
        "reference_gain_db": (_NUM, False, None),
        "reference_gain": (_NUM, False, None),
    })
    if (vals["max_power_dbm"] is None) == (vals["max_power_w"] is None):
        raise ConfigError("system: give exactly one of max_power_dbm / "
                          "max_power_w")
    if (vals["noise_psd_dbm_hz"] is None) == (vals["noise_psd_w_hz"] is None):
        raise ConfigError("system: give exactly one of noise_psd_dbm_hz / "
                          "noise_psd_w_hz")
    if vals["reference_gain_db"] is not None and \
            vals["reference_gain"] is not None:
        raise ConfigError("system: give at most one of reference_gain_db / "
                          "reference_gain")
    p = (dbm_to_watt(vals["max_power_dbm"])
         if vals["max_power_dbm"] is not None else vals["max_power_w"])
    n0 = (dbm_to_watt(vals["noise_psd_dbm_hz"])
          if vals["noise_psd_dbm_hz"] is not None else vals["noise_psd_w_hz"])
    if vals["reference_gain_db"] is not None:
        gain = db_to_amplitude(vals["reference_gain_db"])
    elif vals["reference_gain"] is not None:
        gain = float(vals["reference_gain"])
    else:
        gain = DEFAULT_REFERENCE_GAIN
    try:
        return SystemConfig(
            K=vals["targets"], M=vals["interferers"], N=vals["ris_elements"],
            P_max=float(p), noise_psd=float(n0),
            bandwidth=float(vals["bandwidth_hz"]),
            G=float(vals["gradient_bound"]),
            pathloss_exponent=float(vals["pathloss_exponent"]),
            ps_ris_distance=float(vals["ps_ris_distance_m"]),
            device_disk_radius=float(vals["device_disk_radius_m"]),
            reference_gain=gain)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _parse_schemes(raw, path: str):
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}: must be a nonempty list")
    for name in raw:
        if name not in CASE_REGISTRY:
            raise ConfigError(f"{path}: unknown scheme {name!r}; known: "
                              f"{sorted(CASE_REGISTRY)}")
    return tuple(raw)


def _parse_sweep(raw: dict):
    vals = _take(dict(raw), "sweep.", {
        "axis": (str, True, None),
        "values": (list, True, None),
    })
    if vals["axis"] not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis: unknown axis {vals['axis']!r}; "
                          f"known: {SWEEP_AXES}")
    values = []
    for v in vals["values"]:
        if v is None or v == "inf":
            if vals["axis"] != "bits":
                raise ConfigError("sweep.values: null/'inf' only valid on "
                                  "the bits axis")
            values.append(None)
        elif isinstance(v, _NUM) and not isinstance(v, bool):
            values.append(float(v))
        else:
            raise ConfigError(f"sweep.values: bad value {v!r}")
    if not values:
        raise ConfigError("sweep.values: must be nonempty")
    return vals["axis"], tuple(values)


def _parse_train(raw: dict) -> TrainSection:
    vals = _take(dict(raw), "train.", {
        "rounds": (int, False, 300),
        "learning_rate": (_NUM, False, 0.005),
        "batch_size": (int, False, 50),
        "model": (str, False, SOFTMAX),
        "hidden": (int, False, 32),
        "dataset": (str, False, "synthetic"),
        "mnist_images": (str, False, None),
        "train_size": (int, False, 4000),
        "test_size": (int, False, 2000),
        "features": (int, False, 16),
        "classes": (int, False, 4),
        "separation": (_NUM, False, 3.0),
        "labels_per_client": (int, False, 2),
        "seeds": (list, False, [1, 2, 3]),
        "aggregators": (list, False, list(TrainSection().aggregators)),
    })
    if vals["model"] not in MODEL_KINDS:
        raise ConfigError(f"train.model: unknown kind {vals['model']!r}")
    if vals["dataset"] not in ("synthetic", "mnist"):
        raise ConfigError(f"train.dataset: unknown source {vals['dataset']!r}")
    for agg in vals["aggregators"]:
        if agg not in AGGREGATOR_NAMES:
            raise ConfigError(f"train.aggregators: unknown {agg!r}; known: "
                              f"{AGGREGATOR_NAMES}")
    if not all(isinstance(s, int) and not isinstance(s, bool)
               for s in vals["seeds"]):
        raise ConfigError("train.seeds: must be integers")
    vals["seeds"] = tuple(vals["seeds"])
    vals["aggregators"] = tuple(vals["aggregators"])
    vals["learning_rate"] = float(vals["learning_rate"])
    vals["separation"] = float(vals["separation"])
    return TrainSection(**vals)


def parse_config(path: str) -> ExperimentConfig:
    """Load and validate an experiment config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    vals = _take(dict(raw), "", {
        "schema_version": (int, True, None),
        "system": (dict, True, None),
        "seed": (int, False, 1),
        "trials": (int, False, 100_000),
        "workers": (int, False, None),
        "output_dir": (str, False, "out"),
        "lambda_scale": (_NUM, False, 1.0),
        "schemes": (list, False, None),
        "gradients": (dict, False, None),
        "interference_mode": (str, False, "random_unit"),
        "sweep": (dict, False, None),
        "train": (dict, False, None),
        "bound": (dict, False, None),
    })
    if vals["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, "
                          f"got {vals['schema_version']}")
    system = _parse_system(vals["system"])
    schemes = (("power_inversion", "weighted_full_power")
               if vals["schemes"] is None
               else _parse_schemes(vals["schemes"], "schemes"))
    gradients = GradientModel()
    if vals["gradients"] is not None:
        g = _take(dict(vals["gradients"]), "gradients.", {
            "source": (str, False, "fixed_synthetic"),
            "dim": (int, False, 100),
            "power": (_NUM, False, 1.0),
            "cross_correlation": (_NUM, False, 0.5),
            "recorded_rounds": (int, False, 50),
        })
        gradients = GradientModel(source=g["source"], dim=g["dim"],
                                  power=float(g["power"]),
                                  cross_correlation=float(
                                      g["cross_correlation"]),
                                  recorded_rounds=g["recorded_rounds"])
        if gradients.source not in ("fixed_synthetic", "recorded_training"):
            raise ConfigError(
                f"gradients.source: unknown {gradients.source!r}")
        if gradients.dim < 1 or gradients.power <= 0 or \
                not 0 <= gradients.cross_correlation <= 1 or \
                gradients.recorded_rounds < 1:
            raise ConfigError("gradients: dim >= 1, power > 0, "
                              "cross_correlation in [0, 1], and "
                              "recorded_rounds >= 1 required")
    if vals["interference_mode"] not in ("random_unit", "zero_gradient_attack",
                                         "constant_unit"):
        raise ConfigError(
            f"interference_mode: unknown {vals['interference_mode']!r}")
    axis, values = (None, ())
    if vals["sweep"] is not None:
        axis, values = _parse_sweep(vals["sweep"])
    train = TrainSection()
    if vals["train"] is not None:
        train = _parse_train(vals["train"])
    bound_T, bound_pilot = 300, 50
    if vals["bound"] is not None:
        b = _take(dict(vals["bound"]), "bound.", {
            "T": (int, False, 300),
            "pilot_rounds": (int, False, 50),
        })
        bound_T, bound_pilot = b["T"], b["pilot_rounds"]
    if vals["trials"] < 1:
        raise ConfigError("trials: must be >= 1")
    if vals["lambda_scale"] <= 0:
        raise ConfigError("lambda_scale: must be positive")
    return ExperimentConfig(
        system=system, seed=vals["seed"], trials=vals["trials"],
        workers=vals["workers"], output_dir=vals["output_dir"],
        lambda_scale=float(vals["lambda_scale"]), schemes=schemes,
        gradients=gradients, interference_mode=vals["interference_mode"],
        sweep_axis=axis, sweep_values=values, train=train,
        bound_T=bound_T, bound_pilot_rounds=bound_pilot)


def train_setup_from(config: ExperimentConfig, aggregator: str,
                     seed: int) -> TrainSetup:
    t = config.train
    if aggregator == "ideal":
        spec = AggregatorSpec(kind=IDEAL,
                              interference_mode=config.interference_mode)
    else:
        scheme, policy = CASE_REGISTRY[aggregator]
        spec = AggregatorSpec(kind=OTA, scheme=scheme, phase_policy=policy,
                              interference_mode=config.interference_mode)
    return TrainSetup(
        system=config.system, aggregator=spec, rounds=t.rounds,
        eta=t.learning_rate, batch_size=t.batch_size, model_kind=t.model,
        hidden=t.hidden, dataset_source=t.dataset,
        mnist_images=t.mnist_images, train_size=t.train_size,
        test_size=t.test_size, features=t.features, classes=t.classes,
        separation=t.separation, labels_per_client=t.labels_per_client,
        seed=seed)
