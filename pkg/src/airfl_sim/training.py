"""The federated training loop with a pluggable aggregation channel.

Each round: broadcast (implicit), per-client mini-batch gradients, clipping
to the norm bound, aggregation (ideal mean or one over-the-air round), and
one SGD step.  All randomness is keyed off the run seed through labeled
substreams, so two runs differing only in the aggregator share the same
data, partition, initialization, and mini-batch draws.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .aircomp import GradientSet, ideal_round, make_interference, ota_round
from .channel import SystemConfig, draw_geometry, draw_realization
from .data import Dataset, load_idx, partition_noniid, synth_classification
from .models import (SOFTMAX, clip_gradient, evaluate, init_model,
                     local_gradient, loss_and_gradient, sgd_step)
from .ris import (alignment_phases, jitter_phases, quantize_phases,
                  random_phases, round_robin_phases)
from .rngstream import derive_stream
from .schemes import (PHASE_ALIGNED, PHASE_RANDOM, PHASE_ROUND_ROBIN,
                      SCHEME_BEV_MIN_MSE, min_mse_denoiser, params_for)

IDEAL = "ideal"
OTA = "ota"


@dataclass(frozen=True)
class AggregatorSpec:
    """How the global gradient is formed each round."""

    kind: str = IDEAL
    scheme: str = "power_inversion"
    phase_policy: str = PHASE_ALIGNED
    phase_bits: int | None = None
    phase_jitter: float = 0.0
    interference_mode: str = "zero_gradient_attack"

    @property
    def name(self) -> str:
        if self.kind == IDEAL:
            return IDEAL
        parts = [self.scheme]
        if self.phase_policy != PHASE_ALIGNED:
            parts.append(self.phase_policy)
        if self.phase_bits is not None:
            parts.append(f"{self.phase_bits}bit")
        return "_".join(parts)


@dataclass(frozen=True)
class TrainSetup:
    """Everything one training run depends on."""

    system: SystemConfig
    aggregator: AggregatorSpec = AggregatorSpec()
    rounds: int = 300
    eta: float = 0.005          # learning rate
    batch_size: int = 50
    model_kind: str = SOFTMAX
    hidden: int = 32
    dataset_source: str = "synthetic"   # or "mnist"
    mnist_images: str | None = None
    train_size: int = 4000
    test_size: int = 2000
    features: int = 16
    classes: int = 4
    separation: float = 3.0
    labels_per_client: int = 2
    grad_bound: float | None = None     # None: calibrate on a pilot run
    pilot_rounds: int = 50
    seed: int = 1


@dataclass
class RunTrace:
    """Per-round training metrics plus run metadata."""

    rounds: np.ndarray
    train_loss: np.ndarray
    test_accuracy: np.ndarray
    grad_norm: np.ndarray
    error_sq: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def final_accuracy(self) -> float:
        return float(self.test_accuracy[-1])

    def rows(self):
        for i in range(self.rounds.shape[0]):
            yield (int(self.rounds[i]), float(self.train_loss[i]),
                   float(self.test_accuracy[i]), float(self.grad_norm[i]),
                   float(self.error_sq[i]))


def _stratified_split(labels: np.ndarray, n_train: int,
                      num_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic label-balanced train/test index split.

    Keeps per-label train counts exact (n_train // C each, remainder spread
    over the first labels), so downstream equal-size sharding stays exact.
    """
    base, rem = divmod(n_train, num_classes)
    take = [base + (1 if c < rem else 0) for c in range(num_classes)]
    train_idx = []
    test_idx = []
    for c in range(num_classes):
        pool = np.flatnonzero(labels == c)
        if pool.size < take[c]:
            raise ValueError(f"label {c}: {pool.size} samples cannot fill "
                             f"a train share of {take[c]}")
        train_idx.append(pool[:take[c]])
        test_idx.append(pool[take[c]:])
    return (np.sort(np.concatenate(train_idx)),
            np.sort(np.concatenate(test_idx)))


def build_datasets(setup: TrainSetup) -> tuple[Dataset, Dataset]:
    root = derive_stream(setup.seed)
    if setup.dataset_source == "synthetic":
        # one draw so train and test share the class geometry; the split is
        # label-stratified so shard sizes stay exact
        pool = synth_classification(setup.train_size + setup.test_size,
                                    setup.features, setup.classes,
                                    setup.separation, root.child("data", 0),
                                    name="synth")
        tr, te = _stratified_split(pool.labels, setup.train_size,
                                   pool.num_classes)
        train = Dataset(pool.features[tr], pool.labels[tr], "synth-train",
                        pool.num_classes)
        test = Dataset(pool.features[te], pool.labels[te], "synth-test",
                       pool.num_classes)
        return train, test
    if setup.dataset_source == "mnist":
        if not setup.mnist_images:
            raise ValueError(
                "dataset 'mnist' needs mnist_images pointing at the training "
                "images file (expects the standard pair, e.g. "
                "train-images-idx3-ubyte with train-labels-idx1-ubyte "
                "alongside, plus the matching t10k files)")
        train = load_idx(setup.mnist_images, name="mnist-train")
        test_path = setup.mnist_images.replace("train", "t10k")
        if test_path == setup.mnist_images:
            raise ValueError("cannot infer the t10k images file; "
                             "name the training file with 'train' in it")
        test = load_idx(test_path, name="mnist-test")
        return train, test
    raise ValueError(f"unknown dataset source {setup.dataset_source!r}")


def _local_gradients(model, shards, setup, stream):
    return [local_gradient(model, shards[k], setup.batch_size,
                           stream.child("batch", k))
            for k in range(len(shards))]


def calibrate_grad_bound(model, shards, setup) -> float:
    """99th-percentile gradient norm over a short ideal-aggregation pilot."""
    root = derive_stream(setup.seed)
    norms = []
    w = model
    for t in range(setup.pilot_rounds):
        grads = _local_gradients(w, shards, setup, root.child("pilot", t))
        norms.extend(float(np.linalg.norm(g)) for g in grads)
        w = sgd_step(w, np.mean(grads, axis=0), setup.eta)
    return float(np.percentile(norms, 99))


def _phases_for(spec: AggregatorSpec, realization, params, config, t, rs):
    if spec.phase_policy == PHASE_ALIGNED:
        phases = alignment_phases(realization.h_p, realization.h_r[:config.K],
                                  params.w)
    elif spec.phase_policy == PHASE_RANDOM:
        phases = random_phases(config.N, rs.child("phase"))
    elif spec.phase_policy == PHASE_ROUND_ROBIN:
        phases = round_robin_phases(realization.h_p,
                                    realization.h_r[t % config.K])
    else:
        raise ValueError(f"unknown phase policy {spec.phase_policy!r}")
    if spec.phase_bits is not None:
        phases = quantize_phases(phases, spec.phase_bits)
    if spec.phase_jitter:
        phases = jitter_phases(phases, spec.phase_jitter, rs.child("jitter"))
    return phases


def train(setup: TrainSetup) -> RunTrace:
    """Run the full loop and record one trace."""
    root = derive_stream(setup.seed)
    train_data, test_data = build_datasets(setup)
    config = setup.system
    shards = partition_noniid(train_data, config.K, setup.labels_per_client,
                              root.child("part"))
    model = init_model(setup.model_kind, train_data.features.shape[1],
                       train_data.num_classes, setup.hidden,
                       root.child("init"))
    G = setup.grad_bound or calibrate_grad_bound(model, shards, setup)
    config = dataclasses.replace(config, G=G)

    spec = setup.aggregator
    betas = params = None
    if spec.kind == OTA:
        betas = draw_geometry(config, root.child("geom"))
        params = params_for(spec.scheme, config, betas, spec.phase_policy)
    elif spec.kind != IDEAL:
        raise ValueError(f"unknown aggregator kind {spec.kind!r}")

    D = model.dim
    context = None
    rec = {k: [] for k in ("round", "loss", "acc", "gnorm", "err2")}
    for t in range(setup.rounds):
        rs = root.child("round", t)
        grads = [clip_gradient(g, G)
                 for g in _local_gradients(model, shards, setup, rs)]
        gset = GradientSet(
            targets=np.stack(grads),
            interferers=make_interference(
                spec.interference_mode, config.M, D, context,
                rs.child("interf")) if spec.kind == OTA
            else np.zeros((0, D)))
        g_ideal = ideal_round(gset)
        loss_t, _ = loss_and_gradient(model, train_data.features,
                                      train_data.labels)
        if spec.kind == IDEAL:
            g_hat, err2 = g_ideal, 0.0
        else:
            realization = draw_realization(config, betas, rs.child("chan"))
            phases = _phases_for(spec, realization, params, config, t, rs)
            round_params = params
            if spec.scheme == SCHEME_BEV_MIN_MSE:
                grad_power = float(np.mean([g @ g for g in grads]))
                lam = min_mse_denoiser(config, realization, phases,
                                       params.sqrt_p, grad_power, D)
                round_params = dataclasses.replace(params, lam=lam)
            g_hat, stats = ota_round(gset, realization, phases, round_params,
                                     config.sigma2, rs.child("noise"))
            err2 = stats.sq_norm
        model = sgd_step(model, g_hat, setup.eta)
        _, acc = evaluate(model, test_data)
        context = g_ideal
        rec["round"].append(t)
        rec["loss"].append(loss_t)
        rec["acc"].append(acc)
        rec["gnorm"].append(float(np.linalg.norm(g_ideal)))
        rec["err2"].append(err2)

    return RunTrace(
        rounds=np.array(rec["round"]),
        train_loss=np.array(rec["loss"]),
        test_accuracy=np.array(rec["acc"]),
        grad_norm=np.array(rec["gnorm"]),
        error_sq=np.array(rec["err2"]),
        metadata={"aggregator": spec.name, "scheme": spec.scheme,
                  "N": config.N, "K": config.K, "M": config.M,
                  "seed": setup.seed, "grad_bound": G,
                  "model": setup.model_kind, "eta": setup.eta,
                  "batch_size": setup.batch_size},
    )


def record_gradient_stream(setup: TrainSetup,
                           rounds: int | None = None) -> np.ndarray:
    """Clipped per-client gradients from an ideal-aggregation run.

    Returns a (rounds, K, D) stack; the stream is what MSE experiments use
    when they want real training gradients instead of synthetic sets.
    """
    rounds = rounds or setup.rounds
    root = derive_stream(setup.seed)
    train_data, _ = build_datasets(setup)
    shards = partition_noniid(train_data, setup.system.K,
                              setup.labels_per_client, root.child("part"))
    model = init_model(setup.model_kind, train_data.features.shape[1],
                       train_data.num_classes, setup.hidden,
                       root.child("init"))
    G = setup.grad_bound or calibrate_grad_bound(model, shards, setup)
    stack = []
    for t in range(rounds):
        rs = root.child("round", t)
        grads = [clip_gradient(g, G)
                 for g in _local_gradients(model, shards, setup, rs)]
        stack.append(np.stack(grads))
        model = sgd_step(model, np.mean(grads, axis=0), setup.eta)
    return np.stack(stack)


def measure_assumption_constants(setup: TrainSetup, rounds: int = 50,
                                 probes: int = 8) -> dict:
    """Empirical proxies for the constants the convergence bound needs.

    Runs a short ideal-aggregation pilot and measures: L as the largest
    ratio of global-gradient change to weight change between consecutive
    rounds; xi as the largest ratio of a client's full-shard gradient norm
    to the global gradient norm; chi2 as the largest per-client mini-batch
    gradient variance around the full-shard gradient; f_gap as the observed
    loss decrease.
    """
    root = derive_stream(setup.seed)
    train_data, _ = build_datasets(setup)
    config = setup.system
    shards = partition_noniid(train_data, config.K, setup.labels_per_client,
                              root.child("part"))
    model = init_model(setup.model_kind, train_data.features.shape[1],
                       train_data.num_classes, setup.hidden,
                       root.child("init"))
    loss0, g_full = loss_and_gradient(model, train_data.features,
                                      train_data.labels)
    L = xi = chi2 = 0.0
    min_loss = loss0
    prev_w, prev_g = model.weights, g_full
    for t in range(rounds):
        rs = root.child("round", t)
        shard_grads = [loss_and_gradient(model, s.features, s.labels)[1]
                       for s in shards]
        gnorm = float(np.linalg.norm(np.mean(shard_grads, axis=0)))
        if gnorm > 1e-12:
            xi = max(xi, max(float(np.linalg.norm(g)) / gnorm
                             for g in shard_grads))
        if t % 10 == 0:
            for k, s in enumerate(shards):
                dev = [local_gradient(model, s, setup.batch_size,
                                      rs.child("probe", k * probes + j))
                       - shard_grads[k] for j in range(probes)]
                chi2 = max(chi2, float(np.mean([d @ d for d in dev])))
        grads = _local_gradients(model, shards, setup, rs)
        model = sgd_step(model, np.mean(grads, axis=0), setup.eta)
        loss_t, g_t = loss_and_gradient(model, train_data.features,
                                        train_data.labels)
        dw = float(np.linalg.norm(model.weights - prev_w))
        if dw > 1e-12:
            L = max(L, float(np.linalg.norm(g_t - prev_g)) / dw)
        prev_w, prev_g = model.weights, g_t
        min_loss = min(min_loss, loss_t)
    return {"L": L, "xi": max(xi, 1.0), "chi2": chi2,
            "f_gap": max(loss0 - min_loss, 1e-9), "dim": model.dim,
            "grad_bound": setup.grad_bound
            or calibrate_grad_bound(init_model(
                setup.model_kind, train_data.features.shape[1],
                train_data.num_classes, setup.hidden, root.child("init")),
                shards, setup)}
