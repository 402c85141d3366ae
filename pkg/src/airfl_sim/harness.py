"""Monte Carlo experiment orchestration.

All estimators stream over fixed-size trial blocks whose substreams are
keyed by block index, so results are bit-identical at any worker count and
any evaluation order.  Block partial sums are reduced in block order with
numpy's pairwise-summed accumulations.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .aircomp import make_interference
from .analysis import (GradientStats, closed_form_mse, coeff_variances,
                       expected_coefficients)
from .channel import SystemConfig, draw_geometry
from .rngstream import RngStream, complex_gaussian, derive_stream
from .schemes import (PHASE_ALIGNED, PHASE_RANDOM, PHASE_ROUND_ROBIN,
                      PROPOSED_SCHEMES, SCHEME_BEV, SCHEME_BEV_MIN_MSE,
                      SchemeParams, params_for)
from .training import TrainSetup, train

TWO_PI = 2.0 * np.pi
MIN_TRIALS = 10**3

SWEEP_AXES = ("N", "P", "K", "M", "bits")


# ---------------------------------------------------------------------------
# aggregation cases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloCase:
    """One (scheme, phase policy, quantization) combination to simulate."""

    name: str
    scheme: str
    phase_policy: str = PHASE_ALIGNED
    phase_bits: int | None = None

    @property
    def has_closed_form(self) -> bool:
        return self.scheme in PROPOSED_SCHEMES and \
            self.phase_policy == PHASE_ALIGNED and self.phase_bits is None


CASE_REGISTRY = {
    "power_inversion": ("power_inversion", PHASE_ALIGNED),
    "weighted_full_power": ("weighted_full_power", PHASE_ALIGNED),
    "bev_random": (SCHEME_BEV, PHASE_RANDOM),
    "bev_round_robin": (SCHEME_BEV, PHASE_ROUND_ROBIN),
    "bev_min_mse": (SCHEME_BEV_MIN_MSE, PHASE_ALIGNED),
}


def case_from_name(name: str, phase_bits: int | None = None) -> MonteCarloCase:
    if name not in CASE_REGISTRY:
        raise ValueError(f"unknown scheme/baseline {name!r}; "
                         f"known: {sorted(CASE_REGISTRY)}")
    scheme, policy = CASE_REGISTRY[name]
    return MonteCarloCase(name=name, scheme=scheme, phase_policy=policy,
                          phase_bits=phase_bits)


# ---------------------------------------------------------------------------
# blocked Monte Carlo core
# ---------------------------------------------------------------------------

def _block_sizes(trials: int, config: SystemConfig) -> list[int]:
    """Fixed partition of a trial budget, independent of worker count."""
    per_trial = max(1, config.n_devices * config.N)
    block = int(np.clip(2**23 // per_trial, 64, 8192))
    sizes = [block] * (trials // block)
    if trials % block:
        sizes.append(trials % block)
    return sizes


def _run_ordered(fn, args_list, workers: int) -> list:
    if workers <= 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list, chunksize=1))


def _quantize_theta(theta: np.ndarray, bits: int) -> np.ndarray:
    levels = 2**bits
    step = TWO_PI / levels
    return np.mod(np.ceil(theta / step - 0.5), levels) * step


def _case_coefficients(case: MonteCarloCase, params: SchemeParams,
                       config: SystemConfig, beta, h_p, h_t, h_m,
                       theta_random, trial_offset: int, grad_power: float,
                       dim: int):
    """(l_k, l_m) per trial for one case on shared channel draws."""
    n = h_p.shape[0]
    K = config.K
    if case.phase_policy == PHASE_ALIGNED:
        weighted = np.einsum("k,tkn->tn", params.w, np.conj(h_t))
        theta = -np.angle(np.conj(h_p)) + np.angle(weighted)
    elif case.phase_policy == PHASE_RANDOM:
        theta = theta_random
    elif case.phase_policy == PHASE_ROUND_ROBIN:
        sched = (trial_offset + np.arange(n)) % K
        h_sched = h_t[np.arange(n), sched, :]
        theta = -np.angle(np.conj(h_p)) + np.angle(np.conj(h_sched))
    else:
        raise ValueError(f"unknown phase policy {case.phase_policy!r}")
    if case.phase_bits is not None:
        theta = _quantize_theta(np.mod(theta, TWO_PI), case.phase_bits)
    base = np.conj(h_p) * np.exp(1j * theta)
    u_t = np.einsum("tn,tkn->tk", base, h_t).real
    gain_t = beta[:K] * params.sqrt_p * u_t
    if h_m.shape[1]:
        u_m = np.einsum("tn,tmn->tm", base, h_m).real
        gain_m = beta[K:] * params.interferer_sqrt_p * u_m
    else:
        gain_m = np.zeros((n, 0))
    if case.scheme == SCHEME_BEV_MIN_MSE:
        num = grad_power * gain_t.sum(axis=1) / K
        den = (grad_power * (gain_t**2).sum(axis=1) + (gain_m**2).sum(axis=1)
               + config.sigma2 * dim / 2.0)
        lam = np.where(num > 0, den / np.maximum(num, 1e-300), 1.0)
        return gain_t / lam[:, None], gain_m / lam[:, None], lam
    return gain_t / params.lam, gain_m / params.lam, np.full(n, params.lam)


@dataclass(frozen=True)
class _BlockTask:
    config: SystemConfig
    beta: np.ndarray
    cases: tuple[MonteCarloCase, ...]
    params: tuple[SchemeParams, ...]
    stream: RngStream
    n: int
    trial_offset: int
    grad_targets: np.ndarray | None     # (K, D) or None for moments-only
    grad_interferers: np.ndarray | None
    grad_power: float
    dim: int


def _simulate_block(task: _BlockTask) -> dict:
    """Partial sums over one block of trials, for every case."""
    cfg, n = task.config, task.n
    gen = task.stream.generator()
    h_p = complex_gaussian(gen, (n, cfg.N))
    h_t = complex_gaussian(gen, (n, cfg.K, cfg.N))
    h_m = complex_gaussian(gen, (n, cfg.M, cfg.N))
    theta_random = gen.uniform(0.0, TWO_PI, (n, cfg.N))
    with_error = task.grad_targets is not None
    if with_error:
        noise = gen.standard_normal((n, task.dim))
    out = {}
    for case, params in zip(task.cases, task.params):
        lk, lm, lam = _case_coefficients(case, params, cfg, task.beta, h_p,
                                         h_t, h_m, theta_random,
                                         task.trial_offset, task.grad_power,
                                         task.dim)
        sums = {
            "lk": lk.sum(axis=0), "lk2": (lk**2).sum(axis=0),
            "lk3": (lk**3).sum(axis=0), "lk4": (lk**4).sum(axis=0),
            "lm": lm.sum(axis=0), "lm2": (lm**2).sum(axis=0),
            "lm3": (lm**3).sum(axis=0), "lm4": (lm**4).sum(axis=0),
        }
        if with_error:
            a = lk - 1.0 / cfg.K
            if task.grad_targets.ndim == 3:
                # recorded stream: cycle the rounds through the trials
                idx = (task.trial_offset + np.arange(n)) \
                    % task.grad_targets.shape[0]
                signal = np.einsum("tk,tkd->td", a, task.grad_targets[idx])
                if cfg.M:
                    signal = signal + np.einsum(
                        "tm,tmd->td", lm, task.grad_interferers[idx])
            else:
                signal = a @ task.grad_targets
                if cfg.M:
                    signal = signal + lm @ task.grad_interferers
            scale = np.sqrt(cfg.sigma2 / 2.0) / lam
            denoised = noise * scale[:, None]
            sq_sig = (signal**2).sum(axis=1)
            sq_noise = (denoised**2).sum(axis=1)
            sq_full = ((signal + denoised) ** 2).sum(axis=1)
            sums.update({
                "err": sq_full.sum(), "err_sq": (sq_full**2).sum(),
                "sig": sq_sig.sum(), "sig_sq": (sq_sig**2).sum(),
                "noise": sq_noise.sum(), "noise_sq": (sq_noise**2).sum(),
            })
        out[case.name] = sums
    return out


def _accumulate(parts: list[dict], cases) -> dict:
    total = {}
    for case in cases:
        acc = {}
        for part in parts:
            for key, val in part[case.name].items():
                acc[key] = acc.get(key, 0) + val
        total[case.name] = acc
    return total


def _run_cases(config, beta, cases, params, trials, seed, workers,
               grads=None, grad_power=1.0, dim=1):
    tasks = []
    offset = 0
    gt = gi = None
    if grads is not None:
        gt, gi = grads
    for i, n in enumerate(_block_sizes(trials, config)):
        tasks.append(_BlockTask(
            config=config, beta=np.asarray(beta, dtype=float),
            cases=tuple(cases), params=tuple(params),
            stream=derive_stream(seed, ("mcblock", i)), n=n,
            trial_offset=offset, grad_targets=gt, grad_interferers=gi,
            grad_power=grad_power, dim=dim))
        offset += n
    return _accumulate(_run_ordered(_simulate_block, tasks, workers), cases)


# ---------------------------------------------------------------------------
# moment estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentEstimate:
    """A sample mean with its spread and an optional closed-form target."""

    mean: float
    variance: float
    stderr: float
    trials: int
    target: float | None = None
    z_score: float | None = None


def _estimates(s1, s2, s3, s4, n, targets) -> list[MomentEstimate]:
    """Mean estimates (per device) from raw power sums."""
    mu = s1 / n
    m2 = s2 / n - mu**2
    out = []
    for i in range(mu.shape[0]):
        se = float(np.sqrt(max(m2[i], 0.0) / n))
        t = None if targets is None else float(targets[i])
        z = None if (t is None or se == 0) else float((mu[i] - t) / se)
        out.append(MomentEstimate(float(mu[i]), float(m2[i]), se, n, t, z))
    return out


def _var_estimates(s1, s2, s3, s4, n, targets) -> list[MomentEstimate]:
    """Variance estimates with standard errors from the fourth moment."""
    mu = s1 / n
    m2 = s2 / n - mu**2
    m4 = s4 / n - 4 * mu * s3 / n + 6 * mu**2 * s2 / n - 3 * mu**4
    out = []
    for i in range(mu.shape[0]):
        se = float(np.sqrt(max(m4[i] - m2[i] ** 2, 0.0) / n))
        t = None if targets is None else float(targets[i])
        z = None if (t is None or se == 0) else float((m2[i] - t) / se)
        out.append(MomentEstimate(float(m2[i]), float(m4[i] - m2[i] ** 2),
                                  se, n, t, z))
    return out


@dataclass(frozen=True)
class CoefficientMoments:
    case: str
    targets: list[MomentEstimate]
    target_vars: list[MomentEstimate]
    interferers: list[MomentEstimate]
    interferer_vars: list[MomentEstimate]
    trials: int


def _moment_targets(case: MonteCarloCase, params: SchemeParams, config,
                    beta):
    """Closed-form targets where the pairing defines them, else None."""
    K, M, N = config.K, config.M, config.N
    beta = np.asarray(beta, dtype=float)
    if case.phase_policy == PHASE_ALIGNED and case.phase_bits is None \
            and case.scheme != SCHEME_BEV_MIN_MSE:
        mean_k = expected_coefficients(params, beta, N)
        var_k, var_m = coeff_variances(params, beta, N)
        return mean_k, var_k, np.zeros(M), var_m
    if case.phase_policy == PHASE_RANDOM:
        # phases independent of every channel: zero mean, variance N/2
        var_k = beta[:K] ** 2 * params.sqrt_p**2 * N / (2 * params.lam**2)
        var_m = beta[K:] ** 2 * params.interferer_sqrt_p**2 * N \
            / (2 * params.lam**2)
        return np.zeros(K), var_k, np.zeros(M), var_m
    if case.phase_policy == PHASE_ROUND_ROBIN:
        # aligned 1/K of the rounds, zero-mean otherwise
        mean_k = beta[:K] * params.sqrt_p * np.pi * N / (4 * K * params.lam)
        return mean_k, None, np.zeros(M), None
    return None, None, np.zeros(M) if M else np.zeros(0), None


def estimate_coefficient_moments(config: SystemConfig, beta, scheme_id: str,
                                 phase_policy: str, trials: int, seed: int,
                                 workers: int = 1,
                                 phase_bits: int | None = None,
                                 lambda_scale: float = 1.0) -> CoefficientMoments:
    """Monte Carlo means and variances of every device's coefficient.

    Closed-form targets are attached wherever the (scheme, policy) pairing
    defines them; z-scores measure the distance in standard errors.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}")
    case = MonteCarloCase(name=scheme_id, scheme=scheme_id,
                          phase_policy=phase_policy, phase_bits=phase_bits)
    params = params_for(scheme_id, config, beta, phase_policy)
    # targets describe the intended scheme; lambda_scale injects a fault the
    # self-check is supposed to catch, so it only perturbs the simulation
    t_mean, t_var, m_mean, m_var = _moment_targets(case, params, config, beta)
    if lambda_scale != 1.0:
        params = dataclasses.replace(params, lam=params.lam * lambda_scale)
    sums = _run_cases(config, beta, [case], [params], trials, seed,
                      workers)[scheme_id]
    return CoefficientMoments(
        case=scheme_id,
        targets=_estimates(sums["lk"], sums["lk2"], sums["lk3"], sums["lk4"],
                           trials, t_mean),
        target_vars=_var_estimates(sums["lk"], sums["lk2"], sums["lk3"],
                                   sums["lk4"], trials, t_var),
        interferers=_estimates(sums["lm"], sums["lm2"], sums["lm3"],
                               sums["lm4"], trials, m_mean),
        interferer_vars=_var_estimates(sums["lm"], sums["lm2"], sums["lm3"],
                                       sums["lm4"], trials, m_var),
        trials=trials)


# ---------------------------------------------------------------------------
# gradient sets for MSE experiments
# ---------------------------------------------------------------------------

def fixed_gradient_set(K: int, M: int, D: int, power: float,
                       cross_correlation: float, stream: RngStream):
    """One fixed draw of target gradients plus unit interference directions.

    Targets are g_k = sqrt(power) (sqrt(c) s0 + sqrt(1-c) s_k) with i.i.d.
    unit-power directions, so E[g_k^T g_k'] = c * power across the ensemble;
    the exact realized moments are what the closed form is fed with.
    """
    if not 0.0 <= cross_correlation <= 1.0:
        raise ValueError("cross_correlation must lie in [0, 1]")
    gen = stream.generator()
    s0 = gen.standard_normal(D) / np.sqrt(D)
    sk = gen.standard_normal((K, D)) / np.sqrt(D)
    targets = np.sqrt(power) * (np.sqrt(cross_correlation) * s0
                                + np.sqrt(1 - cross_correlation) * sk)
    interferers = gen.standard_normal((max(M, 1), D))
    interferers = interferers / np.linalg.norm(interferers, axis=1,
                                               keepdims=True)
    return targets, interferers[:M]


# ---------------------------------------------------------------------------
# empirical MSE and sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MseRow:
    """Empirical and closed-form error measures for one case at one point."""

    case: str
    empirical: float            # normalized total MSE
    stderr: float
    emp_comp_interf: float      # noise-free component (computation+interference)
    emp_noise: float            # denoised-noise-only component
    closed_form: float | None
    cf_computation: float | None
    cf_interference: float | None
    cf_noise: float | None


def stream_gradient_stats(targets: np.ndarray) -> GradientStats:
    """Sample-mean gradient statistics of a (rounds, K, D) recorded stream."""
    gram = np.einsum("tkd,tjd->kj", targets, targets) / targets.shape[0]
    return GradientStats(self_moment=np.diag(gram).copy(), cross_moment=gram,
                         dim=targets.shape[-1])


def empirical_mse(config: SystemConfig, beta, cases, grads, trials: int,
                  seed: int, workers: int = 1) -> list[MseRow]:
    """Normalized empirical MSE for each case on shared channel draws.

    ``grads`` is a (targets, interferers) pair: either one fixed set from
    :func:`fixed_gradient_set` (2-d targets) or a recorded training stream
    ((rounds, K, D) targets with per-round interferers) whose rounds are
    cycled through the trials.  The gradient-norm bound of ``config`` is
    tightened to the realized maximum so every scheme's power budget is
    consistent with the closed form being compared against.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}")
    targets, interferers = grads
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 3:
        gstats = stream_gradient_stats(targets)
        max_norm = float(np.linalg.norm(targets, axis=2).max())
    else:
        gstats = GradientStats.from_gradients(targets)
        max_norm = float(np.linalg.norm(targets, axis=1).max())
    config = dataclasses.replace(config, G=max_norm)
    cases = [case_from_name(c) if isinstance(c, str) else c for c in cases]
    params = [params_for(c.scheme, config, beta, c.phase_policy)
              for c in cases]
    grad_power = float(gstats.self_moment.mean())
    sums = _run_cases(config, beta, cases, params, trials, seed, workers,
                      grads=(targets, interferers), grad_power=grad_power,
                      dim=gstats.dim)
    p_global = gstats.global_power
    rows = []
    for case in cases:
        s = sums[case.name]
        mean = s["err"] / trials
        se = np.sqrt(max(s["err_sq"] / trials - mean**2, 0.0) / trials)
        cf = (None,) * 4
        if case.has_closed_form:
            b = closed_form_mse(case.scheme, config, beta, gstats)
            nb = b.normalized(gstats)
            cf = (nb.total, nb.computation, nb.interference, nb.noise)
        rows.append(MseRow(
            case=case.name,
            empirical=float(mean / p_global),
            stderr=float(se / p_global),
            emp_comp_interf=float(s["sig"] / trials / p_global),
            emp_noise=float(s["noise"] / trials / p_global),
            closed_form=cf[0], cf_computation=cf[1], cf_interference=cf[2],
            cf_noise=cf[3]))
    return rows


@dataclass
class ResultTable:
    """Rows of per-case metrics along one swept axis, plus provenance."""

    axis_name: str
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def values(self) -> list[float]:
        seen = []
        for r in self.rows:
            if r["axis"] not in seen:
                seen.append(r["axis"])
        return seen

    def column(self, case: str, metric: str) -> np.ndarray:
        vals = [r[metric] for r in self.rows if r["case"] == case]
        return np.array([np.nan if v is None else v for v in vals],
                        dtype=float)


def _config_at(base: SystemConfig, axis: str, value) -> SystemConfig:
    if axis == "N":
        return dataclasses.replace(base, N=int(value))
    if axis == "P":
        return dataclasses.replace(base, P_max=dbm_to_watt(float(value)))
    if axis == "K":
        return dataclasses.replace(base, K=int(value))
    if axis == "M":
        return dataclasses.replace(base, M=int(value))
    if axis == "bits":
        return base
    raise ValueError(f"unknown sweep axis {axis!r}; known: {SWEEP_AXES}")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def _recorded_grads(train_setup, cfg, rounds: int, mode: str, seed: int):
    """Gradient stream plus per-round interference for one sweep point."""
    from .training import record_gradient_stream
    setup = dataclasses.replace(train_setup, system=cfg, seed=seed)
    targets = record_gradient_stream(setup, rounds)
    T, _, D = targets.shape
    interferers = np.zeros((T, cfg.M, D))
    for t in range(T):
        interferers[t] = make_interference(
            mode, cfg.M, D, context=targets[t].mean(axis=0),
            stream=derive_stream(seed, ("recinterf", t)))
    return targets, interferers


def sweep(axis: str, values, base_config: SystemConfig, cases, trials: int,
          seed: int, workers: int = 1, grad_dim: int = 100,
          grad_power: float = 1.0, grad_cross_correlation: float = 0.5,
          interference_mode: str = "random_unit",
          grad_source: str = "fixed_synthetic", train_setup=None,
          recorded_rounds: int = 50) -> ResultTable:
    """Empirical-vs-closed-form table along one experiment axis.

    Geometry is drawn once per device count (so N/P/bits sweeps share one
    placement).  Gradients come either from one fixed synthetic set per
    (K, M) with exactly known statistics, or from a recorded training
    stream (``grad_source="recorded_training"``, which needs a
    ``train_setup``).  For the ``bits`` axis, values are quantizer
    resolutions with ``None`` (or ``inf``) meaning continuous phases.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one axis value")
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; known: {SWEEP_AXES}")
    if grad_source not in ("fixed_synthetic", "recorded_training"):
        raise ValueError(f"unknown gradient source {grad_source!r}")
    if grad_source == "recorded_training" and train_setup is None:
        raise ValueError("recorded_training needs a train_setup")
    case_names = [c if isinstance(c, str) else c.name for c in cases]
    table = ResultTable(axis_name=axis, metadata={
        "axis": axis, "values": [None if v is None else float(v) for v in values],
        "seed": seed, "trials": trials, "cases": case_names,
        "grad_source": grad_source, "grad_dim": grad_dim,
        "grad_power": grad_power,
        "grad_cross_correlation": grad_cross_correlation,
        "interference_mode": interference_mode,
        "config": dataclasses.asdict(base_config)})

    def sort_key(v):
        return np.inf if v is None else float(v)

    for value in sorted(values, key=sort_key):
        cfg = _config_at(base_config, axis, value)
        beta = draw_geometry(cfg, derive_stream(seed, ("geom", cfg.n_devices)))
        gstream = derive_stream(seed, ("gradK", cfg.K), ("gradM", cfg.M))
        if grad_source == "recorded_training":
            targets, interferers = _recorded_grads(
                train_setup, cfg, recorded_rounds, interference_mode, seed)
        else:
            targets, interferers = fixed_gradient_set(
                cfg.K, cfg.M, grad_dim, grad_power, grad_cross_correlation,
                gstream)
            if interference_mode == "zero_gradient_attack" and cfg.M:
                ref = targets.mean(axis=0)
                interferers = make_interference("zero_gradient_attack", cfg.M,
                                                grad_dim, context=ref)
        bits = None
        if axis == "bits" and value is not None and np.isfinite(value):
            bits = int(value)
        point_cases = [dataclasses.replace(case_from_name(n), phase_bits=bits)
                       for n in case_names]
        rows = empirical_mse(cfg, beta, point_cases, (targets, interferers),
                             trials, seed, workers)
        axis_value = (np.inf if (axis == "bits" and bits is None)
                      else float(value))
        for row in rows:
            table.rows.append({
                "axis": axis_value, "case": row.case,
                "empirical": row.empirical, "closed_form": row.closed_form,
                "stderr": row.stderr, "emp_comp_interf": row.emp_comp_interf,
                "emp_noise": row.emp_noise,
                "cf_computation": row.cf_computation,
                "cf_interference": row.cf_interference,
                "cf_noise": row.cf_noise})
    return table


def loglog_slope(table: ResultTable, case: str, metric: str) -> float:
    """Least-squares slope of log(metric) against log(axis value)."""
    x = np.array([r["axis"] for r in table.rows if r["case"] == case])
    y = table.column(case, metric)
    if x.shape[0] < 3:
        raise ValueError("slope needs at least 3 rows")
    if np.any(~np.isfinite(y)) or np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("slope needs positive finite values")
    coeffs = np.polyfit(np.log(x), np.log(y), 1)
    return float(coeffs[0])


# ---------------------------------------------------------------------------
# paired convergence runs
# ---------------------------------------------------------------------------

def compare_convergence(base: TrainSetup, aggregators: dict, seeds) -> dict:
    """Run every aggregator on identical data/init for each seed.

    Returns {name: {"traces": [RunTrace per seed], "final_mean": float,
    "final_sd": float}}.  Pairing holds because the data, partition,
    initialization, and mini-batch substreams depend only on the seed.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    out = {}
    for name, spec in aggregators.items():
        traces = []
        for seed in seeds:
            setup = dataclasses.replace(base, aggregator=spec, seed=seed)
            traces.append(train(setup))
        finals = np.array([t.final_accuracy for t in traces])
        out[name] = {"traces": traces,
                     "final_mean": float(finals.mean()),
                     "final_sd": float(finals.std(ddof=1)) if len(seeds) > 1
                     else 0.0}
    return out
