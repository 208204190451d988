"""
Monte Carlo validation of the closed forms on a committed, no-bypass substrate: bit-flip
materializations, compare detectors, repetition codes, the uncoded Gaussian baseline, the Fano
classification floor and output clipping.

Trials are split into fixed-size chunks with independent Philox streams (see limitstools.rng).
Each chunk reduces to a few sums; chunk results are combined in chunk order, so an estimate is
bit-identical for a given master seed whatever the parallelism hint.
"""
import asyncio
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.stats import binom

from limitstools.channels import AwgnSpec, BscSpec, WordMcuSpec, awgn_capacity, bsc_capacity
from limitstools.demand import ClassificationTask, fano_error_lower_bound, scalar_distortion_at_supply
from limitstools.errors import BoundViolationException, DomainException
from limitstools.rng import RNG_VERSION, bernoulli, check_seed, chunk_generator, chunk_sizes, polar_gaussian
from limitstools.tail import DetectorSpec, OutcomeModel
from limitstools.util import check_integer, check_probability


log = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 2 ** 16

Z_95 = 1.96
BOUND_SIGMAS = 3.0

# estimate substituted on undetected errors before clipping
ADVERSARIAL_OUTPUT = 1e6


@dataclass(frozen=True)
class TrialConfig:
    """
    Attributes:
    -----------
    trials : int
        number of independent trials, >= 1
    master_seed : int
        64-bit seed; every chunk stream derives from it
    parallelism_hint : int
        chunks run concurrently on this many worker threads when > 1; never changes results
    chunk_size : int
        trials per chunk; part of the stream definition
    """
    trials: int
    master_seed: int
    parallelism_hint: int = 1
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        object.__setattr__(self, 'master_seed', check_seed(self.master_seed))
        for name in ('trials', 'parallelism_hint', 'chunk_size'):
            object.__setattr__(self, name, check_integer(getattr(self, name), name))


@dataclass(frozen=True)
class EmpiricalEstimate:
    """
    Sample mean of a per-trial quantity with its standard error and 95% normal interval.
    """
    mean: float
    std_err: float
    ci95_low: float
    ci95_high: float
    trials: int

    @classmethod
    def from_sums(cls, count, total, total_sq):
        """
        Builds the estimate from the count, sum and sum of squares of the per-trial values.
        The sample variance uses the n - 1 denominator; a single trial has zero standard error.
        """
        count = int(count)
        if count < 1:
            raise DomainException('an estimate needs at least one trial')
        mean = total / count
        if count > 1:
            variance = max(total_sq - total * mean, 0.0) / (count - 1)
        else:
            variance = 0.0
        std_err = math.sqrt(variance / count)
        return cls(mean, std_err, mean - Z_95 * std_err, mean + Z_95 * std_err, count)

    def interval(self, sigmas=BOUND_SIGMAS):
        return (self.mean - sigmas * self.std_err, self.mean + sigmas * self.std_err)

    def contains(self, value, sigmas=BOUND_SIGMAS):
        """
        Whether value lies within sigmas standard errors of the mean.
        """
        low, high = self.interval(sigmas)
        return low <= value <= high


@dataclass(frozen=True)
class EmpiricalOutcomes:
    """
    Counts of OK, UE and ER trials; they partition the trials exactly.
    """
    ok: int
    ue: int
    er: int

    @property
    def trials(self):
        return self.ok + self.ue + self.er

    def _estimate(self, count):
        return EmpiricalEstimate.from_sums(self.trials, float(count), float(count))

    @property
    def p_ok(self):
        return self._estimate(self.ok)

    @property
    def p_ue(self):
        return self._estimate(self.ue)

    @property
    def p_er(self):
        return self._estimate(self.er)

    def as_model(self):
        n = self.trials
        return OutcomeModel(self.ok / n, self.ue / n, self.er / n)

    def contains(self, model, sigmas=BOUND_SIGMAS):
        """
        Whether every closed-form probability of model lies inside the matching empirical interval.
        """
        estimates = (self.p_ok, self.p_ue, self.p_er)
        return all(est.contains(p, sigmas) for est, p in zip(estimates, model.as_tuple()))


@dataclass(frozen=True)
class ClassificationResult:
    """
    Attributes:
    -----------
    error : EmpiricalEstimate
        empirical label error probability
    fano_bound : float
        converse floor at the pipeline's compute supply
    supply : float
        compute supply of the equal-split pipeline, bits/label
    stages : int
    copies : tuple[tuple[int]]
        repetition copies per label bit, one tuple per stage
    master_seed : int
    """
    error: EmpiricalEstimate
    fano_bound: float
    supply: float
    stages: int
    copies: tuple
    master_seed: int


@dataclass(frozen=True)
class ClippedResult:
    """
    Attributes:
    -----------
    mse : EmpiricalEstimate
        overall MSE of the clipped estimator
    ue_mse : EmpiricalEstimate
        MSE over the corrupted trials only, None when no trial was corrupted
    bound : float
        2 E[X^2 | UE] + 2 A^2
    master_seed : int
    """
    mse: EmpiricalEstimate
    ue_mse: EmpiricalEstimate
    bound: float
    master_seed: int


async def _gather_chunks(config, kernel, jobs):
    semaphore = asyncio.Semaphore(config.parallelism_hint)

    async def run(index, size):
        async with semaphore:
            return await asyncio.to_thread(_run_chunk, config, kernel, index, size)

    return await asyncio.gather(*(run(index, size) for index, size in jobs))


def _run_chunk(config, kernel, index, size):
    return kernel(chunk_generator(config.master_seed, index), size)


def run_chunks(config, kernel):
    """
    Runs kernel(gen, size) over every chunk of config.trials.

    Returns:
    --------
    parts : list
        kernel results in chunk order
    """
    jobs = list(enumerate(chunk_sizes(config.trials, config.chunk_size)))
    log.debug('%d trials in %d chunk(s), rng %s, seed %d, hint %d', config.trials, len(jobs), RNG_VERSION,
              config.master_seed, config.parallelism_hint)
    if config.parallelism_hint > 1 and len(jobs) > 1:
        return list(asyncio.run(_gather_chunks(config, kernel, jobs)))
    return [_run_chunk(config, kernel, index, size) for index, size in jobs]


def _sums(values):
    return (values.size, float(np.sum(values)), float(np.sum(values * values)))


def _reduce(parts):
    """
    Combines per-chunk (count, sum, sum of squares) triples, in order.
    """
    count = sum(p[0] for p in parts)
    return EmpiricalEstimate.from_sums(count, math.fsum(p[1] for p in parts), math.fsum(p[2] for p in parts))


def simulate_materializations(bits, epsilon, seed, chunk_size=DEFAULT_CHUNK_SIZE):
    """
    Stores and retrieves every bit through a BSC(epsilon) primitive.

    Parameters:
    -----------
    bits : array-like of 0/1
    epsilon : float
        flip probability in [0, 0.5)
    seed : int
        master seed; chunks run over bit positions

    Returns:
    --------
    flipped : numpy.ndarray
        uint8 vector Z = U xor N with N i.i.d. Bern(epsilon)
    """
    BscSpec(epsilon)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise DomainException('bits must be 0 or 1')
    bits = bits.astype(np.uint8)
    out = np.empty_like(bits)
    start = 0
    for index, size in enumerate(chunk_sizes(bits.size, chunk_size)):
        flips = bernoulli(chunk_generator(seed, index), epsilon, size)
        out[start:start + size] = bits[start:start + size] ^ flips.astype(np.uint8)
        start += size
    return out


def _pattern_ids(gen, spec, size):
    """
    Draws error pattern ids from a word-level MCU law: 0 is the zero pattern, nonzero ids number
    the class patterns consecutively.
    """
    mult = np.array([c.multiplicity for c in spec.classes], dtype=np.int64)
    offsets = np.concatenate(([1], 1 + np.cumsum(mult[:-1])))
    upset = bernoulli(gen, spec.alpha, size)
    cls = gen.choice(mult.size, size=size, p=spec.probs / spec.probs.sum())
    within = gen.integers(0, mult[cls])
    return np.where(upset, offsets[cls] + within, 0)


def simulate_dup_compare(spec, replicas, trials, seed, theta=0.0, parallelism_hint=1):
    """
    Duplication-and-compare with r replicas: each trial draws r error patterns (one shared pattern
    with probability theta for r = 2) and declares ER unless all replicas agree.

    Parameters:
    -----------
    spec : WordMcuSpec or BscSpec
        a BscSpec is reduced to the single-bit MCU law

    Returns:
    --------
    outcomes : EmpiricalOutcomes
    """
    if isinstance(spec, BscSpec):
        spec = WordMcuSpec.from_bsc(spec.epsilon)
    detector = DetectorSpec(replicas, theta)
    r = detector.replicas
    config = TrialConfig(trials, seed, parallelism_hint)

    def kernel(gen, size):
        ids = _pattern_ids(gen, spec, size * r).reshape(size, r)
        shared = bernoulli(gen, detector.common_mode_theta, size)
        ids[shared] = ids[shared, :1]
        ok = np.all(ids == 0, axis=1)
        agree = np.all(ids == ids[:, :1], axis=1)
        return int(np.count_nonzero(ok)), int(np.count_nonzero(agree & ~ok))

    parts = run_chunks(config, kernel)
    ok = sum(p[0] for p in parts)
    ue = sum(p[1] for p in parts)
    outcomes = EmpiricalOutcomes(ok, ue, config.trials - ok - ue)
    log.debug('dup-compare r=%d: ok=%d ue=%d er=%d', r, outcomes.ok, outcomes.ue, outcomes.er)
    return outcomes


def _repetition_copies(budget_m, message_bits):
    k = check_integer(message_bits, 'message_bits')
    if budget_m < k:
        raise DomainException(f'budget_m = {budget_m} cannot hold one copy of each of {k} bits')
    return k, int(math.floor(budget_m / k))


def _majority_errors(gen, copies, epsilon, shape):
    """
    Per-bit majority decoding errors over `copies` BSC materializations, ties broken by a fair coin.
    Zero copies always tie.
    """
    flips = gen.binomial(copies, epsilon, size=shape)
    coin = bernoulli(gen, 0.5, shape)
    return (2 * flips > copies) | ((2 * flips == copies) & coin)


def majority_bit_error(copies, epsilon):
    """
    Exact majority-vote error of one bit stored `copies` times through BSC(epsilon).
    """
    BscSpec(epsilon)
    if copies == 0:
        return 0.5
    half = copies // 2
    dist = binom(copies, epsilon)
    p = float(dist.sf(half))
    if copies % 2 == 0:
        p += 0.5 * float(dist.pmf(half))
    return p


def repetition_block_error(message_bits, budget_m, epsilon):
    """
    Exact block error of the floor(m / k)-fold repetition code with majority decoding:
    1 - (1 - p_bit)^k.
    """
    k, copies = _repetition_copies(budget_m, message_bits)
    p_bit = majority_bit_error(copies, epsilon)
    if p_bit >= 1.0:
        return 1.0
    return -math.expm1(k * math.log1p(-p_bit))


def simulate_repetition_code(message_bits, budget_m, epsilon, trials, seed, parallelism_hint=1):
    """
    Empirical block error of k message bits each stored floor(m / k) times and majority decoded.

    Returns:
    --------
    estimate : EmpiricalEstimate
    """
    BscSpec(epsilon)
    k, copies = _repetition_copies(budget_m, message_bits)
    config = TrialConfig(trials, seed, parallelism_hint)

    def kernel(gen, size):
        errors = _majority_errors(gen, copies, epsilon, (size, k))
        return _sums(np.any(errors, axis=1).astype(float))

    estimate = _reduce(run_chunks(config, kernel))
    log.debug('repetition k=%d copies=%d eps=%g: block error %.6g +- %.2g', k, copies, epsilon, estimate.mean,
              estimate.std_err)
    return estimate


def uncoded_gaussian_mse(src, snr):
    """
    Closed form of the bandwidth-matched analog baseline: floor + (var_x - floor) 2^(-2 C_ch).
    """
    return scalar_distortion_at_supply(src, awgn_capacity(AwgnSpec(snr)))


def simulate_uncoded_gaussian(src, snr, trials, seed, parallelism_hint=1):
    """
    Symbol-by-symbol analog pipeline: the sufficient statistic E[X|Y] is scaled to power P = snr,
    sent over a unit-noise AWGN channel and estimated by linear MMSE.

    Parameters:
    -----------
    src : ScalarGaussianSource
    snr : float
        > 0

    Returns:
    --------
    estimate : EmpiricalEstimate
        squared-error estimate of X
    """
    AwgnSpec(snr)
    config = TrialConfig(trials, seed, parallelism_hint)
    gain_y = src.var_x / (src.var_x + src.var_v)
    lam = src.signal_variance
    scale_tx = math.sqrt(snr / lam)
    scale_rx = math.sqrt(snr * lam) / (snr + 1.0)
    sd_x, sd_v = math.sqrt(src.var_x), math.sqrt(src.var_v)

    def kernel(gen, size):
        z = polar_gaussian(gen, 3 * size)
        x = sd_x * z[:size]
        y = x + sd_v * z[size:2 * size]
        received = scale_tx * gain_y * y + z[2 * size:]
        err = x - scale_rx * received
        return _sums(err * err)

    estimate = _reduce(run_chunks(config, kernel))
    log.debug('uncoded gaussian snr=%g: MSE %.6g +- %.2g (closed form %.6g)', snr, estimate.mean, estimate.std_err,
              uncoded_gaussian_mse(src, snr))
    return estimate


def _stage_copies(label_bits, stage_budget):
    """
    Spreads floor(stage_budget) primitives over the label bits, the remainder going to the first bits.
    """
    total = int(math.floor(stage_budget))
    base, extra = divmod(total, label_bits)
    return np.array([base + 1] * extra + [base] * (label_bits - extra), dtype=np.int64)


def simulate_classification(label_bits, budget_m, epsilon, trials, seed, stages=1, strict=True,
                            parallelism_hint=1):
    """
    Uniform q-bit labels pass through `stages` serial BSC(epsilon) stages, each holding the label in a
    repetition code of budget m / stages and majority decoding it before the next stage. One stage
    is task-direct processing; two stages are the symmetric hard-separation pipeline.

    The empirical error must not fall below the Fano floor at the pipeline's compute supply
    (m / stages) C_gate by more than three standard errors.

    Raises:
    -------
    BoundViolationException
        when strict and the empirical error undercuts the converse
    """
    q = check_integer(label_bits, 'label_bits')
    stages = check_integer(stages, 'stages')
    if not budget_m >= 0:
        raise DomainException(f'budget_m must be nonnegative, got {budget_m}')
    spec = BscSpec(epsilon)
    config = TrialConfig(trials, seed, parallelism_hint)
    copies = _stage_copies(q, budget_m / stages)

    def kernel(gen, size):
        labels = gen.integers(0, 2, size=(size, q), dtype=np.uint8)
        decoded = labels.copy()
        for _ in range(stages):
            decoded ^= _majority_errors(gen, copies, epsilon, (size, q)).astype(np.uint8)
        return _sums(np.any(decoded != labels, axis=1).astype(float))

    error = _reduce(run_chunks(config, kernel))
    supply = budget_m / stages * bsc_capacity(spec)
    bound = fano_error_lower_bound(ClassificationTask(q), supply)
    log.debug('classification q=%d stages=%d m=%g: P_e %.6g +- %.2g, Fano floor %.6g', q, stages, budget_m,
              error.mean, error.std_err, bound)
    if strict and error.mean < bound - BOUND_SIGMAS * error.std_err - 1e-12:
        raise BoundViolationException(f'empirical P_e {error.mean:.6g} undercuts the Fano floor {bound:.6g} '
                                      f'(q={q}, m={budget_m}, eps={epsilon}, stages={stages}, '
                                      f'master_seed={seed})')
    per_stage = tuple(int(c) for c in copies)
    return ClassificationResult(error, bound, supply, int(stages), (per_stage,) * int(stages), int(seed))


def simulate_clipped_estimator(src, corruption_prob, clip_range, trials, seed, strict=True,
                               parallelism_hint=1):
    """
    Linear MMSE estimation of X from Y whose output is, with probability corruption_prob, replaced by
    an adversarial value of magnitude ADVERSARIAL_OUTPUT opposite in sign to X, then clipped to
    [-A, A]. The corrupted trials must satisfy E[(X - Xhat)^2 | UE] <= 2 E[X^2 | UE] + 2 A^2, with
    E[X^2 | UE] = var_x since corruption is independent of X.

    Raises:
    -------
    BoundViolationException
        when strict and the conditional UE MSE exceeds the bound by more than three standard errors
    """
    check_probability(corruption_prob, 'corruption_prob')
    if not clip_range > 0:
        raise DomainException(f'clip_range must be positive, got {clip_range}')
    config = TrialConfig(trials, seed, parallelism_hint)
    gain_y = src.var_x / (src.var_x + src.var_v)
    sd_x, sd_v = math.sqrt(src.var_x), math.sqrt(src.var_v)

    def kernel(gen, size):
        z = polar_gaussian(gen, 2 * size)
        x = sd_x * z[:size]
        estimate = gain_y * (x + sd_v * z[size:])
        ue = bernoulli(gen, corruption_prob, size)
        estimate = np.where(ue, np.where(x >= 0, -ADVERSARIAL_OUTPUT, ADVERSARIAL_OUTPUT), estimate)
        err = x - np.clip(estimate, -clip_range, clip_range)
        err2 = err * err
        return _sums(err2), _sums(err2[ue])

    parts = run_chunks(config, kernel)
    mse = _reduce([p[0] for p in parts])
    ue_parts = [p[1] for p in parts if p[1][0] > 0]
    ue_mse = _reduce(ue_parts) if ue_parts else None
    bound = 2.0 * src.var_x + 2.0 * clip_range ** 2
    if ue_mse is not None:
        log.debug('clipping A=%g: UE MSE %.6g +- %.2g vs bound %.6g over %d UE trials', clip_range, ue_mse.mean,
                  ue_mse.std_err, bound, ue_mse.trials)
        if strict and ue_mse.mean > bound + BOUND_SIGMAS * ue_mse.std_err:
            raise BoundViolationException(f'conditional UE MSE {ue_mse.mean:.6g} exceeds the clipping bound '
                                          f'{bound:.6g} (A={clip_range}, master_seed={seed})')
    return ClippedResult(mse, ue_mse, bound, int(seed))
