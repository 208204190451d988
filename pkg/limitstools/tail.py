"""
OK / ER / UE outcome calculus for detector-guarded interfaces: distortion and tail decompositions,
duplication-and-compare and hash detectors, message-level composition and replica sizing.
"""
from dataclasses import dataclass, fields
import logging
import math

import numpy as np

from limitstools.errors import DomainException, MissingBranchStatException, UnsupportedDetectorException
from limitstools.util import check_integer, check_nonnegative, check_probability


log = logging.getLogger(__name__)

MAX_REPLICAS = 64
UNDERFLOW_THRESHOLD = 1e-300
SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class OutcomeModel:
    """
    Probabilities of the three outcomes of a guarded computation: correct (OK), undetected
    error (UE) and detected error handled by the fallback (ER).
    """
    p_ok: float
    p_ue: float
    p_er: float

    def __post_init__(self):
        for f in fields(self):
            check_probability(getattr(self, f.name), f.name)
        total = self.p_ok + self.p_ue + self.p_er
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise DomainException(f'outcome probabilities must sum to 1, got {total!r}')

    @classmethod
    def from_ok_ue(cls, p_ok, p_ue):
        """
        Completes (p_ok, p_ue) with p_er = 1 - p_ok - p_ue, absorbing rounding below zero.
        """
        p_er = 1.0 - p_ok - p_ue
        if -SUM_TOLERANCE <= p_er < 0:
            p_er = 0.0
        return cls(p_ok, p_ue, p_er)

    def as_tuple(self):
        return (self.p_ok, self.p_ue, self.p_er)


@dataclass(frozen=True)
class BranchStats:
    """
    Per-outcome statistics of the output distortion.

    Attributes:
    -----------
    d_ok, d_fb, d_ue : float
        conditional mean distortions on OK, fallback and UE; d_ue may be unknown (None)
    delta_ok, delta_fb : float
        conditional probabilities of exceeding the tail threshold on OK and fallback
    beta_ue : float
        conditional probability of exceeding the threshold on UE
    """
    d_ok: float = 0.0
    d_fb: float = 0.0
    d_ue: float = None
    delta_ok: float = None
    delta_fb: float = None
    beta_ue: float = None

    def __post_init__(self):
        for name in ('d_ok', 'd_fb', 'd_ue'):
            if getattr(self, name) is not None:
                check_nonnegative(getattr(self, name), name)
        for name in ('delta_ok', 'delta_fb', 'beta_ue'):
            if getattr(self, name) is not None:
                check_probability(getattr(self, name), name)

    def require(self, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise MissingBranchStatException(f'branch statistic(s) {", ".join(missing)} required')


@dataclass(frozen=True)
class DetectorSpec:
    """
    r-replica compare detector; common_mode_theta is the probability that both replicas share one fault.
    """
    replicas: int = 2
    common_mode_theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'replicas', check_integer(self.replicas, 'replicas', minimum=2))
        check_probability(self.common_mode_theta, 'common_mode_theta')
        if self.common_mode_theta > 0 and self.replicas > 2:
            raise UnsupportedDetectorException('common-mode faults are modelled for r = 2 only')


@dataclass(frozen=True)
class InterfaceSpec:
    """
    Digital interface message of message_bits bits carried as words of word_bits bits.
    """
    message_bits: int
    word_bits: int

    def __post_init__(self):
        for name in ('message_bits', 'word_bits'):
            object.__setattr__(self, name, check_integer(getattr(self, name), name))
        if self.message_bits % self.word_bits:
            raise DomainException(f'word_bits {self.word_bits} must divide message_bits {self.message_bits}')

    @property
    def word_count(self):
        return self.message_bits // self.word_bits


@dataclass(frozen=True)
class TailSandwich:
    lower: float
    upper: float
    upper_block: float


@dataclass(frozen=True)
class ReplicaSizing:
    """
    Attributes:
    -----------
    replicas : int
        smallest r meeting the exact message-level target, None when no r <= MAX_REPLICAS does
    per_word_replicas : int
        smallest r meeting the union-bound per-word target, None when unsatisfiable
    target : float
        eps / T
    p_ue : float
        message-level p_ue at replicas (or at MAX_REPLICAS when unsatisfiable)
    """
    replicas: int
    per_word_replicas: int
    target: float
    p_ue: float

    @property
    def satisfiable(self):
        return self.replicas is not None


def mse_three_outcome(model, stats):
    """
    D = p_ok D_OK + p_er D_FB + p_ue D_UE
    """
    if stats.d_ue is None:
        if model.p_ue > 0:
            raise MissingBranchStatException(
                'd_ue is unknown; bound it with clipping_ue_bound(clip_range, ue_second_moment)')
        return model.p_ok * stats.d_ok + model.p_er * stats.d_fb
    return model.p_ok * stats.d_ok + model.p_er * stats.d_fb + model.p_ue * stats.d_ue


def tail_sandwich(model, stats, block_len):
    """
    beta_UE p_ue <= per-instance excess probability <= p_ok delta_OK + p_er delta_FB + p_ue,
    with the block bound T times the upper side.
    """
    stats.require('delta_ok', 'delta_fb', 'beta_ue')
    if block_len < 1:
        raise DomainException(f'block_len must be >= 1, got {block_len}')
    lower = stats.beta_ue * model.p_ue
    upper = (1.0 - model.p_ue - model.p_er) * stats.delta_ok + model.p_er * stats.delta_fb + model.p_ue
    return TailSandwich(lower, upper, block_len * upper)


def markov_tail_bound(model, stats, threshold, d_ue_ub=None):
    """
    Markov-type excess-distortion bound. Without a UE mean bound the UE branch counts fully:
    p_ue + (p_ok D_OK + p_er D_FB) / D0; with one, (p_ok D_OK + p_er D_FB + p_ue d_ue_ub) / D0.
    """
    if not threshold > 0:
        raise DomainException(f'threshold must be positive, got {threshold}')
    safe = model.p_ok * stats.d_ok + model.p_er * stats.d_fb
    if d_ue_ub is None:
        return model.p_ue + safe / threshold
    check_nonnegative(d_ue_ub, 'd_ue_ub')
    return (safe + model.p_ue * d_ue_ub) / threshold


def block_markov_bound(mean_distortion, threshold):
    if not threshold > 0:
        raise DomainException(f'threshold must be positive, got {threshold}')
    check_nonnegative(mean_distortion, 'mean_distortion')
    return mean_distortion / threshold


def clipping_ue_bound(clip_range, ue_second_moment):
    """
    E[(X - Xhat)^2 | UE] <= 2 E[X^2 | UE] + 2 A^2 for an estimator clipped to [-A, A].
    """
    check_nonnegative(clip_range, 'clip_range')
    check_nonnegative(ue_second_moment, 'ue_second_moment')
    return 2.0 * ue_second_moment + 2.0 * clip_range ** 2


def deconditioned_ue_moment(second_moment, p_ue):
    """
    Upper bound E[X^2] / p_ue on E[X^2 | UE] when only the unconditional moment is known.
    """
    check_nonnegative(second_moment, 'second_moment')
    check_probability(p_ue, 'p_ue', low_open=True)
    return second_moment / p_ue


def dup_compare_outcomes(error_pmf, detector):
    """
    Outcomes of r replicas under additive error patterns, declaring ER unless all replicas agree.

    Parameters:
    -----------
    error_pmf : array-like
        pmf over error patterns, index 0 being the all-zero pattern
    detector : DetectorSpec

    Returns:
    --------
    model : OutcomeModel
    """
    pmf = np.asarray(error_pmf, dtype=float)
    if pmf.ndim != 1 or pmf.size < 1 or np.any(pmf < 0) or abs(pmf.sum() - 1.0) > SUM_TOLERANCE:
        raise DomainException('error_pmf must be a nonnegative vector summing to 1')
    r = detector.replicas
    theta = detector.common_mode_theta
    p0 = float(pmf[0])
    agree_nonzero = math.fsum(pmf[1:] ** r)
    p_ok = (1.0 - theta) * p0 ** r + theta * p0
    p_ue = (1.0 - theta) * agree_nonzero + theta * (1.0 - p0)
    return OutcomeModel.from_ok_ue(p_ok, p_ue)


def mcu_dup_outcomes(spec, replicas, theta=0.0):
    """
    Closed form of dup_compare_outcomes for a word-level MCU law:
    p_ue = alpha^r sum_c P_c^r / N_c^(r-1), p_ok = (1 - alpha)^r (mixed with the common-mode terms for r = 2).
    """
    detector = DetectorSpec(replicas, theta)
    r = detector.replicas
    alpha = spec.alpha
    agree_nonzero = alpha ** r * float(np.sum(spec.probs ** r / spec.multiplicities ** (r - 1)))
    p_ok = (1.0 - theta) * (1.0 - alpha) ** r + theta * (1.0 - alpha)
    p_ue = (1.0 - theta) * agree_nonzero + theta * alpha
    return OutcomeModel.from_ok_ue(p_ok, p_ue)


def message_outcomes(word_model, word_count):
    """
    Composes independent per-word outcomes into message outcomes: the message is OK when every word is,
    UE when no word is flagged but some word is wrong, and ER otherwise.

    Computed in the log domain: p_ue = (a + b)^M (1 - (a / (a + b))^M) with a = p_ok, b = p_ue per word.
    """
    M = check_integer(word_count, 'word_count')
    a, b, e = word_model.as_tuple()
    if M == 1:
        return word_model
    # (a + b)^M = (1 - e)^M
    log_pass = M * math.log1p(-e) if e < 1 else -math.inf
    if a == 0:
        p_ok = 0.0
        p_ue = b ** M
    else:
        log_ok = M * math.log(a)
        if log_ok < math.log(UNDERFLOW_THRESHOLD):
            log.debug('p_ok^M underflows (log %.6g) for M=%d', log_ok, M)
        p_ok = math.exp(log_ok)
        p_ue = math.exp(log_pass) * -math.expm1(-M * math.log1p(b / a)) if b > 0 else 0.0
    p_er = -math.expm1(log_pass) if e < 1 else 1.0
    return OutcomeModel(p_ok, p_ue, p_er)


def hash_ue_bound(tag_bits):
    """
    2-universal h-bit tags miss a corrupted message with probability at most 2^-h.
    """
    return 2.0 ** (-check_integer(tag_bits, 'tag_bits'))


def hash_bits_for_target(block_len, budget):
    """
    h = ceil(log2(T / eps)), at least 1.
    """
    if block_len < 1:
        raise DomainException(f'block_len must be >= 1, got {block_len}')
    check_probability(budget, 'budget', low_open=True, high_open=True)
    return max(1, math.ceil(math.log2(block_len / budget)))


def mcu_block_tail_bound(spec, replicas, block_len, stats):
    """
    Block excess-distortion bound T (p_ok delta_OK + p_er delta_FB + p_ue) for r-replica compare
    under a word-level MCU law.
    """
    stats.require('delta_ok', 'delta_fb')
    model = mcu_dup_outcomes(spec, replicas)
    return block_len * (model.p_ok * stats.delta_ok + model.p_er * stats.delta_fb + model.p_ue)


def size_replicas_for_tail(spec, iface, block_len, budget):
    """
    Smallest replica count whose message-level p_ue meets eps / T in the D0-safe regime, and the
    conservative per-word count from the union bound (target eps / (T M_if)).

    Returns:
    --------
    sizing : ReplicaSizing
        replicas is None when no r <= MAX_REPLICAS suffices
    """
    check_probability(budget, 'budget', low_open=True, high_open=True)
    if block_len < 1:
        raise DomainException(f'block_len must be >= 1, got {block_len}')
    target = budget / block_len
    per_word_target = target / iface.word_count
    replicas = per_word = p_ue = None
    for r in range(2, MAX_REPLICAS + 1):
        p_ue = message_outcomes(mcu_dup_outcomes(spec, r), iface.word_count).p_ue
        if p_ue <= target:
            replicas = r
            break
    for r in range(2, MAX_REPLICAS + 1):
        if mcu_dup_outcomes(spec, r).p_ue <= per_word_target:
            per_word = r
            break
    if replicas is None:
        log.info('no replica count up to %d meets p_ue <= %.3g', MAX_REPLICAS, target)
    return ReplicaSizing(replicas, per_word, target, p_ue)
