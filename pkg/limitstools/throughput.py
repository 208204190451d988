"""
Per-second resources mapped to per-instance budgets, and the throughput limits that follow.
"""
from dataclasses import dataclass
import logging
import math

from limitstools.errors import DomainException
from limitstools.demand import conditional_variance
from limitstools.util import INFEASIBLE, UNBOUNDED, check_integer, check_nonnegative, usable_capacity


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerSecondBudget:
    """
    Attributes:
    -----------
    channel_uses_per_sec : float
        B > 0
    primitives_per_sec : float
        G > 0
    """
    channel_uses_per_sec: float
    primitives_per_sec: float

    def __post_init__(self):
        if not self.channel_uses_per_sec > 0 or not self.primitives_per_sec > 0:
            raise DomainException('per-second budgets must be positive')

    def channel_supply(self, c_ch):
        """
        S_ch = B C_ch, bits/s
        """
        return self.channel_uses_per_sec * usable_capacity(c_ch)

    def compute_supply(self, c_gate):
        """
        S_comp = G C_gate, bits/s
        """
        return self.primitives_per_sec * usable_capacity(c_gate)


@dataclass(frozen=True)
class ThroughputBound:
    """
    Attributes:
    -----------
    compute_bound : float
        samples/s allowed by the primitive budget
    channel_bound : float
        samples/s allowed by the channel
    lambda_max : float
        headline bound, the smaller of the two
    binding : str
        'channel' or 'compute' (lexicographic on ties)
    """
    compute_bound: float
    channel_bound: float
    lambda_max: float
    binding: str


def _check_rate(lam):
    if lam is None or not lam > 0:
        raise DomainException(f'lambda must be positive, got {lam}')


def per_instance_budgets(ps, lam):
    """
    (n, m) = (B / lambda, G / lambda)
    """
    _check_rate(lam)
    return ps.channel_uses_per_sec / lam, ps.primitives_per_sec / lam


def distortion_floor_vs_lambda(src, ps, c_ch, c_gate, lam):
    """
    D(lambda) >= floor + (var_x - floor) 2^(-(2 / lambda) min{S_ch, S_comp}).
    """
    _check_rate(lam)
    floor = conditional_variance(src)
    supply = min(ps.channel_supply(c_ch), ps.compute_supply(c_gate))
    return floor + (src.var_x - floor) * 2.0 ** (-2.0 * supply / lam)


def lambda_max_estimation(src, target_distortion, ps, c_ch, c_gate, hard_separation=False):
    """
    Largest sample rate meeting an MSE target:
    2 min{S_ch, S_comp} / log2((var_x - floor) / (D - floor)), with S_comp halved under a symmetric
    hard-separation split.

    Returns:
    --------
    lambda_max : float
        samples/s; UNBOUNDED (+inf) once the target reaches the prior variance (the prior mean
        meets it with no bits sent)
    """
    floor = conditional_variance(src)
    if target_distortion <= floor:
        raise DomainException(f'target distortion {target_distortion} is at or below the MMSE floor {floor}')
    if target_distortion >= src.var_x:
        return UNBOUNDED
    compute = ps.compute_supply(c_gate) / (2.0 if hard_separation else 1.0)
    supply = min(ps.channel_supply(c_ch), compute)
    lam = 2.0 * supply / math.log2((src.var_x - floor) / (target_distortion - floor))
    log.debug('lambda_max %.10g at D=%g (supply %.10g bits/s)', lam, target_distortion, supply)
    return lam


def lambda_max_with_replicas(demand_bits, replicas, interface_bits, ps, c_gate, c_ch):
    """
    Throughput penalty of r-fold replication of an L_if-bit interface: the compute side allows
    lambda <= G / ((r - 1) L_if + R / C_gate), the channel side lambda <= B C_ch / R.

    Returns:
    --------
    bound : ThroughputBound
    """
    check_nonnegative(demand_bits, 'demand_bits')
    check_nonnegative(interface_bits, 'interface_bits')
    replicas = check_integer(replicas, 'replicas')
    c_gate = usable_capacity(c_gate)
    overhead = (replicas - 1) * interface_bits
    if demand_bits == 0:
        per_sample = overhead
    elif c_gate == 0:
        per_sample = INFEASIBLE
    else:
        per_sample = overhead + demand_bits / c_gate
    compute_bound = UNBOUNDED if per_sample == 0 else ps.primitives_per_sec / per_sample
    channel_bound = UNBOUNDED if demand_bits == 0 else ps.channel_supply(c_ch) / demand_bits
    if channel_bound < compute_bound:
        lam, binding = channel_bound, 'channel'
    else:
        lam, binding = compute_bound, 'compute' if compute_bound < channel_bound else 'channel'
    return ThroughputBound(compute_bound, channel_bound, lam, binding)
