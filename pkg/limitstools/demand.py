"""
Task demand: indirect (remote) rate-distortion for linear-Gaussian observation models,
reverse water-filling for diagonal vector sources, the uncoded analog baseline and the
Fano classification demand.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from limitstools.errors import DomainException
from limitstools.util import INFEASIBLE, check_nonnegative


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalarGaussianSource:
    """
    X ~ N(0, var_x) observed as Y = X + V, V ~ N(0, var_v).

    Attributes:
    -----------
    var_x : float
        prior variance, > 0
    var_v : float
        observation noise variance, >= 0
    """
    var_x: float
    var_v: float

    def __post_init__(self):
        if not self.var_x > 0:
            raise DomainException(f'var_x must be positive, got {self.var_x}')
        check_nonnegative(self.var_v, 'var_v')

    @property
    def mmse_floor(self):
        return conditional_variance(self)

    @property
    def signal_variance(self):
        """
        Variance of the sufficient statistic E[X|Y]: var_x - var(X|Y).
        """
        return self.var_x ** 2 / (self.var_x + self.var_v)


@dataclass(frozen=True)
class DiagonalGaussianSource:
    """
    p independent coordinates with prior variances var_x[i] and observation noise var_v[i].
    Only commuting (diagonal) covariances are supported.
    """
    var_x: tuple
    var_v: tuple

    def __post_init__(self):
        var_x = tuple(float(v) for v in self.var_x)
        var_v = tuple(float(v) for v in self.var_v)
        if len(var_x) != len(var_v) or not var_x:
            raise DomainException('var_x and var_v must be non-empty and of equal length')
        if any(not v > 0 for v in var_x):
            raise DomainException('every var_x entry must be positive')
        if any(v < 0 for v in var_v):
            raise DomainException('every var_v entry must be nonnegative')
        object.__setattr__(self, 'var_x', var_x)
        object.__setattr__(self, 'var_v', var_v)

    @classmethod
    def isotropic(cls, p, var_x, var_v):
        return cls((var_x,) * p, (var_v,) * p)

    @property
    def dimension(self):
        return len(self.var_x)

    @property
    def lambdas(self):
        """
        Mode variances of the sufficient statistic, var_x^2 / (var_x + var_v).
        """
        x = np.array(self.var_x)
        v = np.array(self.var_v)
        return x ** 2 / (x + v)

    @property
    def mmse_floor(self):
        x = np.array(self.var_x)
        v = np.array(self.var_v)
        return float(np.sum(x * v / (x + v)))

    @property
    def prior_distortion(self):
        """
        Distortion at zero rate: floor + sum of mode variances.
        """
        return self.mmse_floor + float(np.sum(self.lambdas))


@dataclass(frozen=True)
class ClassificationTask:
    """
    Uniform label carrying label_bits = log2 M bits.
    """
    label_bits: float

    def __post_init__(self):
        if not self.label_bits > 0:
            raise DomainException(f'label_bits must be positive, got {self.label_bits}')


def conditional_variance(src):
    return src.var_x * src.var_v / (src.var_x + src.var_v)


def scalar_demand(src, distortion):
    """
    R_{X|Y}(D) for the scalar Gaussian model.

    Returns:
    --------
    rate : float
        bits/sample; INFEASIBLE (+inf) at or below the MMSE floor, 0 at or above var_x
    """
    if not distortion > 0:
        raise DomainException(f'distortion must be positive, got {distortion}')
    floor = conditional_variance(src)
    if distortion <= floor:
        return INFEASIBLE
    if distortion >= src.var_x:
        return 0.0
    return 0.5 * math.log2((src.var_x - floor) / (distortion - floor))


def scalar_distortion_at_supply(src, supply):
    """
    Smallest distortion compatible with an information supply (bits/sample):
    floor + (var_x - floor) 2^(-2 supply).
    """
    check_nonnegative(supply, 'supply')
    floor = conditional_variance(src)
    return floor + (src.var_x - floor) * 2.0 ** (-2.0 * supply)


def water_level(src, rate):
    """
    Reverse water-filling level nu for a total rate (bits/vector).

    The active set is the k largest modes; nu is the geometric mean of the active modes
    scaled by 2^(-2R/k), and the first k whose level clears the next mode is the solution.

    Returns:
    --------
    nu : float
        water level; max mode variance at rate 0
    """
    check_nonnegative(rate, 'rate')
    lambdas = np.sort(src.lambdas)[::-1]
    if rate == 0:
        return float(lambdas[0])
    if math.isinf(rate):
        return 0.0
    log_sum = 0.0
    for k in range(1, len(lambdas) + 1):
        log_sum += math.log(lambdas[k - 1])
        nu = math.exp((log_sum - 2.0 * rate * math.log(2.0)) / k)
        if k == len(lambdas) or nu >= lambdas[k]:
            log.debug('water level %.12g with %d active modes at R=%g', nu, k, rate)
            return nu
    raise AssertionError('unreachable')


def waterfill_distortion(src, rate):
    """
    D(R) = floor + sum_i min(nu, lambda_i) with the water level of water_level().
    """
    check_nonnegative(rate, 'rate')
    if rate == 0:
        return src.prior_distortion
    nu = water_level(src, rate)
    return src.mmse_floor + float(np.sum(np.minimum(nu, src.lambdas)))


def waterfill_rate(src, distortion):
    """
    Inverse of waterfill_distortion.

    Returns:
    --------
    rate : float
        bits/vector; INFEASIBLE at or below the MMSE floor, 0 at or above the prior distortion
    """
    if not distortion > 0:
        raise DomainException(f'distortion must be positive, got {distortion}')
    floor = src.mmse_floor
    if distortion <= floor:
        return INFEASIBLE
    if distortion >= src.prior_distortion:
        return 0.0
    excess = distortion - floor
    lambdas = np.sort(src.lambdas)
    p = len(lambdas)
    # sum_i min(nu, lambda_i) is piecewise linear in nu with breakpoints at the sorted modes
    below = 0.0
    for j in range(p):
        nu = (excess - below) / (p - j)
        if nu <= lambdas[j]:
            break
        below += lambdas[j]
    active = lambdas[lambdas > nu]
    return 0.5 * float(np.sum(np.log2(active / nu)))


def two_mode_threshold(src):
    """
    Rate R0 = 0.5 log2(lambda_1 / lambda_2) at which the weaker of two modes activates.
    """
    if src.dimension != 2:
        raise DomainException('two_mode_threshold needs a p = 2 source')
    lam = np.sort(src.lambdas)[::-1]
    return 0.5 * math.log2(lam[0] / lam[1])


def isotropic_distortion(p, var_x, var_v, rate):
    """
    D(R) for p identical modes: all modes stay active at every rate.
    """
    if p < 1:
        raise DomainException(f'p must be >= 1, got {p}')
    check_nonnegative(rate, 'rate')
    floor = p * var_x * var_v / (var_x + var_v)
    signal = p * var_x ** 2 / (var_x + var_v)
    return floor + signal * 2.0 ** (-2.0 * rate / p)


def vector_converse_distortion(src, supply):
    """
    Water-filling distortion at an architecture supply (bits/vector).
    """
    return waterfill_distortion(src, supply)


def uncoded_vector_mse(src, channel_capacity):
    """
    Bandwidth-matched symbol-by-symbol linear baseline: floor + (sum lambda) 2^(-2 C_ch).
    """
    check_nonnegative(channel_capacity, 'channel_capacity')
    return src.mmse_floor + float(np.sum(src.lambdas)) * 2.0 ** (-2.0 * channel_capacity)


def fano_error_lower_bound(task, supply):
    """
    P_e >= max(0, 1 - (supply + 1) / label_bits)
    """
    check_nonnegative(supply, 'supply')
    return max(0.0, 1.0 - (supply + 1.0) / task.label_bits)
