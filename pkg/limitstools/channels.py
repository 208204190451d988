"""
Capacities, dispersions and error exponents of the physical channel and of the
vulnerable compute primitives. All information quantities are in bits.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import xlog1py, xlogy

from limitstools.errors import DomainException, NegativeCapacityWarning
from limitstools.util import check_integer, check_nonnegative, check_probability


log = logging.getLogger(__name__)

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2

# exponent search grid over the Gallager tilt
EXPONENT_GRID_POINTS = 256
EXPONENT_TOLERANCE = 1e-9

# explicit pattern enumeration limit for word-level laws
MAX_ENUMERATED_WORD_BITS = 16


@dataclass(frozen=True)
class BscSpec:
    """
    Binary symmetric channel / bit-flip primitive.

    Attributes:
    -----------
    epsilon : float
        crossover probability in [0, 0.5)
    """
    epsilon: float

    def __post_init__(self):
        check_probability(self.epsilon, 'epsilon')
        if self.epsilon >= 0.5:
            raise DomainException(f'epsilon must be below 0.5, got {self.epsilon}')


@dataclass(frozen=True)
class AwgnSpec:
    """
    Real AWGN channel with linear SNR rho > 0.
    """
    snr: float

    def __post_init__(self):
        if not self.snr > 0:
            raise DomainException(f'snr must be positive, got {self.snr}')


@dataclass(frozen=True)
class ExplicitSpec:
    """
    Plug-in channel or primitive known only through its capacity (and dispersion).
    """
    capacity: float
    dispersion: float = 0.0

    def __post_init__(self):
        check_nonnegative(self.capacity, 'capacity')
        check_nonnegative(self.dispersion, 'dispersion')


@dataclass(frozen=True)
class McuClass:
    """
    One (k, q) class of the multi-bit-upset template. The indices are opaque labels;
    only the class probability and the number of patterns in the class matter.
    """
    prob: float
    multiplicity: int


@dataclass(frozen=True)
class WordMcuSpec:
    """
    Word-level additive multi-bit-upset law on w-bit words.

    With probability 1 - alpha the error pattern is 0^w. Otherwise a class is drawn
    with probability prob and the pattern is uniform over that class's multiplicity
    distinct nonzero patterns.

    Attributes:
    -----------
    word_bits : int
        word length w
    alpha : float
        upset probability
    classes : tuple[McuClass]
        class probabilities (summing to 1) and multiplicities N >= 1
    """
    word_bits: int
    alpha: float
    classes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'word_bits', check_integer(self.word_bits, 'word_bits'))
        check_probability(self.alpha, 'alpha')
        classes = tuple(c if isinstance(c, McuClass) else McuClass(*c) for c in self.classes)
        classes = tuple(McuClass(c.prob, check_integer(c.multiplicity, 'class multiplicity')) for c in classes)
        object.__setattr__(self, 'classes', classes)
        if not classes:
            raise DomainException('at least one MCU class is required')
        total = math.fsum(c.prob for c in classes)
        if abs(total - 1.0) > 1e-12:
            raise DomainException(f'class probabilities must sum to 1, got {total!r}')
        for c in classes:
            check_probability(c.prob, 'class probability')
        if sum(c.multiplicity for c in classes) > 2 ** self.word_bits - 1:
            raise DomainException('class multiplicities exceed the 2^w - 1 nonzero patterns')

    @classmethod
    def from_bsc(cls, epsilon):
        """
        The single-bit reduction: w = 1, one class holding the only nonzero pattern.
        """
        return cls(word_bits=1, alpha=epsilon, classes=(McuClass(1.0, 1),))

    @property
    def probs(self):
        return np.array([c.prob for c in self.classes], dtype=float)

    @property
    def multiplicities(self):
        return np.array([c.multiplicity for c in self.classes], dtype=float)

    def explicit_pmf(self):
        """
        Pattern pmf over all 2^w words, index 0 being the all-zero pattern.
        Classes occupy consecutive nonzero pattern indices in declaration order.

        Returns:
        --------
        pmf : numpy.ndarray
            length 2^w, sums to 1
        """
        if self.word_bits > MAX_ENUMERATED_WORD_BITS:
            raise DomainException(f'pattern enumeration limited to w <= {MAX_ENUMERATED_WORD_BITS}')
        pmf = np.zeros(2 ** self.word_bits)
        pmf[0] = 1.0 - self.alpha
        start = 1
        for c in self.classes:
            pmf[start:start + c.multiplicity] = self.alpha * c.prob / c.multiplicity
            start += c.multiplicity
        return pmf


@dataclass(frozen=True)
class PrimitiveClass:
    """
    One class of heterogeneous primitives: capacity (bits/use) and budget (uses/instance).
    """
    capacity: float
    budget: float

    def __post_init__(self):
        check_nonnegative(self.capacity, 'capacity')
        check_nonnegative(self.budget, 'budget')


def binary_entropy(p):
    """
    h2(p) = -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0.
    """
    check_probability(p, 'p')
    return float(-(xlogy(p, p) + xlog1py(1.0 - p, -p)) * LOG2E)


def bsc_capacity(spec):
    return 1.0 - binary_entropy(spec.epsilon)


def awgn_capacity(spec):
    return 0.5 * math.log2(1.0 + spec.snr)


def bsc_dispersion(spec):
    """
    V_BSC(eps) = eps (1-eps) log2((1-eps)/eps)^2; 0 at eps = 0.
    """
    eps = spec.epsilon
    if eps == 0.0:
        return 0.0
    ratio = (math.log1p(-eps) - math.log(eps)) * LOG2E
    return eps * (1.0 - eps) * ratio ** 2


def awgn_dispersion(spec):
    """
    V_AWGN(rho) = rho (rho + 2) / (2 (rho + 1)^2) (log2 e)^2
    """
    rho = spec.snr
    return rho * (rho + 2.0) / (2.0 * (rho + 1.0) ** 2) * LOG2E ** 2


def gallager_e0_bsc(rho_g, spec):
    """
    Gallager E0 for the BSC with uniform input.

    Parameters:
    -----------
    rho_g : float
        tilt in [0, 1]
    spec : BscSpec

    Returns:
    --------
    e0 : float
        rho_g - (1 + rho_g) log2((1-eps)^(1/(1+rho_g)) + eps^(1/(1+rho_g)))
    """
    if not 0.0 <= rho_g <= 1.0:
        raise DomainException(f'rho_g must lie in [0, 1], got {rho_g}')
    s = 1.0 / (1.0 + rho_g)
    eps = spec.epsilon
    return rho_g - (1.0 + rho_g) * math.log2((1.0 - eps) ** s + eps ** s)


def random_coding_exponent_bsc(rate, spec):
    """
    E_r(R) = max over rho_g in [0, 1] of E0(rho_g) - rho_g R.

    A 256-point grid locates the maximizer (first index wins ties, i.e. the smaller
    tilt), then a bounded scalar search refines it inside the neighbouring grid cells.
    """
    check_nonnegative(rate, 'rate')
    if rate >= bsc_capacity(spec):
        return 0.0

    def objective(rho_g):
        return gallager_e0_bsc(rho_g, spec) - rho_g * rate

    grid = np.linspace(0.0, 1.0, EXPONENT_GRID_POINTS)
    values = np.array([objective(r) for r in grid])
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, EXPONENT_GRID_POINTS - 1)]
    refined = minimize_scalar(lambda r: -objective(r), bounds=(lo, hi), method='bounded',
                              options={'xatol': EXPONENT_TOLERANCE})
    value = max(values[best], -refined.fun)
    log.debug('E_r(%g) = %g at rho ~ %g', rate, value, refined.x)
    return max(float(value), 0.0)


def mcu_error_entropy(spec):
    """
    H(E) = h2(alpha) + alpha (H(P) + sum P log2 N)
    """
    probs = spec.probs
    class_entropy = -float(np.sum(xlogy(probs, probs))) * LOG2E
    multiplicity_term = float(np.sum(probs * np.log2(spec.multiplicities)))
    return binary_entropy(spec.alpha) + spec.alpha * (class_entropy + multiplicity_term)


def mcu_effective_capacity(spec):
    """
    Per-bit effective capacity 1 - H(E)/w of an additive word-level law.
    Negative values are returned as-is with a NegativeCapacityWarning.
    """
    value = 1.0 - mcu_error_entropy(spec) / spec.word_bits
    if value < 0:
        warnings.warn(f'MCU effective capacity is negative ({value:.6g}); supplies treat it as 0',
                      NegativeCapacityWarning)
    return value


def mcu_dispersion(spec):
    """
    Per-bit dispersion Var[-log2 P_E(E)] / w, computed over the grouped pmf atoms.
    """
    masses = [1.0 - spec.alpha]
    atoms = [1.0 - spec.alpha]
    for c in spec.classes:
        masses.append(spec.alpha * c.prob)
        atoms.append(spec.alpha * c.prob / c.multiplicity)
    masses = np.array(masses)
    atoms = np.array(atoms)
    keep = masses > 0
    info = -np.log2(atoms[keep])
    mean = np.sum(masses[keep] * info)
    variance = np.sum(masses[keep] * (info - mean) ** 2)
    return float(variance) / spec.word_bits


def hetero_supply(classes):
    """
    Heterogeneous compute supply sum_j m_j C_gate^(j).

    Parameters:
    -----------
    classes : list[PrimitiveClass]

    Returns:
    --------
    supply : float
        bits/instance
    """
    return math.fsum(c.budget * c.capacity for c in classes)


def capacity(spec):
    """
    Capacity of any supported channel/primitive spec (bits/use).
    """
    if isinstance(spec, BscSpec):
        return bsc_capacity(spec)
    if isinstance(spec, AwgnSpec):
        return awgn_capacity(spec)
    if isinstance(spec, WordMcuSpec):
        return mcu_effective_capacity(spec)
    if isinstance(spec, ExplicitSpec):
        return spec.capacity
    raise DomainException(f'Unsupported channel spec {spec!r}')


def dispersion(spec):
    """
    Dispersion of any supported channel/primitive spec (bits^2/use).
    """
    if isinstance(spec, BscSpec):
        return bsc_dispersion(spec)
    if isinstance(spec, AwgnSpec):
        return awgn_dispersion(spec)
    if isinstance(spec, WordMcuSpec):
        return mcu_dispersion(spec)
    if isinstance(spec, ExplicitSpec):
        return spec.dispersion
    raise DomainException(f'Unsupported channel spec {spec!r}')
