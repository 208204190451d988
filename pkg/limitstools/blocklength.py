"""
Finite-blocklength refinements under the normal approximation. Every quantity here is a design
benchmark: the O(log T / T) residual of the approximation is ignored.
"""
from dataclasses import dataclass, fields
import logging
import math

from scipy.optimize import bisect
from scipy.special import erfc

from limitstools.architecture import (
    Bypass,
    ComputeGraphArchitecture,
    HardSeparation,
    KStage,
    NoisyLogic,
    ReliableIsland,
    SoftInterface,
    TaskDirect,
    propagation_factor,
)
from limitstools.channels import LOG2E, BscSpec, bsc_dispersion, mcu_dispersion, mcu_effective_capacity, \
    random_coding_exponent_bsc
from limitstools.demand import scalar_demand
from limitstools.errors import DomainException
from limitstools.supply import verdict_from_cuts
from limitstools.util import check_nonnegative, check_probability, positive_part


log = logging.getLogger(__name__)

# rate-dispersion of the Gaussian source under MSE, bits^2/sample
GAUSSIAN_SOURCE_DISPERSION = 0.5 * LOG2E ** 2

Q_INV_BRACKET = 40.0
Q_INV_XTOL = 1e-12

# fraction of slack allowed when an error budget's terms are compared with its total
BUDGET_SLACK = 1e-12


def q_func(x):
    """
    Standard Gaussian tail Q(x) = P[N(0,1) > x].
    """
    return 0.5 * float(erfc(x / math.sqrt(2.0)))


def q_inv(p):
    """
    Inverse of q_func by bisection on [-40, 40] to 1e-12.
    """
    check_probability(p, 'p', low_open=True, high_open=True)
    if p == 0.5:
        return 0.0
    return bisect(lambda x: q_func(x) - p, -Q_INV_BRACKET, Q_INV_BRACKET, xtol=Q_INV_XTOL, maxiter=500)


@dataclass(frozen=True)
class ErrorBudget:
    """
    Split of a total excess-distortion probability across failure events. Each architecture uses
    a subset: (src, ch, comp) for single-stage organizations, (src, ch, dec, task) for two-stage ones.
    """
    eps_src: float = None
    eps_ch: float = None
    eps_comp: float = None
    eps_dec: float = None
    eps_task: float = None
    total: float = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None:
                check_probability(value, f.name, low_open=True, high_open=True)

    @classmethod
    def symmetric(cls, total, architecture):
        """
        Equal split of total across the events architecture uses.
        """
        names = cls.terms_for(architecture)
        return cls(total=total, **{name: total / len(names) for name in names})

    @staticmethod
    def terms_for(architecture):
        if isinstance(architecture, (HardSeparation, ReliableIsland)):
            return ('eps_src', 'eps_ch', 'eps_dec', 'eps_task')
        return ('eps_src', 'eps_ch', 'eps_comp')

    def active(self, architecture):
        """
        Returns the terms architecture needs, checking presence and the total.

        Returns:
        --------
        terms : dict
            name -> probability
        """
        terms = {}
        for name in self.terms_for(architecture):
            value = getattr(self, name)
            if value is None:
                raise DomainException(f'{name} is required by {architecture.name}')
            terms[name] = value
        if self.total is not None:
            used = math.fsum(terms.values())
            if used > self.total * (1.0 + BUDGET_SLACK):
                raise DomainException(f'error budget terms sum to {used!r}, exceeding the total {self.total!r}')
        return terms


@dataclass(frozen=True)
class NaConfig:
    """
    Attributes:
    -----------
    block_len : float
        number of task instances coded jointly, T >= 1
    budget : BudgetSpec
    v_ch : float
        channel dispersion, bits^2/use
    v_gate : float
        primitive dispersion, bits^2/use
    v_task : float
        source rate-dispersion, bits^2/sample
    mcu : WordMcuSpec
        optional word-level primitive law replacing (c_gate, v_gate)
    """
    block_len: float
    budget: object
    v_ch: float = 0.0
    v_gate: float = 0.0
    v_task: float = GAUSSIAN_SOURCE_DISPERSION
    mcu: object = None

    def __post_init__(self):
        if not self.block_len >= 1:
            raise DomainException(f'block_len must be >= 1, got {self.block_len}')
        for name in ('v_ch', 'v_gate', 'v_task'):
            check_nonnegative(getattr(self, name), name)

    @property
    def c_gate(self):
        if self.mcu is not None:
            return mcu_effective_capacity(self.mcu)
        return self.budget.c_gate

    @property
    def gate_dispersion(self):
        if self.mcu is not None:
            return mcu_dispersion(self.mcu)
        return self.v_gate


def _backoff(v, block_len, eps):
    return math.sqrt(v / block_len) * q_inv(eps)


def na_stage_rate(m, c, v, block_len, eps):
    """
    m c - sqrt(m v / T) Q^-1(eps); unclamped.
    """
    check_nonnegative(m, 'm')
    return m * c - _backoff(m * v, block_len, eps)


def na_channel_rate(cfg, eps_ch):
    b = cfg.budget
    return b.n * b.c_ch - _backoff(b.n * cfg.v_ch, cfg.block_len, eps_ch)


def na_compute_rate(cfg, eps_comp, mcu=None):
    """
    m C_gate - sqrt(m V_gate / T) Q^-1(eps_comp), with the word-level effective capacity and dispersion
    substituted when mcu (or cfg.mcu) is given.
    """
    mcu = mcu if mcu is not None else cfg.mcu
    if mcu is not None:
        c, v = mcu_effective_capacity(mcu), mcu_dispersion(mcu)
    else:
        c, v = cfg.budget.c_gate, cfg.v_gate
    return na_stage_rate(cfg.budget.m, c, v, cfg.block_len, eps_comp)


def na_task_demand(demand, v_task, block_len, eps_src):
    """
    R_{X|Y}(D) + sqrt(V / T) Q^-1(eps_src)
    """
    if math.isinf(demand):
        raise DomainException('normal approximation needs a finite demand')
    return demand + _backoff(v_task, block_len, eps_src)


def na_cuts(arch, cfg, budget):
    """
    Normal-approximation cut terms of an architecture, before clamping.

    Returns:
    --------
    cuts : dict
        label -> bits/sample (may be negative)
    """
    b = cfg.budget
    T = cfg.block_len
    eps = budget.active(arch)
    c_gate, v_gate = cfg.c_gate, cfg.gate_dispersion
    cuts = {'channel': na_channel_rate(cfg, eps['eps_ch'])}
    if isinstance(arch, TaskDirect):
        cuts['compute'] = na_stage_rate(b.m, c_gate, v_gate, T, eps['eps_comp'])
    elif isinstance(arch, Bypass):
        cuts['compute'] = arch.bypass_bits + na_stage_rate(b.m, c_gate, v_gate, T, eps['eps_comp'])
    elif isinstance(arch, SoftInterface):
        arch.validate(b)
        cuts['compute'] = na_stage_rate(max(b.m - arch.m_int, 0.0), c_gate, v_gate, T, eps['eps_comp'])
    elif isinstance(arch, HardSeparation):
        arch.validate(b)
        c_dec = c_gate if arch.c_dec is None else arch.c_dec
        c_task = c_gate if arch.c_task is None else arch.c_task
        cuts['decode-stage'] = arch.bypass_bits + na_stage_rate(arch.m_dec, c_dec, v_gate, T, eps['eps_dec'])
        cuts['task-stage'] = arch.bypass_bits + na_stage_rate(arch.m_task, c_task, v_gate, T, eps['eps_task'])
    elif isinstance(arch, ReliableIsland):
        arch.validate(b)
        c_dec = c_gate if arch.c_dec is None else arch.c_dec
        c_task = c_gate if arch.c_task is None else arch.c_task
        cuts['decode-stage'] = na_stage_rate(arch.m_dec, c_dec, v_gate, T, eps['eps_dec'])
        cuts['task-stage'] = arch.m_rel + na_stage_rate(arch.m_task, c_task, v_gate, T, eps['eps_task'])
    elif isinstance(arch, KStage):
        arch.validate(b)
        per_stage = eps['eps_comp'] / len(arch.stages)
        for k, (m_k, c_k) in enumerate(arch.stages, start=1):
            cuts[f'stage-{k}'] = na_stage_rate(m_k, c_gate if c_k is None else c_k, v_gate, T, per_stage)
    elif isinstance(arch, NoisyLogic):
        gates = BscSpec(arch.delta)
        cuts['compute'] = na_stage_rate(b.m, arch.gate_capacity, bsc_dispersion(gates), T, eps['eps_comp'])
        cuts['propagation'] = b.m * propagation_factor(arch.beta, arch.d_logic)
    elif isinstance(arch, ComputeGraphArchitecture):
        raise DomainException('normal-approximation supplies are not defined for compute graphs')
    else:
        raise DomainException(f'Unsupported architecture {arch!r}')
    return cuts


def _clamp(cuts):
    clamped = tuple(sorted(label for label, value in cuts.items() if value < 0))
    return {label: positive_part(value) for label, value in cuts.items()}, clamped


def na_feasibility(arch, cfg, budget, demand):
    """
    Dispersion-aware feasibility: the normal-approximation task demand against the clamped
    normal-approximation supply of arch.

    Parameters:
    -----------
    arch : ArchitectureSpec
    cfg : NaConfig
    budget : ErrorBudget
    demand : float
        first-order demand R_{X|Y}(D), bits/sample

    Returns:
    --------
    verdict : FeasibilityVerdict
        benchmark verdict; clamped lists the cut terms that were negative
    """
    eps = budget.active(arch)
    cuts, clamped = _clamp(na_cuts(arch, cfg, budget))
    required = na_task_demand(demand, cfg.v_task, cfg.block_len, eps['eps_src'])
    verdict = verdict_from_cuts(cuts, positive_part(required), clamped=clamped, benchmark=True)
    log.debug('NA %s at T=%g: supply %.10g vs demand %.10g (binding %s, clamped %s)', arch.name, cfg.block_len,
              verdict.supply, verdict.demand, verdict.binding_cut, clamped)
    return verdict


def _distortion_at_rate(src, rate):
    floor = src.mmse_floor
    return floor + (src.var_x - floor) * 2.0 ** (-2.0 * rate)


def na_supply(arch, cfg, budget):
    cuts, _ = _clamp(na_cuts(arch, cfg, budget))
    return min(cuts.values())


def gaussian_na_distortion(src, arch, cfg, budget):
    """
    Finite-T distortion benchmark for the scalar Gaussian remote source:
    D ~ floor + (var_x - floor) 2^(-2 R_eff) with R_eff = [R_sup,NA - sqrt(V/T) Q^-1(eps_src)]_+.
    """
    eps = budget.active(arch)
    supply = na_supply(arch, cfg, budget)
    effective = positive_part(supply - _backoff(cfg.v_task, cfg.block_len, eps['eps_src']))
    return _distortion_at_rate(src, effective)


def reliable_jscc_distortion(src, cfg, total_eps):
    """
    Compute-reliable joint source-channel baseline: one backoff sqrt((n V_ch + V_src)/T) Q^-1(eps).
    """
    b = cfg.budget
    rate = b.n * b.c_ch - _backoff(b.n * cfg.v_ch + cfg.v_task, cfg.block_len, total_eps)
    return _distortion_at_rate(src, positive_part(rate))


def reliable_sscc_distortion(src, cfg, total_eps):
    """
    Compute-reliable separate source-channel baseline: channel and source backoffs at eps/2 each.
    """
    b = cfg.budget
    half = total_eps / 2.0
    rate = (b.n * b.c_ch - _backoff(b.n * cfg.v_ch, cfg.block_len, half)
            - _backoff(cfg.v_task, cfg.block_len, half))
    return _distortion_at_rate(src, positive_part(rate))


def gaussian_na_curves(src, cfg, total_eps):
    """
    The four finite-T benchmark curves at one blocklength: vulnerable task-direct (three-way split),
    vulnerable hard-separation with an equal compute split (four-way split), and the two
    compute-reliable baselines.

    Returns:
    --------
    curves : dict
        curve name -> distortion
    """
    td = TaskDirect()
    hs = HardSeparation.symmetric(cfg.budget.m)
    return {
        'task-direct': gaussian_na_distortion(src, td, cfg, ErrorBudget.symmetric(total_eps, td)),
        'hard-separation': gaussian_na_distortion(src, hs, cfg, ErrorBudget.symmetric(total_eps, hs)),
        'reliable-jscc': reliable_jscc_distortion(src, cfg, total_eps),
        'reliable-sscc': reliable_sscc_distortion(src, cfg, total_eps),
    }


def gaussian_first_order_distortion(src, arch, budget):
    """
    T -> infinity limit of gaussian_na_distortion: the converse distortion at the first-order supply.
    """
    return _distortion_at_rate(src, arch.supply(budget))


def na_demand_for_distortion(src, distortion, cfg, eps_src):
    return na_task_demand(scalar_demand(src, distortion), cfg.v_task, cfg.block_len, eps_src)


def comp_error_exponent_bound(rate, m, spec, block_len):
    """
    Random-coding bound on the compute-side block error, 2^(-m T E_r(R/m)).
    """
    if not m > 0:
        raise DomainException(f'm must be positive, got {m}')
    check_nonnegative(rate, 'rate')
    exponent = random_coding_exponent_bsc(rate / m, spec)
    return 2.0 ** (-m * block_len * exponent)