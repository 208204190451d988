"""
Per-instance information supplies of the receiver organizations, the end-to-end feasibility verdict,
and the corollaries built on them (strict gap, size-depth budget, storage and network proxies).
"""
from dataclasses import dataclass, field
import logging
import math

from limitstools.architecture import (
    BudgetSpec,
    HardSeparation,
    TaskDirect,
    logic_beta,
    propagation_factor,
)
from limitstools.channels import BscSpec, bsc_capacity
from limitstools.demand import fano_error_lower_bound
from limitstools.errors import DomainException
from limitstools.util import INFEASIBLE, binding_cut, check_nonnegative, positive_part, usable_capacity


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeasibilityVerdict:
    """
    Attributes:
    -----------
    supply : float
        architecture supply, bits/sample
    demand : float
        bits/sample, INFEASIBLE when no finite supply suffices
    feasible : bool
        demand <= supply
    margin : float
        supply - demand (-inf for an infinite demand)
    binding_cut : str
        label of the minimizing cut
    cuts : dict
        every labelled cut term
    clamped : tuple
        labels of cut terms raised from a negative value to 0
    benchmark : bool
        True for normal-approximation verdicts, which are design benchmarks rather than converses
    """
    supply: float
    demand: float
    feasible: bool
    margin: float
    binding_cut: str
    cuts: dict = field(default_factory=dict)
    clamped: tuple = ()
    benchmark: bool = False


@dataclass(frozen=True)
class NoisyGateSupply:
    """
    Effective per-gate supply of noisy logic and the branch that binds it.
    """
    value: float
    branch: str
    beta: float
    gate_capacity: float
    propagation: float


def supply_task_direct(b):
    return min(b.channel_supply, b.compute_supply)


def supply_bypass(b, bypass_bits):
    check_nonnegative(bypass_bits, 'bypass_bits')
    return min(b.channel_supply, bypass_bits + b.compute_supply)


def supply_hard_separation(n, c_ch, m_dec, c_dec, m_task, c_task, bypass_bits=0.0):
    """
    min{n C_ch, b + m_dec C_dec, b + m_task C_task}
    """
    for name, value in (('n', n), ('m_dec', m_dec), ('m_task', m_task), ('bypass_bits', bypass_bits)):
        check_nonnegative(value, name)
    return min(n * usable_capacity(c_ch),
               bypass_bits + m_dec * usable_capacity(c_dec),
               bypass_bits + m_task * usable_capacity(c_task))


def supply_k_stage(n, c_ch, stages):
    """
    min{n C_ch, min_k m_k c_k} over a serial pipeline.

    Parameters:
    -----------
    stages : list[(float, float)]
        (m_k, c_k) per stage
    """
    if not stages:
        raise DomainException('k-stage supply needs at least one stage')
    return min([n * usable_capacity(c_ch)] + [m_k * usable_capacity(c_k) for m_k, c_k in stages])


def supply_soft_interface(n, c_ch, m, m_int, c_gate):
    check_nonnegative(m_int, 'm_int')
    if m_int > m:
        raise DomainException(f'm_int = {m_int} exceeds m = {m}')
    return min(n * usable_capacity(c_ch), (m - m_int) * usable_capacity(c_gate))


def noisy_logic_gate_supply(delta, k_fan, d_logic):
    """
    C_logic = min{C_gate(delta), min(1, beta^d_logic)} with beta = K_fan (1 - 2 delta)^2.

    Returns:
    --------
    supply : NoisyGateSupply
        branch is 'compute' when the gate capacity binds, 'propagation' when depth decay binds
    """
    if not 0.0 < delta < 0.5:
        raise DomainException(f'delta must lie in (0, 0.5), got {delta}')
    if not k_fan >= 1:
        raise DomainException(f'k_fan must be >= 1, got {k_fan}')
    check_nonnegative(d_logic, 'd_logic')
    beta = logic_beta(delta, k_fan)
    gate = bsc_capacity(BscSpec(delta))
    propagation = propagation_factor(beta, d_logic)
    branch = 'compute' if gate <= propagation else 'propagation'
    return NoisyGateSupply(min(gate, propagation), branch, beta, gate, propagation)


def supply_noisy_logic(n, c_ch, m, delta, k_fan, d_logic):
    return min(n * usable_capacity(c_ch), m * noisy_logic_gate_supply(delta, k_fan, d_logic).value)


def required_gate_budget(demand_bits, c_logic):
    """
    Size-depth requirement m >= r / C_logic (real valued; callers may round up).
    """
    check_nonnegative(demand_bits, 'demand_bits')
    check_nonnegative(c_logic, 'c_logic')
    if demand_bits == 0:
        return 0.0
    if c_logic == 0:
        return INFEASIBLE
    return demand_bits / c_logic


def depth_budget_growth(beta):
    """
    Multiplicative growth 1/beta of the required gate budget per unit of logic depth while
    the propagation branch binds.
    """
    if not beta > 0:
        raise DomainException(f'beta must be positive, got {beta}')
    return max(1.0, 1.0 / beta)


def strict_gap_interval(b):
    """
    Demands in the open interval ((m/2) C_gate, m C_gate) are achievable by task-direct processing
    but not by a symmetric hard-separation split. Present only in the compute-limited regime.

    Returns:
    --------
    interval : (float, float) or None
    """
    high = b.compute_supply
    if high <= 0 or high > b.channel_supply:
        return None
    return (high / 2.0, high)


def island_supply_closed_form(m, c_dec, c_task, m_rel):
    """
    max over m_dec in [0, m] of min{m_dec c_dec, m_rel + (m - m_dec) c_task}.

    Returns:
    --------
    (m_dec, supply) : (float, float)
    """
    for name, value in (('m', m), ('c_dec', c_dec), ('c_task', c_task), ('m_rel', m_rel)):
        check_nonnegative(value, name)
    if c_dec + c_task == 0:
        return m / 2.0, 0.0
    m_dec = (m_rel + m * c_task) / (c_dec + c_task)
    if m_dec >= m:
        # task stage never binds; give everything to decode
        return m, min(m * c_dec, m_rel)
    return m_dec, m_dec * c_dec


def model_storage_error_lb(model_bits, stored_bits, c_gate):
    """
    P_e >= max{0, 1 - (M C_gate + 1) / B_theta} for a model of B_theta bits held in M vulnerable cells.
    """
    if not model_bits > 0:
        raise DomainException(f'model_bits must be positive, got {model_bits}')
    check_nonnegative(stored_bits, 'stored_bits')
    return positive_part(1.0 - (stored_bits * usable_capacity(c_gate) + 1.0) / model_bits)


def budget_from_network(params, precision_bits, activation_bits=0.0, routing_bits=0.0, kappas=(1.0, 1.0, 1.0)):
    """
    Per-inference primitive proxy m ~ kappa_w P b + kappa_a b_act + kappa_r b_route.
    """
    kappa_w, kappa_a, kappa_r = kappas
    values = (('params', params), ('precision_bits', precision_bits), ('activation_bits', activation_bits),
              ('routing_bits', routing_bits), ('kappa_w', kappa_w), ('kappa_a', kappa_a), ('kappa_r', kappa_r))
    for name, value in values:
        check_nonnegative(value, name)
    return kappa_w * params * precision_bits + kappa_a * activation_bits + kappa_r * routing_bits


def task_direct_fano_bound(task, b):
    """
    Classification error floor under task-direct processing.
    """
    return fano_error_lower_bound(task, TaskDirect().supply(b))


def hard_separation_fano_bound(task, b):
    """
    Classification error floor under a symmetric hard-separation split.
    """
    return fano_error_lower_bound(task, HardSeparation.symmetric(b.m).supply(b))


def verdict_from_cuts(cuts, demand, clamped=(), benchmark=False):
    """
    Builds a FeasibilityVerdict from labelled cut terms.
    """
    if demand is None or math.isnan(demand) or demand < 0:
        raise DomainException(f'demand must be nonnegative, got {demand}')
    supply, label = binding_cut(cuts)
    margin = -math.inf if math.isinf(demand) else supply - demand
    return FeasibilityVerdict(supply=supply, demand=demand, feasible=margin >= 0, margin=margin,
                              binding_cut=label, cuts=dict(cuts), clamped=tuple(clamped), benchmark=benchmark)


def check_feasibility(arch, b, demand):
    """
    Compares an architecture's supply with a demand.

    Parameters:
    -----------
    arch : ArchitectureSpec
    b : BudgetSpec
    demand : float
        bits/sample, >= 0 or INFEASIBLE

    Returns:
    --------
    verdict : FeasibilityVerdict
    """
    verdict = verdict_from_cuts(arch.cuts(b), demand)
    log.debug('%s: supply %.10g vs demand %.10g -> %s (binding %s)', arch.name, verdict.supply, demand,
              'feasible' if verdict.feasible else 'infeasible', verdict.binding_cut)
    return verdict
