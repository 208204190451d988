"""
Worked examples regenerated from the library: the two-mode and eight-mode diagonal Gaussian
examples, the isotropic excess-distortion jump, the finite-blocklength benchmark and the binary
classification floor.
"""
import logging

from limitstools.architecture import BudgetSpec, HardSeparation, TaskDirect
from limitstools.blocklength import NaConfig, gaussian_first_order_distortion, gaussian_na_curves, q_inv
from limitstools.channels import AwgnSpec, BscSpec, awgn_dispersion, bsc_dispersion, capacity
from limitstools.demand import (
    ClassificationTask,
    DiagonalGaussianSource,
    ScalarGaussianSource,
    fano_error_lower_bound,
    isotropic_distortion,
    two_mode_threshold,
    uncoded_vector_mse,
    waterfill_distortion,
)
from limitstools.errors import DomainException
from limitstools.report import estimate_rows, make_row
from limitstools.simulator import simulate_classification
from limitstools.supply import hard_separation_fano_bound, required_gate_budget, task_direct_fano_bound


log = logging.getLogger(__name__)

FINITE_T_GRID = (20, 50, 100, 200, 500, 1000, 2000)
FINITE_T_EPS = 0.01

BINARY_FANO_TRIALS = 20000
BINARY_FANO_SEED = 20240601


def _vector_case(src, n, c_ch, compute_supply):
    """
    Task-direct and hard-separation converses of a diagonal source against the uncoded baseline.
    """
    channel = n * c_ch
    direct = min(compute_supply, channel)
    hard = min(compute_supply / 2.0, channel)
    d_direct = waterfill_distortion(src, direct)
    d_hard = waterfill_distortion(src, hard)
    d_uncoded = uncoded_vector_mse(src, c_ch)
    rows = [make_row('vector_mmse_floor', 'mmse floor', src.mmse_floor, 'mse')]
    rows += [make_row('mode_variance', f'lambda_{i}', float(lam), 'mse') for i, lam in enumerate(src.lambdas, 1)]
    rows += [
        make_row('supply', 'task-direct supply', direct, 'bits/vector'),
        make_row('supply', 'hard-separation supply', hard, 'bits/vector'),
        make_row('waterfill_distortion', f'D({direct:g}) task-direct', d_direct, 'mse'),
        make_row('waterfill_distortion', f'D({hard:g}) hard-separation', d_hard, 'mse'),
        make_row('uncoded_vector_mse', 'uncoded mse', d_uncoded, 'mse'),
        make_row('uncoded_vector_mse', 'hard-separation gap over uncoded', d_hard - d_uncoded, 'mse'),
    ]
    return rows


def reproduce_p2():
    """
    var_x = (4, 1), var_v = (1, 1), n = 2 uses of a 1 bit/use channel, m C_gate = 2 bits.
    """
    src = DiagonalGaussianSource((4.0, 1.0), (1.0, 1.0))
    rows = _vector_case(src, 2, 1.0, 2.0)
    rows.insert(3, make_row('two_mode_threshold', 'R0', two_mode_threshold(src), 'bits/vector'))
    return rows


def reproduce_p8():
    """
    Halving prior spectrum 8 ... 1/16 with unit noise, n = 8 uses at 2 bits/use, m C_gate = 8 bits.
    """
    src = DiagonalGaussianSource(tuple(8.0 / 2 ** k for k in range(8)), (1.0,) * 8)
    return _vector_case(src, 8, 2.0, 8.0)


def reproduce_iso16():
    """
    Isotropic p = 16, var_x = 1, var_v = 1/4: halving the supply from 48 to 24 bits multiplies the
    excess distortion by 2^3.
    """
    p, var_x, var_v = 16, 1.0, 0.25
    floor = DiagonalGaussianSource.isotropic(p, var_x, var_v).mmse_floor
    d48 = isotropic_distortion(p, var_x, var_v, 48.0)
    d24 = isotropic_distortion(p, var_x, var_v, 24.0)
    return [
        make_row('vector_mmse_floor', 'mmse floor', floor, 'mse'),
        make_row('isotropic_distortion', 'D(48)', d48, 'mse'),
        make_row('isotropic_distortion', 'D(24)', d24, 'mse'),
        make_row('isotropic_distortion', 'excess distortion ratio', (d24 - floor) / (d48 - floor), 'ratio'),
    ]


def finite_t_config(block_len):
    """
    Unit scalar source, AWGN at SNR 15 (2 bits/use), BSC(0.1) primitives, n = 1, m = 2.
    """
    channel, gates = AwgnSpec(15.0), BscSpec(0.1)
    budget = BudgetSpec(n=1.0, c_ch=capacity(channel), m=2.0, c_gate=capacity(gates))
    return NaConfig(block_len, budget, v_ch=awgn_dispersion(channel), v_gate=bsc_dispersion(gates))


def reproduce_finite_t(grid=FINITE_T_GRID, total_eps=FINITE_T_EPS):
    src = ScalarGaussianSource(1.0, 1.0)
    rows = [
        make_row('q_inv', 'Q^-1(eps)', q_inv(total_eps), 'sigma'),
        make_row('q_inv', 'Q^-1(eps/3)', q_inv(total_eps / 3.0), 'sigma'),
        make_row('q_inv', 'Q^-1(eps/4)', q_inv(total_eps / 4.0), 'sigma'),
    ]
    keys = {'task-direct': 'na_distortion', 'hard-separation': 'na_distortion',
            'reliable-jscc': 'reliable_jscc', 'reliable-sscc': 'reliable_sscc'}
    for block_len in grid:
        for label, value in gaussian_na_curves(src, finite_t_config(block_len), total_eps).items():
            rows.append(make_row(keys[label], f'T={block_len} {label}', value, 'mse'))
    budget = finite_t_config(1).budget
    rows.append(make_row('first_order_distortion', 'T->inf task-direct',
                         gaussian_first_order_distortion(src, TaskDirect(), budget), 'mse'))
    rows.append(make_row('first_order_distortion', 'T->inf hard-separation',
                         gaussian_first_order_distortion(src, HardSeparation.symmetric(budget.m), budget), 'mse'))
    return rows


def reproduce_binary_fano(trials=BINARY_FANO_TRIALS, seed=BINARY_FANO_SEED):
    """
    Q = 10 label bits behind BSC(0.1) primitives: the task-direct and hard-separation Fano floors, the
    gate budgets each needs to allow a 10% error floor, and a Monte Carlo check at m = 6.
    """
    q, eps, target = 10, 0.1, 0.1
    task = ClassificationTask(q)
    c_gate = capacity(BscSpec(eps))
    budget = BudgetSpec(n=q, c_ch=1.0, m=10.0, c_gate=c_gate)
    needed = q * (1.0 - target) - 1.0
    rows = [
        make_row('fano_bound', 'task-direct floor (m=10)', task_direct_fano_bound(task, budget), 'probability'),
        make_row('fano_bound', 'hard-separation floor (m=10)', hard_separation_fano_bound(task, budget), 'probability'),
        make_row('gate_budget', 'task-direct m for 10% floor', required_gate_budget(needed, c_gate), 'primitives'),
        make_row('gate_budget', 'hard-separation m for 10% floor', 2.0 * required_gate_budget(needed, c_gate),
                 'primitives'),
    ]
    for stages, label in ((1, 'task-direct'), (2, 'hard-separation')):
        result = simulate_classification(q, 6.0, eps, trials, seed, stages=stages)
        rows += estimate_rows('sim_classification', f'{label} empirical error (m=6)', result.error, 'probability')
        rows.append(make_row('fano_bound', f'{label} floor (m=6)',
                             fano_error_lower_bound(task, result.supply), 'probability'))
    return rows


CASES = {
    'p2': reproduce_p2,
    'p8': reproduce_p8,
    'iso16': reproduce_iso16,
    'finite-t': reproduce_finite_t,
    'binary-fano': reproduce_binary_fano,
}


def reproduce(case):
    if case not in CASES:
        raise DomainException(f'unknown case {case!r}; choose from {", ".join(CASES)}')
    log.debug('reproducing %s', case)
    return CASES[case]()
