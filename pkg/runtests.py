from contextlib import redirect_stderr
import importlib
import io
import itertools
import json
import logging
import math
import os
import sys
import tempfile
import unittest
import warnings

import numpy as np

from limitstools.architecture import (
    BudgetSpec,
    Bypass,
    ComputeGraphArchitecture,
    HardSeparation,
    KStage,
    NoisyLogic,
    ReliableIsland,
    SoftInterface,
    TaskDirect,
    get_architecture,
    list_architecture_names,
    list_architectures_matching_tags,
)
from limitstools.blocklength import (
    GAUSSIAN_SOURCE_DISPERSION,
    ErrorBudget,
    NaConfig,
    comp_error_exponent_bound,
    gaussian_first_order_distortion,
    gaussian_na_curves,
    gaussian_na_distortion,
    na_channel_rate,
    na_compute_rate,
    na_cuts,
    na_feasibility,
    na_supply,
    na_task_demand,
    q_func,
    q_inv,
    reliable_jscc_distortion,
)
from limitstools.channels import (
    AwgnSpec,
    BscSpec,
    McuClass,
    PrimitiveClass,
    WordMcuSpec,
    awgn_capacity,
    awgn_dispersion,
    binary_entropy,
    bsc_capacity,
    bsc_dispersion,
    capacity,
    gallager_e0_bsc,
    hetero_supply,
    mcu_dispersion,
    mcu_effective_capacity,
    mcu_error_entropy,
    random_coding_exponent_bsc,
)
from limitstools.cli import run
from limitstools.demand import (
    ClassificationTask,
    DiagonalGaussianSource,
    ScalarGaussianSource,
    conditional_variance,
    fano_error_lower_bound,
    isotropic_distortion,
    scalar_demand,
    scalar_distortion_at_supply,
    two_mode_threshold,
    uncoded_vector_mse,
    waterfill_distortion,
    waterfill_rate,
)
from limitstools.errors import (
    DomainException,
    GraphValidationException,
    MissingBranchStatException,
    ResolutionException,
    ScenarioParseException,
    UnoptimizedException,
    UnsupportedDetectorException,
)
from limitstools.graph import (
    FLOW_SCALE,
    ComputationGraph,
    Edge,
    combined_supply,
    flow_scale,
    min_cut_supply,
    validate,
)
from limitstools.optimizer import (
    HardSeparationSplitOptimizer,
    NormalApproxSplitOptimizer,
    allocate_maxmin,
    optimal_split_hard_separation,
)
from limitstools.report import PROVENANCE, read_csv_series, render_series
from limitstools.reproduce import CASES, reproduce
from limitstools.scenario import EVALUATORS, load_scenario, parse_scenario, sweep, with_value
from limitstools.simulator import (
    majority_bit_error,
    repetition_block_error,
    simulate_classification,
    simulate_clipped_estimator,
    simulate_dup_compare,
    simulate_materializations,
    simulate_repetition_code,
    simulate_uncoded_gaussian,
)
from limitstools.supply import (
    budget_from_network,
    check_feasibility,
    depth_budget_growth,
    island_supply_closed_form,
    model_storage_error_lb,
    noisy_logic_gate_supply,
    required_gate_budget,
    strict_gap_interval,
    supply_bypass,
    supply_hard_separation,
    supply_k_stage,
    supply_noisy_logic,
    supply_soft_interface,
    supply_task_direct,
)
from limitstools.tail import (
    BranchStats,
    DetectorSpec,
    InterfaceSpec,
    OutcomeModel,
    clipping_ue_bound,
    deconditioned_ue_moment,
    dup_compare_outcomes,
    hash_bits_for_target,
    hash_ue_bound,
    markov_tail_bound,
    mcu_dup_outcomes,
    message_outcomes,
    mse_three_outcome,
    size_replicas_for_tail,
    tail_sandwich,
)
from limitstools.throughput import (
    PerSecondBudget,
    distortion_floor_vs_lambda,
    lambda_max_estimation,
    lambda_max_with_replicas,
    per_instance_budgets,
)
from limitstools.util import INFEASIBLE, UNBOUNDED


SCENARIOS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'scenarios')

C_GATE = bsc_capacity(BscSpec(0.1))
MCU_W2 = WordMcuSpec(word_bits=2, alpha=0.3, classes=(McuClass(1.0, 3),))
P2 = DiagonalGaussianSource((4.0, 1.0), (1.0, 1.0))
P8 = DiagonalGaussianSource(tuple(8.0 / 2 ** k for k in range(8)), (1.0,) * 8)
UNIT = ScalarGaussianSource(1.0, 1.0)


def scenario_path(name):
    return os.path.join(SCENARIOS, name)


def finite_t_config(block_len, c_gate=C_GATE):
    budget = BudgetSpec(n=1.0, c_ch=2.0, m=2.0, c_gate=c_gate)
    return NaConfig(block_len, budget, v_ch=awgn_dispersion(AwgnSpec(15.0)), v_gate=bsc_dispersion(BscSpec(0.1)))


def serial(*budgets):
    nodes = ['s'] + [f'v{i}' for i in range(1, len(budgets))] + ['t']
    edges = [Edge(nodes[i], nodes[i + 1], m) for i, m in enumerate(budgets)]
    return ComputationGraph(nodes, 's', 't', edges)


def brute_force_cut(graph, c_gate):
    """
    Minimum cut by enumerating every source side.
    """
    inner = [v for v in graph.nodes if v not in (graph.source, graph.sink)]
    best = math.inf
    for k in range(len(inner) + 1):
        for chosen in itertools.combinations(inner, k):
            side = set(chosen) | {graph.source}
            value = math.fsum(e.capacity(c_gate) for e in graph.edges if e.tail in side and e.head not in side)
            best = min(best, value)
    return best


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stderr(err):
        code = run(list(argv), out=out)
    return code, out.getvalue(), err.getvalue()


def rows_by_quantity(text):
    return {record['quantity']: record for record in json.loads(text)}


class TestChannels(unittest.TestCase):

    def testBinaryEntropy(self):
        log = logging.getLogger('TestChannels.testBinaryEntropy')

        self.assertEqual(binary_entropy(0.5), 1.0)
        self.assertEqual(binary_entropy(0.0), 0.0)
        h = binary_entropy(0.1)
        log.debug(f'\th2(0.1) {h}')
        self.assertAlmostEqual(h, 0.4690, delta=1e-4)

    def testBscCapacityAndDispersion(self):
        log = logging.getLogger('TestChannels.testBscCapacityAndDispersion')

        self.assertEqual(bsc_capacity(BscSpec(0.0)), 1.0)
        self.assertAlmostEqual(bsc_capacity(BscSpec(0.1)), 0.5310, delta=1e-4)
        self.assertAlmostEqual(bsc_capacity(BscSpec(0.25)), 0.1887, delta=1e-4)
        v = bsc_dispersion(BscSpec(0.1))
        log.debug(f'\tV_BSC(0.1) {v}')
        self.assertAlmostEqual(v, 0.9044, delta=1e-4)
        self.assertAlmostEqual(bsc_dispersion(BscSpec(0.25)), 0.4460, delta=1e-3)
        self.assertLess(bsc_dispersion(BscSpec(0.5 - 1e-9)), 1e-12)
        with self.assertRaises(DomainException):
            BscSpec(0.5)

    def testBscDispersionMatchesInformationDensity(self):
        eps = 0.25
        # joint pmf of (input, output) under a uniform input; information density log2 P(y|x)/P(y)
        density = np.array([math.log2(2 * (1 - eps))] * 2 + [math.log2(2 * eps)] * 2)
        mass = np.array([(1 - eps) / 2] * 2 + [eps / 2] * 2)
        mean = np.sum(mass * density)
        variance = np.sum(mass * (density - mean) ** 2)
        self.assertAlmostEqual(bsc_dispersion(BscSpec(eps)), variance, delta=1e-12)
        self.assertAlmostEqual(mean, bsc_capacity(BscSpec(eps)), delta=1e-12)

    def testAwgn(self):
        self.assertEqual(awgn_capacity(AwgnSpec(15.0)), 2.0)
        self.assertEqual(awgn_capacity(AwgnSpec(3.0)), 1.0)
        self.assertEqual(awgn_capacity(AwgnSpec(1.0)), 0.5)
        self.assertAlmostEqual(awgn_dispersion(AwgnSpec(15.0)), 1.0366, delta=1e-4)
        self.assertLess(awgn_dispersion(AwgnSpec(1e-9)), 1e-8)
        self.assertAlmostEqual(awgn_dispersion(AwgnSpec(1e9)), 1.0407, delta=1e-4)
        with self.assertRaises(DomainException):
            AwgnSpec(0.0)

    def testGallagerE0(self):
        self.assertEqual(gallager_e0_bsc(0.0, BscSpec(0.1)), 0.0)
        self.assertAlmostEqual(gallager_e0_bsc(1.0, BscSpec(0.1)), 1 - 2 * math.log2(math.sqrt(0.9) + math.sqrt(0.1)),
                               delta=1e-12)
        self.assertAlmostEqual(gallager_e0_bsc(1.0, BscSpec(0.1)), 0.3219, delta=1e-3)
        self.assertAlmostEqual(gallager_e0_bsc(1.0, BscSpec(0.0)), 1.0, delta=1e-12)
        with self.assertRaises(DomainException):
            gallager_e0_bsc(1.5, BscSpec(0.1))

    def testRandomCodingExponent(self):
        log = logging.getLogger('TestChannels.testRandomCodingExponent')

        spec = BscSpec(0.1)
        self.assertAlmostEqual(random_coding_exponent_bsc(bsc_capacity(spec), spec), 0.0, delta=1e-9)
        self.assertAlmostEqual(random_coding_exponent_bsc(0.0, spec), gallager_e0_bsc(1.0, spec), delta=1e-9)

        rho = np.linspace(0.0, 1.0, 100001)
        s = 1.0 / (1.0 + rho)
        e0 = rho - (1.0 + rho) * np.log2(0.9 ** s + 0.1 ** s)
        oracle = float(np.max(e0 - rho * 0.3))
        value = random_coding_exponent_bsc(0.3, spec)
        log.debug(f'\tE_r(0.3) {value} vs dense grid {oracle}')
        self.assertAlmostEqual(value, oracle, delta=1e-6)

    def testMcuEntropyAgainstEnumeration(self):
        log = logging.getLogger('TestChannels.testMcuEntropyAgainstEnumeration')

        pmf = MCU_W2.explicit_pmf()
        np.testing.assert_allclose(pmf, [0.7, 0.1, 0.1, 0.1])
        enumerated = -sum(p * math.log2(p) for p in pmf if p > 0)
        h = mcu_error_entropy(MCU_W2)
        log.debug(f'\tH(E) {h} vs enumeration {enumerated}')
        self.assertAlmostEqual(h, enumerated, delta=1e-12)
        self.assertAlmostEqual(h, 1.3568, delta=1e-4)
        self.assertAlmostEqual(mcu_effective_capacity(MCU_W2), 0.3216, delta=1e-4)

        info = np.array([-math.log2(p) for p in pmf])
        variance = float(np.sum(pmf * (info - np.sum(pmf * info)) ** 2))
        self.assertAlmostEqual(mcu_dispersion(MCU_W2), variance / 2, delta=1e-12)

    def testMcuDegenerateAndReduction(self):
        quiet = WordMcuSpec(word_bits=3, alpha=0.0, classes=((1.0, 7),))
        self.assertEqual(mcu_error_entropy(quiet), 0.0)
        self.assertEqual(mcu_effective_capacity(quiet), 1.0)
        certain = WordMcuSpec(word_bits=1, alpha=1.0, classes=((1.0, 1),))
        self.assertEqual(mcu_error_entropy(certain), 0.0)
        for eps in (0.01, 0.1, 0.3):
            reduced = WordMcuSpec.from_bsc(eps)
            self.assertAlmostEqual(mcu_effective_capacity(reduced), bsc_capacity(BscSpec(eps)), delta=1e-12)
            self.assertAlmostEqual(mcu_dispersion(reduced), bsc_dispersion(BscSpec(eps)), delta=1e-12)
        with self.assertRaises(DomainException):
            WordMcuSpec(word_bits=2, alpha=0.3, classes=((1.0, 4),))
        with self.assertRaises(DomainException):
            WordMcuSpec(word_bits=2, alpha=0.3, classes=((0.5, 1), (0.4, 1)))

    def testIntegralFloatCounts(self):
        # JSON numbers arrive as floats
        spec = WordMcuSpec(2.0, 0.3, (McuClass(1.0, 3.0),))
        self.assertIsInstance(spec.word_bits, int)
        self.assertIsInstance(spec.classes[0].multiplicity, int)
        np.testing.assert_allclose(spec.explicit_pmf(), [0.7, 0.1, 0.1, 0.1], atol=1e-15)
        self.assertEqual(mcu_error_entropy(spec), mcu_error_entropy(MCU_W2))
        for bad in (2.5, math.nan, math.inf, 0):
            with self.assertRaises(DomainException):
                WordMcuSpec(2, 0.3, (McuClass(1.0, bad),))

    def testHeteroSupply(self):
        self.assertEqual(hetero_supply([]), 0.0)
        self.assertEqual(hetero_supply([PrimitiveClass(1.0, 2.0)]), 2.0)
        self.assertAlmostEqual(hetero_supply([PrimitiveClass(0.531, 2.0), PrimitiveClass(1.0, 0.4)]), 1.462,
                               delta=1e-3)


class TestDemand(unittest.TestCase):

    def testConditionalVariance(self):
        self.assertEqual(conditional_variance(ScalarGaussianSource(1.0, 1.0)), 0.5)
        self.assertEqual(conditional_variance(ScalarGaussianSource(1.0, 0.0)), 0.0)
        self.assertAlmostEqual(conditional_variance(ScalarGaussianSource(4.0, 1.0)), 0.8, delta=1e-12)

    def testScalarDemand(self):
        self.assertAlmostEqual(scalar_demand(UNIT, 0.75), 1.0, delta=1e-12)
        self.assertEqual(scalar_demand(UNIT, 0.4), INFEASIBLE)
        self.assertEqual(scalar_demand(UNIT, 1.5), 0.0)
        with self.assertRaises(DomainException):
            scalar_demand(UNIT, 0.0)

    def testScalarDistortionAtSupply(self):
        self.assertEqual(scalar_distortion_at_supply(UNIT, 0.0), 1.0)
        self.assertAlmostEqual(scalar_distortion_at_supply(UNIT, 1e3), 0.5, delta=1e-12)
        self.assertAlmostEqual(scalar_distortion_at_supply(UNIT, 1.062), 0.6147, delta=1e-3)

    def testTwoModeWaterfilling(self):
        log = logging.getLogger('TestDemand.testTwoModeWaterfilling')

        np.testing.assert_allclose(P2.lambdas, [3.2, 0.5])
        self.assertAlmostEqual(P2.mmse_floor, 1.3, delta=1e-12)
        d1 = waterfill_distortion(P2, 1.0)
        d2 = waterfill_distortion(P2, 2.0)
        log.debug(f'\tD(1) {d1}, D(2) {d2}, R0 {two_mode_threshold(P2)}')
        self.assertAlmostEqual(d1, 2.6, delta=1e-9)
        self.assertAlmostEqual(d2, 1.932, delta=1e-3)
        self.assertAlmostEqual(two_mode_threshold(P2), 1.339, delta=1e-3)
        self.assertAlmostEqual(waterfill_distortion(P2, 0.0), 1.3 + 3.7, delta=1e-12)
        self.assertAlmostEqual(waterfill_rate(P2, 2.6), 1.0, delta=1e-6)
        self.assertEqual(waterfill_rate(P2, P2.prior_distortion), 0.0)
        self.assertEqual(waterfill_rate(P2, 1.0), math.inf)

    def testWaterfillInverseIdentity(self):
        log = logging.getLogger('TestDemand.testWaterfillInverseIdentity')

        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(100):
            p = int(rng.integers(1, 9))
            src = DiagonalGaussianSource(tuple(rng.uniform(0.1, 10.0, p)), tuple(rng.uniform(0.0, 2.0, p)))
            rate = float(rng.uniform(0.01, 4.0 * p))
            recovered = waterfill_rate(src, waterfill_distortion(src, rate))
            worst = max(worst, abs(recovered - rate))
        log.debug(f'\tworst inverse error {worst}')
        self.assertLess(worst, 1e-6)

    def testWaterfillAgainstGridSearch(self):
        # reverse water-filling minimizes sum D_i subject to sum 0.5 log2(lambda_i / D_i) <= R
        src = P2
        rate = 1.5
        best = math.inf
        for r1 in np.linspace(0.0, rate, 30001):
            d = sum(min(lam, lam * 2 ** (-2 * r)) for lam, r in zip(src.lambdas, (r1, rate - r1)))
            best = min(best, src.mmse_floor + d)
        self.assertAlmostEqual(waterfill_distortion(src, rate), best, delta=1e-4)

    def testIsotropic(self):
        self.assertAlmostEqual(isotropic_distortion(16, 1.0, 0.25, 48.0), 3.4, delta=1e-12)
        self.assertAlmostEqual(isotropic_distortion(16, 1.0, 0.25, 24.0), 4.8, delta=1e-12)
        self.assertAlmostEqual(isotropic_distortion(16, 1.0, 0.25, 0.0), 16.0, delta=1e-12)
        iso = DiagonalGaussianSource.isotropic(16, 1.0, 0.25)
        self.assertAlmostEqual(waterfill_distortion(iso, 48.0), 3.4, delta=1e-9)

    def testUncodedVector(self):
        self.assertAlmostEqual(uncoded_vector_mse(P2, 1.0), 2.225, delta=1e-3)
        self.assertAlmostEqual(uncoded_vector_mse(P8, 2.0), 4.33, delta=0.01)
        self.assertAlmostEqual(uncoded_vector_mse(P2, 60.0), P2.mmse_floor, delta=1e-12)
        self.assertAlmostEqual(waterfill_distortion(P8, 4.0), 5.77, delta=0.01)

    def testFano(self):
        task = ClassificationTask(10)
        self.assertAlmostEqual(fano_error_lower_bound(task, 4.0), 0.5, delta=1e-12)
        self.assertEqual(fano_error_lower_bound(task, 9.0), 0.0)
        self.assertAlmostEqual(fano_error_lower_bound(task, 0.0), 0.9, delta=1e-12)


class TestArchitecture(unittest.TestCase):

    def testRegistry(self):
        log = logging.getLogger('TestArchitecture.testRegistry')

        names = list_architecture_names()
        log.debug(f'\t{names}')
        self.assertEqual(set(names), {'task-direct', 'bypass', 'hard-separation', 'k-stage', 'soft-interface',
                                      'reliable-island', 'noisy-logic', 'compute-graph'})
        self.assertIs(get_architecture('hard-separation'), HardSeparation)
        self.assertIs(get_architecture('HardSeparation'), HardSeparation)
        with self.assertRaises(DomainException):
            get_architecture('pipeline')
        separated = {cls.kind for _, cls in list_architectures_matching_tags(['separated'])}
        self.assertEqual(separated, {'hard-separation', 'k-stage', 'reliable-island'})
        self.assertIn('m_dec', HardSeparation.field_names())
        self.assertTrue(TaskDirect.describe().startswith('Task-direct processing'))

    def testBudgetValidation(self):
        with self.assertRaises(DomainException):
            BudgetSpec(n=-1.0, c_ch=1.0, m=1.0, c_gate=1.0)
        with self.assertRaises(DomainException):
            BudgetSpec(n=1.0, c_ch=1.0, m=math.inf, c_gate=1.0)
        b = BudgetSpec(n=1.0, c_ch=2.0, m=4.0, c_gate=0.5)
        with self.assertRaises(DomainException):
            HardSeparation(3.0, 3.0).cuts(b)
        with self.assertRaises(DomainException):
            KStage(((3.0, None), (3.0, None))).validate(b)
        with self.assertRaises(DomainException):
            NoisyLogic(0.5, 2, 3)

    def testCutsAndBinding(self):
        b = BudgetSpec(n=1.0, c_ch=2.0, m=2.0, c_gate=0.531)
        supply, binding = TaskDirect().binding(b)
        self.assertAlmostEqual(supply, 1.062, delta=1e-12)
        self.assertEqual(binding, 'compute')
        cuts = HardSeparation.symmetric(2.0).cuts(b)
        self.assertEqual(set(cuts), {'channel', 'decode-stage', 'task-stage'})
        # ties resolve to the lexicographically first label
        self.assertEqual(HardSeparation.symmetric(2.0).binding(b)[1], 'decode-stage')
        balanced = BudgetSpec(n=2.5, c_ch=2.0, m=10.0, c_gate=0.5)
        self.assertEqual(TaskDirect().binding(balanced), (5.0, 'channel'))
        self.assertEqual(KStage.equal_split(6.0, 3).supply(BudgetSpec(5.0, 2.0, 6.0, 0.5)), 1.0)

    def testComputeGraphVariant(self):
        graph = serial(1.0, 2.0, 3.0)
        arch = ComputeGraphArchitecture(graph)
        b = BudgetSpec(n=1.0, c_ch=2.0, m=6.0, c_gate=0.5)
        self.assertEqual(arch.binding(b), (0.5, 'compute'))

    def testReliableIsland(self):
        b = BudgetSpec(n=1.0, c_ch=2.0, m=2.0, c_gate=0.5)
        cuts = ReliableIsland(0.6, 1.4, 0.4).cuts(b)
        self.assertEqual(set(cuts), {'channel', 'decode-stage', 'task-stage'})
        self.assertAlmostEqual(cuts['decode-stage'], 0.3, delta=1e-12)
        self.assertAlmostEqual(cuts['task-stage'], 1.1, delta=1e-12)
        self.assertEqual(ReliableIsland(0.6, 1.4, 0.4).binding(b)[1], 'decode-stage')
        # a faster task stage does not lift the decode cut
        self.assertAlmostEqual(ReliableIsland(0.6, 1.4, 0.4, c_task=0.9).supply(b), 0.3, delta=1e-12)
        with self.assertRaises(DomainException):
            ReliableIsland(1.5, 1.5, 0.0).cuts(b)


class TestSupply(unittest.TestCase):

    def setUp(self):
        self.b = BudgetSpec(n=1.0, c_ch=2.0, m=2.0, c_gate=0.531)

    def testTaskDirectAndBypass(self):
        self.assertAlmostEqual(supply_task_direct(self.b), 1.062, delta=1e-6)
        self.assertEqual(supply_task_direct(BudgetSpec(1.0, 2.0, 0.0, 0.531)), 0.0)
        self.assertEqual(supply_task_direct(BudgetSpec(2.5, 2.0, 10.0, 0.5)), 5.0)
        self.assertEqual(supply_bypass(self.b, 0.0), supply_task_direct(self.b))
        self.assertAlmostEqual(supply_bypass(self.b, 0.5), 1.562, delta=1e-6)
        self.assertEqual(supply_bypass(self.b, 1e9), 2.0)

    def testHardSeparation(self):
        self.assertAlmostEqual(supply_hard_separation(1.0, 2.0, 1.0, 0.531, 1.0, 0.531, 0.4), 0.931, delta=1e-6)
        self.assertEqual(supply_hard_separation(1.0, 2.0, 2.0, 0.531, 0.0, 0.531), 0.0)
        self.assertAlmostEqual(supply_hard_separation(1.0, 2.0, 1.0, 0.531, 1.0, 0.531), min(2.0, 0.531),
                               delta=1e-12)

    def testKStageAndSoftInterface(self):
        self.assertEqual(supply_k_stage(5.0, 2.0, [(2.0, 0.5)] * 3), 1.0)
        self.assertEqual(supply_k_stage(5.0, 2.0, [(2.0, 0.5), (0.0, 0.5)]), 0.0)
        self.assertAlmostEqual(supply_k_stage(1.0, 2.0, [(2.0, 0.531)]), supply_task_direct(self.b), delta=1e-12)
        self.assertEqual(supply_soft_interface(5.0, 2.0, 10.0, 3.0, 0.5), 3.5)
        self.assertEqual(supply_soft_interface(5.0, 2.0, 10.0, 0.0, 0.5), 5.0)
        self.assertEqual(supply_soft_interface(5.0, 2.0, 10.0, 10.0, 0.5), 0.0)
        with self.assertRaises(DomainException):
            supply_soft_interface(5.0, 2.0, 10.0, 11.0, 0.5)

    def testNoisyLogic(self):
        log = logging.getLogger('TestSupply.testNoisyLogic')

        gate = noisy_logic_gate_supply(0.25, 2, 3)
        log.debug(f'\t{gate}')
        self.assertAlmostEqual(gate.value, 0.125, delta=1e-12)
        self.assertEqual(gate.branch, 'propagation')
        self.assertAlmostEqual(gate.beta, 0.5, delta=1e-12)
        wide = noisy_logic_gate_supply(0.05, 3, 10)
        self.assertAlmostEqual(wide.value, 0.7136, delta=1e-4)
        self.assertEqual(wide.branch, 'compute')
        self.assertAlmostEqual(noisy_logic_gate_supply(0.25, 2, 0).value, bsc_capacity(BscSpec(0.25)), delta=1e-12)
        self.assertAlmostEqual(supply_noisy_logic(5.0, 2.0, 16.0, 0.25, 2, 3), 2.0, delta=1e-12)
        self.assertLess(supply_noisy_logic(5.0, 2.0, 16.0, 0.25, 2, 2000), 1e-12)

    def testGateBudget(self):
        self.assertAlmostEqual(required_gate_budget(1.0, 0.125), 8.0, delta=1e-12)
        self.assertEqual(required_gate_budget(0.0, 0.125), 0.0)
        beta = 0.5
        shallow = required_gate_budget(1.0, noisy_logic_gate_supply(0.25, 2, 3).value)
        deep = required_gate_budget(1.0, noisy_logic_gate_supply(0.25, 2, 4).value)
        self.assertAlmostEqual(deep / shallow, depth_budget_growth(beta), delta=1e-9)

    def testStrictGapInterval(self):
        self.assertEqual(strict_gap_interval(BudgetSpec(1.0, 2.0, 2.0, 0.5)), (0.5, 1.0))
        self.assertIsNone(strict_gap_interval(BudgetSpec(1.0, 2.0, 10.0, 0.5)))
        self.assertIsNone(strict_gap_interval(BudgetSpec(1.0, 2.0, 0.0, 0.5)))

    def testStrictGapProperty(self):
        log = logging.getLogger('TestSupply.testStrictGapProperty')

        rng = np.random.default_rng(7)
        violations = 0
        for _ in range(100):
            c_gate = float(rng.uniform(0.05, 1.0))
            m = float(rng.uniform(0.5, 50.0))
            c_ch = float(rng.uniform(0.1, 4.0))
            # compute-limited: n C_ch >= m C_gate
            n = m * c_gate / c_ch * float(rng.uniform(1.0, 3.0))
            b = BudgetSpec(n, c_ch, m, c_gate)
            low, high = strict_gap_interval(b)
            demand = float(rng.uniform(low, high))
            if demand in (low, high):
                continue
            direct = check_feasibility(TaskDirect(), b, demand)
            hard = check_feasibility(HardSeparation.symmetric(m), b, demand)
            if not direct.feasible or hard.feasible:
                violations += 1
        log.debug(f'\tviolations {violations}')
        self.assertEqual(violations, 0)

    def testDominanceChain(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            b = BudgetSpec(*(float(v) for v in rng.uniform(0.1, 10.0, 4)))
            direct = TaskDirect().supply(b)
            _, _, best_split = optimal_split_hard_separation(b.m, b.c_gate, b.c_gate)
            hard = min(b.channel_supply, best_split)
            for k in range(2, 6):
                staged = KStage.equal_split(b.m, k).supply(b)
                self.assertLessEqual(staged, hard + 1e-12)
            self.assertAlmostEqual(KStage.equal_split(b.m, 2).supply(b), hard, delta=1e-9)
            self.assertLessEqual(hard, direct + 1e-12)
            self.assertLessEqual(SoftInterface(b.m / 3).supply(b), direct + 1e-12)
            self.assertGreaterEqual(Bypass(0.5).supply(b), direct - 1e-12)

    def testCheckFeasibility(self):
        verdict = check_feasibility(TaskDirect(), self.b, 1.0)
        self.assertTrue(verdict.feasible)
        self.assertAlmostEqual(verdict.margin, 0.062, delta=1e-9)
        self.assertEqual(verdict.binding_cut, 'compute')
        self.assertFalse(check_feasibility(TaskDirect(), self.b, math.inf).feasible)
        gap_demand = 0.8
        self.assertTrue(check_feasibility(TaskDirect(), self.b, gap_demand).feasible)
        self.assertFalse(check_feasibility(HardSeparation.symmetric(2.0), self.b, gap_demand).feasible)

    def testStorageAndNetworkProxies(self):
        self.assertAlmostEqual(model_storage_error_lb(1000, 1500, 0.5), 0.249, delta=1e-12)
        self.assertEqual(model_storage_error_lb(1000, 2000, 0.5), 0.0)
        self.assertAlmostEqual(model_storage_error_lb(100, 0, 0.5), 0.99, delta=1e-12)
        self.assertEqual(budget_from_network(0, 0, 0, 0, (0, 0, 0)), 0.0)
        self.assertEqual(budget_from_network(10 ** 6, 8, kappas=(1, 0, 0)), 8 * 10 ** 6)
        self.assertEqual(budget_from_network(10 ** 6, 8, activation_bits=500, kappas=(0, 2, 0)), 1000)

    def testIslandClosedFormAgainstScan(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            m, c_dec, c_task = rng.uniform(0.5, 10.0), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)
            m_rel = rng.uniform(0.0, 3.0)
            grid = np.linspace(0.0, m, 20001)
            scan = np.max(np.minimum(grid * c_dec, m_rel + (m - grid) * c_task))
            _, value = island_supply_closed_form(m, c_dec, c_task, m_rel)
            self.assertAlmostEqual(value, scan, delta=1e-3 * max(1.0, scan))
            self.assertGreaterEqual(value, scan - 1e-12)


class TestOptimizer(unittest.TestCase):

    def testHardSeparationSplit(self):
        log = logging.getLogger('TestOptimizer.testHardSeparationSplit')

        m_dec, m_task, supply = optimal_split_hard_separation(4.0, 0.5, 0.5)
        self.assertEqual((m_dec, m_task, supply), (2.0, 2.0, 1.0))
        m_dec, m_task, supply = optimal_split_hard_separation(3.0, 1.0, 0.5)
        log.debug(f'\tsplit {m_dec}/{m_task} -> {supply}')
        self.assertAlmostEqual(supply, 1.0, delta=1e-9)
        grid = np.linspace(0.0, 3.0, 100001)
        self.assertAlmostEqual(supply, np.max(np.minimum(grid * 1.0, (3.0 - grid) * 0.5)), delta=1e-4)
        _, _, island = optimal_split_hard_separation(2.0, 0.5, 0.5, m_rel=0.4)
        self.assertAlmostEqual(island, 0.7, delta=1e-9)

    def testUnoptimized(self):
        optimizer = HardSeparationSplitOptimizer(2.0, 0.5, 0.5)
        with self.assertRaises(UnoptimizedException):
            optimizer.supply
        optimizer.optimize()
        self.assertEqual(optimizer.supply, 0.5)

    def testNormalApproxSplit(self):
        log = logging.getLogger('TestOptimizer.testNormalApproxSplit')

        symmetric = NormalApproxSplitOptimizer(4.0, C_GATE, C_GATE, 0.9, 0.9, 200, 0.0025, 0.0025)
        symmetric.optimize()
        self.assertAlmostEqual(symmetric.m_dec, 2.0, delta=1e-5)
        skewed = NormalApproxSplitOptimizer(4.0, C_GATE, C_GATE, 0.9, 0.9, 200, 0.01, 1e-5)
        skewed.optimize()
        log.debug(f'\tskewed split {skewed.m_dec}/{skewed.m_task}')
        self.assertGreater(skewed.m_task, 2.0)
        self.assertGreaterEqual(skewed.supply, min(skewed.stage_supplies(2.0)) - 1e-9)

    def testMaxMinAllocation(self):
        serial4 = serial(1, 1, 1, 1)
        alloc = allocate_maxmin(serial4, 8.0)
        np.testing.assert_allclose(alloc.budgets, [2.0] * 4)
        self.assertAlmostEqual(alloc.min_cut, 2.0, delta=1e-9)
        self.assertTrue(alloc.exact)

        parallel = ComputationGraph(['s', 't'], 's', 't', [Edge('s', 't', 1), Edge('s', 't', 1)])
        self.assertAlmostEqual(allocate_maxmin(parallel, 8.0).min_cut, 8.0, delta=1e-9)

        chain_skip = ComputationGraph(['s', 'a', 't'], 's', 't',
                                      [Edge('s', 'a', 1), Edge('a', 't', 1), Edge('s', 't', 1)])
        self.assertAlmostEqual(allocate_maxmin(chain_skip, 4.0, skip_fraction=0.5).min_cut, 3.0, delta=1e-9)

    def testMaxMinDuplicateEdges(self):
        doubled = ComputationGraph(['s', 't'], 's', 't', [Edge('s', 't', 1), Edge('s', 't', 1, gain=2.0)])
        alloc = allocate_maxmin(doubled, 4.0)
        self.assertEqual(alloc.budgets, [0.0, 4.0])
        self.assertAlmostEqual(alloc.min_cut, 8.0, delta=1e-9)
        self.assertTrue(alloc.exact)

    def testMaxMinNonSeriesParallel(self):
        bridge = ComputationGraph(['s', 'a', 'b', 't'], 's', 't',
                                  [Edge('s', 'a', 1), Edge('s', 'b', 1), Edge('a', 'b', 1), Edge('a', 't', 1),
                                   Edge('b', 't', 1)])
        alloc = allocate_maxmin(bridge, 10.0)
        self.assertEqual(alloc.method, 'uniform')
        self.assertTrue(alloc.heuristic_lower_bound)
        self.assertAlmostEqual(alloc.min_cut, 4.0, delta=1e-9)


class TestComputeGraph(unittest.TestCase):

    def testValidate(self):
        single = validate(ComputationGraph(['s', 't'], 's', 't', [Edge('s', 't', 1)]))
        self.assertTrue(single.validated)
        with self.assertRaisesRegex(GraphValidationException, 'cycle'):
            validate(ComputationGraph(['s', 'a', 't'], 's', 't',
                                      [Edge('s', 'a', 1), Edge('a', 'a', 1), Edge('a', 't', 1)]))
        with self.assertRaisesRegex(GraphValidationException, 'cycle'):
            validate(ComputationGraph(['s', 'a', 'b', 't'], 's', 't',
                                      [Edge('s', 'a', 1), Edge('a', 'b', 1), Edge('b', 'a', 1), Edge('b', 't', 1)]))
        merged = validate(ComputationGraph(['s', 't'], 's', 't', [Edge('s', 't', 1), Edge('s', 't', 2)]))
        self.assertEqual(len(merged.edges), 1)
        self.assertEqual(merged.edges[0].m, 3.0)
        with self.assertRaisesRegex(GraphValidationException, 'unreachable'):
            validate(ComputationGraph(['s', 'x', 't'], 's', 't', [Edge('s', 't', 1), Edge('x', 't', 1)]))
        with self.assertRaises(GraphValidationException):
            validate(ComputationGraph(['s', 't'], 's', 't', [Edge('s', 't', -1)]))

    def testToyTopologies(self):
        result = min_cut_supply(serial(1, 2, 3), 0.5)
        self.assertEqual(result.cut_value, 0.5)
        self.assertEqual([(e.tail, e.head) for e in result.cut_edges], [('s', 'v1')])
        self.assertEqual(result.flow_value, 0.5)
        parallel = ComputationGraph(['s', 't'], 's', 't', [Edge('s', 't', 1), Edge('s', 't', 2)])
        self.assertEqual(min_cut_supply(parallel, 1.0).cut_value, 3.0)
        chain_skip = ComputationGraph(['s', 'a', 't'], 's', 't',
                                      [Edge('s', 'a', 1), Edge('a', 't', 1), Edge('s', 't', 2)])
        self.assertEqual(min_cut_supply(chain_skip, 1.0).cut_value, 3.0)
        self.assertEqual(min_cut_supply(serial(2, 2, 2), 1.0).cut_value, 6.0 / 3)

    def testCombinedSupply(self):
        chain_skip = ComputationGraph(['s', 'a', 't'], 's', 't',
                                      [Edge('s', 'a', 1), Edge('a', 't', 1), Edge('s', 't', 2)])
        self.assertEqual(combined_supply(chain_skip, 1.0, 1.0, 2.0), 2.0)
        self.assertEqual(combined_supply(serial(1, 2, 3), 0.5, 1.0, 2.0), 0.5)
        self.assertEqual(combined_supply(serial(0, 0), 1.0, 1.0, 2.0), 0.0)

    def testResolution(self):
        with self.assertRaises(ResolutionException):
            min_cut_supply(serial(1e-8, 1.0), 1.0)

    def testLargeBudgets(self):
        log = logging.getLogger('TestComputeGraph.testLargeBudgets')

        result = min_cut_supply(serial(1000, 2000, 3000), 0.5)
        self.assertEqual(result.cut_value, 500.0)
        self.assertEqual([(e.tail, e.head) for e in result.cut_edges], [('s', 'v1')])
        self.assertEqual(result.flow_value, 500.0)
        self.assertEqual(flow_scale(np.array([1.0, 2.0])), FLOW_SCALE)
        self.assertEqual(flow_scale(np.array([500.0, 1000.0, 1500.0])), 10 ** 5)
        with self.assertRaises(ResolutionException):
            flow_scale(np.array([3e9]))

        rng = np.random.default_rng(7)
        c_gate = 0.25
        for _ in range(50):
            size = int(rng.integers(2, 10))
            pairs = {(i, i + 1) for i in range(size - 1)}
            for i in range(size):
                for j in range(i + 2, size):
                    if rng.random() < 0.4:
                        pairs.add((i, j))
            edges = [Edge(i, j, float(rng.integers(0, 5000)), float(rng.choice([0.0, 0.5])))
                     for i, j in sorted(pairs)]
            graph = ComputationGraph(list(range(size)), 0, size - 1, edges)
            result = min_cut_supply(graph, c_gate)
            oracle = brute_force_cut(graph, c_gate)
            log.debug(f'\t{size} nodes, cut {result.cut_value} vs {oracle}')
            self.assertAlmostEqual(result.cut_value, oracle, delta=1e-9)
            self.assertAlmostEqual(result.flow_value, oracle, delta=1e-9)

    def testRandomDagsAgainstEnumeration(self):
        log = logging.getLogger('TestComputeGraph.testRandomDagsAgainstEnumeration')

        rng = np.random.default_rng(2024)
        c_gate = 0.25
        worst = 0.0
        for _ in range(200):
            size = int(rng.integers(2, 13))
            nodes = list(range(size))
            pairs = {(i, i + 1) for i in range(size - 1)}
            for i in range(size):
                for j in range(i + 2, size):
                    if rng.random() < 0.35:
                        pairs.add((i, j))
            edges = [Edge(i, j, float(rng.integers(0, 5)), float(rng.choice([0.0, 0.5]))) for i, j in sorted(pairs)]
            graph = ComputationGraph(nodes, 0, size - 1, edges)
            result = min_cut_supply(graph, c_gate)
            oracle = brute_force_cut(graph, c_gate)
            worst = max(worst, abs(result.cut_value - oracle))
            self.assertAlmostEqual(result.cut_value, oracle, delta=1e-9)
            self.assertAlmostEqual(result.flow_value, oracle, delta=1e-9)
        log.debug(f'\tworst deviation {worst}')


class TestTail(unittest.TestCase):

    def testMseThreeOutcome(self):
        model = OutcomeModel(0.9, 0.05, 0.05)
        self.assertAlmostEqual(mse_three_outcome(model, BranchStats(0.1, 0.2, 10.0)), 0.6, delta=1e-12)
        safe = OutcomeModel(0.9, 0.0, 0.1)
        self.assertAlmostEqual(mse_three_outcome(safe, BranchStats(0.1, 0.2)), 0.9 * 0.1 + 0.1 * 0.2, delta=1e-12)
        self.assertEqual(mse_three_outcome(OutcomeModel(1.0, 0.0, 0.0), BranchStats(0.3, 5.0, 7.0)), 0.3)
        with self.assertRaisesRegex(MissingBranchStatException, 'clipping'):
            mse_three_outcome(model, BranchStats(0.1, 0.2))

    def testTailSandwich(self):
        model = OutcomeModel(0.99 - 1e-6, 1e-6, 0.01)
        stats = BranchStats(delta_ok=1e-3, delta_fb=1e-2, beta_ue=0.5)
        bounds = tail_sandwich(model, stats, 1)
        self.assertAlmostEqual(bounds.lower, 5e-7, delta=1e-15)
        self.assertAlmostEqual(bounds.upper, 1.090999e-3, delta=1e-9)
        self.assertAlmostEqual(tail_sandwich(model, stats, 1000).upper_block, 1000 * bounds.upper, delta=1e-12)
        safe = tail_sandwich(model, BranchStats(delta_ok=0.0, delta_fb=0.0, beta_ue=1.0), 50)
        self.assertAlmostEqual(safe.lower, 1e-6, delta=1e-18)
        self.assertAlmostEqual(safe.upper, 1e-6, delta=1e-18)
        self.assertAlmostEqual(safe.upper_block, 5e-5, delta=1e-16)
        with self.assertRaises(MissingBranchStatException):
            tail_sandwich(model, BranchStats(), 1)

    def testMarkovAndClipping(self):
        model = OutcomeModel(0.9, 0.0, 0.1)
        self.assertAlmostEqual(markov_tail_bound(model, BranchStats(0.1, 0.1), 1.0), 0.1, delta=1e-12)
        self.assertEqual(markov_tail_bound(model, BranchStats(0.0, 0.0), 1.0), 0.0)
        self.assertEqual(clipping_ue_bound(0.0, 0.0), 0.0)
        self.assertEqual(clipping_ue_bound(2.0, 1.0), 10.0)
        risky = OutcomeModel(0.9, 0.01, 0.09)
        bound = markov_tail_bound(risky, BranchStats(0.0, 0.0), 1.0, d_ue_ub=clipping_ue_bound(2.0, 1.0))
        self.assertAlmostEqual(bound, 0.1, delta=1e-12)
        self.assertAlmostEqual(deconditioned_ue_moment(1.0, 0.01), 100.0, delta=1e-9)

    def testDupCompareEnumeration(self):
        pmf = MCU_W2.explicit_pmf()
        for r in (2, 3):
            ok = ue = 0.0
            for patterns in itertools.product(range(4), repeat=r):
                p = math.prod(pmf[i] for i in patterns)
                if all(i == 0 for i in patterns):
                    ok += p
                elif len(set(patterns)) == 1:
                    ue += p
            model = dup_compare_outcomes(pmf, DetectorSpec(r))
            self.assertAlmostEqual(model.p_ok, ok, delta=1e-12)
            self.assertAlmostEqual(model.p_ue, ue, delta=1e-12)
            closed = mcu_dup_outcomes(MCU_W2, r)
            np.testing.assert_allclose(closed.as_tuple(), model.as_tuple(), atol=1e-12)
        np.testing.assert_allclose(mcu_dup_outcomes(MCU_W2, 2).as_tuple(), (0.49, 0.03, 0.48), atol=1e-12)
        np.testing.assert_allclose(mcu_dup_outcomes(MCU_W2, 3).as_tuple(), (0.343, 0.003, 0.654), atol=1e-12)

    def testDupCompareBsc(self):
        eps = 0.1
        model = dup_compare_outcomes([1 - eps, eps], DetectorSpec(2))
        np.testing.assert_allclose(model.as_tuple(), ((1 - eps) ** 2, eps ** 2, 2 * eps * (1 - eps)), atol=1e-12)
        self.assertEqual(dup_compare_outcomes([1.0, 0.0], DetectorSpec(2)).as_tuple(), (1.0, 0.0, 0.0))
        quiet = WordMcuSpec(2, 0.0, ((1.0, 3),))
        self.assertEqual(mcu_dup_outcomes(quiet, 2).as_tuple(), (1.0, 0.0, 0.0))

    def testCommonMode(self):
        model = mcu_dup_outcomes(MCU_W2, 2, theta=1.0)
        np.testing.assert_allclose(model.as_tuple(), (0.7, 0.3, 0.0), atol=1e-12)
        with self.assertRaises(UnsupportedDetectorException):
            DetectorSpec(3, 0.1)

    def testOutcomeNormalization(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            w = int(rng.integers(1, 6))
            count = int(rng.integers(1, min(4, 2 ** w - 1) + 1))
            probs = rng.dirichlet(np.ones(count))
            probs[-1] = 1.0 - math.fsum(probs[:-1])
            mult = rng.integers(1, (2 ** w - 1) // count + 1, size=count)
            spec = WordMcuSpec(w, float(rng.uniform(0, 1)), tuple(McuClass(float(p), int(n))
                                                                 for p, n in zip(probs, mult)))
            for r in (2, 3, 4):
                word = mcu_dup_outcomes(spec, r)
                self.assertAlmostEqual(sum(word.as_tuple()), 1.0, delta=1e-12)
                message = message_outcomes(word, int(rng.integers(1, 200)))
                self.assertAlmostEqual(sum(message.as_tuple()), 1.0, delta=1e-9)

    def testMessageOutcomes(self):
        log = logging.getLogger('TestTail.testMessageOutcomes')

        word = OutcomeModel.from_ok_ue(0.99, 1e-6)
        self.assertIs(message_outcomes(word, 1), word)
        message = message_outcomes(word, 100)
        log.debug(f'\t{message}')
        self.assertAlmostEqual(message.p_ok, 0.3660, delta=0.3660 * 0.01)
        self.assertAlmostEqual(message.p_ue, 3.70e-5, delta=3.70e-5 * 0.01)
        self.assertEqual(message_outcomes(OutcomeModel(0.99, 0.0, 0.01), 100).p_ue, 0.0)

    def testHashing(self):
        self.assertAlmostEqual(hash_ue_bound(20), 9.537e-7, delta=1e-10)
        self.assertEqual(hash_bits_for_target(1000, 1e-6), 30)
        self.assertEqual(hash_bits_for_target(1, 0.5), 1)

    def testReplicaSizing(self):
        quiet = WordMcuSpec(2, 0.0, ((1.0, 3),))
        self.assertEqual(size_replicas_for_tail(quiet, InterfaceSpec(2, 2), 1, 0.01).replicas, 2)
        sizing = size_replicas_for_tail(MCU_W2, InterfaceSpec(2, 2), 1, 0.01)
        self.assertEqual(sizing.replicas, 3)
        self.assertEqual(sizing.per_word_replicas, 3)
        iface = InterfaceSpec(16, 2)
        previous = 0
        for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
            r = size_replicas_for_tail(MCU_W2, iface, 100, eps).replicas
            self.assertGreaterEqual(r, previous)
            previous = r
        with self.assertRaises(DomainException):
            InterfaceSpec(7, 2)


class TestBlocklength(unittest.TestCase):

    def testQInverse(self):
        self.assertEqual(q_inv(0.5), 0.0)
        self.assertAlmostEqual(q_inv(0.01), 2.3263, delta=1e-3)
        self.assertAlmostEqual(q_inv(0.01 / 4), 2.807, delta=1e-3)
        self.assertAlmostEqual(q_inv(0.01 / 3), 2.713, delta=1e-3)
        for p in (1e-9, 0.2, 0.7):
            self.assertAlmostEqual(q_func(q_inv(p)), p, delta=1e-12)

    def testStageRates(self):
        budget = BudgetSpec(n=1.0, c_ch=2.0, m=2.0, c_gate=0.531)
        cfg = NaConfig(2000, budget, v_ch=1.0366, v_gate=0.9044)
        self.assertAlmostEqual(na_channel_rate(cfg, 0.01 / 3), 1.9382, delta=1e-3)
        self.assertAlmostEqual(na_compute_rate(cfg, 0.01 / 3), 0.9803, delta=1e-3)
        self.assertEqual(na_channel_rate(cfg, 0.5), 2.0)
        far = NaConfig(1e14, budget, v_ch=1.0366, v_gate=0.9044)
        self.assertAlmostEqual(na_channel_rate(far, 0.001), 2.0, delta=1e-5)
        self.assertAlmostEqual(na_compute_rate(far, 0.001), 1.062, delta=1e-5)

    def testMcuReduction(self):
        cfg = finite_t_config(500)
        bsc = na_compute_rate(cfg, 0.003)
        mcu = na_compute_rate(cfg, 0.003, mcu=WordMcuSpec.from_bsc(0.1))
        self.assertAlmostEqual(bsc, mcu, delta=1e-12)

    def testTaskDemand(self):
        self.assertAlmostEqual(GAUSSIAN_SOURCE_DISPERSION, 1.0407, delta=1e-4)
        self.assertEqual(na_task_demand(1.0, GAUSSIAN_SOURCE_DISPERSION, 100, 0.5), 1.0)
        self.assertAlmostEqual(na_task_demand(1.0, GAUSSIAN_SOURCE_DISPERSION, 1e14, 0.001), 1.0, delta=1e-6)

    def testErrorBudget(self):
        four = ErrorBudget.symmetric(0.01, HardSeparation.symmetric(2.0))
        self.assertEqual(four.eps_dec, 0.0025)
        three = ErrorBudget.symmetric(0.01, TaskDirect())
        self.assertAlmostEqual(three.eps_comp, 0.01 / 3, delta=1e-15)
        with self.assertRaises(DomainException):
            three.active(HardSeparation.symmetric(2.0))
        with self.assertRaises(DomainException):
            ErrorBudget(eps_src=0.01, eps_ch=0.01, eps_comp=0.01, total=0.02).active(TaskDirect())

    def testFirstOrderReduction(self):
        budget = BudgetSpec(1.0, 2.0, 2.0, C_GATE)
        cfg = NaConfig(1e12, budget, v_ch=1.0, v_gate=1.0)
        half = ErrorBudget(eps_src=0.5, eps_ch=0.5, eps_comp=0.5)
        verdict = na_feasibility(TaskDirect(), cfg, half, 1.0)
        first = check_feasibility(TaskDirect(), budget, 1.0)
        self.assertEqual(verdict.supply, first.supply)
        self.assertEqual(verdict.feasible, first.feasible)
        self.assertTrue(verdict.benchmark)

    def testHardSeparationBelowTaskDirect(self):
        cfg = finite_t_config(100)
        td, hs = TaskDirect(), HardSeparation.symmetric(2.0)
        self.assertLess(na_supply(hs, cfg, ErrorBudget.symmetric(0.01, hs)),
                        na_supply(td, cfg, ErrorBudget.symmetric(0.01, td)))

    def testPropagationBinding(self):
        arch = NoisyLogic(0.25, 2, 5)
        cfg = NaConfig(1000, BudgetSpec(10.0, 2.0, 10.0, 1.0), v_ch=1.0)
        verdict = na_feasibility(arch, cfg, ErrorBudget.symmetric(0.01, arch), 0.1)
        self.assertEqual(verdict.binding_cut, 'propagation')

    def testClamping(self):
        cfg = finite_t_config(1)
        arch = HardSeparation.symmetric(2.0)
        verdict = na_feasibility(arch, cfg, ErrorBudget.symmetric(1e-6, arch), 0.5)
        self.assertIn('decode-stage', verdict.clamped)
        self.assertEqual(verdict.supply, 0.0)
        raw = na_cuts(arch, cfg, ErrorBudget.symmetric(1e-6, arch))
        self.assertLess(raw['decode-stage'], 0.0)

    def testGaussianLimits(self):
        log = logging.getLogger('TestBlocklength.testGaussianLimits')

        cfg = finite_t_config(1e12)
        td, hs = TaskDirect(), HardSeparation.symmetric(2.0)
        d_td = gaussian_na_distortion(UNIT, td, cfg, ErrorBudget.symmetric(0.01, td))
        d_hs = gaussian_na_distortion(UNIT, hs, cfg, ErrorBudget.symmetric(0.01, hs))
        log.debug(f'\tT->inf task-direct {d_td}, hard-separation {d_hs}')
        self.assertAlmostEqual(d_td, 0.6147, delta=1e-3)
        self.assertAlmostEqual(d_hs, 0.7394, delta=1e-3)
        self.assertAlmostEqual(gaussian_first_order_distortion(UNIT, td, cfg.budget), 0.6147, delta=1e-3)
        self.assertAlmostEqual(reliable_jscc_distortion(UNIT, cfg, 0.01), 0.5 + 0.5 * 2 ** -4, delta=1e-4)

    def testCurvesMonotoneInT(self):
        log = logging.getLogger('TestBlocklength.testCurvesMonotoneInT')

        grid = (20, 50, 100, 200, 500, 1000, 2000)
        curves = [gaussian_na_curves(UNIT, finite_t_config(T), 0.01) for T in grid]
        for name in ('task-direct', 'hard-separation', 'reliable-jscc', 'reliable-sscc'):
            values = [c[name] for c in curves]
            log.debug(f'\t{name} {values}')
            for earlier, later in zip(values, values[1:]):
                self.assertLessEqual(later, earlier + 1e-12)

    def testExponentBound(self):
        spec = BscSpec(0.1)
        self.assertEqual(comp_error_exponent_bound(bsc_capacity(spec), 1.0, spec, 100), 1.0)
        bound = comp_error_exponent_bound(0.0, 1.0, spec, 100)
        self.assertAlmostEqual(math.log2(bound), -100 * gallager_e0_bsc(1.0, spec), delta=1e-6)
        doubled = comp_error_exponent_bound(0.0, 1.0, spec, 200)
        self.assertAlmostEqual(math.log2(doubled), 2 * math.log2(bound), delta=1e-6)


class TestThroughput(unittest.TestCase):

    def setUp(self):
        self.ps = PerSecondBudget(100.0, 100.0)

    def testPerInstance(self):
        self.assertEqual(per_instance_budgets(self.ps, 10.0), (10.0, 10.0))
        self.assertEqual(per_instance_budgets(self.ps, 100.0)[0], 1.0)
        self.assertEqual(per_instance_budgets(self.ps, 20.0), (5.0, 5.0))
        with self.assertRaises(DomainException):
            per_instance_budgets(self.ps, 0.0)

    def testDistortionFloor(self):
        self.assertAlmostEqual(distortion_floor_vs_lambda(UNIT, self.ps, 1.0, 1.0, 100.0), 0.625, delta=1e-12)
        self.assertAlmostEqual(distortion_floor_vs_lambda(UNIT, self.ps, 1.0, 1.0, 1e-3), 0.5, delta=1e-12)
        self.assertAlmostEqual(distortion_floor_vs_lambda(UNIT, self.ps, 1.0, 1.0, 1e9), 1.0, delta=1e-6)

    def testLambdaMax(self):
        self.assertAlmostEqual(lambda_max_estimation(UNIT, 0.75, self.ps, 1.0, 1.0), 200.0, delta=1e-9)
        compute_limited = PerSecondBudget(1000.0, 100.0)
        full = lambda_max_estimation(UNIT, 0.75, compute_limited, 1.0, 1.0)
        half = lambda_max_estimation(UNIT, 0.75, compute_limited, 1.0, 1.0, hard_separation=True)
        self.assertAlmostEqual(half, full / 2, delta=1e-9)
        self.assertEqual(lambda_max_estimation(UNIT, 1.0, self.ps, 1.0, 1.0), UNBOUNDED)
        self.assertEqual(lambda_max_estimation(UNIT, 1.5, self.ps, 1.0, 1.0), UNBOUNDED)
        with self.assertRaises(DomainException):
            lambda_max_estimation(UNIT, 0.5, self.ps, 1.0, 1.0)
        self.assertGreater(lambda_max_estimation(UNIT, 1.0 - 1e-9, self.ps, 1.0, 1.0), 1e6)

    def testReplicaThroughput(self):
        ps = PerSecondBudget(1e9, 1e6)
        bound = lambda_max_with_replicas(1e4, 3, 1e4, ps, 1.0, 1.0)
        self.assertAlmostEqual(bound.lambda_max, 33.33, delta=0.01)
        self.assertEqual(bound.binding, 'compute')
        single = lambda_max_with_replicas(1e4, 1, 1e4, ps, 1.0, 1.0)
        self.assertAlmostEqual(single.compute_bound, 100.0, delta=1e-9)
        previous = math.inf
        for r in range(1, 6):
            value = lambda_max_with_replicas(1e4, r, 1e4, ps, 1.0, 1.0).compute_bound
            self.assertLess(value, previous)
            previous = value
        free = lambda_max_with_replicas(0.0, 1, 1e4, ps, 1.0, 1.0)
        self.assertEqual((free.compute_bound, free.channel_bound, free.lambda_max), (UNBOUNDED, UNBOUNDED, UNBOUNDED))


class TestSimulator(unittest.TestCase):

    def testMaterializations(self):
        bits = np.tile([0, 1], 500000)
        self.assertTrue(np.array_equal(simulate_materializations(bits, 0.0, 1), bits))
        flipped = simulate_materializations(bits, 0.5 - 1e-9, 1)
        self.assertAlmostEqual(float(np.mean(flipped != bits)), 0.5, delta=0.002)
        self.assertTrue(np.array_equal(flipped, simulate_materializations(bits, 0.5 - 1e-9, 1)))
        self.assertFalse(np.array_equal(flipped, simulate_materializations(bits, 0.5 - 1e-9, 2)))

    def testDupCompareMonteCarlo(self):
        log = logging.getLogger('TestSimulator.testDupCompareMonteCarlo')

        for r in (2, 3):
            outcomes = simulate_dup_compare(MCU_W2, r, 10 ** 6, 20240601 + r, parallelism_hint=4)
            closed = mcu_dup_outcomes(MCU_W2, r)
            log.debug(f'\tr={r} empirical {outcomes.as_model()} closed {closed}')
            self.assertEqual(outcomes.trials, 10 ** 6)
            self.assertTrue(outcomes.contains(closed))
        quiet = simulate_dup_compare(WordMcuSpec(2, 0.0, ((1.0, 3),)), 2, 1000, 1)
        self.assertEqual((quiet.ok, quiet.ue, quiet.er), (1000, 0, 0))

    def testBatchAgreement(self):
        log = logging.getLogger('TestSimulator.testBatchAgreement')

        closed = mcu_dup_outcomes(MCU_W2, 2).p_ue
        hits = sum(simulate_dup_compare(MCU_W2, 2, 20000, seed).p_ue.contains(closed) for seed in range(100))
        log.debug(f'\t{hits}/100 batches contain p_ue')
        self.assertGreaterEqual(hits, 98)

    def testReproducibleAcrossParallelism(self):
        trials = 3 * 2 ** 16 + 5
        serial_run = simulate_dup_compare(MCU_W2, 2, trials, 99, parallelism_hint=1)
        threaded = simulate_dup_compare(MCU_W2, 2, trials, 99, parallelism_hint=4)
        self.assertEqual(serial_run, threaded)
        a = simulate_uncoded_gaussian(UNIT, 15.0, trials, 5, parallelism_hint=1)
        b = simulate_uncoded_gaussian(UNIT, 15.0, trials, 5, parallelism_hint=3)
        self.assertEqual(a, b)
        self.assertNotEqual(a, simulate_uncoded_gaussian(UNIT, 15.0, trials, 6))

    def testRepetition(self):
        self.assertEqual(simulate_repetition_code(4, 12, 0.0, 1000, 1).mean, 0.0)
        self.assertAlmostEqual(repetition_block_error(1, 3, 0.1), 0.028, delta=1e-12)
        estimate = simulate_repetition_code(1, 3, 0.1, 200000, 17)
        self.assertTrue(estimate.contains(0.028))
        errors = [repetition_block_error(1, m, 0.1) for m in (3, 5, 7, 9)]
        for earlier, later in zip(errors, errors[1:]):
            self.assertLessEqual(later, earlier)
        self.assertAlmostEqual(majority_bit_error(2, 0.1), 0.01 + 0.5 * 0.18, delta=1e-12)

    def testUncodedGaussian(self):
        log = logging.getLogger('TestSimulator.testUncodedGaussian')

        estimate = simulate_uncoded_gaussian(UNIT, 15.0, 10 ** 6, 31)
        log.debug(f'\tMSE {estimate.mean} +- {estimate.std_err}')
        self.assertTrue(estimate.contains(0.53125))
        noiseless = simulate_uncoded_gaussian(ScalarGaussianSource(1.0, 0.0), 3.0, 200000, 32)
        self.assertTrue(noiseless.contains(0.25))
        self.assertAlmostEqual(simulate_uncoded_gaussian(UNIT, 1e9, 100000, 33).mean, 0.5, delta=0.01)

    def testClassification(self):
        log = logging.getLogger('TestSimulator.testClassification')

        one = simulate_classification(10, 6.0, 0.1, 20000, 41, stages=1)
        two = simulate_classification(10, 6.0, 0.1, 20000, 42, stages=2)
        log.debug(f'\tone-stage {one.error.mean}, two-stage {two.error.mean}')
        self.assertGreaterEqual(two.error.mean, one.error.mean - 3 * one.error.std_err)
        self.assertGreaterEqual(one.error.mean, one.fano_bound)
        self.assertEqual(len(two.copies), 2)
        noiseless = simulate_classification(10, 10.0, 0.0, 1000, 43)
        self.assertEqual(noiseless.error.mean, 0.0)
        huge = simulate_classification(10, 1e4, 0.1, 1000, 44)
        self.assertEqual(huge.fano_bound, 0.0)
        self.assertLess(huge.error.mean, 1e-3)

    def testClipping(self):
        log = logging.getLogger('TestSimulator.testClipping')

        result = simulate_clipped_estimator(ScalarGaussianSource(1.0, 0.0), 0.1, 2.0, 200000, 51)
        log.debug(f'\tUE MSE {result.ue_mse.mean} vs bound {result.bound}')
        self.assertEqual(result.bound, 10.0)
        self.assertLessEqual(result.ue_mse.mean, result.bound + 3 * result.ue_mse.std_err)
        narrow = simulate_clipped_estimator(ScalarGaussianSource(1.0, 0.0), 0.1, 1e-6, 200000, 52)
        self.assertTrue(narrow.ue_mse.contains(1.0))
        clean = simulate_clipped_estimator(UNIT, 0.0, 10.0, 100000, 53)
        self.assertIsNone(clean.ue_mse)
        self.assertTrue(clean.mse.contains(0.5))


class TestScenario(unittest.TestCase):

    def testSampleScenariosEvaluate(self):
        log = logging.getLogger('TestScenario.testSampleScenariosEvaluate')

        cases = {
            'task_direct.json': ('capacity', 'demand', 'supply', 'feasible'),
            'hard_separation.json': ('supply', 'feasible'),
            'finite_t.json': ('fbl',),
            'p2_diagonal.json': ('demand', 'supply'),
            'compute_graph.json': ('supply', 'mincut', 'feasible'),
            'mcu_tail.json': ('capacity', 'tail'),
            'throughput.json': ('throughput',),
        }
        for name, commands in cases.items():
            scenario = load_scenario(scenario_path(name))
            for command in commands:
                rows = EVALUATORS[command](scenario)
                log.debug(f'\t{name} {command}: {len(rows)} rows')
                self.assertTrue(rows)
                for row in rows:
                    self.assertIn(row.provenance, PROVENANCE.values())

    def testP2Rows(self):
        rows = {r.quantity: r.value for r in EVALUATORS['demand'](load_scenario(scenario_path('p2_diagonal.json')))}
        self.assertAlmostEqual(rows['converse distortion'], 2.6, delta=1e-9)
        self.assertAlmostEqual(rows['D(2)'], 1.932, delta=1e-3)
        self.assertAlmostEqual(rows['R0'], 1.339, delta=1e-3)
        self.assertAlmostEqual(rows['uncoded mse'], 2.225, delta=1e-3)

    def testUnknownFields(self):
        base = {'schema': 1, 'source': {'kind': 'scalar', 'var_x': 1.0, 'var_v': 1.0, 'noise': 2}}
        with self.assertRaisesRegex(ScenarioParseException, r'source\.noise: unknown field'):
            parse_scenario(base)
        with self.assertRaisesRegex(ScenarioParseException, 'unknown field'):
            parse_scenario({'schema': 1, 'extra': True})
        with self.assertRaisesRegex(ScenarioParseException, 'unsupported schema'):
            parse_scenario({'schema': 2})
        with self.assertRaisesRegex(ScenarioParseException, 'source: var_x must be positive'):
            parse_scenario({'schema': 1, 'source': {'kind': 'scalar', 'var_x': -1.0, 'var_v': 1.0}})

    def testSyntaxErrorLocation(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'broken.json')
            with open(path, 'w') as f:
                f.write('{\n  "schema": 1,\n  "name": ,\n}\n')
            with self.assertRaisesRegex(ScenarioParseException, 'line 3 column'):
                load_scenario(path)
            with open(path, 'w') as f:
                json.dump({'schema': 1, 'graph': 'missing.json'}, f)
            with self.assertRaisesRegex(ScenarioParseException, 'file not found'):
                load_scenario(path)

    def testDefaults(self):
        scenario = parse_scenario({
            'schema': 1,
            'channel': {'kind': 'capacity', 'capacity': 2.0},
            'primitive': {'kind': 'capacity', 'capacity': 0.5},
            'budget': {'n': 1, 'm': 6},
            'architecture': {'kind': 'k-stage', 'k': 3},
            'error_budget': {'total': 0.03},
        })
        self.assertEqual(len(scenario.architecture.stages), 3)
        self.assertAlmostEqual(scenario.error_budget.eps_comp, 0.01, delta=1e-15)
        hard = parse_scenario({
            'schema': 1,
            'channel': {'kind': 'capacity', 'capacity': 2.0},
            'primitive': {'kind': 'capacity', 'capacity': 0.5},
            'budget': {'n': 1, 'm': 6},
            'architecture': {'kind': 'hard-separation', 'bypass_bits': 0.25},
        })
        self.assertEqual((hard.architecture.m_dec, hard.architecture.m_task), (3.0, 3.0))

    def testFloatMultiplicity(self):
        obj = {
            'schema': 1,
            'primitive': {'kind': 'mcu', 'word_bits': 2.0, 'alpha': 0.3, 'classes': [[1.0, 3.0]]},
            'interface': {'message_bits': 8, 'replicas': 2.0},
            'error_budget': {'total': 0.001},
            'block_len': 1000,
        }
        scenario = parse_scenario(obj)
        self.assertEqual(scenario.primitive.classes[0].multiplicity, 3)
        np.testing.assert_allclose(scenario.primitive.explicit_pmf(), MCU_W2.explicit_pmf())
        self.assertTrue(EVALUATORS['tail'](scenario))
        obj['primitive']['classes'] = [[1.0, 2.5]]
        with self.assertRaisesRegex(ScenarioParseException, 'primitive: class multiplicity'):
            parse_scenario(obj)

    def testWithValue(self):
        scenario = load_scenario(scenario_path('task_direct.json'))
        bigger = with_value(scenario, 'budget.m', 8)
        self.assertEqual(bigger.budget.m, 8)
        with self.assertRaisesRegex(ScenarioParseException, 'not a numeric scenario field'):
            with_value(scenario, 'architecture.kind', 1.0)
        with self.assertRaisesRegex(ScenarioParseException, 'no such scenario field'):
            with_value(scenario, 'budget.k', 1.0)
        p2 = with_value(load_scenario(scenario_path('p2_diagonal.json')), 'source.var_x.0', 9.0)
        self.assertEqual(p2.source.var_x, (9.0, 1.0))

    def testSweepTaskDirectKink(self):
        log = logging.getLogger('TestScenario.testSweepTaskDirectKink')

        scenario = load_scenario(scenario_path('task_direct.json'))
        grid = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        header, series = sweep(scenario, 'budget.m', grid, 'supply')
        column = header.index('supply')
        supplies = [record[column] for record in series]
        log.debug(f'\t{supplies}')
        kink = 2.0 / C_GATE
        for m, supply in zip(grid, supplies):
            self.assertAlmostEqual(supply, min(2.0, m * C_GATE), delta=1e-12)
        self.assertTrue(any(m < kink for m in grid) and any(m > kink for m in grid))

    def testSweepFiniteT(self):
        scenario = load_scenario(scenario_path('finite_t.json'))
        header, series = sweep(scenario, 'block_len', [20, 50, 100, 200, 500, 1000, 2000], 'fbl')
        self.assertEqual(header[0], 'block_len')
        for name in ('D task-direct', 'D hard-separation', 'D reliable-jscc', 'D reliable-sscc'):
            column = [record[header.index(name)] for record in series]
            for earlier, later in zip(column, column[1:]):
                self.assertLessEqual(later, earlier + 1e-12)

    def testSweepLambda(self):
        scenario = load_scenario(scenario_path('throughput.json'))
        header, series = sweep(scenario, 'throughput.lambda', [100, 200, 400, 800, 1600], 'throughput')
        column = [record[header.index('distortion floor')] for record in series]
        for earlier, later in zip(column, column[1:]):
            self.assertGreater(later, earlier)

    def testCsvRoundTrip(self):
        scenario = load_scenario(scenario_path('finite_t.json'))
        header, series = sweep(scenario, 'block_len', [20, 200, 2000], 'fbl')
        text = render_series(header, series, 'csv')
        parsed_header, parsed = read_csv_series(text)
        self.assertEqual(parsed_header, header)
        self.assertEqual(render_series(parsed_header, parsed, 'csv'), text)
        for record, values in zip(series, parsed):
            for value, cell in zip(record, values):
                if isinstance(value, bool) or value is None:
                    continue
                self.assertEqual(cell, float(f'{value:.10g}'))

    def testProvenanceResolves(self):
        log = logging.getLogger('TestScenario.testProvenanceResolves')

        for key, citation in PROVENANCE.items():
            path = citation.split(':')[0]
            parts = path.split('.')
            module = importlib.import_module('.'.join(parts[:2]))
            target = module
            for attr in parts[2:]:
                target = getattr(target, attr)
            log.debug(f'\t{key} -> {path}')
            self.assertTrue(callable(target) or isinstance(target, property), key)

    def testReproduceRowsCarryProvenance(self):
        for case in CASES:
            if case == 'binary-fano':
                continue
            for row in reproduce(case):
                self.assertIn(row.provenance, PROVENANCE.values())
                self.assertTrue(row.units)


class TestCli(unittest.TestCase):

    def testReproduceIso16(self):
        code, out, _ = run_cli('--format', 'json', 'reproduce', '--case', 'iso16')
        self.assertEqual(code, 0)
        rows = rows_by_quantity(out)
        self.assertAlmostEqual(rows['mmse floor']['value'], 3.2, delta=1e-9)
        self.assertAlmostEqual(rows['D(48)']['value'], 3.4, delta=1e-9)
        self.assertAlmostEqual(rows['D(24)']['value'], 4.8, delta=1e-9)
        self.assertAlmostEqual(rows['excess distortion ratio']['value'], 8.0, delta=1e-9)

    def testReproduceP2AndP8(self):
        log = logging.getLogger('TestCli.testReproduceP2AndP8')

        code, out, _ = run_cli('--format', 'json', 'rep', '--case', 'p2')
        self.assertEqual(code, 0)
        rows = rows_by_quantity(out)
        log.debug(f'\t{sorted(rows)}')
        self.assertAlmostEqual(rows['D(1) hard-separation']['value'], 2.6, delta=1e-9)
        self.assertAlmostEqual(rows['D(2) task-direct']['value'], 1.932, delta=1e-3)
        self.assertAlmostEqual(rows['uncoded mse']['value'], 2.225, delta=1e-3)
        self.assertAlmostEqual(rows['R0']['value'], 1.339, delta=1e-3)
        code, out, _ = run_cli('--format', 'json', 'reproduce', '--case', 'p8')
        rows = rows_by_quantity(out)
        self.assertAlmostEqual(rows['D(4) hard-separation']['value'], 5.77, delta=0.01)
        self.assertAlmostEqual(rows['uncoded mse']['value'], 4.33, delta=0.01)

    def testReproduceFiniteT(self):
        code, out, _ = run_cli('--format', 'json', 'reproduce', '--case', 'finite-t')
        self.assertEqual(code, 0)
        rows = rows_by_quantity(out)
        self.assertAlmostEqual(rows['T->inf task-direct']['value'], 0.6147, delta=1e-3)
        self.assertAlmostEqual(rows['T->inf hard-separation']['value'], 0.7394, delta=1e-3)
        self.assertAlmostEqual(rows['Q^-1(eps/4)']['value'], 2.807, delta=1e-3)

    def testReproduceBinaryFano(self):
        code, out, _ = run_cli('--format', 'json', 'reproduce', '--case', 'binary-fano')
        self.assertEqual(code, 0)
        rows = rows_by_quantity(out)
        one = rows['task-direct empirical error (m=6)']['value']
        two = rows['hard-separation empirical error (m=6)']['value']
        se = rows['task-direct empirical error (m=6) std err']['value']
        self.assertGreaterEqual(two, one - 3 * se)

    def testMincutGraph(self):
        code, out, _ = run_cli('--format', 'json', 'mincut', scenario_path('serial_123_graph.json'), '--c-gate', '0.5')
        self.assertEqual(code, 0)
        rows = rows_by_quantity(out)
        self.assertEqual(rows['min cut']['value'], 0.5)
        self.assertEqual(rows['min cut']['binding'], 's->a')
        code, out, _ = run_cli('--format', 'json', 'mc', scenario_path('compute_graph.json'))
        self.assertEqual(code, 0)
        self.assertAlmostEqual(rows_by_quantity(out)['min cut']['value'], 1.0, delta=1e-12)

    def testMincutDefaultCGate(self):
        with self.assertLogs('limitstools.cli', level='WARNING') as captured:
            code, out, _ = run_cli('--format', 'json', 'mincut', scenario_path('serial_123_graph.json'))
        self.assertEqual(code, 0)
        self.assertEqual(rows_by_quantity(out)['min cut']['value'], 1.0)
        self.assertEqual(len(captured.records), 1)
        self.assertIn('c_gate=1', captured.output[0])
        with self.assertLogs('limitstools.cli', level='DEBUG') as captured:
            run_cli('--format', 'json', 'mincut', scenario_path('serial_123_graph.json'), '-c', '1.0')
        self.assertFalse([r for r in captured.records if r.levelno >= logging.WARNING])

    def testStrictExitCodes(self):
        code, _, _ = run_cli('--strict', 'feasible', scenario_path('task_direct.json'))
        self.assertEqual(code, 0)
        code, out, _ = run_cli('--strict', '--format', 'csv', 'feasible', scenario_path('hard_separation.json'))
        self.assertEqual(code, 2)
        self.assertIn('feasible,false', out)
        code, _, _ = run_cli('feasible', scenario_path('hard_separation.json'))
        self.assertEqual(code, 0)

    def testErrors(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'bad.json')
            with open(path, 'w') as f:
                json.dump({'schema': 1, 'source': {'kind': 'scalar', 'var_x': 1, 'var_v': 1, 'snr': 3}}, f)
            code, _, err = run_cli('demand', path)
            self.assertEqual(code, 1)
            self.assertIn('source.snr: unknown field', err)
        code, _, _ = run_cli('capacity', os.path.join(SCENARIOS, 'absent.json'))
        self.assertEqual(code, 1)
        code, _, _ = run_cli('no-such-command')
        self.assertEqual(code, 1)
        code, _, _ = run_cli()
        self.assertEqual(code, 1)
        code, _, _ = run_cli('sweep', scenario_path('task_direct.json'), '--axis', 'architecture.kind', '--grid', '1')
        self.assertEqual(code, 1)

    def testSimulateCommand(self):
        code, out, _ = run_cli('--format', 'json', 'sim', scenario_path('mcu_tail.json'), '--trials', '200000',
                               '--parallelism', '2')
        self.assertEqual(code, 0)
        rows = rows_by_quantity(out)
        low, high = rows['empirical p_ue ci95 low']['value'], rows['empirical p_ue ci95 high']['value']
        self.assertLess(low, high)
        self.assertEqual(rows['closed-form p_ue']['value'], 0.03)
        code, out, _ = run_cli('--format', 'json', 'simulate', scenario_path('clipping.json'), '--trials', '20000')
        self.assertEqual(code, 0)
        self.assertEqual(rows_by_quantity(out)['UE mse bound']['value'], 10.0)

    def testSweepCommand(self):
        code, out, _ = run_cli('--format', 'csv', 'sweep', scenario_path('task_direct.json'), '--axis', 'budget.m',
                               '--range', '1', '6', '6')
        self.assertEqual(code, 0)
        header, series = read_csv_series(out)
        self.assertEqual(header[0], 'budget.m')
        self.assertEqual([record[0] for record in series], [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        code, out, _ = run_cli('--format', 'csv', 'sw', scenario_path('finite_t.json'), '-a', 'block_len', '-q', 'fbl',
                               '--logrange', '20', '2000', '5')
        self.assertEqual(code, 0)
        self.assertEqual(len(read_csv_series(out)[1]), 5)

    def testArchitectureCommands(self):
        code, out, _ = run_cli('--format', 'json', 'ls')
        self.assertEqual(code, 0)
        self.assertEqual(len(json.loads(out)), 8)
        code, out, _ = run_cli('ds', 'hard-separation')
        self.assertEqual(code, 0)
        self.assertIn('m_dec', out)
        code, _, err = run_cli('describe-architecture', 'pipeline')
        self.assertEqual(code, 1)
        self.assertIn('Unknown architecture', err)

    def testTableAndOverrides(self):
        code, out, _ = run_cli('capacity', scenario_path('task_direct.json'))
        self.assertEqual(code, 0)
        self.assertIn('0.531', out)
        self.assertIn('limitstools.channels.capacity', out)
        code, out, _ = run_cli('--format', 'json', 'fbl', scenario_path('finite_t.json'), '--block-len', '1e12')
        self.assertEqual(code, 0)
        self.assertAlmostEqual(rows_by_quantity(out)['na distortion task-direct']['value'], 0.6147, delta=1e-3)


if __name__ == '__main__':
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        logging.basicConfig(stream=sys.stderr)
        if len(sys.argv) > 1:
            # e.g. `python runtests.py TestTail.testMessageOutcomes` also logs that test at DEBUG
            name = sys.argv[1]
            cls, _, test = name.partition('.')
            logging.getLogger(f'{cls}.{test}' if test else cls).setLevel(logging.DEBUG)
        unittest.main()
