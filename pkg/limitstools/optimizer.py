import logging
import math

from scipy.optimize import minimize_scalar

from limitstools.errors import DomainException, UnoptimizedException
from limitstools.blocklength import na_stage_rate
from limitstools.graph import min_cut_supply, series_parallel_tree, validate
from limitstools.supply import island_supply_closed_form
from limitstools.util import check_nonnegative, check_probability, positive_part


log = logging.getLogger(__name__)

# relative tolerance when several parallel branches tie for the best efficiency
EFFICIENCY_TIE = 1e-12


class HardSeparationSplitOptimizer(object):

    def __init__(self, m_total, c_dec, c_task, m_rel=0.0):
        """
        HardSeparationSplitOptimizer finds the decode/task budget split that maximizes the smaller stage
        cut, optionally with a reliable island adding m_rel bits to the task stage. Note that this class
        is stateful, optimize must be run before results can be accessed.

        Attributes:
        -----------
        m_total : float
            primitive budget shared by the two stages
        c_dec : float
            decode-stage primitive capacity
        c_task : float
            task-stage primitive capacity
        m_rel : float
            reliable island bits reaching the task stage
        is_optimized : bool
            whether or not optimization has been run

        Methods:
        --------
        optimize : None
            optimizes and stores results internally
        m_dec, m_task, supply (properties): float
            the optimal split and the supply it attains
        """
        for name, value in (('m_total', m_total), ('c_dec', c_dec), ('c_task', c_task), ('m_rel', m_rel)):
            check_nonnegative(value, name)
        self.m_total = m_total
        self.c_dec = c_dec
        self.c_task = c_task
        self.m_rel = m_rel
        self.is_optimized = False

    def optimize(self):
        """
        Equalizes the two stage bottlenecks m_dec c_dec = m_rel + m_task c_task, falling back to the
        boundary m_dec = m_total when the island alone covers the task stage.
        """
        if self.m_rel == 0 and self.c_dec + self.c_task > 0:
            # harmonic form
            self._m_dec = self.m_total * self.c_task / (self.c_dec + self.c_task)
            self._supply = self.m_total * self.c_dec * self.c_task / (self.c_dec + self.c_task)
        else:
            self._m_dec, self._supply = island_supply_closed_form(self.m_total, self.c_dec, self.c_task, self.m_rel)
        log.debug('hard-separation split m_dec=%.10g of %.10g -> supply %.10g', self._m_dec, self.m_total,
                  self._supply)
        self.is_optimized = True

    def _check(self):
        if not self.is_optimized:
            raise UnoptimizedException('Must run HardSeparationSplitOptimizer.optimize() first')

    @property
    def m_dec(self):
        self._check()
        return self._m_dec

    @property
    def m_task(self):
        self._check()
        return self.m_total - self._m_dec

    @property
    def supply(self):
        """
        Compute-side supply at the optimal split (bits/sample).
        """
        self._check()
        return self._supply


def optimal_split_hard_separation(m_total, c_dec, c_task, m_rel=0.0):
    """
    Returns:
    --------
    (m_dec, m_task, supply) : (float, float, float)
    """
    optimizer = HardSeparationSplitOptimizer(m_total, c_dec, c_task, m_rel)
    optimizer.optimize()
    return optimizer.m_dec, optimizer.m_task, optimizer.supply


class NormalApproxSplitOptimizer(object):

    def __init__(self, m_total, c_dec, c_task, v_dec, v_task, block_len, eps_dec, eps_task):
        """
        NormalApproxSplitOptimizer runs a bounded scalar search for the hard-separation compute split that
        maximizes the smaller of the two normal-approximation stage supplies
        m_k c_k - sqrt(m_k v_k / T) Q^-1(eps_k). A stricter stage target pulls budget toward that stage.
        Note that this class is stateful, optimize must be run before results can be accessed.

        Attributes:
        -----------
        m_total : float
            primitive budget shared by the two stages
        c_dec, c_task : float
            stage capacities, bits/primitive
        v_dec, v_task : float
            stage dispersions, bits^2/primitive
        block_len : float
            blocklength T
        eps_dec, eps_task : float
            stage error targets
        """
        check_nonnegative(m_total, 'm_total')
        check_probability(eps_dec, 'eps_dec', low_open=True, high_open=True)
        check_probability(eps_task, 'eps_task', low_open=True, high_open=True)
        self.m_total = m_total
        self.c_dec = c_dec
        self.c_task = c_task
        self.v_dec = v_dec
        self.v_task = v_task
        self.block_len = block_len
        self.eps_dec = eps_dec
        self.eps_task = eps_task
        self.is_optimized = False

    def stage_supplies(self, m_dec):
        """
        Unclamped (decode, task) normal-approximation supplies at a split.
        """
        m_dec = min(max(m_dec, 0.0), self.m_total)
        return (na_stage_rate(m_dec, self.c_dec, self.v_dec, self.block_len, self.eps_dec),
                na_stage_rate(self.m_total - m_dec, self.c_task, self.v_task, self.block_len, self.eps_task))

    def optimize(self):
        """
        Public function to optimize the split. Changes internal state to is_optimized.
        """
        if self.m_total == 0:
            self._m_dec = 0.0
        else:
            result = minimize_scalar(lambda x: -min(self.stage_supplies(x)), bounds=(0.0, self.m_total),
                                     method='bounded', options={'xatol': 1e-10 * max(1.0, self.m_total)})
            self._m_dec = float(result.x)
        self._supply = positive_part(min(self.stage_supplies(self._m_dec)))
        log.debug('NA split m_dec=%.10g of %.10g at T=%g -> supply %.10g', self._m_dec, self.m_total,
                  self.block_len, self._supply)
        self.is_optimized = True

    def _check(self):
        if not self.is_optimized:
            raise UnoptimizedException('Must run NormalApproxSplitOptimizer.optimize() first')

    @property
    def m_dec(self):
        self._check()
        return self._m_dec

    @property
    def m_task(self):
        self._check()
        return self.m_total - self._m_dec

    @property
    def supply(self):
        """
        Clamped compute-side supply at the optimal split.
        """
        self._check()
        return self._supply


def _efficiency(tree, gains):
    """
    Value delivered per unit of budget by a series-parallel subtree (unit-capacity edges).
    """
    kind, children = tree
    if kind == 'edge':
        return gains[children]
    effs = [_efficiency(child, gains) for child in children]
    if kind == 'parallel':
        return max(effs)
    if any(e == 0 for e in effs):
        return 0.0
    return 1.0 / math.fsum(1.0 / e for e in effs)


def _allocate(tree, value, gains, budgets):
    kind, children = tree
    if kind == 'edge':
        budgets[children] += value / gains[children]
    elif kind == 'series':
        for child in children:
            _allocate(child, value, gains, budgets)
    else:
        effs = [_efficiency(child, gains) for child in children]
        best = max(effs)
        winners = [child for child, e in zip(children, effs) if e >= best * (1.0 - EFFICIENCY_TIE)]
        for child in winners:
            _allocate(child, value / len(winners), gains, budgets)


class MaxMinAllocator(object):

    def __init__(self, topology, total_budget, c_gate=1.0, skip_fraction=None):
        """
        MaxMinAllocator distributes a primitive budget over the interface edges of a receiver graph to
        maximize its minimum cut. Series-parallel graphs are solved exactly by composing edge
        efficiencies (series: harmonic, parallel: best branch); other DAGs get a uniform allocation whose
        min cut is reported as a heuristic lower bound. Note that this class is stateful, optimize must
        be run before results can be accessed.

        Attributes:
        -----------
        topology : ComputationGraph
            edge gains are honoured, edge budgets are replaced
        total_budget : float
            primitive budget m to distribute
        c_gate : float
            capacity per primitive when evaluating the achieved cut
        skip_fraction : float
            for a chain plus one s -> t skip edge: fraction of m spread over the chain, the rest on the skip
        """
        check_nonnegative(total_budget, 'total_budget')
        if skip_fraction is not None:
            check_probability(skip_fraction, 'skip_fraction')
        validate(topology)
        # raw edges are kept: budgets align with them, and duplicate edges with distinct gains are
        # parallel branches of the series-parallel tree
        self.topology = topology
        self.total_budget = total_budget
        self.c_gate = c_gate
        self.skip_fraction = skip_fraction
        self.is_optimized = False

    def _chain_and_skip(self):
        edges = self.topology.edges
        s, t = self.topology.source, self.topology.sink
        skips = [i for i, e in enumerate(edges) if e.tail == s and e.head == t]
        if len(skips) != 1:
            return None
        chain = [i for i in range(len(edges)) if i != skips[0]]
        successor = {}
        for i in chain:
            if edges[i].tail in successor:
                return None
            successor[edges[i].tail] = i
        node, ordered = s, []
        while node in successor and len(ordered) <= len(chain):
            ordered.append(successor[node])
            node = edges[successor[node]].head
        if node != t or len(ordered) != len(chain) or not chain:
            return None
        return skips[0], ordered

    def optimize(self):
        """
        Public function to run the allocation. Changes internal state to is_optimized.
        """
        edges = self.topology.edges
        budgets = [0.0] * len(edges)
        gains = [e.gain for e in edges]
        m = self.total_budget
        if self.skip_fraction is not None:
            shape = self._chain_and_skip()
            if shape is None:
                raise DomainException('skip_fraction needs a chain plus a single source -> sink skip edge')
            skip, chain = shape
            budgets[skip] = (1.0 - self.skip_fraction) * m
            for i in chain:
                budgets[i] = self.skip_fraction * m / len(chain)
            self._method, self._exact = 'chain-skip', False
        else:
            tree = series_parallel_tree(self.topology)
            if tree is not None and _efficiency(tree, gains) > 0:
                _allocate(tree, _efficiency(tree, gains) * m, gains, budgets)
                self._method, self._exact = 'series-parallel', all(e.b == 0 for e in edges)
            else:
                budgets = [m / len(edges)] * len(edges)
                self._method = 'uniform'
                # a zero-efficiency series-parallel graph has min cut 0 under any allocation
                self._exact = tree is not None
        self._budgets = budgets
        self._cut = min_cut_supply(self.topology.with_budgets(budgets), self.c_gate)
        if not self._exact and self._method == 'uniform':
            log.info('graph is not series-parallel; uniform allocation gives a heuristic lower bound %.10g',
                     self._cut.cut_value)
        log.debug('%s allocation -> min cut %.10g', self._method, self._cut.cut_value)
        self.is_optimized = True

    def _check(self):
        if not self.is_optimized:
            raise UnoptimizedException('Must run MaxMinAllocator.optimize() first')

    @property
    def budgets(self):
        """
        Per-edge budgets aligned with topology.edges.
        """
        self._check()
        return list(self._budgets)

    @property
    def min_cut(self):
        self._check()
        return self._cut.cut_value

    @property
    def cut(self):
        self._check()
        return self._cut

    @property
    def method(self):
        self._check()
        return self._method

    @property
    def exact(self):
        """
        False when the achieved cut is only a lower bound on the max-min value (heuristic allocation)
        or reflects a caller-fixed skip fraction.
        """
        self._check()
        return self._exact

    @property
    def heuristic_lower_bound(self):
        self._check()
        return self._method == 'uniform' and not self._exact


def allocate_maxmin(topology, total_budget, c_gate=1.0, skip_fraction=None):
    """
    Returns:
    --------
    allocator : MaxMinAllocator
        optimized; budgets, min_cut, exact and heuristic_lower_bound are available
    """
    allocator = MaxMinAllocator(topology, total_budget, c_gate=c_gate, skip_fraction=skip_fraction)
    allocator.optimize()
    return allocator
