import abc
from dataclasses import dataclass, field, fields
import inspect
import math
import sys
from typing import ClassVar

from limitstools.channels import BscSpec, bsc_capacity
from limitstools.errors import DomainException
from limitstools.graph import min_cut_supply
from limitstools.util import binding_cut, check_nonnegative, usable_capacity


# slack when comparing split budgets against the total
BUDGET_SLACK = 1e-12


def list_architectures():
    """
    Lists all concrete architecture classes in limitstools.architecture

    Returns:
    --------
    classes : list[tuples]
        list of string name, constructor pairs
    """
    return [(name, constructor) for name, constructor in inspect.getmembers(sys.modules[__name__], inspect.isclass)
                    if issubclass(constructor, ArchitectureSpec) and not inspect.isabstract(constructor)]


def list_architecture_names():
    """
    Lists all registry names (kinds) as helper for the CLI.

    Returns:
    --------
    kinds : list
        kebab-case names of all architectures
    """
    return sorted(constructor.kind for _, constructor in list_architectures())


def list_architectures_matching_tags(tags):
    """
    Lists all architecture names and constructors matching tags as helper for the CLI.

    Returns:
    --------
    architectures : list
        name, constructor pairs of architectures carrying any of the tags
    """
    assert type(tags) == list, 'Tags must be a list'
    return [(name, constructor) for name, constructor in list_architectures()
                    if any(tag in constructor.tags() for tag in tags)]


def get_architecture(name):
    """
    Looks up an architecture class by registry kind ('hard-separation') or class name ('HardSeparation').
    """
    for class_name, constructor in list_architectures():
        if name in (constructor.kind, class_name):
            return constructor
    raise DomainException(f'Unknown architecture {name!r}; choose from {", ".join(list_architecture_names())}')


def _within(used, total):
    return used <= total + BUDGET_SLACK * max(1.0, abs(total))


def logic_beta(delta, k_fan):
    """
    beta = K_fan (1 - 2 delta)^2, the per-layer information contraction of noisy logic.
    """
    return k_fan * (1.0 - 2.0 * delta) ** 2


def propagation_factor(beta, d_logic):
    """
    min(1, beta^d_logic); beta >= 1 never decays.
    """
    if beta >= 1.0 or d_logic == 0:
        return 1.0
    return beta ** d_logic


@dataclass(frozen=True)
class BudgetSpec:
    """
    Per-instance resource budget.

    Attributes:
    -----------
    n : float
        channel uses per instance
    c_ch : float
        channel capacity, bits/use
    m : float
        vulnerable primitive uses per instance
    c_gate : float
        primitive capacity, bits/primitive
    """
    n: float
    c_ch: float
    m: float
    c_gate: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            check_nonnegative(value, f.name)
            if math.isinf(value):
                raise DomainException(f'{f.name} must be finite')

    @property
    def channel_supply(self):
        return self.n * usable_capacity(self.c_ch)

    @property
    def compute_supply(self):
        return self.m * usable_capacity(self.c_gate)


@dataclass(frozen=True)
class ArchitectureSpec(abc.ABC):
    """
    ArchitectureSpec is an abstract class for a receiver organization. Each organization exposes the
    labelled cut terms whose minimum is its per-instance information supply.

    Attributes:
    -----------
    kind : str
        registry name used by scenarios and the CLI
    _tags (private) : list
        list of tags for reference when using CLI

    Methods:
    --------
    cuts : dict
        label -> cut value (bits/sample) under a budget
    supply : float
        minimum cut
    binding : (float, str)
        minimum cut and its label
    """
    kind: ClassVar[str] = ''
    _tags: ClassVar[list] = []

    @abc.abstractmethod
    def cuts(self, budget):
        """
        Returns labelled cut terms for this organization under a budget.

        Returns:
        --------
        cuts : dict
            label -> bits/sample, always including 'channel'
        """
        return {}

    def validate(self, budget):
        """
        Raises DomainException when the variant's budgets exceed the totals of budget.
        """

    def supply(self, budget):
        return self.binding(budget)[0]

    def binding(self, budget):
        return binding_cut(self.cuts(budget))

    @property
    def name(self):
        """
        Returns class name as a string
        """
        return self.__class__.__name__

    @classmethod
    def tags(cls):
        return list(cls._tags)

    @classmethod
    def describe(cls):
        """
        First paragraph of the class docstring, for the CLI.
        """
        doc = inspect.getdoc(cls) or ''
        return doc.split('\n\n')[0].replace('\n', ' ')

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class TaskDirect(ArchitectureSpec):
    """
    Task-direct processing: the vulnerable primitives compute the task output straight from the channel
    output, with no committed intermediate. Supply min{n C_ch, m C_gate}.
    """
    kind = 'task-direct'
    _tags = ['unified', 'baseline']

    def cuts(self, budget):
        return {'channel': budget.channel_supply, 'compute': budget.compute_supply}


@dataclass(frozen=True)
class Bypass(ArchitectureSpec):
    """
    Task-direct processing with a b-bit reliable side path around the vulnerable primitives.
    Supply min{n C_ch, b + m C_gate}.

    Attributes:
    -----------
    bypass_bits : float
        protected bits per instance
    """
    bypass_bits: float = 0.0
    kind = 'bypass'
    _tags = ['unified', 'reliable']

    def __post_init__(self):
        check_nonnegative(self.bypass_bits, 'bypass_bits')

    def cuts(self, budget):
        return {'channel': budget.channel_supply, 'compute': self.bypass_bits + budget.compute_supply}


@dataclass(frozen=True)
class HardSeparation(ArchitectureSpec):
    """
    Decode-then-compute: a decode stage commits a message that a separate task stage consumes.
    Each stage is its own cut, so the stage with the smaller budget bounds the supply.

    Attributes:
    -----------
    m_dec : float
        primitive budget of the decode stage
    m_task : float
        primitive budget of the task stage
    c_dec : float
        decode-stage primitive capacity; defaults to the budget's c_gate
    c_task : float
        task-stage primitive capacity; defaults to the budget's c_gate
    bypass_bits : float
        reliable bits reaching each stage
    """
    m_dec: float
    m_task: float
    c_dec: float = None
    c_task: float = None
    bypass_bits: float = 0.0
    kind = 'hard-separation'
    _tags = ['separated']

    def __post_init__(self):
        check_nonnegative(self.m_dec, 'm_dec')
        check_nonnegative(self.m_task, 'm_task')
        check_nonnegative(self.bypass_bits, 'bypass_bits')
        for name in ('c_dec', 'c_task'):
            if getattr(self, name) is not None:
                check_nonnegative(getattr(self, name), name)

    @classmethod
    def symmetric(cls, m, **kwargs):
        return cls(m_dec=m / 2.0, m_task=m / 2.0, **kwargs)

    def validate(self, budget):
        if not _within(self.m_dec + self.m_task, budget.m):
            raise DomainException(f'm_dec + m_task = {self.m_dec + self.m_task} exceeds m = {budget.m}')

    def cuts(self, budget):
        self.validate(budget)
        c_dec = budget.c_gate if self.c_dec is None else self.c_dec
        c_task = budget.c_gate if self.c_task is None else self.c_task
        return {
            'channel': budget.channel_supply,
            'decode-stage': self.bypass_bits + self.m_dec * usable_capacity(c_dec),
            'task-stage': self.bypass_bits + self.m_task * usable_capacity(c_task),
        }


@dataclass(frozen=True)
class KStage(ArchitectureSpec):
    """
    Serial K-stage pipeline with committed interfaces between stages; every stage is a cut.

    Attributes:
    -----------
    stages : tuple
        (m_k, c_k) per stage; c_k None means the budget's c_gate
    """
    stages: tuple = field(default_factory=tuple)
    kind = 'k-stage'
    _tags = ['separated', 'serial']

    def __post_init__(self):
        stages = []
        for stage in self.stages:
            m_k, c_k = (stage, None) if not isinstance(stage, (tuple, list)) else (tuple(stage) + (None,))[:2]
            check_nonnegative(m_k, 'stage budget')
            if c_k is not None:
                check_nonnegative(c_k, 'stage capacity')
            stages.append((m_k, c_k))
        if not stages:
            raise DomainException('k-stage architecture needs at least one stage')
        object.__setattr__(self, 'stages', tuple(stages))

    @classmethod
    def equal_split(cls, m, k):
        if k < 1:
            raise DomainException(f'K must be >= 1, got {k}')
        return cls(tuple((m / k, None) for _ in range(k)))

    def validate(self, budget):
        used = math.fsum(m_k for m_k, _ in self.stages)
        if not _within(used, budget.m):
            raise DomainException(f'stage budgets sum to {used}, exceeding m = {budget.m}')

    def cuts(self, budget):
        self.validate(budget)
        cuts = {'channel': budget.channel_supply}
        for k, (m_k, c_k) in enumerate(self.stages, start=1):
            cuts[f'stage-{k}'] = m_k * usable_capacity(budget.c_gate if c_k is None else c_k)
        return cuts


@dataclass(frozen=True)
class SoftInterface(ArchitectureSpec):
    """
    Soft (analog or list) interface whose representation consumes m_int of the primitive budget;
    the compute cut shrinks to (m - m_int) C_gate.
    """
    m_int: float = 0.0
    kind = 'soft-interface'
    _tags = ['unified']

    def __post_init__(self):
        check_nonnegative(self.m_int, 'm_int')

    def validate(self, budget):
        if not _within(self.m_int, budget.m):
            raise DomainException(f'm_int = {self.m_int} exceeds m = {budget.m}')

    def cuts(self, budget):
        self.validate(budget)
        remaining = max(budget.m - self.m_int, 0.0)
        return {'channel': budget.channel_supply, 'compute': remaining * usable_capacity(budget.c_gate)}


@dataclass(frozen=True)
class ReliableIsland(ArchitectureSpec):
    """
    Hard separation whose task stage also receives m_rel bits from a small reliable compute island.

    Attributes:
    -----------
    m_dec : float
        decode-stage primitive budget
    m_task : float
        task-stage primitive budget
    m_rel : float
        bits per instance supplied by the reliable island
    c_dec : float
        decode-stage capacity; defaults to the budget's c_gate
    c_task : float
        task-stage capacity; defaults to the budget's c_gate
    """
    m_dec: float
    m_task: float
    m_rel: float
    c_dec: float = None
    c_task: float = None
    kind = 'reliable-island'
    _tags = ['separated', 'reliable']

    def __post_init__(self):
        for name in ('m_dec', 'm_task', 'm_rel'):
            check_nonnegative(getattr(self, name), name)
        for name in ('c_dec', 'c_task'):
            if getattr(self, name) is not None:
                check_nonnegative(getattr(self, name), name)

    def validate(self, budget):
        if not _within(self.m_dec + self.m_task, budget.m):
            raise DomainException(f'm_dec + m_task = {self.m_dec + self.m_task} exceeds m = {budget.m}')

    def cuts(self, budget):
        self.validate(budget)
        c_dec = budget.c_gate if self.c_dec is None else self.c_dec
        c_task = budget.c_gate if self.c_task is None else self.c_task
        return {
            'channel': budget.channel_supply,
            'decode-stage': self.m_dec * usable_capacity(c_dec),
            'task-stage': self.m_rel + self.m_task * usable_capacity(c_task),
        }


@dataclass(frozen=True)
class NoisyLogic(ArchitectureSpec):
    """
    Receiver built from delta-noisy gates of fan-in K_fan and logic depth d_logic. The gate capacity
    C_gate(delta) and the depth contraction min(1, beta^d) are separate cuts, beta = K_fan (1 - 2 delta)^2.

    Attributes:
    -----------
    delta : float
        gate flip probability in (0, 0.5)
    k_fan : float
        fan-in, >= 1
    d_logic : float
        logic depth, >= 0
    q_inputs : float
        channel-dependent input bits injected into the circuit (recorded, not checked against a procedure)
    """
    delta: float
    k_fan: float
    d_logic: float
    q_inputs: float = None
    kind = 'noisy-logic'
    _tags = ['unified', 'logic']

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise DomainException(f'delta must lie in (0, 0.5), got {self.delta}')
        if not self.k_fan >= 1:
            raise DomainException(f'k_fan must be >= 1, got {self.k_fan}')
        check_nonnegative(self.d_logic, 'd_logic')
        if self.q_inputs is not None:
            check_nonnegative(self.q_inputs, 'q_inputs')

    @property
    def beta(self):
        return logic_beta(self.delta, self.k_fan)

    @property
    def gate_capacity(self):
        return bsc_capacity(BscSpec(self.delta))

    def cuts(self, budget):
        return {
            'channel': budget.channel_supply,
            'compute': budget.m * self.gate_capacity,
            'propagation': budget.m * propagation_factor(self.beta, self.d_logic),
        }


@dataclass(frozen=True)
class ComputeGraphArchitecture(ArchitectureSpec):
    """
    Receiver described by a computation DAG whose edges carry primitive budgets and reliable bits;
    the compute term is the graph's minimum s-t cut.

    Attributes:
    -----------
    graph : ComputationGraph
        validated receiver graph; its edge budgets replace the budget's m
    """
    graph: object
    kind = 'compute-graph'
    _tags = ['graph']

    def cuts(self, budget):
        result = min_cut_supply(self.graph, usable_capacity(budget.c_gate))
        return {'channel': budget.channel_supply, 'compute': result.cut_value}
