"""
Scenario files: a versioned JSON description of one receiver (source, channel, primitives, budget,
architecture and the optional finite-blocklength, throughput, interface and simulation blocks),
parsed into the library's spec types and evaluated into report rows.

Unknown fields are errors. Diagnostics name the dotted field path, or the line and column for
JSON syntax errors.
"""
from contextlib import contextmanager
import copy
from dataclasses import dataclass, field
import json
import logging
import math
import os

import numpy as np

from limitstools.architecture import (
    BudgetSpec,
    ComputeGraphArchitecture,
    HardSeparation,
    KStage,
    NoisyLogic,
    TaskDirect,
    get_architecture,
)
from limitstools.blocklength import (
    ErrorBudget,
    NaConfig,
    gaussian_first_order_distortion,
    gaussian_na_curves,
    gaussian_na_distortion,
    na_cuts,
    na_feasibility,
    q_inv,
)
from limitstools.channels import (
    AwgnSpec,
    BscSpec,
    ExplicitSpec,
    McuClass,
    WordMcuSpec,
    capacity,
    dispersion,
    random_coding_exponent_bsc,
)
from limitstools.demand import (
    DiagonalGaussianSource,
    ScalarGaussianSource,
    scalar_demand,
    scalar_distortion_at_supply,
    two_mode_threshold,
    uncoded_vector_mse,
    vector_converse_distortion,
    water_level,
    waterfill_distortion,
    waterfill_rate,
)
from limitstools.errors import (
    DomainException,
    GraphValidationException,
    ResolutionException,
    ScenarioParseException,
    UnsupportedDetectorException,
)
from limitstools.graph import load_graph, min_cut_supply
from limitstools.optimizer import optimal_split_hard_separation
from limitstools.report import estimate_rows, make_row
from limitstools.simulator import (
    TrialConfig,
    repetition_block_error,
    simulate_classification,
    simulate_clipped_estimator,
    simulate_dup_compare,
    simulate_repetition_code,
    simulate_uncoded_gaussian,
    uncoded_gaussian_mse,
)
from limitstools.supply import check_feasibility, noisy_logic_gate_supply, required_gate_budget, strict_gap_interval
from limitstools.tail import (
    InterfaceSpec,
    hash_bits_for_target,
    mcu_dup_outcomes,
    message_outcomes,
    size_replicas_for_tail,
)
from limitstools.throughput import (
    PerSecondBudget,
    distortion_floor_vs_lambda,
    lambda_max_estimation,
    lambda_max_with_replicas,
    per_instance_budgets,
)
from limitstools.util import check_integer, usable_capacity


log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

TOP_LEVEL_FIELDS = {'schema', 'name', 'source', 'channel', 'primitive', 'budget', 'architecture', 'graph',
                    'error_budget', 'block_len', 'throughput', 'interface', 'simulation'}

SOURCE_FIELDS = {
    'scalar': {'kind', 'var_x', 'var_v', 'distortion'},
    'diagonal': {'kind', 'var_x', 'var_v', 'distortion', 'rate'},
}

CHANNEL_FIELDS = {
    'awgn': {'kind', 'snr'},
    'bsc': {'kind', 'epsilon'},
    'capacity': {'kind', 'capacity', 'dispersion'},
}

PRIMITIVE_FIELDS = {
    'bsc': {'kind', 'epsilon'},
    'mcu': {'kind', 'word_bits', 'alpha', 'classes'},
    'capacity': {'kind', 'capacity', 'dispersion'},
}

ERROR_BUDGET_FIELDS = {'total', 'eps_src', 'eps_ch', 'eps_comp', 'eps_dec', 'eps_task'}

THROUGHPUT_FIELDS = {'channel_uses_per_sec', 'primitives_per_sec', 'lambda', 'replicas', 'interface_bits'}

INTERFACE_FIELDS = {'message_bits', 'replicas', 'common_mode_theta'}

SIMULATION_FIELDS = {'trials', 'master_seed', 'parallelism_hint', 'experiment', 'message_bits', 'label_bits',
                     'stages', 'clip_range', 'corruption_prob'}

EXPERIMENTS = ('dup-compare', 'repetition', 'uncoded', 'classification', 'clipping')

_REQUIRED = object()


@dataclass(frozen=True)
class ThroughputBlock:
    per_second: PerSecondBudget
    lam: float = None
    replicas: int = None
    interface_bits: float = None


@dataclass(frozen=True)
class InterfaceBlock:
    """
    Detector-guarded interface: message_bits carried in words of the primitive's word length.
    """
    message_bits: int
    replicas: int = 2
    common_mode_theta: float = 0.0


@dataclass(frozen=True)
class SimulationBlock:
    config: TrialConfig
    experiment: str = None
    message_bits: int = None
    label_bits: int = None
    stages: int = 1
    clip_range: float = None
    corruption_prob: float = None


@dataclass(frozen=True)
class Scenario:
    """
    A parsed scenario. Absent optional blocks are None; commands call require() for what they need.
    """
    name: str
    raw: dict = field(repr=False)
    base_dir: str = '.'
    source: object = None
    distortion: float = None
    rate: float = None
    channel: object = None
    primitive: object = None
    budget: BudgetSpec = None
    architecture: object = None
    graph: object = None
    error_budget: ErrorBudget = None
    block_len: float = None
    throughput: ThroughputBlock = None
    interface: InterfaceBlock = None
    simulation: SimulationBlock = None

    def require(self, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ScenarioParseException(f'{self.name}: missing field(s) {", ".join(missing)}')


def _fail(path, message):
    raise ScenarioParseException(f'{path}: {message}')


def _object(value, path):
    if not isinstance(value, dict):
        _fail(path, f'expected an object, got {type(value).__name__}')
    return value


def _check_fields(obj, allowed, path, required=()):
    for key in obj:
        if key not in allowed:
            _fail(f'{path}.{key}', 'unknown field')
    for key in required:
        if key not in obj:
            _fail(f'{path}.{key}', 'required field missing')


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _number(obj, key, path, default=_REQUIRED):
    if key not in obj:
        if default is _REQUIRED:
            _fail(f'{path}.{key}', 'required field missing')
        return default
    value = obj[key]
    if not _is_number(value):
        _fail(f'{path}.{key}', f'expected a number, got {value!r}')
    return value


def _integer(obj, key, path, default=_REQUIRED):
    if key not in obj and default is not _REQUIRED:
        return default
    value = _number(obj, key, path)
    if not math.isfinite(value) or int(value) != value:
        _fail(f'{path}.{key}', f'expected an integer, got {value!r}')
    return int(value)


def _numbers(obj, key, path):
    values = obj.get(key)
    if not isinstance(values, list) or not all(_is_number(v) for v in values):
        _fail(f'{path}.{key}', 'expected a list of numbers')
    return tuple(values)


def _kind(obj, table, path):
    obj = _object(obj, path)
    kind = obj.get('kind')
    if kind not in table:
        _fail(f'{path}.kind', f'expected one of {", ".join(sorted(table))}, got {kind!r}')
    _check_fields(obj, table[kind], path)
    return kind


@contextmanager
def _component(path):
    """
    Reports component invariant failures as parse errors at path.
    """
    try:
        yield
    except (DomainException, GraphValidationException, ResolutionException, UnsupportedDetectorException) as err:
        raise ScenarioParseException(f'{path}: {err}') from err


def _parse_source(obj, path='source'):
    kind = _kind(obj, SOURCE_FIELDS, path)
    distortion = _number(obj, 'distortion', path, None)
    with _component(path):
        if kind == 'scalar':
            src = ScalarGaussianSource(_number(obj, 'var_x', path), _number(obj, 'var_v', path))
            return src, distortion, None
        src = DiagonalGaussianSource(_numbers(obj, 'var_x', path), _numbers(obj, 'var_v', path))
        return src, distortion, _number(obj, 'rate', path, None)


def _parse_capacity_spec(obj, path):
    return ExplicitSpec(_number(obj, 'capacity', path), _number(obj, 'dispersion', path, 0.0))


def _parse_channel(obj, path='channel'):
    kind = _kind(obj, CHANNEL_FIELDS, path)
    with _component(path):
        if kind == 'awgn':
            return AwgnSpec(_number(obj, 'snr', path))
        if kind == 'bsc':
            return BscSpec(_number(obj, 'epsilon', path))
        return _parse_capacity_spec(obj, path)


def _parse_primitive(obj, path='primitive'):
    kind = _kind(obj, PRIMITIVE_FIELDS, path)
    with _component(path):
        if kind == 'bsc':
            return BscSpec(_number(obj, 'epsilon', path))
        if kind == 'capacity':
            return _parse_capacity_spec(obj, path)
        classes = obj.get('classes')
        if not isinstance(classes, list) or not classes:
            _fail(f'{path}.classes', 'expected a non-empty list of [probability, multiplicity] pairs')
        parsed = []
        for k, pair in enumerate(classes):
            if not isinstance(pair, list) or len(pair) != 2 or not all(_is_number(v) for v in pair):
                _fail(f'{path}.classes[{k}]', 'expected [probability, multiplicity]')
            parsed.append(McuClass(float(pair[0]), pair[1]))
        return WordMcuSpec(_integer(obj, 'word_bits', path), _number(obj, 'alpha', path), tuple(parsed))


def _parse_stages(values, path):
    if not isinstance(values, list) or not values:
        _fail(path, 'expected a non-empty list of stage budgets or [m_k, c_k] pairs')
    stages = []
    for k, stage in enumerate(values):
        if _is_number(stage):
            stages.append((stage, None))
        elif isinstance(stage, list) and 1 <= len(stage) <= 2 and all(_is_number(v) for v in stage):
            stages.append((stage[0], stage[1] if len(stage) == 2 else None))
        else:
            _fail(f'{path}[{k}]', 'expected a number or [m_k, c_k]')
    return tuple(stages)


def _parse_architecture(obj, budget, graph, path='architecture'):
    obj = _object(obj, path)
    try:
        cls = get_architecture(obj.get('kind'))
    except DomainException as err:
        raise ScenarioParseException(f'{path}.kind: {err}') from err
    params = {key: value for key, value in obj.items() if key != 'kind'}
    if cls is ComputeGraphArchitecture:
        _check_fields(params, set(), path)
        if graph is None:
            _fail('graph', 'the compute-graph architecture needs a graph file')
        return ComputeGraphArchitecture(graph)
    allowed = set(cls.field_names())
    symmetric = cls is HardSeparation and 'm_dec' not in params and 'm_task' not in params
    equal_split = cls is KStage and 'k' in params
    if equal_split:
        allowed = {'k'}
    _check_fields(params, allowed, path)
    if (symmetric or equal_split) and budget is None:
        _fail('budget', f'{cls.kind} with a default split needs a budget')
    kwargs = {}
    for key, value in params.items():
        if key == 'stages':
            kwargs[key] = _parse_stages(value, f'{path}.stages')
        elif key == 'k':
            kwargs[key] = _integer(params, key, path)
        else:
            kwargs[key] = _number(params, key, path)
    with _component(path):
        if equal_split:
            arch = KStage.equal_split(budget.m, kwargs['k'])
        elif symmetric:
            arch = HardSeparation.symmetric(budget.m, **kwargs)
        else:
            try:
                arch = cls(**kwargs)
            except TypeError as err:
                raise ScenarioParseException(f'{path}: {err}') from err
        if budget is not None:
            arch.validate(budget)
    return arch


def _parse_budget(obj, channel, primitive, path='budget'):
    obj = _object(obj, path)
    _check_fields(obj, {'n', 'm'}, path, required=('n', 'm'))
    if channel is None or primitive is None:
        _fail(path, 'a budget needs both a channel and a primitive')
    with _component(path):
        return BudgetSpec(_number(obj, 'n', path), usable_capacity(capacity(channel)), _number(obj, 'm', path),
                          usable_capacity(capacity(primitive)))


def _parse_error_budget(obj, architecture, path='error_budget'):
    obj = _object(obj, path)
    _check_fields(obj, ERROR_BUDGET_FIELDS, path)
    values = {key: _number(obj, key, path) for key in obj}
    with _component(path):
        if set(values) == {'total'}:
            return ErrorBudget.symmetric(values['total'], architecture or TaskDirect())
        return ErrorBudget(**values)


def _parse_throughput(obj, path='throughput'):
    obj = _object(obj, path)
    _check_fields(obj, THROUGHPUT_FIELDS, path, required=('channel_uses_per_sec', 'primitives_per_sec'))
    with _component(path):
        per_second = PerSecondBudget(_number(obj, 'channel_uses_per_sec', path), _number(obj, 'primitives_per_sec', path))
    return ThroughputBlock(per_second, _number(obj, 'lambda', path, None), _integer(obj, 'replicas', path, None),
                           _number(obj, 'interface_bits', path, None))


def _parse_interface(obj, path='interface'):
    obj = _object(obj, path)
    _check_fields(obj, INTERFACE_FIELDS, path, required=('message_bits',))
    return InterfaceBlock(_integer(obj, 'message_bits', path), _integer(obj, 'replicas', path, 2),
                          _number(obj, 'common_mode_theta', path, 0.0))


def _parse_simulation(obj, path='simulation'):
    obj = _object(obj, path)
    _check_fields(obj, SIMULATION_FIELDS, path, required=('trials', 'master_seed'))
    experiment = obj.get('experiment')
    if experiment is not None and experiment not in EXPERIMENTS:
        _fail(f'{path}.experiment', f'expected one of {", ".join(EXPERIMENTS)}, got {experiment!r}')
    with _component(path):
        config = TrialConfig(_integer(obj, 'trials', path), _integer(obj, 'master_seed', path),
                             _integer(obj, 'parallelism_hint', path, 1))
    return SimulationBlock(config, experiment, _integer(obj, 'message_bits', path, None),
                           _integer(obj, 'label_bits', path, None), _integer(obj, 'stages', path, 1),
                           _number(obj, 'clip_range', path, None), _number(obj, 'corruption_prob', path, None))


def _parse_graph(value, base_dir, path='graph'):
    if not isinstance(value, str):
        _fail(path, 'expected a file path')
    graph_path = value if os.path.isabs(value) else os.path.join(base_dir, value)
    if not os.path.exists(graph_path):
        _fail(path, f'file not found: {graph_path}')
    with _component(path):
        return load_graph(graph_path)


def parse_scenario(obj, base_dir='.', name=None):
    """
    Validates a decoded scenario object against schema version 1.

    Parameters:
    -----------
    obj : dict
        decoded JSON
    base_dir : str
        directory that relative graph paths resolve against
    name : str
        fallback name when the scenario has none

    Returns:
    --------
    scenario : Scenario
    """
    obj = _object(obj, 'scenario')
    _check_fields(obj, TOP_LEVEL_FIELDS, 'scenario', required=('schema',))
    if obj['schema'] != SCHEMA_VERSION:
        _fail('scenario.schema', f'unsupported schema {obj["schema"]!r}; expected {SCHEMA_VERSION}')
    scenario_name = obj.get('name', name or 'scenario')
    source = distortion = rate = None
    if 'source' in obj:
        source, distortion, rate = _parse_source(obj['source'])
    channel = _parse_channel(obj['channel']) if 'channel' in obj else None
    primitive = _parse_primitive(obj['primitive']) if 'primitive' in obj else None
    budget = _parse_budget(obj['budget'], channel, primitive) if 'budget' in obj else None
    graph = _parse_graph(obj['graph'], base_dir) if 'graph' in obj else None
    architecture = _parse_architecture(obj['architecture'], budget, graph) if 'architecture' in obj else None
    error_budget = _parse_error_budget(obj['error_budget'], architecture) if 'error_budget' in obj else None
    block_len = _number(obj, 'block_len', 'scenario', None)
    scenario = Scenario(
        name=scenario_name,
        raw=copy.deepcopy(obj),
        base_dir=base_dir,
        source=source,
        distortion=distortion,
        rate=rate,
        channel=channel,
        primitive=primitive,
        budget=budget,
        architecture=architecture,
        graph=graph,
        error_budget=error_budget,
        block_len=block_len,
        throughput=_parse_throughput(obj['throughput']) if 'throughput' in obj else None,
        interface=_parse_interface(obj['interface']) if 'interface' in obj else None,
        simulation=_parse_simulation(obj['simulation']) if 'simulation' in obj else None,
    )
    log.debug('parsed scenario %s (%s)', scenario_name, ', '.join(sorted(k for k in obj if k != 'schema')))
    return scenario


def load_scenario(path):
    """
    Reads and parses a scenario file.

    Raises:
    -------
    ScenarioParseException
        with the line and column of a JSON syntax error, or the dotted path of a schema error
    """
    if not os.path.exists(path):
        raise ScenarioParseException(f'{path}: file not found')
    with open(path) as f:
        text = f.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioParseException(f'{path}: line {err.lineno} column {err.colno}: {err.msg}') from err
    base_dir = os.path.dirname(os.path.abspath(path))
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        return parse_scenario(obj, base_dir=base_dir, name=name)
    except ScenarioParseException as err:
        raise ScenarioParseException(f'{path}: {err}') from err


def with_value(scenario, axis, value):
    """
    Re-parses scenario with the numeric field at the dotted path axis replaced by value.
    List entries are addressed by integer segments ('source.var_x.0').
    """
    raw = copy.deepcopy(scenario.raw)
    parts = axis.split('.')
    node = raw
    for part in parts[:-1]:
        node = _step(node, part, axis)
    last = parts[-1]
    if isinstance(node, list):
        index = _index(node, last, axis)
        current, setter = node[index], (lambda v: node.__setitem__(index, v))
    elif isinstance(node, dict) and last in node:
        current, setter = node[last], (lambda v: node.__setitem__(last, v))
    else:
        raise ScenarioParseException(f'{axis}: no such scenario field')
    if not _is_number(current):
        raise ScenarioParseException(f'{axis}: not a numeric scenario field')
    setter(value)
    return parse_scenario(raw, base_dir=scenario.base_dir, name=scenario.name)


def _index(node, part, axis):
    try:
        index = int(part)
    except ValueError:
        raise ScenarioParseException(f'{axis}: expected a list index, got {part!r}')
    if not 0 <= index < len(node):
        raise ScenarioParseException(f'{axis}: index {index} out of range')
    return index


def _step(node, part, axis):
    if isinstance(node, list):
        return node[_index(node, part, axis)]
    if isinstance(node, dict) and part in node:
        return node[part]
    raise ScenarioParseException(f'{axis}: no such scenario field')


def capacity_rows(scenario):
    rows = []
    if scenario.channel is not None:
        rows.append(make_row('channel_capacity', 'channel capacity', capacity(scenario.channel), 'bits/use'))
        rows.append(make_row('channel_dispersion', 'channel dispersion', dispersion(scenario.channel),
                             'bits^2/use'))
    if scenario.primitive is not None:
        c_gate = capacity(scenario.primitive)
        rows.append(make_row('gate_capacity', 'gate capacity', c_gate, 'bits/primitive'))
        rows.append(make_row('gate_dispersion', 'gate dispersion', dispersion(scenario.primitive),
                             'bits^2/primitive'))
        if isinstance(scenario.primitive, BscSpec) and c_gate > 0:
            rate = c_gate / 2.0
            rows.append(make_row('error_exponent', f'gate error exponent at R={rate:.4g}',
                                 random_coding_exponent_bsc(rate, scenario.primitive), 'bits/primitive'))
    if not rows:
        raise ScenarioParseException(f'{scenario.name}: missing field(s) channel, primitive')
    return rows


def demand_bits(scenario):
    """
    First-order demand of the scenario's distortion target: R_{X|Y}(D) or the water-filling rate.
    """
    scenario.require('source', 'distortion')
    if isinstance(scenario.source, ScalarGaussianSource):
        return scalar_demand(scenario.source, scenario.distortion)
    return waterfill_rate(scenario.source, scenario.distortion)


def demand_rows(scenario):
    scenario.require('source')
    src = scenario.source
    rows = []
    if isinstance(src, ScalarGaussianSource):
        rows.append(make_row('mmse_floor', 'mmse floor', src.mmse_floor, 'mse'))
        if scenario.distortion is not None:
            rows.append(make_row('scalar_demand', 'demand', demand_bits(scenario), 'bits/sample'))
        if scenario.budget is not None and scenario.architecture is not None:
            supply = scenario.architecture.supply(scenario.budget)
            rows.append(make_row('distortion_at_supply', 'converse distortion',
                                 scalar_distortion_at_supply(src, supply), 'mse'))
        return rows
    rows.append(make_row('vector_mmse_floor', 'mmse floor', src.mmse_floor, 'mse'))
    for i, lam in enumerate(src.lambdas, start=1):
        rows.append(make_row('mode_variance', f'lambda_{i}', float(lam), 'mse'))
    if src.dimension == 2:
        rows.append(make_row('two_mode_threshold', 'R0', two_mode_threshold(src), 'bits/vector'))
    if scenario.distortion is not None:
        rows.append(make_row('waterfill_rate', 'demand', demand_bits(scenario), 'bits/vector'))
    if scenario.rate is not None:
        rows.append(make_row('water_level', 'water level', water_level(src, scenario.rate), 'mse'))
        rows.append(make_row('waterfill_distortion', f'D({scenario.rate:g})',
                             waterfill_distortion(src, scenario.rate), 'mse'))
    if scenario.budget is not None and scenario.architecture is not None:
        supply = scenario.architecture.supply(scenario.budget)
        rows.append(make_row('waterfill_distortion', 'converse distortion', vector_converse_distortion(src, supply),
                             'mse'))
    if scenario.channel is not None:
        rows.append(make_row('uncoded_vector_mse', 'uncoded mse',
                             uncoded_vector_mse(src, usable_capacity(capacity(scenario.channel))), 'mse'))
    return rows


def supply_rows(scenario):
    scenario.require('budget', 'architecture')
    arch, b = scenario.architecture, scenario.budget
    cuts = arch.cuts(b)
    supply, binding = arch.binding(b)
    rows = [make_row('cut', f'cut {label}', value, 'bits/sample', binding=label if label == binding else None)
            for label, value in cuts.items()]
    rows.append(make_row('supply', 'supply', supply, 'bits/sample', binding=binding))
    if isinstance(arch, (TaskDirect, HardSeparation)):
        gap = strict_gap_interval(b)
        if gap is not None:
            rows.append(make_row('strict_gap', 'strict gap low', gap[0], 'bits/sample'))
            rows.append(make_row('strict_gap', 'strict gap high', gap[1], 'bits/sample'))
    if isinstance(arch, HardSeparation):
        c_dec = b.c_gate if arch.c_dec is None else arch.c_dec
        c_task = b.c_gate if arch.c_task is None else arch.c_task
        m_dec, m_task, best = optimal_split_hard_separation(b.m, c_dec, c_task)
        rows.append(make_row('optimal_split', 'optimal m_dec', m_dec, 'primitives'))
        rows.append(make_row('optimal_split', 'optimal compute supply', best, 'bits/sample'))
    if isinstance(arch, NoisyLogic):
        gate = noisy_logic_gate_supply(arch.delta, arch.k_fan, arch.d_logic)
        rows.append(make_row('noisy_logic', 'beta', gate.beta, 'ratio'))
        rows.append(make_row('noisy_logic', 'C_logic', gate.value, 'bits/gate', binding=gate.branch))
        if scenario.distortion is not None and scenario.source is not None:
            rows.append(make_row('gate_budget', 'required gates', required_gate_budget(demand_bits(scenario),
                                                                                      gate.value), 'gates'))
    return rows


def feasible_rows(scenario):
    scenario.require('budget', 'architecture', 'source', 'distortion')
    verdict = check_feasibility(scenario.architecture, scenario.budget, demand_bits(scenario))
    return [
        make_row('supply', 'supply', verdict.supply, 'bits/sample', binding=verdict.binding_cut),
        make_row('demand', 'demand', verdict.demand, 'bits/sample'),
        make_row('margin', 'margin', verdict.margin, 'bits/sample'),
        make_row('feasible', 'feasible', verdict.feasible, 'verdict', binding=verdict.binding_cut),
    ]


def mincut_rows(graph, c_gate):
    """
    Min-cut witness rows for a validated graph.
    """
    result = min_cut_supply(graph, c_gate)
    listed = ', '.join(f'{e.tail}->{e.head}' for e in result.cut_edges)
    rows = [
        make_row('min_cut', 'min cut', result.cut_value, 'bits/instance', binding=listed),
        make_row('max_flow', 'max flow', result.flow_value, 'bits/instance'),
    ]
    for e in result.cut_edges:
        rows.append(make_row('min_cut', f'cut edge {e.tail}->{e.head}', e.capacity(c_gate), 'bits/instance'))
    return rows


def scenario_mincut_rows(scenario):
    scenario.require('graph', 'budget')
    return mincut_rows(scenario.graph, scenario.budget.c_gate)


def _na_config(scenario):
    scenario.require('budget', 'block_len')
    mcu = scenario.primitive if isinstance(scenario.primitive, WordMcuSpec) else None
    v_gate = 0.0 if mcu is not None or scenario.primitive is None else dispersion(scenario.primitive)
    v_ch = 0.0 if scenario.channel is None else dispersion(scenario.channel)
    with _component('block_len'):
        return NaConfig(scenario.block_len, scenario.budget, v_ch=v_ch, v_gate=v_gate, mcu=mcu)


def fbl_rows(scenario):
    scenario.require('architecture', 'error_budget')
    cfg = _na_config(scenario)
    arch, eb = scenario.architecture, scenario.error_budget
    rows = [make_row('q_inv', f'Q^-1({name})', q_inv(eps), 'sigma') for name, eps in eb.active(arch).items()]
    for label, value in na_cuts(arch, cfg, eb).items():
        rows.append(make_row('na_cut', f'na cut {label}', value, 'bits/sample'))
    src = scenario.source
    if scenario.distortion is not None and src is not None:
        verdict = na_feasibility(arch, cfg, eb, demand_bits(scenario))
        rows.append(make_row('na_supply', 'na supply', verdict.supply, 'bits/sample', binding=verdict.binding_cut))
        rows.append(make_row('na_demand', 'na demand', verdict.demand, 'bits/sample'))
        rows.append(make_row('feasible', 'feasible', verdict.feasible, 'verdict', binding=verdict.binding_cut))
    if isinstance(src, ScalarGaussianSource):
        rows.append(make_row('na_distortion', f'na distortion {arch.kind}', gaussian_na_distortion(src, arch, cfg, eb),
                             'mse'))
        if eb.total is not None:
            keys = {'task-direct': 'na_distortion', 'hard-separation': 'na_distortion',
                    'reliable-jscc': 'reliable_jscc', 'reliable-sscc': 'reliable_sscc'}
            for label, value in gaussian_na_curves(src, cfg, eb.total).items():
                rows.append(make_row(keys[label], f'D {label}', value, 'mse'))
        rows.append(make_row('first_order_distortion', 'first-order distortion',
                             gaussian_first_order_distortion(src, arch, scenario.budget), 'mse'))
    return rows


def throughput_rows(scenario):
    scenario.require('throughput', 'channel', 'primitive')
    tp = scenario.throughput
    c_ch = usable_capacity(capacity(scenario.channel))
    c_gate = usable_capacity(capacity(scenario.primitive))
    rows = []
    if tp.lam is not None:
        n, m = per_instance_budgets(tp.per_second, tp.lam)
        rows.append(make_row('per_instance', 'n per instance', n, 'uses/sample'))
        rows.append(make_row('per_instance', 'm per instance', m, 'primitives/sample'))
        if isinstance(scenario.source, ScalarGaussianSource):
            rows.append(make_row('distortion_vs_lambda', 'distortion floor',
                                 distortion_floor_vs_lambda(scenario.source, tp.per_second, c_ch, c_gate, tp.lam),
                                 'mse'))
    if isinstance(scenario.source, ScalarGaussianSource) and scenario.distortion is not None:
        hard = isinstance(scenario.architecture, HardSeparation)
        lam = lambda_max_estimation(scenario.source, scenario.distortion, tp.per_second, c_ch, c_gate,
                                    hard_separation=hard)
        rows.append(make_row('lambda_max', 'lambda max', lam, 'samples/s'))
        if tp.replicas is not None and tp.interface_bits is not None:
            bound = lambda_max_with_replicas(demand_bits(scenario), tp.replicas, tp.interface_bits, tp.per_second,
                                             c_gate, c_ch)
            rows.append(make_row('lambda_replicas', 'lambda max with replicas', bound.lambda_max, 'samples/s',
                                 binding=bound.binding))
            rows.append(make_row('lambda_replicas', 'compute bound', bound.compute_bound, 'samples/s'))
            rows.append(make_row('lambda_replicas', 'channel bound', bound.channel_bound, 'samples/s'))
    if not rows:
        raise ScenarioParseException(f'{scenario.name}: throughput needs lambda or a scalar source with a distortion')
    return rows


def _word_law(primitive, path='primitive'):
    if isinstance(primitive, BscSpec):
        return WordMcuSpec.from_bsc(primitive.epsilon)
    if isinstance(primitive, WordMcuSpec):
        return primitive
    _fail(path, 'expected a bsc or mcu primitive')


def tail_rows(scenario):
    scenario.require('primitive', 'interface', 'block_len', 'error_budget')
    spec = _word_law(scenario.primitive)
    block = scenario.interface
    total = scenario.error_budget.total
    if total is None:
        _fail('error_budget.total', 'required field missing')
    with _component('interface'):
        iface = InterfaceSpec(block.message_bits, spec.word_bits)
        word = mcu_dup_outcomes(spec, block.replicas, block.common_mode_theta)
    message = message_outcomes(word, iface.word_count)
    sizing = size_replicas_for_tail(spec, iface, scenario.block_len, total)
    rows = []
    for label, value in zip(('p_ok', 'p_ue', 'p_er'), word.as_tuple()):
        rows.append(make_row('dup_compare', f'word {label}', value, 'probability'))
    for label, value in zip(('p_ok', 'p_ue', 'p_er'), message.as_tuple()):
        rows.append(make_row('message_outcome', f'message {label}', value, 'probability'))
    rows.append(make_row('replicas', 'replicas for eps/T', sizing.replicas, 'replicas'))
    rows.append(make_row('replicas', 'per-word replicas', sizing.per_word_replicas, 'replicas'))
    rows.append(make_row('hash_bits', 'hash tag bits', hash_bits_for_target(scenario.block_len, total), 'bits'))
    return rows


def simulate_rows(scenario, experiment=None):
    scenario.require('simulation')
    sim = scenario.simulation
    experiment = experiment or sim.experiment
    if experiment not in EXPERIMENTS:
        _fail('simulation.experiment', f'expected one of {", ".join(EXPERIMENTS)}, got {experiment!r}')
    cfg = sim.config
    seed, trials, hint = cfg.master_seed, cfg.trials, cfg.parallelism_hint
    if experiment == 'dup-compare':
        scenario.require('primitive')
        spec = _word_law(scenario.primitive)
        replicas, theta = (2, 0.0) if scenario.interface is None else (scenario.interface.replicas,
                                                                       scenario.interface.common_mode_theta)
        outcomes = simulate_dup_compare(spec, replicas, trials, seed, theta=theta, parallelism_hint=hint)
        closed = mcu_dup_outcomes(spec, replicas, theta)
        rows = []
        for label, estimate, value in zip(('p_ok', 'p_ue', 'p_er'), (outcomes.p_ok, outcomes.p_ue, outcomes.p_er),
                                          closed.as_tuple()):
            rows += estimate_rows('sim_dup_compare', f'empirical {label}', estimate, 'probability')
            rows.append(make_row('dup_compare', f'closed-form {label}', value, 'probability'))
        return rows
    if experiment == 'repetition':
        scenario.require('primitive', 'budget')
        if not isinstance(scenario.primitive, BscSpec) or sim.message_bits is None:
            _fail('simulation', 'repetition needs a bsc primitive and simulation.message_bits')
        eps, m = scenario.primitive.epsilon, scenario.budget.m
        with _component('simulation'):
            estimate = simulate_repetition_code(sim.message_bits, m, eps, trials, seed, parallelism_hint=hint)
            exact = repetition_block_error(sim.message_bits, m, eps)
        return (estimate_rows('sim_repetition', 'empirical block error', estimate, 'probability')
                + [make_row('repetition_error', 'exact block error', exact, 'probability')])
    if experiment == 'uncoded':
        scenario.require('source', 'channel')
        if not isinstance(scenario.source, ScalarGaussianSource) or not isinstance(scenario.channel, AwgnSpec):
            _fail('simulation', 'uncoded needs a scalar source and an awgn channel')
        estimate = simulate_uncoded_gaussian(scenario.source, scenario.channel.snr, trials, seed, parallelism_hint=hint)
        return (estimate_rows('sim_uncoded', 'empirical mse', estimate, 'mse')
                + [make_row('uncoded_gaussian', 'closed-form mse',
                            uncoded_gaussian_mse(scenario.source, scenario.channel.snr), 'mse')])
    if experiment == 'classification':
        scenario.require('primitive', 'budget')
        if not isinstance(scenario.primitive, BscSpec) or sim.label_bits is None:
            _fail('simulation', 'classification needs a bsc primitive and simulation.label_bits')
        with _component('simulation'):
            result = simulate_classification(sim.label_bits, scenario.budget.m, scenario.primitive.epsilon, trials,
                                             seed, stages=sim.stages, parallelism_hint=hint)
        return (estimate_rows('sim_classification', 'empirical error', result.error, 'probability')
                + [make_row('fano_bound', 'fano floor', result.fano_bound, 'probability'),
                   make_row('supply', 'pipeline supply', result.supply, 'bits/label')])
    scenario.require('source')
    if not isinstance(scenario.source, ScalarGaussianSource) or sim.clip_range is None or sim.corruption_prob is None:
        _fail('simulation', 'clipping needs a scalar source, simulation.clip_range and simulation.corruption_prob')
    with _component('simulation'):
        result = simulate_clipped_estimator(scenario.source, sim.corruption_prob, sim.clip_range, trials, seed,
                                            parallelism_hint=hint)
    rows = estimate_rows('sim_clipping', 'empirical mse', result.mse, 'mse')
    if result.ue_mse is not None:
        rows += estimate_rows('sim_clipping', 'empirical UE mse', result.ue_mse, 'mse')
    rows.append(make_row('clipping_bound', 'UE mse bound', result.bound, 'mse'))
    return rows


EVALUATORS = {
    'capacity': capacity_rows,
    'demand': demand_rows,
    'supply': supply_rows,
    'feasible': feasible_rows,
    'mincut': scenario_mincut_rows,
    'fbl': fbl_rows,
    'throughput': throughput_rows,
    'tail': tail_rows,
    'simulate': simulate_rows,
}


def sweep(scenario, axis, grid, quantity='supply'):
    """
    Evaluates one command over a grid of values of a numeric scenario field.

    Returns:
    --------
    (header, series) : (list[str], list[list])
        header is the axis followed by every quantity label seen, in first-seen order; series holds one
        record per grid point, in grid order, None where a quantity is absent at that point
    """
    if quantity not in EVALUATORS:
        raise DomainException(f'unknown sweep quantity {quantity!r}; choose from {", ".join(EVALUATORS)}')
    evaluator = EVALUATORS[quantity]
    labels, points = [], []
    for value in grid:
        rows = evaluator(with_value(scenario, axis, value))
        values = {}
        for r in rows:
            if r.quantity not in values:
                values[r.quantity] = r.value
            if r.quantity not in labels:
                labels.append(r.quantity)
        points.append((value, values))
    log.debug('sweep %s over %d point(s) of %s', quantity, len(points), axis)
    header = [axis] + labels
    series = [[value] + [values.get(label) for label in labels] for value, values in points]
    return header, series


def linear_grid(start, stop, num):
    return [float(v) for v in np.linspace(start, stop, check_integer(num, 'grid size'))]


def log_grid(start, stop, num):
    if not start > 0 or not stop > 0:
        raise DomainException('log grid endpoints must be positive')
    return [float(v) for v in np.geomspace(start, stop, check_integer(num, 'grid size'))]
