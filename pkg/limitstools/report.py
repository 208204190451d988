"""
Report rows and their table, CSV and JSON renderings.
"""
import csv
from dataclasses import asdict, dataclass
import io
import json
import math

from tabulate import tabulate

from limitstools.errors import DomainException


TABLE_DIGITS = 4
EXPORT_DIGITS = 10

FORMATS = ('table', 'csv', 'json')

COLUMNS = ('quantity', 'value', 'units', 'binding', 'provenance')

# quantity key -> "implementing function: formula"
PROVENANCE = {
    'channel_capacity': 'limitstools.channels.capacity: C_ch = 1 - h2(eps) (BSC), 0.5 log2(1 + rho) (AWGN)',
    'channel_dispersion': 'limitstools.channels.dispersion: V_ch = eps(1-eps) log2((1-eps)/eps)^2 (BSC), '
                          'rho(rho+2) / (2 (rho+1)^2) log2(e)^2 (AWGN)',
    'gate_capacity': 'limitstools.channels.capacity: C_gate = 1 - h2(eps) (BSC), 1 - H(E)/w (MCU)',
    'gate_dispersion': 'limitstools.channels.dispersion: V_gate = Var[-log2 P(E)] / w',
    'error_exponent': 'limitstools.channels.random_coding_exponent_bsc: max_rho E0(rho) - rho R',
    'mmse_floor': 'limitstools.demand.conditional_variance: var_x var_v / (var_x + var_v)',
    'vector_mmse_floor': 'limitstools.demand.DiagonalGaussianSource.mmse_floor: sum var_x var_v / (var_x + var_v)',
    'mode_variance': 'limitstools.demand.DiagonalGaussianSource.lambdas: var_x^2 / (var_x + var_v)',
    'scalar_demand': 'limitstools.demand.scalar_demand: 0.5 log2((var_x - floor) / (D - floor))',
    'distortion_at_supply': 'limitstools.demand.scalar_distortion_at_supply: floor + (var_x - floor) 2^(-2R)',
    'waterfill_rate': 'limitstools.demand.waterfill_rate: 0.5 sum [log2(lambda_i / nu)]_+',
    'waterfill_distortion': 'limitstools.demand.waterfill_distortion: floor + sum min(nu, lambda_i)',
    'water_level': 'limitstools.demand.water_level: nu solving R = 0.5 sum [log2(lambda_i / nu)]_+',
    'two_mode_threshold': 'limitstools.demand.two_mode_threshold: R0 = 0.5 log2(lambda_1 / lambda_2)',
    'isotropic_distortion': 'limitstools.demand.isotropic_distortion: p floor + p lambda 2^(-2R/p)',
    'uncoded_vector_mse': 'limitstools.demand.uncoded_vector_mse: floor + (sum lambda) 2^(-2 C_ch)',
    'fano_bound': 'limitstools.demand.fano_error_lower_bound: max{0, 1 - (R + 1) / q}',
    'cut': 'limitstools.architecture.ArchitectureSpec.cuts: labelled cut term',
    'supply': 'limitstools.supply.check_feasibility: min over labelled cuts',
    'demand': 'limitstools.supply.check_feasibility: task demand',
    'margin': 'limitstools.supply.check_feasibility: supply - demand',
    'feasible': 'limitstools.supply.check_feasibility: demand <= supply',
    'strict_gap': 'limitstools.supply.strict_gap_interval: ((m/2) C_gate, m C_gate)',
    'optimal_split': 'limitstools.optimizer.optimal_split_hard_separation: m c_task / (c_dec + c_task)',
    'noisy_logic': 'limitstools.supply.noisy_logic_gate_supply: min{C_gate(delta), min(1, beta^d)}',
    'gate_budget': 'limitstools.supply.required_gate_budget: r / C_logic',
    'min_cut': 'limitstools.graph.min_cut_supply: min over s-t cuts of sum m_e C_gate + b_e',
    'max_flow': 'limitstools.graph.min_cut_supply: max-flow certificate',
    'maxmin_allocation': 'limitstools.optimizer.allocate_maxmin: max over allocations of the min cut',
    'dup_compare': 'limitstools.tail.mcu_dup_outcomes: p_ue = alpha^r sum P^r / N^(r-1), p_ok = (1-alpha)^r',
    'message_outcome': 'limitstools.tail.message_outcomes: p_ok^M, (1-e)^M - p_ok^M, 1 - (1-e)^M',
    'replicas': 'limitstools.tail.size_replicas_for_tail: min r with p_ue <= eps / T',
    'hash_bits': 'limitstools.tail.hash_bits_for_target: ceil(log2(T / eps))',
    'q_inv': 'limitstools.blocklength.q_inv: inverse Gaussian tail',
    'na_cut': 'limitstools.blocklength.na_cuts: m c - sqrt(m V / T) Q^-1(eps)',
    'na_supply': 'limitstools.blocklength.na_feasibility: min over clamped normal-approximation cuts',
    'na_demand': 'limitstools.blocklength.na_task_demand: R + sqrt(V / T) Q^-1(eps_src)',
    'na_distortion': 'limitstools.blocklength.gaussian_na_distortion: floor + (var_x - floor) 2^(-2 R_eff)',
    'reliable_jscc': 'limitstools.blocklength.reliable_jscc_distortion: n C_ch - sqrt((n V_ch + V_src)/T) Q^-1(eps)',
    'reliable_sscc': 'limitstools.blocklength.reliable_sscc_distortion: channel and source backoffs at eps/2',
    'first_order_distortion': 'limitstools.blocklength.gaussian_first_order_distortion: T -> infinity limit',
    'per_instance': 'limitstools.throughput.per_instance_budgets: (B / lambda, G / lambda)',
    'distortion_vs_lambda': 'limitstools.throughput.distortion_floor_vs_lambda: '
                            'floor + (var_x - floor) 2^(-(2/lambda) min{S_ch, S_comp})',
    'lambda_max': 'limitstools.throughput.lambda_max_estimation: 2 min{S_ch, S_comp} / log2((var_x-floor)/(D-floor))',
    'lambda_replicas': 'limitstools.throughput.lambda_max_with_replicas: G / ((r-1) L_if + R / C_gate)',
    'sim_dup_compare': 'limitstools.simulator.simulate_dup_compare: empirical outcome frequencies',
    'sim_repetition': 'limitstools.simulator.simulate_repetition_code: empirical block error',
    'repetition_error': 'limitstools.simulator.repetition_block_error: 1 - (1 - p_bit)^k',
    'sim_uncoded': 'limitstools.simulator.simulate_uncoded_gaussian: empirical MSE',
    'uncoded_gaussian': 'limitstools.simulator.uncoded_gaussian_mse: floor + (var_x - floor) 2^(-2 C_ch)',
    'sim_classification': 'limitstools.simulator.simulate_classification: empirical label error',
    'sim_clipping': 'limitstools.simulator.simulate_clipped_estimator: empirical clipped MSE',
    'clipping_bound': 'limitstools.tail.clipping_ue_bound: 2 E[X^2 | UE] + 2 A^2',
}


@dataclass(frozen=True)
class ReportRow:
    """
    Attributes:
    -----------
    quantity : str
        label of the reported quantity
    value : float, int, bool or str
    units : str
    provenance : str
        "implementing function: formula"
    binding : str
        binding cut label where one applies
    """
    quantity: str
    value: object
    units: str
    provenance: str
    binding: str = None


def make_row(key, quantity, value, units, binding=None):
    """
    Builds a row whose provenance is looked up in PROVENANCE.
    """
    if key not in PROVENANCE:
        raise KeyError(f'no provenance registered for {key!r}')
    return ReportRow(quantity, value, units, PROVENANCE[key], binding)


def estimate_rows(key, quantity, estimate, units):
    """
    Rows for an EmpiricalEstimate: mean, standard error, 95% interval and trial count.
    """
    return [
        make_row(key, quantity, estimate.mean, units),
        make_row(key, f'{quantity} std err', estimate.std_err, units),
        make_row(key, f'{quantity} ci95 low', estimate.ci95_low, units),
        make_row(key, f'{quantity} ci95 high', estimate.ci95_high, units),
        make_row(key, f'{quantity} trials', estimate.trials, 'trials'),
    ]


def format_value(value, digits):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, float)):
        return f'{value:.{digits}g}'
    return str(value)


def _json_value(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if math.isfinite(value):
        return float(f'{value:.{EXPORT_DIGITS}g}')
    # JSON has no infinity literal
    return format_value(value, EXPORT_DIGITS)


def render_table(rows):
    table = [[r.quantity, format_value(r.value, TABLE_DIGITS), r.units, r.binding or '', r.provenance]
             for r in rows]
    return tabulate(table, headers=[c.title() for c in COLUMNS], tablefmt='grid', disable_numparse=True)


def render_csv(rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([r.quantity, format_value(r.value, EXPORT_DIGITS), r.units, r.binding or '', r.provenance])
    return buffer.getvalue()


def render_json(rows):
    records = []
    for r in rows:
        record = asdict(r)
        record['value'] = _json_value(r.value)
        records.append(record)
    return json.dumps(records, indent=2)


def render(rows, fmt='table'):
    """
    Renders report rows as 'table' (4 significant digits), 'csv' or 'json' (10 significant digits).
    """
    if fmt == 'table':
        return render_table(rows)
    if fmt == 'csv':
        return render_csv(rows)
    if fmt == 'json':
        return render_json(rows)
    raise DomainException(f'unknown format {fmt!r}; choose from {", ".join(FORMATS)}')


def render_series(header, series, fmt='csv'):
    """
    Renders a sweep: one record per grid point, columns in header order.

    Parameters:
    -----------
    header : list[str]
    series : list[list]
        values aligned with header
    """
    if fmt == 'table':
        body = [[format_value(v, TABLE_DIGITS) for v in values] for values in series]
        return tabulate(body, headers=header, tablefmt='grid', disable_numparse=True)
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        for values in series:
            writer.writerow([format_value(v, EXPORT_DIGITS) for v in values])
        return buffer.getvalue()
    if fmt == 'json':
        return json.dumps([dict(zip(header, (_json_value(v) for v in values))) for values in series], indent=2)
    raise DomainException(f'unknown format {fmt!r}; choose from {", ".join(FORMATS)}')


def read_csv_series(text):
    """
    Parses a CSV series back to (header, rows of floats); non-numeric cells stay strings.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for record in reader:
        values = []
        for cell in record:
            try:
                values.append(float(cell))
            except ValueError:
                values.append(cell)
        rows.append(values)
    return header, rows
