import math
import numbers

from limitstools.errors import DomainException


# marker for a demand that no finite supply can meet
INFEASIBLE = math.inf

# marker for a rate that no supply limits, e.g. a target already met without any bits
UNBOUNDED = math.inf

TIE_TOLERANCE = 1e-12


def positive_part(x):
    """
    [x]_+ = max(x, 0)
    """
    return x if x > 0 else 0.0


def usable_capacity(capacity):
    """
    Capacity as it enters a supply cut. Negative plug-in capacities count as 0.
    """
    return positive_part(capacity)


def check_probability(p, name, low_open=False, high_open=False):
    """
    Raise DomainException unless p lies in [0, 1] (optionally open at either end).
    """
    if p is None or math.isnan(p):
        raise DomainException(f'{name} must be a probability, got {p}')
    if p < 0 or p > 1 or (low_open and p == 0) or (high_open and p == 1):
        low = '(' if low_open else '['
        high = ')' if high_open else ']'
        raise DomainException(f'{name} must lie in {low}0, 1{high}, got {p}')
    return p


def check_nonnegative(value, name):
    if value is None or math.isnan(value) or value < 0:
        raise DomainException(f'{name} must be nonnegative, got {value}')
    return value


def check_integer(value, name, minimum=1):
    """
    Raise DomainException unless value is a whole number >= minimum; returns it as an int
    (integral floats such as 3.0 are accepted).
    """
    if (isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value)
            or int(value) != value or value < minimum):
        raise DomainException(f'{name} must be an integer >= {minimum}, got {value!r}')
    return int(value)


def binding_cut(cuts, tolerance=TIE_TOLERANCE):
    """
    Picks the minimizing cut of a labelled cut set.

    Parameters:
    -----------
    cuts : dict
        label -> cut value (bits/sample)
    tolerance : float
        cuts within this distance of the minimum count as tied

    Returns:
    --------
    (value, label) : (float, str)
        minimum value and the lexicographically first label attaining it
    """
    if not cuts:
        raise DomainException('At least one cut is required.')
    value = min(cuts.values())
    tied = sorted(label for label, v in cuts.items() if v == value or v - value <= tolerance)
    return value, tied[0]
