"""
Versioned, splittable random streams for the Monte Carlo simulator.

Trials are grouped into fixed-size chunks. Chunk i draws from a Philox counter-based generator
keyed by SeedSequence([master_seed, i]), so every chunk can be generated independently and in any
order while the concatenated stream stays identical across platforms and thread counts. Changing
the chunk size or the draw order inside a kernel changes the stream, and RNG_VERSION with it.
"""
import logging

import numpy as np

from limitstools.errors import DomainException
from limitstools.util import check_integer


log = logging.getLogger(__name__)

RNG_VERSION = 'philox-chunk-v1'

MAX_SEED = 2 ** 64 - 1


def check_seed(master_seed):
    seed = check_integer(master_seed, 'master_seed', minimum=0)
    if seed > MAX_SEED:
        raise DomainException(f'master_seed must be an integer in [0, 2^64), got {master_seed}')
    return seed


def chunk_generator(master_seed, chunk_index):
    """
    Returns:
    --------
    gen : numpy.random.Generator
        Philox stream for one chunk
    """
    seq = np.random.SeedSequence([check_seed(master_seed), int(chunk_index)])
    return np.random.Generator(np.random.Philox(seq))


def chunk_sizes(total, chunk_size):
    """
    Splits total draws into full chunks followed by one remainder chunk.
    """
    chunk_size = check_integer(chunk_size, 'chunk_size')
    full, rest = divmod(int(total), chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def polar_gaussian(gen, size):
    """
    Standard normal draws by the Marsaglia polar method.

    Uniform pairs are drawn in batches from the unit square [-1, 1)^2; pairs inside the unit disk
    (0 < s < 1) are kept and each yields two normals u sqrt(-2 ln s / s), v sqrt(-2 ln s / s).

    Parameters:
    -----------
    gen : numpy.random.Generator
    size : int

    Returns:
    --------
    z : numpy.ndarray
        shape (size,)
    """
    size = int(size)
    out = np.empty(size)
    filled = 0
    while filled < size:
        pairs = (size - filled + 1) // 2
        # acceptance rate is pi/4; oversample so one batch usually suffices
        batch = int(pairs * 1.3) + 8
        uv = gen.random((batch, 2)) * 2.0 - 1.0
        s = np.einsum('ij,ij->i', uv, uv)
        keep = (s > 0.0) & (s < 1.0)
        uv, s = uv[keep], s[keep]
        factor = np.sqrt(-2.0 * np.log(s) / s)
        z = (uv * factor[:, None]).ravel()
        take = min(z.size, size - filled)
        out[filled:filled + take] = z[:take]
        filled += take
    return out


def bernoulli(gen, p, size):
    """
    Boolean draws equal to True with probability p.
    """
    return gen.random(size) < p
