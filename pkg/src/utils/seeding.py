from typing import Iterable, Union

import numpy as np
import xxhash

_SEED_MASK = (1 << 63) - 1


def derive_seed(base_seed: int, *keys: Union[int, str]) -> int:
    """
    Derive an independent, reproducible seed from a base seed and keys.

    Args:
        base_seed: Seed of the enclosing scope (experiment seed, level seed...)
        *keys: Level index, item index or a role name such as "init"

    Returns:
        Non-negative 63-bit integer usable by numpy.random.default_rng
    """
    token = ":".join(str(part) for part in (base_seed, *keys))
    return xxhash.xxh64_intdigest(token.encode("utf-8")) & _SEED_MASK


def make_rng(base_seed: int, *keys: Union[int, str]) -> np.random.Generator:
    """Generator seeded with derive_seed(base_seed, *keys)."""
    return np.random.default_rng(derive_seed(base_seed, *keys))


def arrays_checksum(arrays: Iterable[np.ndarray]) -> str:
    """Checksum over the raw bytes of a sequence of arrays (order matters)."""
    digest = xxhash.xxh64()
    for array in arrays:
        contiguous = np.ascontiguousarray(array)
        digest.update(str(contiguous.shape).encode("utf-8"))
        digest.update(contiguous.tobytes())
    return digest.hexdigest()
