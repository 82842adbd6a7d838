from typing import Sequence

import numpy as np


def create_rng(seed: int, *stream_key: int) -> np.random.Generator:
    """
    Creates a random number generator backed by the counter-based Philox
    bit generator. Generators created with the same seed and stream key
    produce the same sequence on every platform; different stream keys yield
    independent streams.

    :param seed: the non-negative seed
    :param stream_key: the non-negative integers identifying the stream
    :return: the random number generator
    """
    if seed < 0:
        raise ValueError(f"seed ({seed}) must be non-negative")
    _check_stream_key(stream_key)

    sequence = np.random.SeedSequence(seed, spawn_key=tuple(stream_key))
    return np.random.Generator(np.random.Philox(sequence))


def _check_stream_key(stream_key: Sequence[int]):
    for key in stream_key:
        if key < 0:
            raise ValueError(f"stream key ({key}) must be non-negative")
