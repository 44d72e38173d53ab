"""
Reproducible randomness.

Every random draw in the toolkit goes through `make_rng(seed)`: numpy's PCG64 bit
generator seeded through `SeedSequence(seed)`. A Bernoulli(q) draw is
`rng.random() < q`, where `random()` returns the next 53-bit uniform double in
[0, 1). Draws are consumed in a documented order (ascending vertex id, or
lexicographic vertex pairs), so the same seed reproduces the same output on
every platform.

Child seeds are derived with `derive_seed(master, tag, index)`: the first 64-bit
word of `SeedSequence([master, tag, index])`. Tags separate independent streams.
"""
from __future__ import annotations

import numpy as np

from app.core.errors import InvalidParameters


SEED_MAX = 2**64 - 1

STREAM_LEMMA_ATTEMPT = 1
STREAM_CHAIN_BLOCK = 2
STREAM_TRIAL = 3


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidParameters(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if seed < 0 or seed > SEED_MAX:
        raise InvalidParameters(f"seed must lie in [0, 2^64), got {seed}")
    return seed


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(check_seed(seed))))


def derive_seed(master: int, tag: int, index: int) -> int:
    ss = np.random.SeedSequence([check_seed(master), int(tag), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def bernoulli_draws(rng: np.random.Generator, prob: float, count: int) -> np.ndarray:
    # One uniform per trial, in order; a batch consumes the stream like `count` single calls.
    return rng.random(count) < prob
