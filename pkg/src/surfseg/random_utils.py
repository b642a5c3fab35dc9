"""
Seeded random generators.

All randomness in surfseg comes from the Philox-4x64 counter-based generator
shipped with numpy. A generator is identified by (seed, stream, index), and
its 128-bit Philox key is:

    key = seed + 2**64 * (stream * 2**32 + index)

with seed reduced to 64 bits. The stream numbers are listed in defaults.py
(STREAM_*), the index is a sample or epoch number. The counter always starts
at zero, so a fixture can be reproduced from the key alone.
"""

import numpy as np

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1


def philox_key(seed, stream, index=0):
    return (int(seed) & MASK64) + (
        ((int(stream) & MASK32) << 32 | (int(index) & MASK32)) << 64
    )


def generator(seed, stream, index=0):
    """
    Returns a numpy Generator for the given (seed, stream, index).
    """
    return np.random.Generator(
        np.random.Philox(key=philox_key(seed, stream, index))
    )
