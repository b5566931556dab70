"""
Module that creates seeded counter-based random streams
Each stream is a Philox generator keyed by (seed, stream id), so streams are
independent and changing one never shifts the numbers of another
"""
import numpy as np


INIT_STREAM = 1
SHUFFLE_STREAM = 2
DROPOUT_STREAM = 3
SYNTH_STREAM = 4


def make_stream(seed, stream, *spawn_key):
    """
    Return a numpy Generator backed by Philox for given seed and stream id
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(stream), *spawn_key))
    return np.random.Generator(np.random.Philox(sequence))
