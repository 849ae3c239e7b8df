"""
Counter-based random streams.

Every stream is a numpy Philox generator keyed by (master_seed, run_id, role),
so a run's draws depend only on its own key and never on scheduling order or
on how many workers executed the batch.
"""

from enum import IntEnum

from numpy.random import Generator, Philox, SeedSequence


class StreamRole(IntEnum):
    """Independent substreams owned by one run"""

    REWARDS = 0
    COINS = 1


def substream(master_seed: int, run_id: int, role: StreamRole) -> Generator:
    """
    Build the generator for one (run, role) pair.

    Args:
        master_seed: 64-bit experiment seed
        run_id: Replication index (0-based)
        role: Which substream of the run

    Returns:
        Fresh numpy Generator positioned at the start of the stream
    """
    if master_seed < 0 or run_id < 0:
        raise ValueError(f"seed and run id must be nonnegative, got {master_seed}, {run_id}")
    seq = SeedSequence(entropy=int(master_seed), spawn_key=(int(run_id), int(role)))
    return Generator(Philox(seq))
