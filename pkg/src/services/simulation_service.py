import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from config import EngineSettings, load_settings
from models.distribution import AlphabetDistribution, RunSpec, check_query

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


class SimulationSummary(BaseModel):
    """Floating-point statistics of simulated waiting times."""
    mean: float
    variance: float
    standard_error: float
    trials: int
    seed: int
    blocks: int


class SimulationService:
    """
    Seeded Monte Carlo for B_j.

    The seed feeds numpy's SeedSequence, which spawns one PCG64 stream per
    block of trials. Blocks are concatenated in index order, so results do
    not depend on the number of worker threads.
    """

    def __init__(self, settings: Optional[EngineSettings] = None):
        self.settings = settings or load_settings()
        self.block_size = self.settings.simulation_block
        logger.info(f"SimulationService initialized with {self.block_size} trials per block")

    def _simulate_block(self, probs: np.ndarray, lengths: np.ndarray, j: int,
                        trials: int, rng: np.random.Generator) -> np.ndarray:
        r = probs.size
        current = np.full(trials, -1, dtype=np.int64)
        run = np.zeros(trials, dtype=np.int64)
        completed = np.zeros((trials, r), dtype=bool)
        completed_count = np.zeros(trials, dtype=np.int64)
        waiting = np.zeros(trials, dtype=np.int64)
        active = np.arange(trials)

        while active.size:
            draws = rng.choice(r, size=active.size, p=probs)
            waiting[active] += 1
            run[active] = np.where(draws == current[active], run[active] + 1, 1)
            current[active] = draws

            newly = (run[active] >= lengths[draws]) & ~completed[active, draws]
            finished_rows = active[newly]
            completed[finished_rows, draws[newly]] = True
            completed_count[finished_rows] += 1

            active = active[completed_count[active] < j]
        return waiting

    def simulate_waiting(self, dist: AlphabetDistribution, rs: RunSpec, j: int,
                         trials: int, seed: int, threads: int = 1) -> SimulationSummary:
        """
        Simulate i.i.d. letters until the j-th distinct letter completes its run.

        Args:
            dist: Letter distribution
            rs: Run length per letter
            j: Number of distinct completed runs to wait for
            trials: Number of independent words
            seed: 64-bit seed; identical seed and trials give identical output
            threads: Worker threads for the blocks

        Returns:
            SimulationSummary with mean, sample variance and standard error
        """
        check_query(dist, rs, j)
        if trials < 1:
            raise ValueError(f"trials must be at least 1, got {trials}")
        seed &= SEED_MASK

        probs = np.array([float(p) for p in dist.probs])
        probs /= probs.sum()
        lengths = np.array(rs.lengths, dtype=np.int64)

        sizes: List[int] = []
        remaining = trials
        while remaining > 0:
            sizes.append(min(self.block_size, remaining))
            remaining -= sizes[-1]
        children = np.random.SeedSequence(seed).spawn(len(sizes))

        def run_block(index: int) -> np.ndarray:
            rng = np.random.Generator(np.random.PCG64(children[index]))
            return self._simulate_block(probs, lengths, j, sizes[index], rng)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run_block, range(len(sizes))))
        else:
            results = [run_block(i) for i in range(len(sizes))]

        samples = np.concatenate(results).astype(np.float64)
        mean = float(samples.mean())
        variance = float(samples.var(ddof=1)) if trials > 1 else 0.0
        summary = SimulationSummary(
            mean=mean,
            variance=variance,
            standard_error=math.sqrt(variance / trials),
            trials=trials,
            seed=seed,
            blocks=len(sizes),
        )
        logger.info(f"Simulated {trials} words in {len(sizes)} blocks: mean={mean:.6g}")
        return summary
