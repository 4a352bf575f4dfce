import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to Python path for imports, as main.py does
sys.path.insert(0, str(Path(__file__).parent / "src"))

from models.distribution import AlphabetDistribution, RunSpec  # noqa: E402

UNIFORM_H = (1, 2, 3, 4)
MIXED_RUNS = {
    2: [(3, 2), (1, 4), (2, 1), (4, 3), (2, 4)],
    3: [(3, 2, 1), (1, 2, 3), (4, 1, 2), (2, 2, 3), (4, 3, 2)],
}


def random_distributions(r: int, count: int, seed: int, low: int = 1, high: int = 9):
    """Pseudo-random rational distributions with integer weights in [low, high]."""
    rng = random.Random(seed)
    dists = []
    for _ in range(count):
        weights = [rng.randint(low, high) for _ in range(r)]
        total = sum(weights)
        dists.append(AlphabetDistribution.of(Fraction(w, total) for w in weights))
    return dists


def run_specs(r: int):
    """Uniform h = 1..4 plus the mixed vectors for r letters."""
    return [RunSpec.uniform(h, r) for h in UNIFORM_H] + [RunSpec.of(v) for v in MIXED_RUNS[r]]


@pytest.fixture
def fair_die():
    return AlphabetDistribution.uniform(6)


@pytest.fixture
def fair_coin():
    return AlphabetDistribution.uniform(2)
