import numpy as np
import pytest

from ryseri.shells import BOHR_PER_ANGSTROM, QuartetInput


def random_quartet(qclass, rng, box=BOHR_PER_ANGSTROM, exps=(0.5, 2.5)):
    """Centers uniform in [0, box]^3 bohr, exponents uniform in ``exps``."""
    return QuartetInput.from_arrays(
        qclass, rng.uniform(0.0, box, (4, 3)), rng.uniform(exps[0], exps[1], 4)
    )


def eri_deviation(x, ref, rtol, floor=1e-14):
    """max |x - ref| / (rtol |ref| + floor * b_max); <= 1 means agreement."""
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    b_max = np.max(np.abs(ref))
    diff = np.abs(x - ref)
    if b_max == 0:
        return 0.0 if diff.max() == 0 else np.inf
    return float(np.max(diff / (rtol * np.abs(ref) + floor * b_max)))


def normwise(x, ref):
    ref = np.asarray(ref, dtype=float)
    b_max = np.max(np.abs(ref))
    return float(np.max(np.abs(np.asarray(x, dtype=float) - ref)) / b_max)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
