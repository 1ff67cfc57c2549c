import numpy as np
import pytest


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)


def valid_triples(rng, count, p_hi=50.0, n_lo=3, n_hi=30):
    """Random triples with p in [1, p_hi], q in [1, p], alpha < N-2."""
    out = []
    while len(out) < count:
        n = count - len(out)
        p = rng.uniform(1.0, p_hi, size=2 * n + 16)
        q = rng.uniform(1.0, p)
        N = rng.integers(n_lo, n_hi + 1, size=p.size)
        pq1 = p * q - 1.0
        ok = pq1 > 1e-9
        alpha = np.where(ok, 2.0 * (p + 1.0) / np.where(ok, pq1, 1.0), np.inf)
        ok &= alpha < N - 2.0
        for pp, qq, nn in zip(p[ok], q[ok], N[ok]):
            out.append((float(pp), float(qq), int(nn)))
            if len(out) == count:
                break
    return out
