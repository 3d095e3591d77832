import pytest

from cubicsha.lseries import PrimeCache
from cubicsha.scan import ScanConfig, scan_range


@pytest.fixture(scope="session")
def cache():
    c = PrimeCache()
    c.ensure(20000)
    return c


@pytest.fixture(scope="session")
def small_store(tmp_path_factory):
    """Scan of X = 600: enough rows for every statistic to be nontrivial."""
    out = tmp_path_factory.mktemp("scan600")
    return scan_range(600, ScanConfig(threads=1, chunk_size=256, out_dir=str(out)))


def primes_upto(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = b"\x00" * len(sieve[i * i :: i])
    return [i for i in range(2, n + 1) if sieve[i]]
