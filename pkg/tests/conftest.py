"""Shared test configuration.

Property tests must be deterministic so the suite gives the same verdict on
every run; the hypothesis profile below derandomizes them and removes the
wall-clock deadline (the surrogate tests factorize dense matrices, which can
be slow on a loaded machine but is never wrong because of it).
"""

from hypothesis import settings

settings.register_profile("suite", deadline=None, derandomize=True)
settings.load_profile("suite")
