"""
Negative selection with r-contiguous matching
=============================================

Detectors are bitstrings that must not match anything in the self set.  Two
strings match under the r-contiguous rule when they agree on at least r
adjacent positions.
"""

import numpy as np

from wsnais.ais import (AffinityConfig, Bitstring, Scheme, affinity, all_bitstrings, matches,
                        negative_selection)

# %%
# Affinity is the longest agreeing run divided by the length.
a = Bitstring.from_str("1011001110")
b = Bitstring.from_str("0010101011")
config = AffinityConfig(Scheme.R_CONTIGUOUS, 3, 0.8, 10)
print("affinity:", affinity(a, b, config), "match with r=3:", matches(a, b, config))

# %%
# With length 4, r = 2 and self = {0000}, a candidate survives exactly when it
# has no two adjacent zeros.  Enumerating every candidate shows all of them.
small = AffinityConfig(Scheme.R_CONTIGUOUS, 2, 0.8, 4)
survivors = negative_selection([Bitstring.from_str("0000")], 16, small, 16,
                               candidates=all_bitstrings(4))
print([str(d.pattern) for d in survivors])

# %%
# A more realistic case: 32-bit behaviour signatures, a self set of a few
# dozen normal profiles and random candidate generation.
rng = np.random.default_rng(1)
config = AffinityConfig(Scheme.R_CONTIGUOUS, 8, 0.8, 32)
self_set = [Bitstring(int(v), 32) for v in rng.integers(0, 2**32, 40)]
detectors = negative_selection(self_set, 64, config, 10_000, rng)
print(len(detectors), "detectors")
print("any detector matching self:",
      any(matches(d.pattern, s, config) for d in detectors for s in self_set))

# %%
# Coverage: how many fresh random strings does the detector set flag?  These
# are mostly non-self, so the fraction estimates how much of the space is
# covered.
probe = [Bitstring(int(v), 32) for v in rng.integers(0, 2**32, 2000)]
flagged = sum(any(matches(d.pattern, p, config) for d in detectors) for p in probe)
print(f"{flagged}/2000 random strings flagged")

# %%
# The Hamming scheme counts agreeing positions anywhere in the string instead.
ham = AffinityConfig(Scheme.HAMMING, 1, 0.75, 10)
print("hamming affinity:", affinity(a, b, ham), "match at 0.75:", matches(a, b, ham))
