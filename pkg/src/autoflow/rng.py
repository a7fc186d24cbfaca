"""SplitMix64, the portable PRNG behind every seeded decision in autoflow.

Splits, folds, bootstraps and tree feature draws all consume this generator,
never numpy's global state, so a leaderboard is reproducible bit-for-bit on
any platform. The compiled tree kernel carries an identical copy.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, *tags):
    """Hash ``seed`` with integer ``tags`` into an independent 64-bit stream seed."""
    h = mix64(int(seed) & MASK64)
    for t in tags:
        h = mix64((h + GOLDEN + (int(t) & MASK64)) & MASK64)
    return h


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self):
        """Double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def below(self, n):
        """Integer in [0, n). Modulo reduction; the bias is < n / 2**64."""
        return self.next_u64() % n

    def shuffle(self, items):
        """Fisher-Yates shuffle of a list, in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n):
        return self.shuffle(list(range(n)))
