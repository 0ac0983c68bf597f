import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qdlab.bitcore import Genotype, RandomSource, flip_mask, hamming, mutate, new_uniform


def test_new_uniform_length_one(rng):
    g = new_uniform(1, rng)
    assert g.n == 1 and g.ones in (0, 1)


def test_new_uniform_is_deterministic():
    a = new_uniform(64, RandomSource(7, 3))
    b = new_uniform(64, RandomSource(7, 3))
    assert a == b
    assert a != new_uniform(64, RandomSource(7, 4))


def test_new_uniform_rejects_zero_length(rng):
    with pytest.raises(ValueError):
        new_uniform(0, rng)


def test_new_uniform_mean_ones(rng):
    n, samples = 10_000, 1000
    ones = np.array([new_uniform(n, rng).ones for _ in range(samples)])
    # mean of 1000 binomial(n, 1/2) draws has sd sqrt(n/4)/sqrt(1000)
    sd = math.sqrt(n / 4) / math.sqrt(samples)
    assert abs(ones.mean() - n / 2) < 5 * sd


def test_ones_cache_matches_popcount(rng):
    for n in (1, 5, 63, 64, 65, 200):
        g = new_uniform(n, rng)
        assert g.ones == sum(g.to_list())
        c = mutate(g, 3 / n if n > 3 else 0.5, rng)
        assert c.ones == sum(c.to_list())


def test_mutation_leaves_parent_untouched(rng):
    parent = new_uniform(50, rng)
    snapshot = (parent.bits, parent.ones)
    for _ in range(100):
        mutate(parent, 0.3, rng)
    assert (parent.bits, parent.ones) == snapshot


@pytest.mark.parametrize("p_m", [0.0, 1.0, -0.1, 1.5])
def test_mutation_rate_bounds(rng, p_m):
    with pytest.raises(ValueError):
        mutate(Genotype.zeros(4), p_m, rng)


def test_mutation_reproducible():
    parent = Genotype.from_string("0110100111")
    assert mutate(parent, 0.2, RandomSource(1, 9)) == mutate(parent, 0.2, RandomSource(1, 9))
    r1, r2 = RandomSource(3, 0), RandomSource(3, 0)
    assert [mutate(parent, 0.2, r1) for _ in range(50)] == [mutate(parent, 0.2, r2) for _ in range(50)]


def test_mean_flip_count_one_over_n(rng):
    n, samples = 100, 100_000
    zero = Genotype.zeros(n)
    counts = np.array([mutate(zero, 1 / n, rng).ones for _ in range(samples)])
    sd = math.sqrt(n * (1 / n) * (1 - 1 / n) / samples)
    assert abs(counts.mean() - 1.0) < 5 * sd


def test_two_fair_flips_uniform(rng):
    parent = Genotype.from_string("10")
    tally = {}
    for _ in range(100_000):
        s = str(mutate(parent, 0.5, rng))
        tally[s] = tally.get(s, 0) + 1
    assert set(tally) == {"00", "01", "10", "11"}
    assert stats.chisquare(list(tally.values())).pvalue > 0.001


@pytest.mark.parametrize("n,p_m", [(16, 1 / 16), (64, 2 / 64)])
def test_flip_count_is_binomial(rng, n, p_m):
    samples = 100_000
    counts = np.bincount([flip_mask(n, p_m, rng).bit_count() for _ in range(samples)], minlength=n + 1)
    expected = stats.binom.pmf(np.arange(n + 1), n, p_m) * samples
    # pool the sparse tail so every bin expects at least 5
    keep = expected >= 5
    cut = np.argmin(keep) if not keep.all() else n + 1
    obs = np.append(counts[:cut], counts[cut:].sum())
    exp = np.append(expected[:cut], expected[cut:].sum())
    exp *= obs.sum() / exp.sum()
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_flip_positions_uniform(rng):
    n = 8
    hits = np.zeros(n)
    for _ in range(40_000):
        m = flip_mask(n, 0.1, rng)
        hits += [(m >> i) & 1 for i in range(n)]
    assert stats.chisquare(hits).pvalue > 0.001


def test_hamming_examples():
    a = Genotype.from_string("0110")
    assert hamming(a, a) == 0
    assert hamming(Genotype.zeros(4), Genotype.full(4)) == 4
    assert hamming(a, Genotype.from_string("0101")) == 2
    with pytest.raises(ValueError):
        hamming(a, Genotype.zeros(5))


@settings(max_examples=200)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=130), st.lists(st.integers(0, 1), min_size=1, max_size=130))
def test_hamming_matches_elementwise(xs, ys):
    n = min(len(xs), len(ys))
    a, b = Genotype.from_bits(xs[:n]), Genotype.from_bits(ys[:n])
    assert hamming(a, b) == sum(u != v for u, v in zip(xs[:n], ys[:n]))


def test_string_roundtrip():
    g = Genotype.from_string("1101000")
    assert str(g) == "1101000"
    assert g.to_list() == [1, 1, 0, 1, 0, 0, 0]
    assert g.positions() == [0, 1, 3]
    assert g[3] == 1 and g[2] == 0


def test_random_source_streams_differ():
    assert RandomSource(1, 0).random() != RandomSource(1, 1).random()
    r = RandomSource(2**64 - 1, 0)
    assert 0.0 <= r.random() < 1.0
    with pytest.raises(ValueError):
        RandomSource(-1)
