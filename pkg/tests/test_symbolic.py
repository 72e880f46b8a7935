import math

import numpy as np
import pytest

from excsets import (
    EMPTY_ENTROPY,
    ConvergenceError,
    ForbiddenFamily,
    Word,
    avoids,
    build_survivor,
    dolgopyat_sum,
    edge_list,
    family_from_text,
    family_to_text,
    full_shift,
    legal_words,
    normalize_family,
    power_recode,
    refine_sft,
    sft_entropy,
    word_count,
)
from oracles import GOLDEN_ENTROPY, brute_force_count, fibonacci


def family(*words, m=2):
    return ForbiddenFamily.make(m, words)


def golden_sft():
    return build_survivor(family("11")).sft


# ---------------------------------------------------------------- words

def test_word_requires_positive_length():
    with pytest.raises(ValueError):
        Word(())


def test_word_rejects_negative_symbols():
    with pytest.raises(ValueError):
        Word((0, -1))


def test_word_parsing_and_str():
    assert Word.from_string("0110").symbols == (0, 1, 1, 0)
    assert str(Word((1, 0, 1))) == "101"
    assert Word.from_string("10,2,0").symbols == (10, 2, 0)
    assert str(Word((10, 2))) == "10,2"


def test_word_factor():
    assert Word((0, 1)).is_factor_of(Word((0, 0, 1, 0)))
    assert not Word((1, 1)).is_factor_of(Word((0, 1, 0, 1)))


def test_family_validation():
    with pytest.raises(ValueError, match="alphabet"):
        ForbiddenFamily.make(1, ["0"])
    with pytest.raises(ValueError, match="no forbidden words"):
        ForbiddenFamily.make(2, [])
    with pytest.raises(ValueError, match="alphabet"):
        ForbiddenFamily.make(2, ["12"])


# ------------------------------------------------------------ normalize

def test_normalize_drops_superwords():
    out = normalize_family(family("01", "0101"))
    assert {str(w) for w in out.words} == {"01"}
    assert out.min_length == 2


def test_normalize_keeps_normalized():
    out = normalize_family(family("11"))
    assert {str(w) for w in out.words} == {"11"}


def test_normalize_ternary():
    out = normalize_family(family("00", "121", "2121", m=3))
    assert {str(w) for w in out.words} == {"00", "121"}


# --------------------------------------------------------------- avoids

@pytest.mark.parametrize("word,words,expected", [
    ("010010", ["11"], True),
    ("0110", ["11"], False),
    ("0101", ["010"], False),
])
def test_avoids_examples(word, words, expected):
    assert avoids(Word.from_string(word), family(*words)) is expected


# --------------------------------------------------------- dolgopyat sum

def test_dolgopyat_single_word():
    fam = family("0110")
    assert dolgopyat_sum(fam, 0.5) == pytest.approx(math.exp(-2.0), abs=1e-12)


def test_dolgopyat_golden():
    value = dolgopyat_sum(family("11"), GOLDEN_ENTROPY)
    assert value == pytest.approx((2.0 / (1.0 + math.sqrt(5.0))) ** 2, abs=1e-12)


def test_dolgopyat_failing_hypothesis():
    value = dolgopyat_sum(family("00", "11"), 0.1)
    assert value == pytest.approx(2.0 * math.exp(-0.2), abs=1e-12)
    assert value > 1.0


def test_dolgopyat_requires_positive_s():
    with pytest.raises(ValueError):
        dolgopyat_sum(family("11"), 0.0)


# -------------------------------------------------------- build_survivor

def test_golden_mean_survivor_structure():
    sft = golden_sft()
    assert [str(s) for s in sft.states] == ["0", "1"]
    assert set(edge_list(sft)) == {("0", "0"), ("0", "1"), ("1", "0")}


def test_every_symbol_forbidden_is_empty():
    survivor = build_survivor(family("0", "1"))
    assert survivor.empty
    assert sft_entropy(survivor.sft) == EMPTY_ENTROPY


def test_every_two_block_forbidden_is_empty():
    survivor = build_survivor(family("00", "01", "10", "11"))
    assert survivor.empty


def test_zero_entropy_survivor_is_not_empty():
    # avoiding 01 leaves 1^k 0^infinity: nonempty but zero growth
    survivor = build_survivor(family("01"))
    assert not survivor.empty
    assert sft_entropy(survivor.sft) == pytest.approx(0.0, abs=1e-12)


def test_mixed_length_family_empty():
    survivor = build_survivor(family("0", "11"))
    assert survivor.empty


# --------------------------------------------------------------- entropy

def test_full_shift_entropy():
    assert sft_entropy(full_shift(4)) == pytest.approx(math.log(4.0), abs=1e-12)


def test_golden_entropy_closed_form():
    assert sft_entropy(golden_sft()) == pytest.approx(GOLDEN_ENTROPY, abs=1e-9)


def test_entropy_matches_brute_force_growth():
    fam = family("010")
    sft = build_survivor(fam).sft
    h = sft_entropy(sft)
    for n in (10, 14):
        count = brute_force_count(2, [(0, 1, 0)], n)
        assert count == word_count(sft, n)
        assert abs(math.log(count) / n - h) <= math.log(len(sft.states)) / n + 1e-9


# ------------------------------------------------------------ word_count

def test_word_count_full_shift():
    assert word_count(full_shift(2), 10) == 1024


def test_word_count_golden_examples():
    sft = golden_sft()
    # exhaustive oracle: 32 binary words of length 5, drop those with 11
    assert brute_force_count(2, [(1, 1)], 5) == 13
    assert word_count(sft, 5) == 13 == fibonacci(7)
    assert word_count(sft, 1) == 2


def test_word_count_cap():
    with pytest.raises(ValueError, match="oracle cap exceeded"):
        word_count(full_shift(2), 31)


def test_word_count_prefix_regime():
    # states of the {000}-survivor are 2-blocks; n=1 counts prefixes
    sft = build_survivor(family("000")).sft
    assert sft.block_depth == 2
    assert word_count(sft, 1) == 2
    assert word_count(sft, 2) == 4
    assert word_count(sft, 3) == brute_force_count(2, [(0, 0, 0)], 3)


# ------------------------------------------------------------ invariants

@pytest.mark.parametrize("words", [["11"], ["000"], ["0101"]])
def test_submultiplicative_envelope(words):
    sft = build_survivor(family(*words)).sft
    h = sft_entropy(sft)
    states = len(sft.states)
    for n in range(1, 26):
        slope = math.log(word_count(sft, n)) / n
        assert abs(slope - h) <= math.log(states) / n + 1e-9


def test_survivor_monotonicity():
    h_small = sft_entropy(build_survivor(family("11")).sft)
    for extra in ("000", "0101"):
        h_large = sft_entropy(build_survivor(family("11", extra)).sft)
        assert h_large <= h_small + 1e-12


def test_single_word_entropy_trend():
    # forbidding 0^n: entropy < log 2, increasing, approaching log 2
    previous = -1.0
    for n in range(1, 11):
        h = sft_entropy(build_survivor(family("0" * n)).sft)
        assert h < math.log(2.0)
        assert h > previous
        previous = h
    assert math.log(2.0) - previous < 1e-3


def test_dolgopyat_contract_trend():
    # minimal survivor entropy over random families grows with the
    # minimal forbidden length once the exp sum stays below 1
    rng = np.random.default_rng(7)
    minima = []
    for n0 in (2, 4, 6, 8):
        s = 0.5 if n0 == 2 else 0.3
        entropies = []
        for _ in range(6):
            words = set()
            while len(words) < 2:
                words.add(tuple(rng.integers(0, 2, size=n0)))
            try:
                fam = normalize_family(ForbiddenFamily.make(2, words))
            except ValueError:
                continue
            assert dolgopyat_sum(fam, s) < 1.0
            entropies.append(sft_entropy(build_survivor(fam).sft))
        minima.append(min(entropies))
    assert all(b >= a - 1e-9 for a, b in zip(minima, minima[1:]))
    assert math.log(2.0) - minima[-1] < 0.05


def test_power_recode_multiplies_entropy():
    for sft in (golden_sft(), full_shift(3)):
        h = sft_entropy(sft)
        for n in (2, 3):
            assert sft_entropy(power_recode(sft, n)) == pytest.approx(n * h, abs=1e-9)


def test_power_recode_on_two_block_presentation():
    sft = build_survivor(family("000")).sft
    assert sft.block_depth == 2
    h = sft_entropy(sft)
    squared = power_recode(sft, 2)
    assert sft_entropy(squared) == pytest.approx(2.0 * h, abs=1e-9)
    assert squared.block_depth == 4


def test_tail_dependence_quick():
    fam = family("11")
    rng = np.random.default_rng(3)
    for _ in range(1000):
        seq = rng.integers(0, 2, size=30)
        before = avoids(tuple(seq[15:]), fam)
        seq[:15] = rng.integers(0, 2, size=15)
        assert avoids(tuple(seq[15:]), fam) == before


# ------------------------------------------------------------- refinement

def test_refine_preserves_language():
    sft = golden_sft()
    fine = refine_sft(sft, 3)
    assert fine.block_depth == 3
    assert {str(s) for s in fine.states} == {"000", "001", "010", "100", "101"}
    assert sft_entropy(fine) == pytest.approx(sft_entropy(sft), abs=1e-9)
    for n in (3, 6, 10):
        assert word_count(fine, n) == word_count(sft, n)


def test_legal_words_enumeration():
    sft = golden_sft()
    words = legal_words(sft, 5)
    assert len(words) == 13
    assert all(avoids(w, family("11")) for w in words)


# ----------------------------------------------------------- serialization

def test_power_iteration_non_convergence_reports_estimates():
    import scipy.sparse as sp

    from excsets.spectral import spectral_radius as radius

    # nearly reducible: the spectral gap is ~1e-7, far too slow for a
    # 50-iteration cap, so the error path must fire with both estimates
    matrix = sp.csr_matrix([[1.0, 1e-8], [1e-6, 1.0]])
    with pytest.raises(ConvergenceError) as info:
        radius(matrix, max_iterations=50)
    assert len(info.value.estimates) == 2
    assert all(abs(e - 1.0) < 0.1 for e in info.value.estimates)


def test_family_round_trip():
    fam = family("11", "000")
    text = family_to_text(fam)
    back = family_from_text(text)
    assert back == fam


def test_family_text_is_deterministic():
    fam = family("11", "000")
    assert family_to_text(fam) == family_to_text(family("000", "11"))
