import numpy as np
import pytest

from pronscore.align import align_words, forced_align
from pronscore.ctc import enumerate_paths
from pronscore.errors import EmptyTarget, InfeasibleTarget, TokenMismatch, UnknownToken
from pronscore.fixtures import posterior_frames
from pronscore.vocab import Vocabulary, default_vocabulary

VOCAB = default_vocabulary()


def spelled_frames(symbols, peak=0.998):
    return posterior_frames([{s: peak} for s in symbols], VOCAB)


class TestForcedAlign:
    def test_identity_alignment(self):
        path = forced_align(spelled_frames(["c", "a", "t"]), "cat", VOCAB)
        assert [(t.label, t.span_start, t.span_end, t.emission_frame) for t in path.tokens] == [
            ("c", 0, 0, 0),
            ("a", 1, 1, 1),
            ("t", 2, 2, 2),
        ]
        for tok in path.tokens:
            assert tok.raw_posterior == pytest.approx(1.0, abs=0.01)

    def test_emission_frames_with_interleaved_blanks(self):
        frames = spelled_frames(["<pad>", "c", "<pad>", "a", "<pad>"])
        path = forced_align(frames, "ca", VOCAB)
        assert [t.emission_frame for t in path.tokens] == [1, 3]

    def test_repeated_token_infeasible(self):
        with pytest.raises(InfeasibleTarget):
            forced_align(np.zeros((2, len(VOCAB))), "aa", VOCAB)

    def test_empty_and_unknown(self):
        with pytest.raises(EmptyTarget):
            forced_align(np.zeros((3, len(VOCAB))), "", VOCAB)
        with pytest.raises(UnknownToken):
            forced_align(np.zeros((3, len(VOCAB))), "a?", VOCAB)

    def test_normalizes_case_and_composition(self):
        frames = spelled_frames(["d", "y", "r"])
        path = forced_align(frames, "DYR", VOCAB)
        assert "".join(t.label for t in path.tokens) == "dyr"

    def test_total_log_prob_is_max_path(self):
        vocab = Vocabulary(labels=("-", "a", "b"), blank_index=0)
        rng = np.random.default_rng(21)
        for _ in range(50):
            frames = int(rng.integers(2, 7))
            z = rng.normal(scale=2, size=(frames, 3))
            target = "ab" if frames >= 2 else "a"
            paths = enumerate_paths(z, target, vocab)
            best = max(p for _, p in paths)
            got = forced_align(z, target, vocab)
            assert np.exp(got.total_log_prob) == pytest.approx(best, rel=1e-9)
            assert np.exp(got.total_log_prob) <= sum(p for _, p in paths) + 1e-12

    def test_spans_ordered_and_disjoint(self):
        rng = np.random.default_rng(22)
        letters = [l for l in VOCAB.labels if len(l) == 1 and l not in ("<pad>", " ")]
        for _ in range(50):
            target = "".join(rng.choice(letters) for _ in range(int(rng.integers(1, 8))))
            symbols = []
            for i, ch in enumerate(target):
                if i and target[i - 1] == ch:
                    symbols.append("<pad>")
                symbols.extend(["<pad>"] * int(rng.integers(0, 2)))
                symbols.append(ch)
            path = forced_align(spelled_frames(symbols), target, VOCAB)
            assert "".join(t.label for t in path.tokens) == target
            ends = -1
            for tok in path.tokens:
                assert tok.span_start > ends
                assert tok.span_start <= tok.emission_frame <= tok.span_end
                ends = tok.span_end

    def test_deterministic_on_flat_input(self):
        z = np.zeros((6, len(VOCAB)))
        a = forced_align(z, "dyr", VOCAB)
        b = forced_align(z, "dyr", VOCAB)
        assert a == b


class TestAlignWords:
    def test_single_space_split(self):
        frames = spelled_frames(["v", "i", "l", "<pad>", "l", " ", "d", "u"])
        path = forced_align(frames, "vill du", VOCAB)
        words = align_words(path, "vill du")
        assert [(w.text, w.token_start, w.token_end) for w in words] == [
            ("vill", 0, 4),
            ("du", 5, 7),
        ]

    def test_single_word(self):
        path = forced_align(spelled_frames(["d", "y", "r"]), "dyr", VOCAB)
        words = align_words(path, "dyr")
        assert [(w.text, w.token_start, w.token_end) for w in words] == [("dyr", 0, 3)]

    def test_leading_double_space_dropped(self):
        frames = spelled_frames([" ", "<pad>", " ", "a"])
        path = forced_align(frames, "  a", VOCAB)
        words = align_words(path, "  a")
        assert [(w.text, w.token_start, w.token_end) for w in words] == [("a", 2, 3)]

    def test_mismatch_raises(self):
        path = forced_align(spelled_frames(["d", "y", "r"]), "dyr", VOCAB)
        with pytest.raises(TokenMismatch):
            align_words(path, "dyra")

    def test_word_spans_cover_nonspace_tokens(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            n_words = int(rng.integers(1, 4))
            words_text = [
                "".join(rng.choice(list("abcdef")) for _ in range(int(rng.integers(1, 5))))
                for _ in range(n_words)
            ]
            target = " ".join(words_text)
            symbols = []
            for i, ch in enumerate(target):
                if i and target[i - 1] == ch:
                    symbols.append("<pad>")
                symbols.append(ch)
            path = forced_align(spelled_frames(symbols), target, VOCAB)
            spans = align_words(path, target)
            covered = [i for w in spans for i in range(w.token_start, w.token_end)]
            non_space = [i for i, t in enumerate(path.tokens) if t.label != " "]
            assert covered == non_space
