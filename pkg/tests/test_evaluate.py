import math

import numpy as np
import pytest

import synth
from pronscore.calibrate import CalibrationConfig
from pronscore.errors import DegenerateReference, EmptyText, SegmentationMismatch, ZeroSample
from pronscore.evaluate import (
    ConfusionCounts,
    EvalUtterance,
    MispronunciationLabels,
    compute_metrics,
    count_confusions,
    derive_labels,
    format_metric_table,
    normal_cdf,
    normalize_for_eval,
    proportion_ztest,
    sweep_temperature,
)
from pronscore.vocab import default_vocabulary

VOCAB = default_vocabulary()


class TestNormalization:
    def test_strips_punctuation_and_case(self):
        assert normalize_for_eval("Vill du äta här?") == "vill du äta här"

    def test_keeps_intra_word_hyphen(self):
        assert normalize_for_eval("ljud-bok, ja!") == "ljud-bok ja"

    def test_collapses_whitespace(self):
        assert normalize_for_eval("  jag   sjunger\t") == "jag sjunger"


class TestDeriveLabels:
    def test_identity_has_no_flags(self):
        labels = derive_labels("dyr", "dyr")
        assert not any(labels.word_labels)
        assert not any(labels.char_labels)

    def test_substituted_word_marks_changed_char(self):
        labels = derive_labels("jag tycker om att sjunga", "jag tycker om att tjunga")
        assert labels.word_labels == (False, False, False, False, True)
        # chars of jag+tycker+om+att occupy indices 0..13; 's' is index 14
        assert labels.char_labels[14] is True
        assert not any(labels.char_labels[:14])
        assert not any(labels.char_labels[15:])

    def test_deleted_word_marks_all_chars(self):
        labels = derive_labels("vill du äta här", "vill du äta")
        assert labels.word_labels == (False, False, False, True)
        assert labels.char_labels[-3:] == (True, True, True)
        assert not any(labels.char_labels[:-3])

    def test_insertion_flags_nothing(self):
        labels = derive_labels("vill du", "vill nog du")
        assert not any(labels.word_labels)

    def test_empty_raises(self):
        with pytest.raises(EmptyText):
            derive_labels("", "dyr")
        with pytest.raises(EmptyText):
            derive_labels("dyr", "?!")

    def test_identity_after_normalization_random(self):
        rng = np.random.default_rng(41)
        alphabet = list("abcdefghijklmnopqrstuvwxyzåäö")
        for _ in range(200):
            words = [
                "".join(rng.choice(alphabet) for _ in range(int(rng.integers(1, 7))))
                for _ in range(int(rng.integers(1, 5)))
            ]
            text = " ".join(words)
            labels = derive_labels(text, text)
            assert not any(labels.word_labels)
            assert not any(labels.char_labels)
            assert len(labels.char_labels) == sum(len(w) for w in words)


LAB4 = MispronunciationLabels(
    target_text="a b c d",
    word_labels=(False, True, True, False),
    char_labels=(False, True, True, False),
)


class TestConfusions:
    def test_no_flags_no_labels(self):
        labels = MispronunciationLabels("abc", (False,) * 3, (False,) * 3)
        counts = count_confusions(set(), labels, level="word")
        assert (counts.tr, counts.fa, counts.fr, counts.ta) == (0, 0, 0, 3)

    def test_single_hit(self):
        labels = MispronunciationLabels("abc", (True, False, False), (True, False, False))
        counts = count_confusions({0}, labels, level="word")
        assert (counts.tr, counts.fa, counts.fr, counts.ta) == (1, 0, 0, 2)

    def test_mixed_tally(self):
        counts = count_confusions({0, 1}, LAB4, level="word")
        assert (counts.tr, counts.fa, counts.fr, counts.ta) == (1, 1, 1, 1)

    def test_out_of_range_flag(self):
        with pytest.raises(SegmentationMismatch):
            count_confusions({7}, LAB4, level="word")

    def test_totals_conserved_random(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(1, 40))
            truth = tuple(bool(b) for b in rng.random(n) < 0.3)
            flags = {int(i) for i in range(n) if rng.random() < 0.4}
            labels = MispronunciationLabels("x", truth, truth)
            counts = count_confusions(flags, labels, level="char")
            assert counts.total == n
            assert counts.tr + counts.fa == sum(truth)
            assert counts.fr + counts.ta == n - sum(truth)


class TestMetrics:
    def test_formula(self):
        rep = compute_metrics(ConfusionCounts(tr=7, fa=3, fr=3))
        assert rep.precision == pytest.approx(0.7)
        assert rep.recall == pytest.approx(0.7)
        assert rep.f1 == pytest.approx(0.7)

    def test_zero_conventions(self):
        rep = compute_metrics(ConfusionCounts(tr=0, fa=5, fr=0))
        assert (rep.precision, rep.recall, rep.f1) == (0.0, 0.0, 0.0)
        perfect = compute_metrics(ConfusionCounts(tr=1))
        assert (perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0)

    def test_against_recount_oracle(self):
        rng = np.random.default_rng(43)
        for _ in range(300):
            n = int(rng.integers(1, 60))
            truth = [bool(b) for b in rng.random(n) < 0.25]
            pred = [bool(b) for b in rng.random(n) < 0.35]
            labels = MispronunciationLabels("x", tuple(truth), tuple(truth))
            counts = count_confusions({i for i, p in enumerate(pred) if p}, labels, "word")
            rep = compute_metrics(counts)
            tp = sum(1 for p, t in zip(pred, truth) if p and t)
            want_p = tp / sum(pred) if sum(pred) else 0.0
            want_r = tp / sum(truth) if sum(truth) else 0.0
            want_f = 2 * want_p * want_r / (want_p + want_r) if want_p + want_r else 0.0
            assert rep.precision == pytest.approx(want_p)
            assert rep.recall == pytest.approx(want_r)
            assert rep.f1 == pytest.approx(want_f)


class TestProportionZTest:
    def test_published_rates(self):
        # reported one-significant-figure p-values: 8e-4, 3e-4, 4e-12
        for detected, n, p0, direction, reported in (
            (12, 230, 0.120, "less", 8e-4),
            (11, 172, 0.158, "less", 3e-4),
            (59, 187, 0.141, "greater", 4e-12),
        ):
            result = proportion_ztest(detected, n, p0, direction)
            unit = 10.0 ** math.floor(math.log10(reported))
            assert abs(result.p_value - reported) <= unit
            assert result.detected_rate == pytest.approx(detected / n)

    def test_direction_complement(self):
        less = proportion_ztest(10, 100, 0.2, "less")
        greater = proportion_ztest(10, 100, 0.2, "greater")
        assert less.p_value + greater.p_value == pytest.approx(1.0)
        assert less.z == greater.z

    def test_errors(self):
        with pytest.raises(ZeroSample):
            proportion_ztest(1, 0, 0.5, "less")
        with pytest.raises(DegenerateReference):
            proportion_ztest(1, 10, 0.0, "less")
        with pytest.raises(DegenerateReference):
            proportion_ztest(1, 10, 1.0, "less")

    def test_cdf_against_quadrature_oracle(self):
        # Simpson integration of the normal density, independent of erfc
        def simpson_cdf(z, lo=-12.0, steps=48000):
            width = (z - lo) / steps
            xs = lo + width * np.arange(steps + 1)
            ys = np.exp(-xs * xs / 2.0) / math.sqrt(2 * math.pi)
            weights = np.ones(steps + 1)
            weights[1:-1:2] = 4.0
            weights[2:-1:2] = 2.0
            return float(np.dot(weights, ys) * width / 3.0)

        for z in np.linspace(-8, 8, 33):
            assert abs(normal_cdf(float(z)) - simpson_cdf(float(z))) <= 1e-9


class TestSweep:
    def _corpus(self, rng, n=12):
        corpus = []
        for _ in range(n):
            logits, target, verbatim = synth.synth_utterance(rng, VOCAB)
            labels = derive_labels(target, verbatim)
            corpus.append(EvalUtterance(logits=logits, target=labels.target_text, labels=labels))
        return corpus

    def test_all_top1_targets_are_constant_in_temperature(self):
        rng = np.random.default_rng(44)
        corpus = []
        for _ in range(5):
            logits, target, verbatim = synth.synth_utterance(rng, VOCAB, swap_rate=0, noisy_rate=0)
            labels = derive_labels(target, verbatim)
            corpus.append(EvalUtterance(logits=logits, target=labels.target_text, labels=labels))
        points = sweep_temperature(corpus, VOCAB, [1.0, 10.0, 50.0], CalibrationConfig())
        assert len({(p.char.precision, p.char.recall, p.char.f1) for p in points}) == 1

    def test_recall_non_increasing_in_temperature(self):
        rng = np.random.default_rng(45)
        corpus = self._corpus(rng)
        points = sweep_temperature(corpus, VOCAB, [1.0, 5.0, 10.0, 20.0, 50.0], CalibrationConfig())
        for a, b in zip(points, points[1:]):
            assert b.char.recall <= a.char.recall + 1e-12
            assert b.word.recall <= a.word.recall + 1e-12

    def test_single_point_matches_direct_evaluation(self):
        rng = np.random.default_rng(46)
        corpus = self._corpus(rng, n=6)
        from pronscore.evaluate import evaluate_corpus

        cfg = CalibrationConfig()
        points = sweep_temperature(corpus, VOCAB, [10.0], cfg)
        char_counts, word_counts = evaluate_corpus(corpus, VOCAB, cfg)
        assert points[0].char == compute_metrics(char_counts, level="char")
        assert points[0].word == compute_metrics(word_counts, level="word")

    def test_corpus_order_invariance(self):
        rng = np.random.default_rng(47)
        corpus = self._corpus(rng, n=8)
        from pronscore.evaluate import evaluate_corpus

        cfg = CalibrationConfig()
        forward = evaluate_corpus(corpus, VOCAB, cfg)
        backward = evaluate_corpus(list(reversed(corpus)), VOCAB, cfg)
        assert forward == backward

    def test_table_renders_all_rows(self):
        rng = np.random.default_rng(48)
        points = sweep_temperature(self._corpus(rng, n=4), VOCAB, [1.0, 10.0], CalibrationConfig())
        table = format_metric_table(points)
        assert table.count("\n") == 5  # header + rule + 2 levels x 2 temperatures
