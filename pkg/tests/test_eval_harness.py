import math
import random

import pytest

from ctxgen.config import PipelineConfig
from ctxgen.context_gen import PipelineResources
from ctxgen.eval_harness import (
    ablate_sentences,
    bleu_n,
    cider,
    corpus_bleu,
    corpus_cider,
    corpus_metrics,
    language_stats,
    make_concat_baseline,
    make_concat_filter_baseline,
    meteor,
)
from ctxgen.image_analyzer import BoundingBox, RegionCaption
from ctxgen.text_core import split_sentences

CONFIG = PipelineConfig()


def cap(text):
    return RegionCaption(text=text, confidence=0.9, box=BoundingBox(0, 0, 10, 10))


class TestBleu:
    def test_identity_is_one_for_all_orders(self):
        tokens = ["a", "man", "sits", "down"]
        for n in range(1, 5):
            assert bleu_n(tokens, [tokens], n) == 1.0

    def test_clipped_unigrams(self):
        # clipped count 1 of 3; candidate longer than reference so BP = 1
        score = bleu_n(["the", "the", "the"], [["the", "cat"]], 1)
        assert score == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_brevity_penalty_strictly_below_one(self):
        score = bleu_n(["the", "cat"], [["the", "cat", "sat"]], 1)
        assert score == pytest.approx(math.exp(1.0 - 3.0 / 2.0), abs=1e-12)
        assert score < 1.0

    def test_zero_precision_gives_zero(self):
        assert bleu_n(["a", "b"], [["a", "c"]], 2) == 0.0

    def test_order_above_length_gives_zero(self):
        assert bleu_n(["a"], [["a"]], 2) == 0.0

    def test_empty_candidate(self):
        assert bleu_n([], [["a"]], 1) == 0.0

    def test_closest_reference_length_ties_take_shorter(self):
        # candidate length 2; refs of length 1 and 3 tie; shorter wins -> BP = 1
        assert bleu_n(["a", "b"], [["a"], ["a", "b", "c"]], 1) == pytest.approx(1.0)

    def test_corpus_identity(self):
        corpus = [["a", "man", "sits", "down"], ["a", "dog", "runs", "off", "fast"]]
        refs = [[c] for c in corpus]
        for n in range(1, 5):
            assert corpus_bleu(corpus, refs, n) == 1.0


class TestMeteor:
    def test_identical_four_tokens(self, graph):
        tokens = ["a", "man", "sits", "down"]
        assert meteor(tokens, tokens, graph) == pytest.approx(0.9921875, abs=1e-6)

    def test_single_identical_token(self, graph):
        assert meteor(["man"], ["man"], graph) == pytest.approx(0.5, abs=1e-6)

    def test_disjoint(self, graph):
        assert meteor(["table"], ["sky"], graph) == 0.0

    def test_stem_match(self, graph):
        score = meteor(["the", "man", "walks"], ["the", "man", "walking"], graph)
        assert score == pytest.approx(1.0 - 0.5 / 27.0, abs=1e-6)

    def test_synonym_match_via_shared_synset(self, graph):
        score = meteor(["a", "guy", "sits"], ["a", "fellow", "sits"], graph)
        assert score == pytest.approx(1.0 - 0.5 / 27.0, abs=1e-6)

    def test_half_overlap(self, graph):
        assert meteor(["the", "cat"], ["the", "dog"], graph) == pytest.approx(0.25, abs=1e-6)

    def test_empty(self, graph):
        assert meteor([], ["a"], graph) == 0.0
        assert meteor(["a"], [], graph) == 0.0


class TestCider:
    def test_identity_disjoint_two_image_corpus(self):
        image1 = ["a", "man", "sits", "down"]
        image2 = ["big", "dog", "runs", "far"]
        corpus = [[image1], [image2]]
        assert cider(image1, [image1], corpus) == pytest.approx(10.0, abs=1e-9)

    def test_no_shared_ngrams(self):
        corpus = [[["a", "man"]], [["big", "dog"]]]
        assert cider(["big", "dog"], [["a", "man"]], corpus) == 0.0

    def test_reference_order_invariance(self):
        refs = [["a", "man", "sits"], ["a", "man", "naps"]]
        corpus = [refs, [["big", "dog", "runs"]]]
        cand = ["a", "man", "rests"]
        assert cider(cand, refs, corpus) == pytest.approx(
            cider(cand, list(reversed(refs)), corpus), abs=1e-12
        )

    def test_empty_candidate(self):
        assert cider([], [["a"]], [[["a"]]]) == 0.0

    def test_range_on_fuzzed_inputs(self):
        rng = random.Random(7)
        vocab = [f"w{i}" for i in range(8)]
        for _ in range(50):
            corpus = [
                [
                    [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
                    for _ in range(rng.randint(1, 3))
                ]
                for _ in range(rng.randint(2, 4))
            ]
            cand = [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
            score = cider(cand, corpus[0], corpus)
            assert 0.0 <= score <= 10.0 + 1e-9

    def test_corpus_cider_matches_per_image_mean(self):
        refs = [[["a", "man", "sits"]], [["big", "dog", "runs"]]]
        cands = [["a", "man", "sits"], ["big", "cat", "runs"]]
        expected = (cider(cands[0], refs[0], refs) + cider(cands[1], refs[1], refs)) / 2
        assert corpus_cider(cands, refs) == pytest.approx(expected, abs=1e-12)


class TestCorpusMetrics:
    def test_identity_corpus(self, graph):
        paragraphs = [["a", "man", "sits", "down"], ["big", "dog", "runs", "far"]]
        refs = [[p] for p in paragraphs]
        report = corpus_metrics(paragraphs, refs, graph)
        assert report.bleu == [1.0, 1.0, 1.0, 1.0]
        assert report.meteor == pytest.approx(0.9921875, abs=1e-6)
        assert report.cider == pytest.approx(10.0, abs=1e-9)

    def test_report_dict_shape(self, graph):
        report = corpus_metrics([["a"]], [[["a"]]], graph)
        data = report.to_dict()
        assert set(data) == {"bleu", "meteor", "cider"}
        assert len(data["bleu"]) == 4


class TestLanguageStats:
    def test_simple_counts(self, lexicon):
        stats = language_stats(["ab. cd."], lexicon)
        assert stats.chars.mean == 7
        assert stats.words.mean == 2
        assert stats.sentences.mean == 2
        assert stats.vocab_size == 2

    def test_empty_corpus(self, lexicon):
        stats = language_stats([], lexicon)
        assert stats.chars.mean == 0.0 and stats.chars.std == 0.0
        assert stats.vocab_size == 0
        assert all(v == 0.0 for v in stats.pos_pct.values())

    def test_identical_paragraphs_zero_std(self, lexicon):
        stats = language_stats(["a man sits."] * 2, lexicon)
        assert stats.chars.std == 0.0
        assert stats.words.std == 0.0
        assert stats.sentences.std == 0.0

    def test_pos_percentages(self, lexicon):
        stats = language_stats(["a man sits. he smiles."], lexicon)
        assert stats.pos_pct["NOUN"] == pytest.approx(20.0)
        assert stats.pos_pct["VERB"] == pytest.approx(40.0)
        assert stats.pos_pct["PRON"] == pytest.approx(20.0)
        assert stats.pos_pct["ADJ"] == 0.0

    def test_word_count_cross_check(self, lexicon):
        from ctxgen.text_core import normalize_and_tokenize

        paragraphs = ["a man sits.", "two dogs run fast.", ""]
        stats = language_stats(paragraphs, lexicon)
        total = sum(len(normalize_and_tokenize(p)) for p in paragraphs)
        assert stats.words.mean * len(paragraphs) == pytest.approx(total)


class TestBaselines:
    def test_concat_counts(self):
        paragraph = make_concat_baseline([cap("red hat"), cap("blue cup"), cap("old desk")])
        assert paragraph == "red hat. blue cup. old desk."
        assert len(split_sentences(paragraph)) == 3

    def test_concat_empty(self):
        assert make_concat_baseline([]) == ""

    def test_concat_preserves_order(self):
        paragraph = make_concat_baseline([cap("first one"), cap("second one")])
        assert paragraph.index("first") < paragraph.index("second")

    def test_concat_filter_composes_cascade(self, resources):
        from ctxgen.image_analyzer import (
            analyze_captions,
            dedup_captions,
            filter_person_captions,
            filter_short_captions,
            standardize_subject,
        )

        captions = [
            cap("a man wearing a hat"),
            cap("a man wearing a hat"),
            cap("the sky is blue today"),
            cap("a guy holding a cup"),
        ]
        expected = analyze_captions(captions, resources.lexicon)
        expected = dedup_captions(expected, resources.store, CONFIG)
        expected = filter_person_captions(expected, resources.graph)
        expected = filter_short_captions(expected)
        expected, _ = standardize_subject(expected, resources.graph)
        assert make_concat_filter_baseline(captions, resources, CONFIG) == (
            ". ".join(c.record.raw for c in expected) + "."
        )

    def test_concat_filter_all_non_person(self, resources):
        captions = [cap("the sky is blue"), cap("a wooden table")]
        assert make_concat_filter_baseline(captions, resources, CONFIG) == ""

    def test_concat_filter_single_person_caption(self, resources):
        assert make_concat_filter_baseline(
            [cap("a man wearing a hat")], resources, CONFIG
        ) == "a man wearing a hat."


class TestAblateSentences:
    PARAGRAPH = " ".join(f"sentence number {i} here." for i in range(12))

    def test_quarter_of_twelve_keeps_three(self):
        kept = ablate_sentences(self.PARAGRAPH, 0.25, seed=3)
        assert len(split_sentences(kept)) == 3

    def test_keep_all_is_identity(self):
        assert ablate_sentences(self.PARAGRAPH, 1.0, seed=0) == self.PARAGRAPH

    def test_deterministic_per_seed(self):
        a = ablate_sentences(self.PARAGRAPH, 0.5, seed=42)
        b = ablate_sentences(self.PARAGRAPH, 0.5, seed=42)
        assert a == b

    def test_different_seeds_can_differ(self):
        outputs = {ablate_sentences(self.PARAGRAPH, 0.25, seed=s) for s in range(6)}
        assert len(outputs) > 1

    def test_output_is_subsequence(self):
        original = split_sentences(self.PARAGRAPH)
        kept = split_sentences(ablate_sentences(self.PARAGRAPH, 0.5, seed=1))
        it = iter(original)
        assert all(s in it for s in kept)

    def test_invalid_fraction_rejected(self):
        with pytest.raises(ValueError):
            ablate_sentences(self.PARAGRAPH, 0.0, seed=0)
        with pytest.raises(ValueError):
            ablate_sentences(self.PARAGRAPH, 1.5, seed=0)

    def test_empty_paragraph(self):
        assert ablate_sentences("", 0.5, seed=0) == ""
