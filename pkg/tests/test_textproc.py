import random

import pytest
from hypothesis import given, strategies as st

from entailrank.errors import ValidationError
from entailrank.stemmer import stem as porter_stem
from entailrank.textproc import (
    Analyzer,
    Sentence,
    balanced_sample,
    default_abbreviations,
    default_stopwords,
    make_artificial_fragments,
    render_t5_input,
    segment_sentences,
    window_segments,
)


def make_sentences(n):
    return [Sentence(i, f"Sentence number {i}.", (0, 0)) for i in range(n)]


class TestSegmentSentences:
    def test_two_plain_sentences(self):
        got = segment_sentences("First sentence. Second sentence.")
        assert [s.text for s in got] == ["First sentence.", "Second sentence."]

    def test_empty_input(self):
        assert segment_sentences("") == []
        assert segment_sentences("   \n\t ") == []

    def test_abbreviation_guard_holds_legal_citations(self):
        got = segment_sentences(
            "The appellant cited R. v. Smith. The court agreed."
        )
        assert [s.text for s in got] == [
            "The appellant cited R. v. Smith.",
            "The court agreed.",
        ]

    def test_numbered_paragraph_reference(self):
        got = segment_sentences("See para. 12 of the reasons. No. 5 applies.")
        assert len(got) == 2

    def test_no_terminator_single_sentence(self):
        got = segment_sentences("a fragment without a terminator")
        assert len(got) == 1

    def test_lowercase_continuation_not_split(self):
        # continuation starts lowercase, so no boundary fires
        got = segment_sentences("The motion was denied. the end")
        assert len(got) == 1

    def test_spans_tile_the_source(self):
        rng = random.Random(5)
        pieces = []
        for _ in range(30):
            pieces.append(
                rng.choice(
                    [
                        "The judge ruled on the motion.",
                        "Costs were awarded!",
                        "Was the appeal allowed?",
                        "R. v. Jones was cited.",
                    ]
                )
            )
        text = "  " + "  ".join(pieces) + " \n"
        sentences = segment_sentences(text)
        # ordered, non-overlapping, whitespace-only gaps, full coverage
        pos = 0
        for s in sentences:
            start, end = s.char_span
            assert start >= pos
            assert text[pos:start].strip() == ""
            assert text[start:end] == s.text
            assert s.text == s.text.strip()
            pos = end
        assert text[pos:].strip() == ""

    def test_guard_list_override(self):
        text = "Cited op. cit. Above all."
        default = segment_sentences(text, abbreviations=frozenset())
        guarded = segment_sentences(text, abbreviations=frozenset({"cit.", "op."}))
        assert len(default) == 2
        assert len(guarded) == 1


class TestAnalyzer:
    def test_all_stopwords(self):
        assert Analyzer().analyze("the the the") == []

    def test_porter_reference_values(self):
        assert Analyzer().analyze("Decision") == ["decis"]
        assert Analyzer().analyze("court's decisions") == ["court", "decis"]

    def test_split_on_non_alphanumeric_runs(self):
        assert Analyzer(stem=False).analyze("cross-examination, s.7(1)") == [
            "cross", "examination", "s", "7", "1",
        ]

    def test_no_stem_chain_is_idempotent(self):
        an = Analyzer(stem=False)
        text = "The Tribunal's order under ss. 12(1) was upheld on appeal."
        once = an.analyze(text)
        assert an.analyze(" ".join(once)) == once

    def test_fixed_point_stems_reanalyze_unchanged(self):
        # full-chain idempotence modulo stopword stripping, on fixed points
        an = Analyzer()
        stops = default_stopwords()
        tokens = an.analyze(
            "The officer held that the claimant wills the appeal to proceed."
        )
        fixed = [t for t in tokens if porter_stem(t) == t]
        assert an.analyze(" ".join(fixed)) == [t for t in fixed if t not in stops]

    def test_fingerprint_tracks_configuration(self):
        base = Analyzer()
        assert base.fingerprint() == Analyzer().fingerprint()
        assert base.fingerprint() != Analyzer(stem=False).fingerprint()
        assert base.fingerprint() != Analyzer(stopwords=frozenset({"the"})).fingerprint()

    def test_shipped_stopword_list_size(self):
        assert len(default_stopwords()) == 33

    def test_guard_list_contains_required_legal_forms(self):
        assert {"v.", "R.", "No.", "para."} <= default_abbreviations()


class TestWindowSegments:
    def test_twelve_sentences(self):
        sentences = make_sentences(12)
        got = window_segments(sentences, window=10, stride=5)
        assert len(got) == 2
        assert got[0] == " ".join(s.text for s in sentences[0:10])
        assert got[1] == " ".join(s.text for s in sentences[5:12])

    def test_clip_only(self):
        assert len(window_segments(make_sentences(3), 10, 5)) == 1

    def test_contained_window_dropped(self):
        assert len(window_segments(make_sentences(10), 10, 5)) == 1

    def test_every_sentence_covered(self):
        rng = random.Random(11)
        for _ in range(50):
            n = rng.randint(1, 40)
            window = rng.randint(1, 12)
            stride = rng.randint(1, window)
            sentences = make_sentences(n)
            got = window_segments(sentences, window, stride)
            seen = set()
            for passage in got:
                for s in sentences:
                    if s.text in passage:
                        seen.add(s.index)
            assert seen == set(range(n))

    def test_invalid_parameters(self):
        with pytest.raises(ValidationError):
            window_segments(make_sentences(3), window=0)
        with pytest.raises(ValidationError):
            window_segments(make_sentences(3), window=5, stride=6)
        with pytest.raises(ValidationError):
            window_segments(make_sentences(3), window=5, stride=0)


class TestRenderT5Input:
    def test_template_shape(self):
        assert render_t5_input("q", "d") == "Query: q Document: d Relevant:"

    def test_truncation_to_budget(self):
        doc = " ".join(f"tok{i}" for i in range(1000))
        out = render_t5_input("q", doc, limit=512)
        assert len(out.split()) == 512
        assert out.endswith("Relevant:")

    def test_empty_document(self):
        assert render_t5_input("q", "") == "Query: q Document:  Relevant:"

    def test_markers_present_exactly_once(self):
        out = render_t5_input("what was held", "the holding text", limit=64)
        assert out.count("Query:") == 1
        assert out.count("Document:") == 1
        assert out.endswith("Relevant:")

    def test_query_never_truncated(self):
        query = " ".join(f"q{i}" for i in range(20))
        out = render_t5_input(query, "doc words here", limit=24)
        assert query in out

    def test_limit_too_small(self):
        with pytest.raises(ValidationError):
            render_t5_input(" ".join(["w"] * 30), "doc", limit=32)


class TestMakeArtificialFragments:
    def test_thirty_token_paragraph_ten_token_fragment(self):
        paragraph = " ".join(f"w{i}" for i in range(30))
        fragment = " ".join(f"f{i}" for i in range(10))
        got = make_artificial_fragments(paragraph, fragment, {"p3"}, "ex9")
        assert len(got) == 5
        assert [f.text.split()[0] for f in got] == ["w0", "w5", "w10", "w15", "w20"]
        assert all(f.source_example_id == "ex9" for f in got)
        assert [f.window_index for f in got] == [0, 1, 2, 3, 4]

    def test_single_token_fragment(self):
        got = make_artificial_fragments("a b c d", "x", set())
        assert [f.text for f in got] == ["a", "b", "c", "d"]

    def test_labels_copied_to_every_window(self):
        got = make_artificial_fragments("one two three four", "x y", {"p3"})
        assert all(f.labels == frozenset({"p3"}) for f in got)

    def test_window_never_longer_than_fragment(self):
        rng = random.Random(3)
        for _ in range(50):
            para = " ".join(f"w{i}" for i in range(rng.randint(1, 60)))
            frag = " ".join(f"f{i}" for i in range(rng.randint(1, 20)))
            for f in make_artificial_fragments(para, frag, set()):
                assert len(f.text.split()) <= len(frag.split())

    def test_doubling_even_fragment_doubles_stride(self):
        para = " ".join(f"w{i}" for i in range(40))
        short = make_artificial_fragments(para, " ".join(["f"] * 4), set())
        long = make_artificial_fragments(para, " ".join(["f"] * 8), set())
        stride_short = short[1].text.split()[0]
        stride_long = long[1].text.split()[0]
        assert stride_short == "w2" and stride_long == "w4"

    def test_empty_inputs(self):
        with pytest.raises(ValidationError):
            make_artificial_fragments("", "frag", set())
        with pytest.raises(ValidationError):
            make_artificial_fragments("para", " ", set())


class TestBalancedSample:
    def test_exact_balance(self):
        pool = [("f", f"p{i}", True) for i in range(15000)] + [
            ("f", f"n{i}", False) for i in range(500000)
        ]
        got = balanced_sample(pool, n=20000, seed=13)
        assert len(got) == 20000
        assert sum(1 for p in got if p[2]) == 10000
        assert len(set(got)) == 20000  # without replacement

    def test_exhaustive_tiny_pool(self):
        pool = [("f", "p", True), ("f", "n", False)]
        assert sorted(balanced_sample(pool, n=2, seed=1)) == sorted(pool)

    def test_insufficient_positives(self):
        pool = [("f", "p", True)] + [("f", f"n{i}", False) for i in range(9)]
        with pytest.raises(ValidationError, match="1 and 9"):
            balanced_sample(pool, n=4, seed=1)

    @given(st.integers(min_value=0, max_value=2**31))
    def test_same_seed_same_sequence(self, seed):
        pool = [("f", f"p{i}", True) for i in range(40)] + [
            ("f", f"n{i}", False) for i in range(40)
        ]
        assert balanced_sample(pool, 20, seed) == balanced_sample(pool, 20, seed)
