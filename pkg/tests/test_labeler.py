import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from maskner.backend import MaskDistribution, StubBackend
from maskner.corpus import Sentence, Token, parse_conll
from maskner.detector import DetectorConfig
from maskner.labeler import (
    Prediction,
    classify_span,
    score_labels,
    tag_dataset,
    tag_sentence,
)
from maskner.lexicon import builtin_lexicon, lexicon_from_mapping
from maskner.templates import builtin_catalog

from .conftest import MUNICH_PROMPT, MUNICH_TOP5

T1 = builtin_catalog()["T1"]


def test_munich_distribution_names_a_location(table_lexicon):
    dist = MaskDistribution({"city": 0.43, "person": 0.10}, "p")
    top = score_labels(dist, table_lexicon, "max")[0]
    assert (top.label, top.score, top.winning_word) == ("LOC", 0.43, "city")


def test_all_zero_distribution_falls_back_to_declaration_order(table_lexicon):
    scored = score_labels(MaskDistribution({}, "p"), table_lexicon, "max")
    assert scored[0].label == "LOC"
    assert scored[0].score == 0.0
    assert [s.label for s in scored] == ["LOC", "PER", "ORG", "ORDINAL", "DATE"]


def test_exact_tie_resolves_by_declaration_order(table_lexicon):
    dist = MaskDistribution({"city": 0.3, "person": 0.3}, "p")
    assert score_labels(dist, table_lexicon, "max")[0].label == "LOC"


def test_sum_aggregation_adds_word_probabilities():
    lexicon = lexicon_from_mapping({"A": ["x", "y"], "B": ["z"]}).lexicon
    dist = MaskDistribution({"x": 0.2, "y": 0.2, "z": 0.3}, "p")
    by_label = {s.label: s for s in score_labels(dist, lexicon, "sum")}
    assert by_label["A"].score == pytest.approx(0.4)
    assert by_label["B"].score == pytest.approx(0.3)
    # winning word is the largest single contributor
    assert by_label["A"].winning_word == "x"


def test_max_and_sum_agree_on_single_word_lexicons():
    lexicon = lexicon_from_mapping({"A": ["x"], "B": ["z"]}).lexicon
    dist = MaskDistribution({"x": 0.2, "z": 0.3}, "p")
    assert [s.label for s in score_labels(dist, lexicon, "max")] == [
        s.label for s in score_labels(dist, lexicon, "sum")
    ]


def test_unknown_aggregation_is_rejected(table_lexicon):
    with pytest.raises(ValueError):
        score_labels(MaskDistribution({}, "p"), table_lexicon, "mean")


# nonzero probabilities stay in normal float range: scaling a subnormal
# can underflow to 0.0, which turns a strict ranking into a tie
word_probs = st.dictionaries(
    st.sampled_from(builtin_lexicon().all_words()),
    st.one_of(st.just(0.0), st.floats(min_value=1e-9, max_value=0.02)),
    min_size=1,
    max_size=10,
)


@given(word_probs, st.floats(min_value=0.01, max_value=0.99), st.sampled_from(["max", "sum"]))
@settings(max_examples=120, deadline=None)
def test_positive_rescaling_preserves_ranking(probs, fraction, aggregation):
    lexicon = builtin_lexicon()
    before = score_labels(MaskDistribution(probs, "p"), lexicon, aggregation)
    # largest c keeping the scaled subset a valid distribution is 1/sum;
    # near-zero totals would overflow the quotient, so rule them out
    total = sum(probs.values())
    assume(total == 0.0 or total >= 1e-12)
    c = fraction / total if total > 0 else 1.0
    scaled = {w: p * c for w, p in probs.items()}
    after = score_labels(MaskDistribution(scaled, "p"), lexicon, aggregation)
    assert [s.label for s in before] == [s.label for s in after]
    assert [s.winning_word for s in before] == [s.winning_word for s in after]


@given(word_probs)
@settings(max_examples=120, deadline=None)
def test_max_top_label_owns_the_globally_best_word(probs):
    lexicon = builtin_lexicon()
    top = score_labels(MaskDistribution(probs, "p"), lexicon, "max")[0]
    best = max(probs.values()) if probs else 0.0
    assert top.score == best
    assert top.winning_word in lexicon.words[top.label]
    assert probs.get(top.winning_word, 0.0) == best


MUNICH_SENTENCE = Sentence(
    "munich.conll:1",
    tuple(
        Token(s, p, i)
        for i, (s, p) in enumerate(
            [("I", "PRON"), ("will", "AUX"), ("visit", "VERB"), ("Munich", "PROPN"), ("next", "ADJ"), ("week", "NOUN")]
        )
    ),
)


def test_classify_span_reproduces_worked_example(munich_backend, table_lexicon):
    span = tag_sentence(MUNICH_SENTENCE, T1, munich_backend, table_lexicon)[0]
    assert span.span.surface == "Munich"
    assert span.label == "LOC"
    assert span.confidence == 0.43
    assert span.winning_word == "city"
    assert span.source == "base"


def test_classify_span_abstains_below_threshold(munich_backend, table_lexicon):
    from maskner.detector import CandidateSpan

    prediction = classify_span(
        CandidateSpan(3, 4, "Munich"),
        MUNICH_SENTENCE,
        T1,
        munich_backend,
        table_lexicon,
        abstain_below=0.5,
    )
    assert prediction is None


def test_classify_span_abstains_on_zero_evidence(table_lexicon):
    backend = StubBackend({MUNICH_PROMPT: {}})
    from maskner.detector import CandidateSpan

    prediction = classify_span(
        CandidateSpan(3, 4, "Munich"), MUNICH_SENTENCE, T1, backend, table_lexicon
    )
    assert prediction is None


def test_classify_span_queries_only_lexicon_words(munich_backend, table_lexicon):
    from maskner.detector import CandidateSpan

    prediction = classify_span(
        CandidateSpan(3, 4, "Munich"), MUNICH_SENTENCE, T1, munich_backend, table_lexicon
    )
    # "success" (0.17) outscores every non-LOC representative word but is in no
    # list, so it cannot steal the argmax
    assert prediction.label == "LOC"


def test_two_candidates_tagged_in_span_order(table_lexicon):
    corpus = "Anna PROPN B-PER\nvisits VERB O\nMunich PROPN B-LOC\n"
    dataset = parse_conll(corpus).dataset
    backend = StubBackend(
        {
            "Anna visits Munich Anna is a [MASK].": {"woman": 0.5},
            "Anna visits Munich Munich is a [MASK].": {"city": 0.6},
        }
    )
    predictions = tag_sentence(dataset.sentences[0], T1, backend, table_lexicon)
    assert [(p.span.surface, p.label) for p in predictions] == [("Anna", "PER"), ("Munich", "LOC")]


def test_sentence_without_candidates_yields_nothing(table_lexicon, munich_backend):
    sent = Sentence("s:1", (Token("nothing", "NOUN", 0),))
    assert tag_sentence(sent, T1, munich_backend, table_lexicon) == []


def test_tagged_spans_are_a_subset_of_detected_candidates(table_lexicon):
    from maskner.detector import detect_candidates

    corpus = "Anna PROPN B-PER\nvisits VERB O\nMunich PROPN B-LOC\n"
    sent = parse_conll(corpus).dataset.sentences[0]
    backend = StubBackend(
        {
            "Anna visits Munich Anna is a [MASK].": {},
            "Anna visits Munich Munich is a [MASK].": {"city": 0.6},
        }
    )
    predictions = tag_sentence(sent, T1, backend, table_lexicon)
    detected = {(c.start, c.end) for c in detect_candidates(sent)}
    tagged = [(p.span.start, p.span.end) for p in predictions]
    assert set(tagged) <= detected
    assert len(tagged) == len(set(tagged))


def test_parallel_tagging_matches_serial(table_lexicon):
    corpus = "\n\n".join(f"City{i} PROPN B-LOC" for i in range(8)) + "\n"
    dataset = parse_conll(corpus).dataset
    fixtures = {f"City{i} City{i} is a [MASK].": {"city": 0.2 + i * 0.05} for i in range(8)}
    backend = StubBackend(fixtures)
    serial = tag_dataset(dataset, T1, backend, table_lexicon, jobs=1)
    parallel = tag_dataset(dataset, T1, backend, table_lexicon, jobs=4)
    assert serial == parallel
    assert list(serial) == [s.id for s in dataset.sentences]


def test_prediction_confidence_bounds_are_enforced():
    from maskner.detector import CandidateSpan

    with pytest.raises(ValueError):
        Prediction(CandidateSpan(0, 1, "x"), "LOC", 1.5, "city")


def test_detector_config_flows_through(table_lexicon):
    corpus = "third ORDINAL B-ORDINAL\n"
    dataset = parse_conll(corpus).dataset
    backend = StubBackend({"third third is a [MASK].": {"number": 0.3}})
    config = DetectorConfig(include_numeric=True)
    predictions = tag_dataset(dataset, T1, backend, table_lexicon, config)
    assert predictions["corpus:1"][0].label == "ORDINAL"
