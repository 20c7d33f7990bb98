import pytest
from hypothesis import given, settings

from maskner.corpus import Sentence, Token
from maskner.detector import CandidateSpan, DetectorConfig, detect_candidates

from .strategies import datasets


def _sentence(*pairs):
    tokens = tuple(Token(s, p, i) for i, (s, p) in enumerate(pairs))
    return Sentence("s:1", tokens)


def test_single_proper_noun():
    sent = _sentence(("I", "PRON"), ("visit", "VERB"), ("Munich", "PROPN"))
    assert detect_candidates(sent) == [CandidateSpan(2, 3, "Munich")]


def test_consecutive_proper_nouns_merge():
    sent = _sentence(("New", "PROPN"), ("York", "PROPN"), ("is", "AUX"), ("big", "ADJ"))
    assert detect_candidates(sent) == [CandidateSpan(0, 2, "New York")]


def test_separated_runs_stay_separate():
    sent = _sentence(("Munich", "PROPN"), ("and", "CCONJ"), ("Berlin", "PROPN"))
    spans = detect_candidates(sent)
    assert spans == [CandidateSpan(0, 1, "Munich"), CandidateSpan(2, 3, "Berlin")]


def test_no_candidates():
    sent = _sentence(("I", "PRON"), ("sleep", "VERB"))
    assert detect_candidates(sent) == []


def test_run_at_sentence_end_is_flushed():
    sent = _sentence(("to", "PART"), ("New", "PROPN"), ("York", "PROPN"))
    assert detect_candidates(sent) == [CandidateSpan(1, 3, "New York")]


def test_numeric_tags_off_by_default():
    sent = _sentence(("third", "ORDINAL"), ("of", "ADP"), ("May", "PROPN"))
    assert detect_candidates(sent) == [CandidateSpan(2, 3, "May")]


def test_numeric_tags_join_when_enabled():
    sent = _sentence(("third", "ORDINAL"), ("of", "ADP"), ("1990", "NUM"))
    config = DetectorConfig(include_numeric=True)
    assert detect_candidates(sent, config) == [
        CandidateSpan(0, 1, "third"),
        CandidateSpan(2, 3, "1990"),
    ]


def test_custom_pos_set():
    sent = _sentence(("running", "VERB"), ("Munich", "PROPN"))
    config = DetectorConfig(candidate_pos=["VERB"])
    assert detect_candidates(sent, config) == [CandidateSpan(0, 1, "running")]


def test_empty_pos_set_is_rejected():
    with pytest.raises(ValueError):
        DetectorConfig(candidate_pos=[])


@given(datasets())
@settings(max_examples=60, deadline=None)
def test_spans_are_sorted_disjoint_and_cover_candidate_tokens(dataset):
    config = DetectorConfig(include_numeric=True)
    wanted = config.effective_pos()
    for sent in dataset.sentences:
        spans = detect_candidates(sent, config)
        covered = set()
        prev_end = -1
        for span in spans:
            # maximal runs: a gap of at least one non-candidate token between spans
            assert span.start > prev_end if prev_end >= 0 else span.start >= 0
            prev_end = span.end
            covered |= set(range(span.start, span.end))
            assert span.surface == sent.span_surface(span.start, span.end)
        expected = {i for i, tok in enumerate(sent.tokens) if tok.pos in wanted}
        assert covered == expected
