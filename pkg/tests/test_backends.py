import json
import threading

import httpx
import numpy as np
import pytest

from ctxattack import QueryBudgetExhausted, tokenize
from ctxattack.backends.base import BackendSuite, CountingTarget, PosTag, normalize_scores, serialize_suite
from ctxattack.backends.pairs import PairTarget
from ctxattack.backends.remote import RemoteTarget, parse_prediction
from ctxattack.backends.stubs import (
    BagOfWordsEmbedder,
    BigramFluency,
    KeywordTarget,
    LexiconTagger,
    TableMaskedLM,
    UniformTarget,
    build_stub_suite,
    inflect_noun,
)
from ctxattack.exceptions import ProtocolError, TargetUnavailable

from replay import prediction_server


def test_keyword_target_documented_example():
    pred = KeywordTarget({"great": 0.4}).predict(tokenize("great food"))
    assert pred.scores == pytest.approx((0.1, 0.9))
    assert pred.predicted == 1


def test_keyword_target_multiclass_and_clipping():
    target = KeywordTarget({"no": (0.0, 0.0, 0.9), "yes": (0.9, 0.0, 0.0)}, num_classes=3)
    pred = target.predict(tokenize("no no"))
    assert pred.predicted == 2 and pred.scores[2] == pytest.approx((1 / 3 + 1.8) / (2 / 3 + 1 / 3 + 1.8))
    with pytest.raises(ValueError):
        KeywordTarget({"x": 0.1}, num_classes=3)
    assert normalize_scores([-1.0, -2.0]) == [0.5, 0.5]


def test_uniform_target():
    assert UniformTarget(4).predict(tokenize("x")).scores == (0.25,) * 4


def test_counting_target_budget():
    counter = CountingTarget(UniformTarget(), budget=2)
    counter.predict(tokenize("a"))
    counter.predict(tokenize("b"))
    with pytest.raises(QueryBudgetExhausted):
        counter.predict(tokenize("c"))
    assert counter.queries == 2


def test_counting_target_is_thread_safe():
    counter = CountingTarget(UniformTarget())
    text = tokenize("a b")
    threads = [threading.Thread(target=lambda: [counter.predict(text) for _ in range(200)]) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert counter.queries == 800


def test_table_mlm_filters_and_anchors():
    mlm = TableMaskedLM({"good": ["fine", "##ish", "fine", "nice", "don't", "okay"]}, {("good", "very"): ["swell"]})
    text = tokenize("very good film")
    assert mlm.top_k(text, 1, 10) == ["fine", "nice", "okay"]
    assert mlm.top_k(text, 1, 2) == ["fine", "nice"]
    assert mlm.top_k(text, 1, 10, anchor=0) == ["swell"]
    assert mlm.top_k(text, 1, 10, anchor=2) == ["fine", "nice", "okay"]
    assert mlm.top_k(text, 0, 10) == []


def test_bag_of_words_embedder():
    emb = BagOfWordsEmbedder({"a": [1, 0], "b": [0, 1]})
    assert emb.dim == 2
    assert np.array_equal(emb.embed("a b , a"), [2.0, 1.0])
    hashed = BagOfWordsEmbedder(dim=16)
    assert np.array_equal(hashed.embed("The film"), hashed.embed("film the"))
    assert not hashed.embed("?").any()


def test_bigram_fluency():
    fl = BigramFluency({("very", "good"): 0.2}, {"very": 0.1})
    t = tokenize("very good")
    assert fl.word_probability(t, 0, "very") == 0.1
    assert fl.word_probability(t, 1, "Good") == 0.2
    assert fl.word_probability(t, 1, "bad") == fl.floor


def test_inflection():
    assert inflect_noun("store", "plur") == "stores"
    assert inflect_noun("stores", "sing") == "store"
    tagger = LexiconTagger({"child": "NOUN:sing:child", "children": "NOUN:plur:child", "watched": "VERB::watch"})
    assert tagger.inflect("child", tagger.tag_word("child"), "plur") == "children"
    assert tagger.inflect("store", PosTag("NOUN", "sing", "store"), "plur") == "stores"
    assert tagger.tag_word("watched") == PosTag("VERB", None, "watch")
    assert tagger.tag_word("zzz").pos == "X"


def test_build_stub_suite_from_json():
    spec = {
        "target": {"weights": {"good": 0.3}},
        "masked_lm": {"table": {"good": ["fine"]}},
        "embedder": {"dim": 8},
        "fluency": {"bigrams": {"very good": 0.3}},
        "pos": {"lexicon": {"good": "ADJ"}},
    }
    suite = build_stub_suite(json.loads(json.dumps(spec)))
    assert suite.reentrant
    assert suite.fluency.word_probability(tokenize("very good"), 1, "good") == 0.3
    assert suite.embedder.dim == 8


def test_serialize_suite_wraps_non_reentrant():
    class Plain:
        def predict(self, text):
            return UniformTarget().predict(text)

    suite = BackendSuite(Plain(), TableMaskedLM({}), BagOfWordsEmbedder(), BigramFluency(), LexiconTagger({}))
    assert not suite.reentrant
    safe = serialize_suite(suite)
    assert safe.target.predict(tokenize("x")).scores == (0.5, 0.5)
    assert safe.masked_lm is suite.masked_lm


def test_pair_target_routes_both_fields():
    calls = []

    class Inner:
        def predict_pair(self, premise, hypothesis):
            calls.append((premise, hypothesis))
            return UniformTarget(3).predict(tokenize("x"))

    PairTarget(Inner(), "A dog runs.", "premise").predict(tokenize("A cat sleeps."))
    PairTarget(Inner(), "A dog runs.", "hypothesis").predict(tokenize("A cat sleeps."))
    assert calls == [("A cat sleeps.", "A dog runs."), ("A dog runs.", "A cat sleeps.")]


def _mock(handler, **kwargs):
    return RemoteTarget("http://model.test/predict", transport=httpx.MockTransport(handler), sleep=lambda s: None, **kwargs)


def test_remote_sends_key_and_pair():
    seen = []

    def handler(request):
        seen.append((request.headers.get("X-Team-Key"), json.loads(request.content)))
        return httpx.Response(200, json={"scores": [0.3, 0.7], "label": 1})

    client = _mock(handler, api_key="s3cret", api_key_header="X-Team-Key")
    assert client.predict(tokenize("nice film")).predicted == 1
    client.predict_pair("a", "b")
    assert seen == [("s3cret", {"text": "nice film"}), ("s3cret", {"text": "a", "text_pair": "b"})]


def test_remote_retries_then_succeeds():
    replies = iter([httpx.ConnectError("refused"), httpx.Response(500), httpx.Response(200, json={"scores": [1.0, 0.0], "label": 0})])

    def handler(request):
        reply = next(replies)
        if isinstance(reply, Exception):
            raise reply
        return reply

    assert _mock(handler).predict(tokenize("x")).predicted == 0


def test_remote_gives_up_after_three_attempts():
    calls = []

    def handler(request):
        calls.append(1)
        raise httpx.ReadTimeout("slow")

    with pytest.raises(TargetUnavailable):
        _mock(handler).predict(tokenize("x"))
    assert len(calls) == 3


@pytest.mark.parametrize(
    "body",
    [b"not json", b"[]", b'{"scores": "x", "label": 0}', b'{"scores": [0.5, 0.5]}',
     b'{"scores": [0.2, 0.8], "label": 0}', b'{"scores": [0.9, 0.9], "label": 0}'],
)
def test_malformed_response_is_protocol_error(body):
    with pytest.raises(ProtocolError):
        parse_prediction(body)
    with pytest.raises(ProtocolError):
        _mock(lambda r: httpx.Response(200, content=body)).predict(tokenize("x"))


def test_remote_from_env(monkeypatch):
    monkeypatch.setenv("CTXATTACK_TARGET_URL", "http://env.test/predict")
    monkeypatch.setenv("CTXATTACK_API_KEY", "k")
    client = RemoteTarget.from_env()
    assert client.url == "http://env.test/predict"
    monkeypatch.delenv("CTXATTACK_TARGET_URL")
    with pytest.raises(ValueError):
        RemoteTarget.from_env()


def test_remote_against_live_server():
    target = KeywordTarget({"good": 0.3})
    with prediction_server(target, api_key="k") as url:
        assert RemoteTarget(url, api_key="k").predict(tokenize("good")) == target.predict(tokenize("good"))
        with pytest.raises(TargetUnavailable):
            RemoteTarget(url, api_key="wrong", backoff=0.0).predict(tokenize("good"))
