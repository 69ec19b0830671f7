from .base import (
    BackendSuite,
    CountingTarget,
    FluencyScorer,
    MaskedLMProvider,
    PosTag,
    PosTagger,
    SentenceEmbedder,
    TargetModel,
    serialize_suite,
)
from .pairs import PairTarget
from .remote import RemoteTarget
from .stubs import (
    BagOfWordsEmbedder,
    BigramFluency,
    KeywordTarget,
    LexiconTagger,
    TableMaskedLM,
    UniformTarget,
    build_stub_suite,
    demo_suite,
)

__all__ = [
    "BackendSuite",
    "BagOfWordsEmbedder",
    "BigramFluency",
    "CountingTarget",
    "FluencyScorer",
    "KeywordTarget",
    "LexiconTagger",
    "MaskedLMProvider",
    "PairTarget",
    "PosTag",
    "PosTagger",
    "RemoteTarget",
    "SentenceEmbedder",
    "TableMaskedLM",
    "TargetModel",
    "UniformTarget",
    "build_stub_suite",
    "demo_suite",
    "serialize_suite",
]
