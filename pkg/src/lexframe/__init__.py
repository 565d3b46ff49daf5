"""lexframe: reframing arguments by changing connotation, not meaning.

The package builds a parallel corpus by masking emotionally loaded words and
re-infilling them under connotation constraints, fine-tunes a controllable
sequence-to-sequence generator on that corpus (emotion control codes plus
span demarcators), selects among sampled outputs by textual entailment with
the input, and evaluates systems with embedding similarity and paired
randomization tests.

Quick sketch (mock backends, no pretrained weights needed)::

    from lexframe import backends, lexicon, rewrite, pairformat

    lex = lexicon.load_connotation_lexicon("fixtures/connotation.csv")
    infiller = backends.mock_infiller({
        "we need [MASK] here": [("tools", 0.9), ("weapons", 0.5)],
    })
    result = rewrite.rewrite_sentence(
        "we need resources here", rewrite.DIFFERENT, infiller, lex
    )
    pair = pairformat.serialize_pair(result)

The ``lexframe`` console script drives the same stages end to end; see the
README for the pipeline walkthrough and the ``demos/`` scripts for narrative
examples of each capability.
"""

from . import adapters, backends, cli, corpus, evaluate, lexicon, pairformat, reframe, rewrite
from .errors import BackendError, ConfigError, DataError, LexframeError

__all__ = [
    "adapters",
    "backends",
    "cli",
    "corpus",
    "evaluate",
    "lexicon",
    "pairformat",
    "reframe",
    "rewrite",
    "BackendError",
    "ConfigError",
    "DataError",
    "LexframeError",
]

__version__ = "0.1.0"
