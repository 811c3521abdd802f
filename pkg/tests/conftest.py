"""Shared fixtures: small hand-built corpora and the planted landscape."""

import numpy as np
import pytest

from domainscale.corpus import Corpus, DomainScheme, Sentence
from domainscale.embeddings import EmbeddingStore
from domainscale.synthetic import make_planted_landscape


def sentence(sid, party="spd", date="2021-09", position=0, text="ein satz", code=None):
    return Sentence(
        id=sid, party=party, election_date=date, position=position, text=text, code=code
    )


def random_corpus_with_store(rng, parties, codes, dim=6, per_code=(2, 8)):
    """Corpus where every party has a random number of sentences per code."""
    sentences, ids, rows = [], [], []
    for party in parties:
        position = 0
        for code in codes:
            for _ in range(int(rng.integers(per_code[0], per_code[1] + 1))):
                sid = f"{party}-{position:03d}"
                sentences.append(
                    sentence(sid, party=party, position=position, code=code)
                )
                ids.append(sid)
                rows.append(rng.normal(size=dim))
                position += 1
    return Corpus(sentences), EmbeddingStore(tuple(ids), np.vstack(rows))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def two_domain_scheme():
    return DomainScheme(
        {"economy": {"401", "404"}, "welfare": {"504", "506"}},
        other_codes={"000"},
    )


@pytest.fixture
def small_corpus():
    rows = [
        sentence("a-0", party="a", position=0, code="401"),
        sentence("a-1", party="a", position=1, code="504"),
        sentence("a-2", party="a", position=2, code="401"),
        sentence("a-3", party="a", position=3),
        sentence("b-0", party="b", position=0, code="404"),
        sentence("b-1", party="b", position=1, code="506"),
        sentence("b-2", party="b", position=2, code="000"),
    ]
    return Corpus(rows)


@pytest.fixture(scope="session")
def planted():
    return make_planted_landscape()


@pytest.fixture(scope="session")
def tiny_planted():
    return make_planted_landscape(n_per_domain=6, seed=99)
