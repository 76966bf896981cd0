import time
from dataclasses import dataclass, field
from pathlib import Path

import pytest

from attack_mapper import classifiers, corpus, stix_ingest
from attack_mapper.textprep import PrepConfig, normalize_tokens
from attack_mapper.tfidf import VectorizerConfig, fit_vectorizer, vectorize

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"


@pytest.fixture(scope="session")
def registry():
    return stix_ingest.load_registry(DATA / "registry.json")


@pytest.fixture(scope="session")
def fixture_corpus(registry):
    return corpus.import_csv(DATA / "dataset_1000.csv", registry)


@pytest.fixture(scope="session")
def split_pair(fixture_corpus):
    return corpus.stratified_split(fixture_corpus, ratio=0.8, seed=7)


@dataclass
class Benchmark:
    """Models trained once on the bundled corpus, shared across tests."""

    registry: object
    split: object
    prep: PrepConfig
    tfidf: object
    train_features: list
    test_features: list
    models: dict = field(default_factory=dict)
    train_seconds: dict = field(default_factory=dict)


BENCH_SPECS = {
    "complement_nb": dict(kind="complement_nb", balanced=False),
    "multinomial_nb": dict(kind="multinomial_nb", balanced=False),
    "logreg_balanced": dict(kind="logreg", balanced=True),
    "linsvm_ovr": dict(kind="linsvm_ovr", balanced=True),
    "mlp": dict(kind="mlp", balanced=False),
}


@pytest.fixture(scope="session")
def benchmark(registry, split_pair):
    prep = PrepConfig()
    tokens_train = [normalize_tokens(t, prep) for t in split_pair.train.texts]
    tfidf = fit_vectorizer(tokens_train, VectorizerConfig())
    bench = Benchmark(
        registry=registry,
        split=split_pair,
        prep=prep,
        tfidf=tfidf,
        train_features=[vectorize(tfidf, t) for t in tokens_train],
        test_features=[
            vectorize(tfidf, normalize_tokens(t, prep))
            for t in split_pair.test.texts
        ],
    )
    for name, spec_kwargs in BENCH_SPECS.items():
        spec = classifiers.ClassifierSpec(seed=7, **spec_kwargs)
        start = time.perf_counter()
        bench.models[name] = classifiers.train(
            bench.train_features,
            split_pair.train.label_indices,
            spec,
            n_classes=len(registry),
            tfidf=tfidf,
            prep=prep,
            registry_fingerprint=registry.fingerprint(),
        )
        bench.train_seconds[name] = time.perf_counter() - start
    return bench


@pytest.fixture(scope="session")
def ground_truth_docs(registry):
    docs = []
    for path in sorted((DATA / "docs").glob("*.json")):
        docs.append(corpus.load_ground_truth(path, registry))
    return docs
