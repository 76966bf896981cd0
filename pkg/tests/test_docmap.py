import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest

from attack_mapper.corpus import GroundTruthDocument
from attack_mapper.docmap import (
    DEFAULT_GRID,
    doc_metrics,
    prediction_from_probs,
    predict_document,
    sweep_csv_rows,
    threshold_sweep,
)
from attack_mapper.errors import ArgumentError
from tests.test_corpus import small_registry


def registry_of(n):
    return small_registry(tuple(f"T1{100 + i:03d}" for i in range(n)))


def gt(registry, techniques, doc_id="doc", n_sentences=1):
    return GroundTruthDocument(
        doc_id=doc_id,
        title="t",
        source_url="u",
        sentences=tuple(f"Sentence {i}." for i in range(n_sentences)),
        techniques=frozenset(techniques),
    )


def test_default_grid_has_eight_thresholds():
    assert DEFAULT_GRID == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)


def test_thresholding_rule_strict():
    registry = registry_of(4)
    probs = np.array([[0.25, 0.05, 0.05, 0.65]])
    pred = prediction_from_probs(probs, registry, 0.2)
    assert pred.predicted_set == {registry.ids[0], registry.ids[3]}
    pred = prediction_from_probs(probs, registry, 0.3)
    assert pred.predicted_set == {registry.ids[3]}
    # strictly greater: a probability equal to theta is excluded
    pred = prediction_from_probs(np.array([[0.25, 0.75, 0.0, 0.0]]), registry, 0.25)
    assert registry.ids[0] not in pred.predicted_set


def test_union_across_sentences():
    registry = registry_of(3)
    probs = np.array([[0.9, 0.05, 0.05], [0.5, 0.45, 0.05]])
    pred = prediction_from_probs(probs, registry, 0.3)
    assert pred.predicted_set == {registry.ids[0], registry.ids[1]}
    assert len(pred.per_sentence) == 2


def test_no_sentence_above_threshold_contributes_nothing():
    registry = registry_of(3)
    probs = np.array([[0.34, 0.33, 0.33]])
    pred = prediction_from_probs(probs, registry, 0.5)
    assert pred.predicted_set == frozenset()


def test_doc_metrics_hand_case():
    registry = registry_of(5)
    ids = registry.ids
    pred = prediction_from_probs(np.zeros((1, 5)), registry, 0.5)
    pred = type(pred)(
        doc_id="d",
        threshold=0.5,
        per_sentence=(),
        predicted_set=frozenset({ids[0], ids[1], ids[3], ids[4]}),
    )
    truth = gt(registry, {ids[0], ids[1], ids[2]})
    m = doc_metrics(pred, truth, registry)
    assert m.precision == pytest.approx(0.5)
    assert m.recall == pytest.approx(2 / 3)
    assert m.f1 == pytest.approx(2 * 0.5 * (2 / 3) / (0.5 + 2 / 3))
    assert m.n_cu == 2 and m.n_u == 4 and m.n_gt == 3


def test_doc_metrics_perfect():
    registry = registry_of(3)
    ids = registry.ids
    pred = prediction_from_probs(np.zeros((1, 3)), registry, 0.5)
    pred = type(pred)("d", 0.5, (), frozenset(ids))
    m = doc_metrics(pred, gt(registry, set(ids)), registry)
    assert m.precision == m.recall == m.f1 == 1.0


def test_doc_metrics_empty_prediction():
    registry = registry_of(3)
    pred = prediction_from_probs(np.zeros((1, 3)) + 0.01, registry, 0.5)
    m = doc_metrics(pred, gt(registry, {registry.ids[0]}), registry)
    assert m.precision == 0.0 and m.recall == 0.0 and m.f1 == 0.0


def test_doc_metrics_requires_ground_truth():
    registry = registry_of(3)
    pred = prediction_from_probs(np.zeros((1, 3)), registry, 0.5)
    with pytest.raises(ArgumentError):
        doc_metrics(pred, gt(registry, set()), registry)


def test_truth_subtechniques_resolve_to_parent():
    registry = small_registry(("T1547", "T1003"))
    pred = prediction_from_probs(np.array([[0.9, 0.05]]), registry, 0.5)
    # predicted {T1003}; truth lists the sub-technique of T1003... use dotted id
    truth = gt(registry, {"T1003.003"})
    m = doc_metrics(pred, truth, registry)
    assert m.n_gt == 1 and m.n_cu == 1


prob_rows = st.integers(min_value=2, max_value=5).flatmap(
    lambda c: st.lists(
        st.lists(st.floats(min_value=0.001, max_value=1.0), min_size=c, max_size=c),
        min_size=1,
        max_size=6,
    )
)


@hypothesis.given(prob_rows)
@hypothesis.settings(max_examples=60, deadline=None)
def test_nested_sets_as_threshold_rises(raw):
    probs = np.array(raw)
    probs = probs / probs.sum(axis=1, keepdims=True)
    registry = registry_of(probs.shape[1])
    previous = None
    for theta in DEFAULT_GRID:
        current = prediction_from_probs(probs, registry, theta).predicted_set
        if previous is not None:
            assert current <= previous
        previous = current


@hypothesis.given(prob_rows, st.randoms())
@hypothesis.settings(max_examples=30, deadline=None)
def test_sentence_permutation_invariance(raw, rnd):
    probs = np.array(raw)
    registry = registry_of(probs.shape[1])
    order = list(range(probs.shape[0]))
    rnd.shuffle(order)
    s1 = prediction_from_probs(probs, registry, 0.2).predicted_set
    s2 = prediction_from_probs(probs[order], registry, 0.2).predicted_set
    assert s1 == s2


def test_sweep_matches_brute_force(benchmark, registry, ground_truth_docs):
    model = benchmark.models["logreg_balanced"]
    docs = [(list(d.sentences), d) for d in ground_truth_docs[:2]]
    grid = (0.1, 0.2, 0.4)
    result = threshold_sweep(model, docs, grid, registry)
    for sentences, truth in docs:
        for theta in grid:
            pred = predict_document(model, registry, sentences, theta, doc_id=truth.doc_id)
            expected = doc_metrics(pred, truth, registry)
            got = result.per_doc[truth.doc_id][theta]
            assert got == expected
    for theta in grid:
        mean_f1 = float(
            np.mean([result.per_doc[d.doc_id][theta].f1 for _, d in docs])
        )
        assert result.macro[theta] == pytest.approx(mean_f1, abs=1e-15)
    assert result.best_theta == min(
        grid, key=lambda t: (-result.macro[t], t)
    )


def test_sweep_grid_validation(benchmark, registry, ground_truth_docs):
    docs = [(list(ground_truth_docs[0].sentences), ground_truth_docs[0])]
    model = benchmark.models["complement_nb"]
    with pytest.raises(ArgumentError):
        threshold_sweep(model, docs, (0.3, 0.2), registry)
    with pytest.raises(ArgumentError):
        threshold_sweep(model, docs, (), registry)


def test_predict_document_validation(benchmark, registry):
    model = benchmark.models["complement_nb"]
    with pytest.raises(ArgumentError):
        predict_document(model, registry, [], 0.2)
    with pytest.raises(ArgumentError):
        predict_document(model, registry, ["One sentence."], 1.5)


def test_sweep_csv_rows_shape(benchmark, registry, ground_truth_docs):
    model = benchmark.models["complement_nb"]
    docs = [(list(d.sentences), d) for d in ground_truth_docs[:2]]
    result = threshold_sweep(model, docs, (0.1, 0.2), registry)
    rows = sweep_csv_rows(result)
    assert len(rows) == 4
    assert all(len(r) == 5 for r in rows)
