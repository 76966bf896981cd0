import json

import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest

from attack_mapper import corpus
from attack_mapper.corpus import (
    AttackSample,
    LabeledCorpus,
    build_dataset,
    clean_text,
    export_csv,
    import_csv,
    import_tram,
    load_ground_truth,
    merge,
    split_sentences,
    stratified_split,
)
from attack_mapper.errors import (
    ArgumentError,
    DatasetImportError,
    EmptyCorpusError,
    MergeError,
    ParseError,
)
from attack_mapper.stix_ingest import RawSample, TechniqueRegistry
from tests.conftest import DATA


def small_registry(ids=("T1003", "T1087", "T1547")):
    return TechniqueRegistry.from_dict(
        {
            "techniques": [
                {"id": t, "name": f"Technique {t}", "tactics": ["execution"]}
                for t in sorted(ids)
            ],
            "subtech_parent": {},
        }
    )


# --- clean_text -----------------------------------------------------------

def test_citation_marker_removed():
    assert clean_text("Hydraq creates a backdoor(Citation: Symantec)") == (
        "Hydraq creates a backdoor"
    )


def test_url_removed_and_whitespace_collapsed():
    assert clean_text("See https://x.y/z for details") == "See for details"


def test_empty_identity():
    assert clean_text("") == ""


def test_markdown_and_html_stripped():
    assert clean_text("Use [Mimikatz](https://tool) via <code>lsass</code>") == (
        "Use Mimikatz via lsass"
    )


# --- split_sentences ------------------------------------------------------

def test_basic_split():
    assert split_sentences("It ran. It hid.") == ["It ran.", "It hid."]


def test_abbreviation_not_split():
    assert split_sentences("Tools, e.g. Mimikatz, were used.") == [
        "Tools, e.g. Mimikatz, were used."
    ]


def test_initials_not_split():
    assert split_sentences("Analyst J. Smith confirmed the find.") == [
        "Analyst J. Smith confirmed the find."
    ]


def test_technique_ids_never_split():
    text = "Use of T1059.003 was observed. Next sentence here."
    assert split_sentences(text) == ["Use of T1059.003 was observed.", "Next sentence here."]


def test_boundary_requires_upper_or_digit():
    assert split_sentences("it ran. it hid.") == ["it ran. it hid."]
    assert split_sentences("Stage one done. 2 hosts affected.") == [
        "Stage one done.",
        "2 hosts affected.",
    ]


def test_fin6_report_sentence_count():
    text = (DATA / "reports" / "fin6_intrusion_report.txt").read_text()
    n = len(split_sentences(text))
    assert abs(n - 81) <= 8  # soft target: 81 sentences, +-10%


@hypothesis.given(st.text(max_size=400))
@hypothesis.settings(max_examples=80)
def test_split_preserves_non_whitespace(text):
    parts = split_sentences(text)
    assert all(p.strip() for p in parts)
    joined = "".join(" ".join(parts).split())
    assert joined == "".join(text.split())


# --- build_dataset --------------------------------------------------------

def test_multisentence_raw_fans_out():
    registry = small_registry()
    raw = RawSample(
        text="First point. Second point. Third point.",
        technique_id="T1003",
        subtechnique_id=None,
        technique_name="Technique T1003",
        source_kind="attack_pattern",
    )
    built = build_dataset([raw], registry)
    assert len(built) == 3
    assert {s.technique_id for s in built.samples} == {"T1003"}


def test_cleaning_to_empty_contributes_nothing():
    registry = small_registry()
    raws = [
        RawSample("https://only.a.url", "T1003", None, "n", "relationship"),
        RawSample("Real text.", "T1087", None, "n", "relationship"),
    ]
    built = build_dataset(raws, registry)
    assert len(built) == 1


def test_empty_output_rejected():
    with pytest.raises(EmptyCorpusError):
        build_dataset([], small_registry())


def test_stats_consistency():
    registry = small_registry()
    built = build_dataset(
        [RawSample("One. Two.", "T1003", None, "n", "capec"),
         RawSample("Three.", "T1087", None, "n", "capec")],
        registry,
    )
    assert built.stats["n_samples"] == 3
    assert sum(built.stats["class_counts"].values()) == 3
    assert built.stats["n_classes_present"] == 2


# --- CSV round trip -------------------------------------------------------

def test_csv_round_trip(tmp_path):
    registry = small_registry()
    samples = tuple(
        AttackSample(
            text=f'Sample "{i}", with commas',
            technique_id="T1547",
            subtechnique_id="T1547.014" if i % 2 else None,
            technique_name="Active Setup",
        )
        for i in range(5)
    )
    c = LabeledCorpus(samples=samples, registry=registry)
    path = tmp_path / "x.csv"
    export_csv(c, path)
    back = import_csv(path, registry)
    assert back.content_equals(c)
    # byte-stable after one normalization pass
    path2 = tmp_path / "y.csv"
    export_csv(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_subtechnique_row_resolves_to_parent(tmp_path):
    registry = small_registry()
    path = tmp_path / "x.csv"
    path.write_text(
        "text,technique_id,subtechnique_id,technique_name\n"
        '"PoisonIvy registers an Active Setup key.",T1547,T1547.014,Active Setup\n'
    )
    back = import_csv(path, registry)
    assert back.samples[0].technique_id == "T1547"
    assert back.samples[0].subtechnique_id == "T1547.014"


def test_header_only_rejected(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("text,technique_id,subtechnique_id,technique_name\n")
    with pytest.raises(EmptyCorpusError):
        import_csv(path, small_registry())


def test_unknown_technique_lists_rows(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text(
        "text,technique_id,subtechnique_id,technique_name\n"
        "ok,T1003,,n\nbad,T9999,,n\n"
    )
    with pytest.raises(DatasetImportError) as err:
        import_csv(path, small_registry())
    assert err.value.rows == [(3, "T9999")]


def test_malformed_csv_reports_line(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text(
        "text,technique_id,subtechnique_id,technique_name\nonly,two\n"
    )
    with pytest.raises(ParseError, match="line 2"):
        import_csv(path, small_registry())


# --- TRAM import ----------------------------------------------------------

def test_tram_fixture_counts(registry):
    imported, report = import_tram(DATA / "tram_1482.json", registry)
    assert len(imported) == 1482
    assert imported.stats["n_classes_present"] <= 80
    assert report.accepted == 1482
    assert report.rejected == []


def test_tram_rejects_unknown_rows(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(
        json.dumps(
            [
                {"text": "Valid sample text.", "technique_id": "T1003"},
                {"text": "Unknown label.", "technique_id": "T9999"},
                {"text": "", "technique_id": "T1003"},
            ]
        )
    )
    imported, report = import_tram(path, small_registry())
    assert len(imported) == 1
    assert len(report.rejected) == 2


def test_tram_empty_rejected(tmp_path):
    path = tmp_path / "t.json"
    path.write_text("[]")
    with pytest.raises(EmptyCorpusError):
        import_tram(path, small_registry())


# --- merge ----------------------------------------------------------------

def _corpus_of(registry, tids):
    return LabeledCorpus(
        samples=tuple(
            AttackSample(text=f"s{i} {t}", technique_id=t) for i, t in enumerate(tids)
        ),
        registry=registry,
    )


def test_merge_sizes_and_order():
    registry = small_registry()
    a = _corpus_of(registry, ["T1003", "T1003", "T1087"])
    b = _corpus_of(registry, ["T1547", "T1547"])
    merged = merge(a, b)
    assert len(merged) == 5
    assert merged.samples[:3] == a.samples


def test_merge_identity():
    registry = small_registry()
    a = _corpus_of(registry, ["T1003"])
    empty = LabeledCorpus(samples=(), registry=registry)
    assert merge(a, empty).samples == a.samples


def test_merge_keeps_duplicates():
    registry = small_registry()
    a = _corpus_of(registry, ["T1003"])
    merged = merge(a, a)
    assert len(merged) == 2


def test_merge_registry_mismatch():
    a = _corpus_of(small_registry(), ["T1003"])
    b = _corpus_of(small_registry(("T1003", "T1087", "T1547", "T1566")), ["T1003"])
    with pytest.raises(MergeError):
        merge(a, b)


@hypothesis.given(
    st.lists(st.sampled_from(["T1003", "T1087", "T1547"]), max_size=6),
    st.lists(st.sampled_from(["T1003", "T1087", "T1547"]), max_size=6),
    st.lists(st.sampled_from(["T1003", "T1087", "T1547"]), max_size=6),
)
@hypothesis.settings(max_examples=40)
def test_merge_associative(ta, tb, tc):
    registry = small_registry()
    a, b, c = (_corpus_of(registry, t) for t in (ta, tb, tc))
    left = merge(merge(a, b), c)
    right = merge(a, merge(b, c))
    assert left.samples == right.samples


# --- stratified split -----------------------------------------------------

def test_split_formula():
    registry = small_registry(("T1003", "T1087"))
    samples = ["T1003"] * 10 + ["T1087"] * 5
    c = _corpus_of(registry, samples)
    pair = stratified_split(c, ratio=0.8, seed=1)
    test_counts = pair.test.stats["class_counts"]
    assert test_counts == {"T1003": 2, "T1087": 1}
    assert pair.train.stats["class_counts"] == {"T1003": 8, "T1087": 4}


def test_singleton_class_goes_to_train():
    registry = small_registry(("T1003", "T1087"))
    c = _corpus_of(registry, ["T1003"] * 10 + ["T1087"])
    pair = stratified_split(c, ratio=0.8, seed=3)
    assert "T1087" not in pair.test.stats["class_counts"]
    assert pair.train.stats["class_counts"]["T1087"] == 1


def test_split_deterministic():
    registry = small_registry()
    c = _corpus_of(registry, ["T1003", "T1087", "T1547"] * 10)
    p1 = stratified_split(c, 0.8, seed=42)
    p2 = stratified_split(c, 0.8, seed=42)
    assert p1.test.samples == p2.test.samples
    assert p1.train.samples == p2.train.samples


def test_split_ratio_validation():
    c = _corpus_of(small_registry(), ["T1003", "T1003"])
    with pytest.raises(ArgumentError):
        stratified_split(c, 1.0, seed=0)


@hypothesis.given(
    st.lists(st.sampled_from(["T1003", "T1087", "T1547"]), min_size=1, max_size=40),
    st.floats(min_value=0.05, max_value=0.95),
    st.integers(min_value=0, max_value=2**63 - 1),
)
@hypothesis.settings(max_examples=60)
def test_split_partition_and_stratification(tids, ratio, seed):
    registry = small_registry()
    c = _corpus_of(registry, tids)
    pair = stratified_split(c, ratio, seed)
    # partition: disjoint union preserving multiplicity
    combined = sorted(s.key() for s in pair.train.samples + pair.test.samples)
    assert combined == sorted(s.key() for s in c.samples)
    for tid, n_c in c.stats["class_counts"].items():
        got = pair.test.stats["class_counts"].get(tid, 0)
        if n_c == 1:
            assert got == 0
        else:
            assert got == int(np.floor(n_c * (1 - ratio) + 1e-9))
            assert abs(got - n_c * (1 - ratio)) < 1


# --- ground truth documents ------------------------------------------------

def test_ground_truth_fixture_loads(registry):
    doc = load_ground_truth(DATA / "docs" / "fin6-fireeye.json", registry)
    assert len(doc.sentences) == 81
    assert doc.techniques
    assert doc.doc_id == "fin6-fireeye"


def test_ground_truth_unknown_technique(tmp_path):
    path = tmp_path / "d.json"
    path.write_text(
        json.dumps(
            {
                "doc_id": "d",
                "title": "t",
                "source_url": "u",
                "sentences": ["One sentence."],
                "techniques": ["T9999"],
            }
        )
    )
    with pytest.raises(DatasetImportError):
        load_ground_truth(path, small_registry())


def test_fixture_dataset_counts(fixture_corpus):
    assert len(fixture_corpus) == 1000
    assert fixture_corpus.stats["n_classes_present"] == 188
