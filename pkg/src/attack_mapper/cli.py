"""Command-line frontend for the full pipeline.

Every artifact written to disk embeds a meta block with the format
version, the seed, and sha256 fingerprints of its inputs, so runs are
reproducible and drift is detectable. Exit codes: 0 success, 1 domain
error, 2 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, classifiers, corpus, docmap, evaluation, stix_ingest
from .errors import ArgumentError, AttackMapperError
from .textprep import PrepConfig
from .tfidf import VectorizerConfig, fit_vectorizer, vectorize

MODEL_ALIASES = {
    "mnb": "multinomial_nb",
    "cnb": "complement_nb",
    "logreg": "logreg",
    "svm-ovr": "linsvm_ovr",
    "svm-ovo": "linsvm_ovo",
    "mlp": "mlp",
}


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _meta(seed: int | None, inputs: dict) -> dict:
    return {
        "format_version": 1,
        "seed": seed,
        "inputs": {name: _sha256(path) for name, path in sorted(inputs.items())},
    }


def _write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ArgumentError(f"bad grid {text!r}, expected start:stop:step")
    if step <= 0 or stop < start:
        raise ArgumentError(f"bad grid {text!r}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


def cmd_ingest(args) -> int:
    report = stix_ingest.IngestReport()
    bundle = stix_ingest.parse_bundle(Path(args.attack).read_bytes())
    registry = stix_ingest.build_registry(bundle)
    samples = stix_ingest.extract_samples(bundle, registry, report)
    if args.capec:
        capec = stix_ingest.parse_bundle(Path(args.capec).read_bytes())
        samples = stix_ingest.enrich_with_capec(samples, capec, registry, report)
    stix_ingest.save_registry(registry, args.out_registry)
    _write_json(
        args.out_samples,
        {
            "meta": _meta(None, {"attack": args.attack, **({"capec": args.capec} if args.capec else {})}),
            "samples": [s.__dict__ for s in samples],
        },
    )
    if args.report:
        _write_json(args.report, report.to_dict())
    print(
        f"registry: {len(registry)} techniques, "
        f"{len(registry.subtech_parent)} sub-techniques; {len(samples)} raw samples"
    )
    return 0


def _load_raw_samples(path) -> list[stix_ingest.RawSample]:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return [stix_ingest.RawSample(**s) for s in doc["samples"]]


def cmd_build_dataset(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    raws = _load_raw_samples(args.samples)
    built = corpus.build_dataset(
        raws, registry, split_descriptions=not args.keep_descriptions_whole
    )
    corpus.export_csv(built, args.out)
    print(
        f"dataset: {built.stats['n_samples']} samples over "
        f"{built.stats['n_classes_present']} classes -> {args.out}"
    )
    return 0


def cmd_import_tram(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    imported, report = corpus.import_tram(args.input, registry)
    corpus.export_csv(imported, args.out)
    if args.report:
        _write_json(args.report, report.to_dict())
    print(
        f"tram import: {report.accepted} samples accepted, "
        f"{len(report.rejected)} rejected -> {args.out}"
    )
    return 0


def cmd_merge(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    merged = None
    for path in args.inputs:
        part = corpus.import_csv(path, registry)
        merged = part if merged is None else corpus.merge(merged, part)
    corpus.export_csv(merged, args.out)
    print(f"merged {len(args.inputs)} corpora: {len(merged)} samples -> {args.out}")
    return 0


def _train_pipeline(dataset, registry, kind, balanced, seed, max_features, ngram_max):
    prep = PrepConfig()
    vec_cfg = VectorizerConfig(ngram_max=ngram_max, max_features=max_features)
    token_lists = [corpus_tokens for corpus_tokens in _tokenized(dataset, prep)]
    tfidf = fit_vectorizer(token_lists, vec_cfg)
    features = [vectorize(tfidf, tokens) for tokens in token_lists]
    spec = classifiers.ClassifierSpec(kind=kind, balanced=balanced, seed=seed)
    return classifiers.train(
        features,
        dataset.label_indices,
        spec,
        n_classes=len(registry),
        tfidf=tfidf,
        prep=prep,
        registry_fingerprint=registry.fingerprint(),
    )


def _tokenized(dataset, prep):
    from .textprep import normalize_tokens

    return [normalize_tokens(text, prep) for text in dataset.texts]


def cmd_train(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    data = corpus.import_csv(args.dataset, registry)
    if args.holdout:
        pair = corpus.stratified_split(data, 1.0 - args.holdout, args.seed)
        data = pair.train
        if args.out_test:
            corpus.export_csv(pair.test, args.out_test)
    model = _train_pipeline(
        data,
        registry,
        MODEL_ALIASES[args.model],
        args.balanced,
        args.seed,
        args.max_features,
        args.ngram_max,
    )
    classifiers.save_model(model, args.out)
    print(
        f"trained {MODEL_ALIASES[args.model]} on {len(data)} samples "
        f"(|V|={model.tfidf.dim}) -> {args.out}"
    )
    return 0


def _check_fingerprint(model, registry) -> None:
    if model.registry_fingerprint and model.registry_fingerprint != registry.fingerprint():
        raise AttackMapperError(
            "model was trained against a different registry snapshot"
        )


def cmd_eval(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    model = classifiers.load_model(args.model)
    _check_fingerprint(model, registry)
    data = corpus.import_csv(args.dataset, registry)
    probs = classifiers.predict_proba_texts(model, data.texts)
    report = evaluation.classification_report(
        data.label_indices, probs, registry, k_values=(1, 3), model_id=Path(args.model).stem
    )
    doc = report.to_dict()
    doc["meta"] = _meta(
        args.seed, {"model": args.model, "dataset": args.dataset, "registry": args.registry}
    )
    _write_json(args.out, doc)
    if args.mispredictions:
        pred = np.argmax(probs, axis=1)
        mis = evaluation.collect_mispredictions(
            data.texts, data.label_indices, pred, registry
        )
        evaluation.write_mispredictions_csv(args.mispredictions, mis, registry)
        agreement = evaluation.tactic_agreement(mis)
        print(
            f"mispredictions: {agreement.total} "
            f"(same-tactic fraction {agreement.fraction:.3f})"
        )
    w = doc["weighted"]
    print(
        f"weighted P={w['precision']:.3f} R={w['recall']:.3f} F1={w['f1']:.3f} "
        f"AC@1={doc['ac_at_k']['1']:.3f} AC@3={doc['ac_at_k']['3']:.3f}"
    )
    return 0


def cmd_predict(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    model = classifiers.load_model(args.model)
    _check_fingerprint(model, registry)
    text = args.text if args.text else Path(args.input).read_text(encoding="utf-8")
    sentences = corpus.split_sentences(corpus.clean_text(text))
    if not sentences:
        raise ArgumentError("input contains no sentences")
    probs = classifiers.predict_proba_texts(model, sentences)
    rows = []
    for i, (sent, row) in enumerate(zip(sentences, probs)):
        rows.append(
            {
                "index": i,
                "text": sent,
                "candidates": [
                    {
                        "technique": registry.techniques[c].id,
                        "name": registry.techniques[c].name,
                        "prob": float(p),
                    }
                    for c, p in classifiers.top_k_from_probs(row, args.k)
                ],
            }
        )
    pred = docmap.prediction_from_probs(probs, registry, args.theta)
    doc = {
        "sentences": rows,
        "document": {
            "threshold": args.theta,
            "techniques": sorted(pred.predicted_set),
        },
    }
    if args.out:
        _write_json(args.out, doc)
    else:
        json.dump(doc, sys.stdout, indent=1)
        print()
    return 0


def cmd_doc_eval(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    model = classifiers.load_model(args.model)
    _check_fingerprint(model, registry)
    grid = _parse_grid(args.theta_grid)
    docs = []
    for path in args.docs:
        truth = corpus.load_ground_truth(path, registry)
        docs.append((list(truth.sentences), truth))
    result = docmap.threshold_sweep(model, docs, grid, registry)
    doc = result.to_dict(model_id=Path(args.model).stem)
    doc["meta"] = _meta(
        args.seed,
        {"model": args.model, "registry": args.registry,
         **{f"doc{i}": p for i, p in enumerate(args.docs)}},
    )
    _write_json(args.out, doc)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as f:
            f.write("doc_id,theta,precision,recall,f1\n")
            for row in docmap.sweep_csv_rows(result):
                f.write(",".join(str(x) for x in row) + "\n")
    print(
        f"sweep over {len(grid)} thresholds, {len(docs)} docs; "
        f"best theta={result.best_theta:g} (macro F1={result.macro[result.best_theta]:.3f})"
    )
    return 0


def cmd_import_preds(args) -> int:
    registry = stix_ingest.load_registry(args.registry)
    data = corpus.import_csv(args.dataset, registry)
    external = evaluation.import_predictions(args.preds, registry)
    if external.rows.shape[0] != len(data):
        raise ArgumentError(
            f"{external.rows.shape[0]} prediction rows vs {len(data)} dataset samples"
        )
    report = evaluation.classification_report(
        data.label_indices, external.rows, registry, k_values=(1, 3),
        model_id=Path(args.preds).stem,
    )
    doc = report.to_dict()
    doc["meta"] = _meta(
        None, {"preds": args.preds, "dataset": args.dataset, "registry": args.registry}
    )
    _write_json(args.out, doc)
    w = doc["weighted"]
    print(f"imported predictions: weighted F1={w['f1']:.3f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attack-mapper",
        description="Map unstructured CTI text to ATT&CK techniques",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse STIX bundles into registry + raw samples")
    p.add_argument("--attack", required=True, help="ATT&CK STIX bundle JSON")
    p.add_argument("--capec", help="optional CAPEC STIX bundle JSON")
    p.add_argument("--out-registry", required=True)
    p.add_argument("--out-samples", required=True)
    p.add_argument("--report", help="ingest report JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-dataset", help="clean + sentence-split raw samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-descriptions-whole", action="store_true")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("import-tram", help="import a TRAM-style JSON export")
    p.add_argument("--input", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_import_tram)

    p = sub.add_parser("merge", help="concatenate dataset CSVs")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("train", help="train a classifier bundle")
    p.add_argument("--dataset", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--model", choices=sorted(MODEL_ALIASES), required=True)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", type=float, help="test fraction to hold out")
    p.add_argument("--out-test", help="where to write the held-out CSV")
    p.add_argument("--max-features", type=int, default=10000)
    p.add_argument("--ngram-max", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="sentence-level evaluation report")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--mispredictions", help="misprediction CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="map one report to techniques")
    p.add_argument("--model", required=True)
    p.add_argument("--registry", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--text")
    g.add_argument("--input")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--theta", type=float, default=0.2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("doc-eval", help="document-level threshold sweep")
    p.add_argument("--model", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--theta-grid", default="0.1:0.8:0.1")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="per-(doc, theta) metric rows for plotting")
    p.set_defaults(func=cmd_doc_eval)

    p = sub.add_parser("import-preds", help="evaluate externally produced predictions")
    p.add_argument("--preds", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import_preds)

    p = sub.add_parser("serve", help="run the review HTTP service")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8437)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AttackMapperError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
