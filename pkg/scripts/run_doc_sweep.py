#!/usr/bin/env python3
"""Document-level threshold sweep over the bundled ground-truth documents.

Trains one model on the bundled corpus, sweeps thresholds 0.1..0.8, and
writes per-(doc, theta) precision/recall/F1 rows for plotting.

Example:
    python scripts/run_doc_sweep.py --model logreg --balanced --out sweep.csv
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from attack_mapper import classifiers, corpus, docmap, stix_ingest  # noqa: E402
from attack_mapper.textprep import PrepConfig, normalize_tokens  # noqa: E402
from attack_mapper.tfidf import VectorizerConfig, fit_vectorizer, vectorize  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", default=str(ROOT / "data" / "dataset_1000.csv"))
    parser.add_argument("--registry", default=str(ROOT / "data" / "registry.json"))
    parser.add_argument("--docs-dir", default=str(ROOT / "data" / "docs"))
    parser.add_argument("--model", default="logreg",
                        choices=["cnb", "mnb", "logreg", "svm-ovr", "mlp"])
    parser.add_argument("--balanced", action="store_true")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="doc_sweep.csv")
    args = parser.parse_args()

    kind = {"cnb": "complement_nb", "mnb": "multinomial_nb", "logreg": "logreg",
            "svm-ovr": "linsvm_ovr", "mlp": "mlp"}[args.model]
    registry = stix_ingest.load_registry(args.registry)
    data = corpus.import_csv(args.dataset, registry)
    prep = PrepConfig()
    tokens = [normalize_tokens(t, prep) for t in data.texts]
    tfidf = fit_vectorizer(tokens, VectorizerConfig())
    model = classifiers.train(
        [vectorize(tfidf, t) for t in tokens],
        data.label_indices,
        classifiers.ClassifierSpec(kind, balanced=args.balanced, seed=args.seed),
        n_classes=len(registry),
        tfidf=tfidf,
        prep=prep,
    )
    docs = []
    for path in sorted(Path(args.docs_dir).glob("*.json")):
        truth = corpus.load_ground_truth(path, registry)
        docs.append((list(truth.sentences), truth))
    result = docmap.threshold_sweep(model, docs, docmap.DEFAULT_GRID, registry)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("doc_id,theta,precision,recall,f1\n")
        for row in docmap.sweep_csv_rows(result):
            f.write(",".join(str(x) for x in row) + "\n")
    for theta in result.grid:
        print(f"theta={theta:g} macro-F1={result.macro[theta]:.3f}")
    print(f"best theta: {result.best_theta:g}  -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
