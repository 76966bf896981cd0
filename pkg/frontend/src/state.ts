// Pure view-state logic. Chip visibility and the aggregate panel are
// functions of the delivered probabilities, the slider value, and the
// decision map only; recomputing them never touches the network.
import {
  Decision,
  ExportDocument,
  SessionPayload,
  UiSessionView,
} from "./types.js";

export function decisionKey(index: number, technique: string): string {
  return `${index}:${technique}`;
}

export function buildView(session: SessionPayload, theta?: number): UiSessionView {
  const threshold = theta ?? session.threshold;
  const view: UiSessionView = {
    sessionId: session.session_id,
    modelId: session.model_id,
    status: session.status,
    threshold,
    decisions: { ...session.decisions },
    sentences: session.sentences.map((s) => ({
      index: s.index,
      text: s.text,
      nonPertinent: true,
      chips: s.candidates.map((c) => ({
        technique: c.technique,
        name: c.name,
        prob: c.prob,
        aboveThreshold: false,
        decision: null,
      })),
    })),
  };
  return refreshChips(view);
}

function refreshChips(view: UiSessionView): UiSessionView {
  for (const sentence of view.sentences) {
    let anyAbove = false;
    for (const chip of sentence.chips) {
      chip.aboveThreshold = chip.prob > view.threshold;
      chip.decision = view.decisions[decisionKey(sentence.index, chip.technique)] ?? null;
      anyAbove = anyAbove || chip.aboveThreshold;
    }
    sentence.nonPertinent = !anyAbove;
  }
  return view;
}

/** Pure client-side refilter; no request leaves this function. */
export function applyThreshold(view: UiSessionView, theta: number): UiSessionView {
  if (!(theta > 0 && theta < 1)) {
    throw new Error(`threshold must be in (0, 1), got ${theta}`);
  }
  const next: UiSessionView = {
    ...view,
    threshold: theta,
    decisions: { ...view.decisions },
    sentences: view.sentences.map((s) => ({
      ...s,
      chips: s.chips.map((c) => ({ ...c })),
    })),
  };
  return refreshChips(next);
}

export function setDecision(
  view: UiSessionView,
  sentenceIndex: number,
  technique: string,
  decision: Decision | null
): UiSessionView {
  const decisions = { ...view.decisions };
  const key = decisionKey(sentenceIndex, technique);
  if (decision === null) {
    delete decisions[key];
  } else {
    decisions[key] = decision;
  }
  const next: UiSessionView = {
    ...view,
    decisions,
    sentences: view.sentences.map((s) => ({
      ...s,
      chips: s.chips.map((c) => ({ ...c })),
    })),
  };
  return refreshChips(next);
}

export function visibleChips(view: UiSessionView, sentenceIndex: number): string[] {
  const sentence = view.sentences.find((s) => s.index === sentenceIndex);
  if (!sentence) return [];
  return sentence.chips.filter((c) => c.aboveThreshold).map((c) => c.technique);
}

function acceptedPairs(view: UiSessionView): [number, string][] {
  const pairs: [number, string][] = [];
  for (const [key, decision] of Object.entries(view.decisions)) {
    if (decision !== "accepted") continue;
    const sep = key.indexOf(":");
    pairs.push([Number(key.slice(0, sep)), key.slice(sep + 1)]);
  }
  pairs.sort((a, b) => (a[0] - b[0]) || (a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
  return pairs;
}

/** accepted union (above-threshold and not rejected), for the side panel. */
export function aggregatePanel(view: UiSessionView): string[] {
  const out = new Set<string>(acceptedPairs(view).map(([, t]) => t));
  for (const sentence of view.sentences) {
    for (const chip of sentence.chips) {
      if (chip.aboveThreshold && chip.decision !== "rejected") {
        out.add(chip.technique);
      }
    }
  }
  return [...out].sort();
}

/** Export-shaped document from accepted decisions only. */
export function panelExportDocument(view: UiSessionView): ExportDocument {
  const pairs = acceptedPairs(view);
  return {
    sentence_annotations: pairs,
    techniques: [...new Set(pairs.map(([, t]) => t))].sort(),
  };
}

/** Canonical JSON: sorted keys, compact separators; byte-compatible with
 * the service's export serialization. */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return `[${value.map(canonicalJson).join(",")}]`;
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${canonicalJson(v)}`);
  return `{${entries.join(",")}}`;
}
