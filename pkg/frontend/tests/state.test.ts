import { describe, expect, it } from "vitest";

import {
  aggregatePanel,
  applyThreshold,
  buildView,
  canonicalJson,
  panelExportDocument,
  setDecision,
  visibleChips,
} from "../src/state.js";
import { SessionPayload } from "../src/types.js";

function session(): SessionPayload {
  return {
    session_id: "s1",
    created_at: "2024-01-01T00:00:00Z",
    model_id: "cnb",
    threshold: 0.2,
    status: "open",
    decisions: {},
    sentences: [
      {
        index: 0,
        text: "First sentence.",
        candidates: [
          { technique: "T1059", name: "Command and Scripting Interpreter", prob: 0.55 },
          { technique: "T1003", name: "OS Credential Dumping", prob: 0.25 },
          { technique: "T1087", name: "Account Discovery", prob: 0.06 },
        ],
      },
      {
        index: 1,
        text: "Second sentence.",
        candidates: [
          { technique: "T1105", name: "Ingress Tool Transfer", prob: 0.18 },
          { technique: "T1087", name: "Account Discovery", prob: 0.12 },
          { technique: "T1547", name: "Boot or Logon Autostart Execution", prob: 0.04 },
        ],
      },
    ],
  };
}

describe("threshold refiltering", () => {
  it("shows exactly the chips above the slider value", () => {
    const view = buildView(session());
    expect(visibleChips(view, 0)).toEqual(["T1059", "T1003"]);
    expect(visibleChips(view, 1)).toEqual([]);
    expect(view.sentences[1].nonPertinent).toBe(true);
  });

  it("raising the threshold only removes chips", () => {
    let view = buildView(session(), 0.05);
    let previous = new Set([...visibleChips(view, 0), ...visibleChips(view, 1)]);
    for (const theta of [0.1, 0.2, 0.3, 0.5, 0.7]) {
      view = applyThreshold(view, theta);
      const current = new Set([...visibleChips(view, 0), ...visibleChips(view, 1)]);
      for (const t of current) expect(previous.has(t)).toBe(true);
      previous = current;
    }
  });

  it("lowering the threshold reveals every delivered candidate", () => {
    const view = applyThreshold(buildView(session()), 0.01);
    expect(visibleChips(view, 0).length).toBe(3);
    expect(visibleChips(view, 1).length).toBe(3);
  });

  it("is idempotent at the current value", () => {
    const view = buildView(session());
    const again = applyThreshold(view, view.threshold);
    expect(again).toEqual(view);
  });

  it("does not mutate the previous view", () => {
    const view = buildView(session());
    const before = JSON.stringify(view);
    applyThreshold(view, 0.6);
    expect(JSON.stringify(view)).toBe(before);
  });

  it("rejects thresholds outside (0,1)", () => {
    const view = buildView(session());
    expect(() => applyThreshold(view, 0)).toThrow();
    expect(() => applyThreshold(view, 1.2)).toThrow();
  });
});

describe("decisions and the aggregate panel", () => {
  it("panel is accepted plus above-threshold-not-rejected", () => {
    let view = buildView(session());
    // above threshold now: T1059, T1003 (sentence 0)
    expect(aggregatePanel(view)).toEqual(["T1003", "T1059"]);
    view = setDecision(view, 0, "T1003", "rejected");
    expect(aggregatePanel(view)).toEqual(["T1059"]);
    view = setDecision(view, 1, "T1105", "accepted"); // below threshold but accepted
    expect(aggregatePanel(view)).toEqual(["T1059", "T1105"]);
  });

  it("reject strikes a chip out of the panel; toggling back works", () => {
    let view = buildView(session());
    view = setDecision(view, 0, "T1059", "rejected");
    expect(aggregatePanel(view)).toEqual(["T1003"]);
    view = setDecision(view, 0, "T1059", "accepted");
    expect(aggregatePanel(view)).toContain("T1059");
  });

  it("export document reflects accepted entries only", () => {
    let view = buildView(session());
    expect(panelExportDocument(view)).toEqual({ sentence_annotations: [], techniques: [] });
    view = setDecision(view, 0, "T1059", "accepted");
    view = setDecision(view, 1, "T1105", "rejected");
    expect(panelExportDocument(view)).toEqual({
      sentence_annotations: [[0, "T1059"]],
      techniques: ["T1059"],
    });
  });

  it("deduplicates and sorts accepted techniques", () => {
    let view = buildView(session());
    view = setDecision(view, 0, "T1059", "accepted");
    view = setDecision(view, 1, "T1059", "accepted");
    view = setDecision(view, 1, "T1003", "accepted");
    expect(panelExportDocument(view)).toEqual({
      sentence_annotations: [
        [0, "T1059"],
        [1, "T1003"],
        [1, "T1059"],
      ],
      techniques: ["T1003", "T1059"],
    });
  });
});

describe("canonical json", () => {
  it("sorts keys and uses compact separators", () => {
    expect(canonicalJson({ b: 1, a: [2, { d: 3, c: 4 }] })).toBe(
      '{"a":[2,{"c":4,"d":3}],"b":1}'
    );
  });

  it("matches the export shape serialization", () => {
    expect(
      canonicalJson({ sentence_annotations: [[0, "T1059"]], techniques: ["T1059"] })
    ).toBe('{"sentence_annotations":[[0,"T1059"]],"techniques":["T1059"]}');
  });
});
