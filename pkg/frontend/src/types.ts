export interface Candidate {
  technique: string;
  name: string;
  prob: number;
}

export interface SessionSentence {
  index: number;
  text: string;
  candidates: Candidate[];
}

export type Decision = "accepted" | "rejected";

export interface SessionPayload {
  session_id: string;
  created_at: string;
  model_id: string;
  threshold: number;
  sentences: SessionSentence[];
  decisions: Record<string, Decision>; // "index:technique" -> decision
  status: "open" | "closed";
}

export interface ExportDocument {
  sentence_annotations: [number, string][];
  techniques: string[];
}

export interface ChipView {
  technique: string;
  name: string;
  prob: number;
  aboveThreshold: boolean;
  decision: Decision | null;
}

export interface SentenceView {
  index: number;
  text: string;
  chips: ChipView[];
  nonPertinent: boolean; // nothing above the current threshold
}

export interface UiSessionView {
  sessionId: string;
  modelId: string;
  status: "open" | "closed";
  threshold: number;
  sentences: SentenceView[];
  decisions: Record<string, Decision>;
}
