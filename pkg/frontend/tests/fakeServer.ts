// In-process stand-in for the review service, faithful to the /v1
// contract: same payload shapes, same status codes, and byte-identical
// canonical export serialization (sorted keys, compact separators).
import { canonicalJson } from "../src/state.js";
import { Candidate, Decision, SessionPayload } from "../src/types.js";

const TECHNIQUES = [
  { id: "T1003", name: "OS Credential Dumping" },
  { id: "T1059", name: "Command and Scripting Interpreter" },
  { id: "T1087", name: "Account Discovery" },
  { id: "T1105", name: "Ingress Tool Transfer" },
  { id: "T1547", name: "Boot or Logon Autostart Execution" },
];

function hashCode(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

/** Deterministic pseudo-scores standing in for a trained model. */
export function fakeCandidates(sentence: string, k: number): Candidate[] {
  const seed = hashCode(sentence);
  const raw = TECHNIQUES.map((t, i) => ({
    technique: t.id,
    name: t.name,
    prob: ((seed >> (i * 5)) & 31) + 1,
  }));
  const total = raw.reduce((acc, c) => acc + c.prob, 0);
  return raw
    .map((c) => ({ ...c, prob: c.prob / total }))
    .sort((a, b) => b.prob - a.prob || (a.technique < b.technique ? -1 : 1))
    .slice(0, k);
}

function splitSentences(text: string): string[] {
  return text
    .split(/(?<=[.!?])\s+(?=[A-Z0-9])/)
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

interface StoredSession extends SessionPayload {}

export class FakeServer {
  sessions = new Map<string, StoredSession>();
  private counter = 0;
  requestLog: string[] = [];

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    this.requestLog.push(`${init?.method ?? "GET"} ${url}`);
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : null;

    if (method === "GET" && path === "/v1/health") {
      return json(200, { status: "ok", models: ["fake"] });
    }
    if (method === "POST" && path === "/v1/sessions") {
      return this.createSession(body);
    }
    let m = path.match(/^\/v1\/sessions\/([^/]+)\/decisions$/);
    if (method === "POST" && m) {
      return this.recordDecision(m[1], body);
    }
    m = path.match(/^\/v1\/sessions\/([^/]+)\/export(\?.*)?$/);
    if (method === "GET" && m) {
      return this.exportSession(m[1], (m[2] ?? "").includes("close=true"));
    }
    m = path.match(/^\/v1\/sessions\/([^/]+)$/);
    if (method === "GET" && m) {
      const session = this.sessions.get(m[1]);
      if (!session) return error(404, "unknown_session");
      return json(200, session);
    }
    return error(404, "unknown_route");
  };

  private createSession(body: any): Response {
    const text: string = body?.text ?? "";
    if (!text.trim()) return error(400, "empty_text");
    const theta: number = body?.theta ?? 0.2;
    const k: number = body?.k ?? 3;
    if (!(theta > 0 && theta < 1)) return error(400, "bad_theta");
    const sentences = splitSentences(text);
    if (sentences.length === 0) return error(400, "empty_text");
    const session: StoredSession = {
      session_id: `fake-${++this.counter}`,
      created_at: "2024-01-01T00:00:00Z",
      model_id: body?.model_id ?? "fake",
      threshold: theta,
      status: "open",
      decisions: {},
      sentences: sentences.map((s, i) => ({
        index: i,
        text: s,
        candidates: fakeCandidates(s, k),
      })),
    };
    this.sessions.set(session.session_id, session);
    return json(200, session);
  }

  private recordDecision(sessionId: string, body: any): Response {
    const session = this.sessions.get(sessionId);
    if (!session) return error(404, "unknown_session");
    if (session.status !== "open") return error(409, "session_closed");
    const idx: number = body?.sentence_index;
    const technique: string = body?.technique;
    const decision: Decision = body?.decision;
    if (!(Number.isInteger(idx) && idx >= 0 && idx < session.sentences.length)) {
      return error(422, "bad_sentence_index");
    }
    if (!TECHNIQUES.some((t) => t.id === technique)) {
      return error(422, "unknown_technique");
    }
    if (decision !== "accepted" && decision !== "rejected") {
      return error(422, "bad_decision");
    }
    session.decisions[`${idx}:${technique}`] = decision;
    return json(200, session);
  }

  exportBytes(sessionId: string): string {
    const session = this.sessions.get(sessionId)!;
    const pairs: [number, string][] = Object.entries(session.decisions)
      .filter(([, d]) => d === "accepted")
      .map(([key]) => {
        const sep = key.indexOf(":");
        return [Number(key.slice(0, sep)), key.slice(sep + 1)] as [number, string];
      })
      .sort((a, b) => (a[0] - b[0]) || (a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
    return canonicalJson({
      sentence_annotations: pairs,
      techniques: [...new Set(pairs.map(([, t]) => t))].sort(),
    });
  }

  private exportSession(sessionId: string, close: boolean): Response {
    const session = this.sessions.get(sessionId);
    if (!session) return error(404, "unknown_session");
    if (close) session.status = "closed";
    return new Response(this.exportBytes(sessionId), {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  }
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function error(status: number, code: string): Response {
  return json(status, { code, message: code, details: {} });
}
