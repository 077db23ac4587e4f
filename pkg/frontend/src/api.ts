/** Typed client for the medbridge service.
 *
 * Every response is parsed defensively: required fields are checked and
 * unknown fields are dropped, so a malformed payload surfaces as a
 * SchemaError instead of half-rendered output.  The fetch implementation is
 * injectable for tests.
 */

import type {
  CaseInfo,
  ChatResponse,
  Citation,
  GenerationTraceDoc,
  HealthInfo,
  LlmCall,
  ReportResponse,
  RetrievalTraceDoc,
  RetrievedExample,
  SearchStep,
  SessionDoc,
  SessionTurn,
  TraceEnvelope,
} from "./types.js";

/** Minimal slice of the Fetch API the client relies on. */
export interface HttpResponse {
  ok: boolean;
  status: number;
  statusText: string;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<HttpResponse>;

/** HTTP-level failure.  status 0 means the server was unreachable. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/** The server answered 200 but the body does not match the contract. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

// ---------------------------------------------------------------- guards

function asObject(value: unknown, where: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new SchemaError(`${where}: expected an object`);
  }
  return value as Record<string, unknown>;
}

function needString(obj: Record<string, unknown>, key: string, where: string): string {
  const v = obj[key];
  if (typeof v !== "string") {
    throw new SchemaError(`${where}: missing or non-string field "${key}"`);
  }
  return v;
}

function needNumber(obj: Record<string, unknown>, key: string, where: string): number {
  const v = obj[key];
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new SchemaError(`${where}: missing or non-numeric field "${key}"`);
  }
  return v;
}

function needBoolean(obj: Record<string, unknown>, key: string, where: string): boolean {
  const v = obj[key];
  if (typeof v !== "boolean") {
    throw new SchemaError(`${where}: missing or non-boolean field "${key}"`);
  }
  return v;
}

function needArray(obj: Record<string, unknown>, key: string, where: string): unknown[] {
  const v = obj[key];
  if (!Array.isArray(v)) {
    throw new SchemaError(`${where}: missing or non-array field "${key}"`);
  }
  return v;
}

function stringList(value: unknown, where: string): string[] {
  if (!Array.isArray(value) || value.some((x) => typeof x !== "string")) {
    throw new SchemaError(`${where}: expected a list of strings`);
  }
  return value as string[];
}

// ---------------------------------------------------------------- parsers

function parseCase(value: unknown, where: string): CaseInfo {
  const obj = asObject(value, where);
  return {
    image_id: needString(obj, "image_id", where),
    domain: needString(obj, "domain", where),
  };
}

function parseCitation(value: unknown, where: string): Citation | null {
  if (value === null || value === undefined) return null;
  const obj = asObject(value, where);
  return {
    path: stringList(obj.path, `${where}.path`),
    excerpt: needString(obj, "excerpt", where),
  };
}

function parseChat(value: unknown): ChatResponse {
  const obj = asObject(value, "chat response");
  return {
    session_id: needString(obj, "session_id", "chat response"),
    answer: needString(obj, "answer", "chat response"),
    citation: parseCitation(obj.citation, "chat citation"),
    trace_id: needString(obj, "trace_id", "chat response"),
    grounded: needBoolean(obj, "grounded", "chat response"),
    low_confidence: needBoolean(obj, "low_confidence", "chat response"),
  };
}

function parseRetrieved(value: unknown[], where: string): RetrievedExample[] {
  return value.map((entry, i) => {
    if (!Array.isArray(entry) || entry.length < 3) {
      throw new SchemaError(`${where}[${i}]: expected [id, text, distance]`);
    }
    const [id, text, distance] = entry;
    if (typeof id !== "string" || typeof text !== "string" || typeof distance !== "number") {
      throw new SchemaError(`${where}[${i}]: expected [id, text, distance]`);
    }
    return { id, text, distance };
  });
}

function parseLlmCalls(value: unknown, where: string): LlmCall[] {
  if (!Array.isArray(value)) return [];
  return value.map((entry, i) => {
    const obj = asObject(entry, `${where}[${i}]`);
    return {
      tag: needString(obj, "tag", `${where}[${i}]`),
      prompt: needString(obj, "prompt", `${where}[${i}]`),
      completion: needString(obj, "completion", `${where}[${i}]`),
    };
  });
}

function parseTimings(value: unknown): Record<string, number> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) return {};
  const out: Record<string, number> = {};
  for (const [key, v] of Object.entries(value)) {
    if (typeof v === "number" && Number.isFinite(v)) out[key] = v;
  }
  return out;
}

export function parseGenerationDoc(value: unknown): GenerationTraceDoc {
  const obj = asObject(value, "generation trace");
  const where = "generation trace";
  return {
    image_ref: needString(obj, "image_ref", where),
    domain_id: needString(obj, "domain_id", where),
    style: needString(obj, "style", where),
    preliminary_report: needString(obj, "preliminary_report", where),
    enhanced_report: needString(obj, "enhanced_report", where),
    visual_description: stringList(obj.visual_description, `${where}.visual_description`),
    retrieved: parseRetrieved(needArray(obj, "retrieved", where), `${where}.retrieved`),
    k_requested: needNumber(obj, "k_requested", where),
    k_used: needNumber(obj, "k_used", where),
    degraded: needBoolean(obj, "degraded", where),
    llm_calls: parseLlmCalls(obj.llm_calls, `${where}.llm_calls`),
    timings: parseTimings(obj.timings),
  };
}

function parseStep(value: unknown, where: string): SearchStep {
  const obj = asObject(value, where);
  const presentedRaw = needArray(obj, "presented", where);
  const presented = presentedRaw.map((pair, i) => {
    if (!Array.isArray(pair) || typeof pair[0] !== "number" || typeof pair[1] !== "string") {
      throw new SchemaError(`${where}.presented[${i}]: expected [number, title]`);
    }
    return [pair[0], pair[1]] as [number, string];
  });
  const action = asObject(obj.action, `${where}.action`);
  const index = action.index;
  return {
    path: stringList(obj.path, `${where}.path`),
    presented,
    action: {
      kind: needString(action, "kind", `${where}.action`),
      index: typeof index === "number" ? index : null,
    },
    raw_reply: needString(obj, "raw_reply", where),
    converted: needBoolean(obj, "converted", where),
  };
}

export function parseRetrievalDoc(value: unknown): RetrievalTraceDoc {
  const obj = asObject(value, "retrieval trace");
  const where = "retrieval trace";
  return {
    query: needString(obj, "query", where),
    candidates: stringList(obj.candidates, `${where}.candidates`),
    steps: needArray(obj, "steps", where).map((s, i) => parseStep(s, `${where}.steps[${i}]`)),
    steps_used: needNumber(obj, "steps_used", where),
    outcome: needString(obj, "outcome", where),
    found_path: obj.found_path == null ? null : stringList(obj.found_path, `${where}.found_path`),
    knowledge: typeof obj.knowledge === "string" ? obj.knowledge : null,
    low_confidence: typeof obj.low_confidence === "boolean" ? obj.low_confidence : false,
    error: typeof obj.error === "string" ? obj.error : null,
  };
}

// ---------------------------------------------------------------- client

export interface ReportRequest {
  image_id: string;
  k?: number;
  style?: string;
}

export interface ChatRequest {
  message: string;
  session_id?: string;
  report_trace_id?: string;
}

export class ApiClient {
  constructor(private readonly base: string, private readonly fetchFn: FetchLike) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    let res: HttpResponse;
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    try {
      res = await this.fetchFn(this.base + path, init);
    } catch {
      throw new ApiError(0, "server unreachable");
    }
    let payload: unknown = null;
    try {
      payload = await res.json();
    } catch {
      // non-JSON body; fall through to the status check
    }
    if (!res.ok) {
      const obj = typeof payload === "object" && payload !== null ? (payload as Record<string, unknown>) : {};
      const message = typeof obj.error === "string" ? obj.error : res.statusText || `HTTP ${res.status}`;
      throw new ApiError(res.status, message);
    }
    return payload;
  }

  async health(): Promise<HealthInfo> {
    const obj = asObject(await this.request("GET", "/v1/health"), "health");
    return {
      status: needString(obj, "status", "health"),
      cases: needNumber(obj, "cases", "health"),
    };
  }

  async listCases(): Promise<CaseInfo[]> {
    const obj = asObject(await this.request("GET", "/v1/cases"), "case list");
    return needArray(obj, "cases", "case list").map((c, i) => parseCase(c, `case list[${i}]`));
  }

  async generateReport(req: ReportRequest): Promise<ReportResponse> {
    const body: Record<string, unknown> = { image_id: req.image_id };
    if (req.k !== undefined) body.k = req.k;
    if (req.style !== undefined) body.style = req.style;
    const obj = asObject(await this.request("POST", "/v1/report", body), "report response");
    return {
      report: needString(obj, "report", "report response"),
      trace_id: needString(obj, "trace_id", "report response"),
    };
  }

  async chat(req: ChatRequest): Promise<ChatResponse> {
    const body: Record<string, unknown> = { message: req.message };
    if (req.session_id !== undefined) body.session_id = req.session_id;
    if (req.report_trace_id !== undefined) body.report_trace_id = req.report_trace_id;
    return parseChat(await this.request("POST", "/v1/chat", body));
  }

  async trace(traceId: string): Promise<TraceEnvelope> {
    const obj = asObject(await this.request("GET", `/v1/trace/${encodeURIComponent(traceId)}`), "trace");
    const id = needString(obj, "id", "trace");
    const kind = needString(obj, "kind", "trace");
    if (kind === "generation") {
      return { id, kind, doc: parseGenerationDoc(obj.doc) };
    }
    if (kind === "retrieval") {
      return { id, kind, doc: parseRetrievalDoc(obj.doc) };
    }
    throw new SchemaError(`trace: unknown kind "${kind}"`);
  }

  async session(sessionId: string): Promise<SessionDoc> {
    const obj = asObject(await this.request("GET", `/v1/sessions/${encodeURIComponent(sessionId)}`), "session");
    const turns: SessionTurn[] = needArray(obj, "turns", "session").map((t, i) => {
      const turn = asObject(t, `session.turns[${i}]`);
      const attachments = turn.attachments;
      return {
        role: needString(turn, "role", `session.turns[${i}]`),
        text: needString(turn, "text", `session.turns[${i}]`),
        attachments:
          typeof attachments === "object" && attachments !== null && !Array.isArray(attachments)
            ? (attachments as Record<string, unknown>)
            : null,
      };
    });
    return {
      id: needString(obj, "id", "session"),
      created_at: needString(obj, "created_at", "session"),
      turns,
    };
  }
}
