/** Wire-format types for the medbridge HTTP API.
 *
 * These mirror the JSON documents the service returns.  Field names are kept
 * in snake_case so a round-trip through the parser is easy to compare against
 * raw payloads when debugging.
 */

/** One analyzable image known to the server. */
export interface CaseInfo {
  image_id: string;
  domain: string;
}

export interface HealthInfo {
  status: string;
  cases: number;
}

/** Response of POST /v1/report. */
export interface ReportResponse {
  report: string;
  trace_id: string;
}

/** Pointer into the knowledge tree backing an answer. */
export interface Citation {
  /** Section titles from the tree root down to the cited node. */
  path: string[];
  /** Opening of the cited section, at most a few hundred characters. */
  excerpt: string;
}

/** Response of POST /v1/chat.  citation is null for ungrounded answers. */
export interface ChatResponse {
  session_id: string;
  answer: string;
  citation: Citation | null;
  trace_id: string;
  grounded: boolean;
  low_confidence: boolean;
}

/** One exemplar report pulled from the retrieval index. */
export interface RetrievedExample {
  id: string;
  text: string;
  distance: number;
}

export interface LlmCall {
  tag: string;
  prompt: string;
  completion: string;
}

/** Stored record of one report generation. */
export interface GenerationTraceDoc {
  image_ref: string;
  domain_id: string;
  style: string;
  preliminary_report: string;
  enhanced_report: string;
  visual_description: string[];
  retrieved: RetrievedExample[];
  k_requested: number;
  k_used: number;
  degraded: boolean;
  llm_calls: LlmCall[];
  timings: Record<string, number>;
}

/** What the navigator did at one step of the tree search. */
export interface StepAction {
  kind: string;
  /** 0-based position into `presented`; null for back / found. */
  index: number | null;
}

export interface SearchStep {
  /** Titles from the root to the node being examined. */
  path: string[];
  /** Numbered child options shown at this step, as [number, title] pairs. */
  presented: [number, string][];
  action: StepAction;
  raw_reply: string;
  /** True when an unusable reply was downgraded to a back move. */
  converted: boolean;
}

/** Stored record of one knowledge-tree search. */
export interface RetrievalTraceDoc {
  query: string;
  candidates: string[];
  steps: SearchStep[];
  steps_used: number;
  outcome: string;
  found_path: string[] | null;
  knowledge: string | null;
  low_confidence: boolean;
  error: string | null;
}

export type TraceEnvelope =
  | { id: string; kind: "generation"; doc: GenerationTraceDoc }
  | { id: string; kind: "retrieval"; doc: RetrievalTraceDoc };

export interface SessionTurn {
  role: string;
  text: string;
  attachments: Record<string, unknown> | null;
}

export interface SessionDoc {
  id: string;
  created_at: string;
  turns: SessionTurn[];
}
