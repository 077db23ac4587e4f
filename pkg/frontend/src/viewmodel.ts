/** Pure transforms from wire documents to render-ready view models.
 *
 * Nothing in this module touches the DOM or the network, so every mapping
 * rule (badges, breadcrumbs, step indentation) is unit-testable on plain
 * objects.
 */

import type {
  Citation,
  GenerationTraceDoc,
  RetrievalTraceDoc,
  RetrievedExample,
  SearchStep,
} from "./types.js";

export interface ReportPanelsModel {
  preliminary: string;
  enhanced: string;
  /** True when no exemplars were blended in, so both panels match. */
  identical: boolean;
  kRequested: number;
  kUsed: number;
  /** Fewer exemplars were available than requested. */
  degraded: boolean;
  style: string;
  domain: string;
  imageRef: string;
  findings: string[];
  retrieved: RetrievedExample[];
  traceId: string;
}

export function reportPanels(doc: GenerationTraceDoc, traceId: string): ReportPanelsModel {
  return {
    preliminary: doc.preliminary_report,
    enhanced: doc.enhanced_report,
    identical: doc.k_used === 0,
    kRequested: doc.k_requested,
    kUsed: doc.k_used,
    degraded: doc.degraded,
    style: doc.style,
    domain: doc.domain_id,
    imageRef: doc.image_ref,
    findings: doc.visual_description,
    retrieved: doc.retrieved,
    traceId,
  };
}

export interface Breadcrumb {
  /** Section titles from the tree root down to the cited node. */
  levels: string[];
  /** levels joined for one-line display. */
  trail: string;
  excerpt: string;
}

export function citationBreadcrumb(citation: Citation | null): Breadcrumb | null {
  if (citation === null || citation.path.length === 0) return null;
  return {
    levels: citation.path,
    trail: citation.path.join(" › "),
    excerpt: citation.excerpt,
  };
}

export interface ChatTurnModel {
  role: "user" | "assistant";
  text: string;
  citation: Breadcrumb | null;
  grounded: boolean;
  lowConfidence: boolean;
  traceId: string | null;
}

export function userTurn(text: string): ChatTurnModel {
  return { role: "user", text, citation: null, grounded: true, lowConfidence: false, traceId: null };
}

export interface StepRowModel {
  /** Indent level: 0 for a root candidate, +1 per descent. */
  depth: number;
  /** Title of the node being examined. */
  topic: string;
  /** Numbered child options as shown to the navigator. */
  options: string[];
  /** Human-readable action, e.g. "select 3. Treatment" or "back". */
  action: string;
  converted: boolean;
  rawReply: string;
}

function actionLabel(step: SearchStep): string {
  const { kind, index } = step.action;
  if (kind === "select") {
    if (index !== null && index >= 0 && index < step.presented.length) {
      const [num, title] = step.presented[index];
      return `select ${num}. ${title}`;
    }
    return "select";
  }
  if (kind === "back") return "back";
  if (kind === "found") return "found";
  return kind;
}

export function traceSteps(doc: RetrievalTraceDoc): StepRowModel[] {
  return doc.steps.map((step) => ({
    depth: Math.max(step.path.length - 1, 0),
    topic: step.path.length > 0 ? step.path[step.path.length - 1] : "(root)",
    options: step.presented.map(([num, title]) => `${num}. ${title}`),
    action: actionLabel(step),
    converted: step.converted,
    rawReply: step.raw_reply,
  }));
}

export interface SearchSummaryModel {
  query: string;
  candidates: string[];
  outcome: string;
  stepsUsed: number;
  foundTrail: string | null;
  knowledge: string | null;
  lowConfidence: boolean;
  error: string | null;
}

export function searchSummary(doc: RetrievalTraceDoc): SearchSummaryModel {
  return {
    query: doc.query,
    candidates: doc.candidates,
    outcome: doc.outcome,
    stepsUsed: doc.steps_used,
    foundTrail: doc.found_path === null ? null : doc.found_path.join(" › "),
    knowledge: doc.knowledge,
    lowConfidence: doc.low_confidence,
    error: doc.error,
  };
}
