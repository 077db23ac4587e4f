/** HTML string builders for the console.
 *
 * All server-provided text passes through escapeHtml before it reaches the
 * page.  Renderers return strings so they can be asserted on directly in
 * tests; main.ts is the only place that assigns innerHTML.
 */

import type { CaseInfo, GenerationTraceDoc } from "./types.js";
import type {
  Breadcrumb,
  ChatTurnModel,
  ReportPanelsModel,
  SearchSummaryModel,
  StepRowModel,
} from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderCaseOptions(cases: CaseInfo[]): string {
  const options = cases.map(
    (c) => `<option value="${escapeHtml(c.image_id)}">${escapeHtml(c.image_id)} (${escapeHtml(c.domain)})</option>`,
  );
  return `<option value="">Select a case…</option>` + options.join("");
}

function chip(cls: string, label: string): string {
  return `<span class="chip ${cls}">${escapeHtml(label)}</span>`;
}

export function renderReportPanels(model: ReportPanelsModel): string {
  const chips: string[] = [
    chip("chip-domain", model.domain),
    chip("chip-style", `style ${model.style}`),
    chip("chip-k", `k=${model.kUsed}${model.degraded ? ` of ${model.kRequested}` : ""}`),
  ];
  if (model.identical) chips.push(chip("chip-identical", "identical to preliminary"));
  if (model.degraded) chips.push(chip("chip-degraded", "fewer exemplars than requested"));

  const findings = model.findings.map((f) => `<li>${escapeHtml(f)}</li>`).join("");
  const exemplars = model.retrieved
    .map(
      (r) =>
        `<li><span class="exemplar-id">${escapeHtml(r.id)}</span>` +
        `<span class="exemplar-dist">${r.distance.toFixed(4)}</span>` +
        `<span class="exemplar-text">${escapeHtml(r.text)}</span></li>`,
    )
    .join("");

  return `
<div class="report-header">
  <h2>${escapeHtml(model.imageRef)}</h2>
  ${chips.join("\n  ")}
  <button type="button" class="trace-link" data-trace="${escapeHtml(model.traceId)}">view trace</button>
</div>
<div class="report-columns">
  <section class="panel panel-preliminary">
    <h3>Preliminary</h3>
    <p class="report-text">${escapeHtml(model.preliminary)}</p>
  </section>
  <section class="panel panel-enhanced">
    <h3>Enhanced</h3>
    <p class="report-text">${escapeHtml(model.enhanced)}</p>
  </section>
</div>
<details class="report-detail">
  <summary>Findings from image analysis</summary>
  <ul class="findings">${findings}</ul>
</details>
<details class="report-detail">
  <summary>Retrieved exemplars (${model.retrieved.length})</summary>
  <ul class="exemplars">${exemplars}</ul>
</details>`;
}

export function renderBreadcrumb(crumb: Breadcrumb): string {
  const levels = crumb.levels.map((title) => `<span class="crumb">${escapeHtml(title)}</span>`);
  return `
<details class="citation">
  <summary>${levels.join('<span class="crumb-sep">›</span>')}</summary>
  <blockquote class="citation-excerpt">${escapeHtml(crumb.excerpt)}</blockquote>
</details>`;
}

export function renderChatTurn(turn: ChatTurnModel): string {
  const classes = ["turn", `turn-${turn.role}`];
  const extras: string[] = [];
  if (turn.role === "assistant") {
    if (!turn.grounded) extras.push(chip("chip-ungrounded", "ungrounded"));
    if (turn.lowConfidence) extras.push(chip("chip-lowconf", "low confidence"));
    if (turn.traceId !== null) {
      extras.push(
        `<button type="button" class="trace-link" data-trace="${escapeHtml(turn.traceId)}">view search</button>`,
      );
    }
  }
  const citation = turn.citation !== null ? renderBreadcrumb(turn.citation) : "";
  return `
<div class="${classes.join(" ")}">
  <p class="turn-text">${escapeHtml(turn.text)}</p>
  ${citation}
  ${extras.length > 0 ? `<div class="turn-extras">${extras.join(" ")}</div>` : ""}
</div>`;
}

export function renderChatLog(turns: ChatTurnModel[]): string {
  return turns.map(renderChatTurn).join("\n");
}

export function renderSearchTrace(summary: SearchSummaryModel, steps: StepRowModel[]): string {
  const candidates = summary.candidates.map((c) => `<li>${escapeHtml(c)}</li>`).join("");
  const rows = steps
    .map((step) => {
      const marks: string[] = [];
      if (step.converted) marks.push(chip("chip-converted", "converted to back"));
      const options =
        step.options.length > 0
          ? `<ul class="step-options">${step.options.map((o) => `<li>${escapeHtml(o)}</li>`).join("")}</ul>`
          : "";
      return (
        `<li class="step" style="margin-left:${step.depth * 1.25}rem">` +
        `<span class="step-topic">${escapeHtml(step.topic)}</span>` +
        `<span class="step-action">${escapeHtml(step.action)}</span>` +
        marks.join("") +
        options +
        `</li>`
      );
    })
    .join("\n");

  const outcomeBits = [`outcome: ${escapeHtml(summary.outcome)}`, `steps: ${summary.stepsUsed}`];
  if (summary.foundTrail !== null) outcomeBits.push(`found: ${escapeHtml(summary.foundTrail)}`);
  const flags: string[] = [];
  if (summary.lowConfidence) flags.push(chip("chip-lowconf", "low confidence"));
  if (summary.error !== null) flags.push(chip("chip-error", summary.error));
  const knowledge =
    summary.knowledge !== null
      ? `<details class="trace-knowledge"><summary>Retrieved knowledge</summary>` +
        `<blockquote>${escapeHtml(summary.knowledge)}</blockquote></details>`
      : "";

  return `
<h2>Knowledge search</h2>
<p class="trace-query">${escapeHtml(summary.query)}</p>
<p class="trace-outcome">${outcomeBits.join(" · ")} ${flags.join(" ")}</p>
<details class="trace-candidates">
  <summary>Candidate topics (${summary.candidates.length})</summary>
  <ol>${candidates}</ol>
</details>
<ol class="steps">
${rows}
</ol>
${knowledge}`;
}

export function renderGenerationTrace(doc: GenerationTraceDoc): string {
  const calls = doc.llm_calls
    .map(
      (call) => `
<details class="llm-call">
  <summary>${escapeHtml(call.tag)}</summary>
  <h4>Prompt</h4>
  <pre>${escapeHtml(call.prompt)}</pre>
  <h4>Completion</h4>
  <pre>${escapeHtml(call.completion)}</pre>
</details>`,
    )
    .join("\n");
  const timings = Object.entries(doc.timings)
    .map(([stage, seconds]) => `<tr><td>${escapeHtml(stage)}</td><td>${(seconds * 1000).toFixed(3)} ms</td></tr>`)
    .join("");
  return `
<h2>Report generation</h2>
<p class="trace-query">${escapeHtml(doc.image_ref)} · ${escapeHtml(doc.domain_id)} · k=${doc.k_used}</p>
${calls}
<details class="trace-timings">
  <summary>Stage timings</summary>
  <table>${timings}</table>
</details>`;
}

export function renderBanner(kind: "error" | "info", message: string, withRetry = false): string {
  const retry = withRetry
    ? ` <button type="button" class="banner-retry" data-action="retry">Retry</button>`
    : "";
  return `<div class="banner banner-${kind}" role="alert">${escapeHtml(message)}${retry}</div>`;
}

export function renderConnection(ok: boolean, label: string): string {
  return `<span class="dot ${ok ? "dot-ok" : "dot-down"}"></span> ${escapeHtml(label)}`;
}
