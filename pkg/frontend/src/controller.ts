/** Orchestration between the API client and the page.
 *
 * The controller owns all session state (current session id, chat turns,
 * last report trace) and talks to the page through the ConsoleView
 * interface, so the full user flow can be driven in tests with a fake view
 * and a stubbed fetch.  Failures become banners; medical text is only ever
 * rendered from a payload that parsed cleanly.
 */

import { ApiClient, ApiError, SchemaError } from "./api.js";
import type { CaseInfo } from "./types.js";
import {
  ChatTurnModel,
  citationBreadcrumb,
  reportPanels,
  searchSummary,
  traceSteps,
  userTurn,
} from "./viewmodel.js";
import {
  renderBanner,
  renderCaseOptions,
  renderChatLog,
  renderConnection,
  renderGenerationTrace,
  renderReportPanels,
  renderSearchTrace,
} from "./render.js";

/** Everything the controller can change on the page. */
export interface ConsoleView {
  setConnection(html: string): void;
  setBanner(html: string): void;
  setCases(html: string): void;
  setReport(html: string): void;
  setChatLog(html: string): void;
  setTrace(html: string): void;
  /** Disable every input (server unreachable or still loading). */
  setBusy(busy: boolean): void;
  /** Disable just the chat controls while a question is in flight. */
  setChatPending(pending: boolean): void;
}

export class ConsoleController {
  cases: CaseInfo[] = [];
  sessionId: string | null = null;
  reportTraceId: string | null = null;
  chatInFlight = false;
  serverUp = false;

  private turns: ChatTurnModel[] = [];
  private lastFailed: (() => Promise<void>) | null = null;

  constructor(private readonly api: ApiClient, private readonly view: ConsoleView) {}

  /** Probe the server and load the case list; disables the page on failure. */
  async init(): Promise<void> {
    this.view.setBusy(true);
    try {
      const health = await this.api.health();
      this.cases = await this.api.listCases();
      this.serverUp = true;
      this.view.setConnection(renderConnection(true, `connected · ${health.cases} cases`));
      this.view.setCases(renderCaseOptions(this.cases));
      this.view.setBanner("");
      this.view.setBusy(false);
    } catch (err) {
      this.serverUp = false;
      this.view.setConnection(renderConnection(false, "offline"));
      this.view.setBanner(renderBanner("error", this.describe(err), true));
      this.lastFailed = () => this.init();
    }
  }

  /** Generate a report for the selected case and show both panels. */
  async generate(imageId: string, k: number, style: string): Promise<void> {
    if (!this.serverUp || imageId === "") return;
    this.view.setBusy(true);
    try {
      const res = await this.api.generateReport({ image_id: imageId, k, style });
      const envelope = await this.api.trace(res.trace_id);
      if (envelope.kind !== "generation") {
        throw new SchemaError(`trace ${res.trace_id}: expected a generation trace`);
      }
      this.reportTraceId = res.trace_id;
      this.view.setReport(renderReportPanels(reportPanels(envelope.doc, res.trace_id)));
      this.view.setBanner("");
    } catch (err) {
      this.failed(err, () => this.generate(imageId, k, style));
    } finally {
      // stay frozen if the failure took the server down
      this.view.setBusy(!this.serverUp);
    }
  }

  /** Send one chat message.  Returns false if a question is already pending. */
  async send(message: string): Promise<boolean> {
    const text = message.trim();
    if (text === "" || !this.serverUp) return false;
    if (this.chatInFlight) {
      this.view.setBanner(renderBanner("info", "Please wait for the current answer before asking again."));
      return false;
    }
    this.chatInFlight = true;
    this.view.setChatPending(true);
    this.turns.push(userTurn(text));
    this.view.setChatLog(renderChatLog(this.turns));
    try {
      const req: { message: string; session_id?: string; report_trace_id?: string } = { message: text };
      if (this.sessionId !== null) req.session_id = this.sessionId;
      if (this.reportTraceId !== null) req.report_trace_id = this.reportTraceId;
      const res = await this.api.chat(req);
      this.sessionId = res.session_id;
      this.turns.push({
        role: "assistant",
        text: res.answer,
        citation: citationBreadcrumb(res.citation),
        grounded: res.grounded,
        lowConfidence: res.low_confidence,
        traceId: res.trace_id,
      });
      this.view.setChatLog(renderChatLog(this.turns));
      this.view.setBanner("");
      return true;
    } catch (err) {
      // drop the unanswered turn; the retry action re-adds it
      this.turns.pop();
      this.view.setChatLog(renderChatLog(this.turns));
      this.failed(err, () => this.send(text).then(() => undefined));
      return false;
    } finally {
      this.chatInFlight = false;
      this.view.setChatPending(false);
    }
  }

  /** Load a stored trace into the drawer. */
  async openTrace(traceId: string): Promise<void> {
    if (!this.serverUp) return;
    try {
      const envelope = await this.api.trace(traceId);
      if (envelope.kind === "retrieval") {
        this.view.setTrace(renderSearchTrace(searchSummary(envelope.doc), traceSteps(envelope.doc)));
      } else {
        this.view.setTrace(renderGenerationTrace(envelope.doc));
      }
    } catch (err) {
      this.failed(err, () => this.openTrace(traceId));
    }
  }

  /** Re-run the most recent failed action, if any. */
  async retry(): Promise<void> {
    const action = this.lastFailed;
    if (action === null) return;
    this.lastFailed = null;
    this.view.setBanner("");
    await action();
  }

  private failed(err: unknown, action: () => Promise<void>): void {
    if (err instanceof ApiError && err.status === 0) {
      // transport failure: treat the server as gone and freeze the page
      this.serverUp = false;
      this.view.setConnection(renderConnection(false, "offline"));
      this.view.setBanner(renderBanner("error", "Server unreachable. Answers are unavailable until it returns.", true));
      this.view.setBusy(true);
      this.lastFailed = () => this.init().then(action);
      return;
    }
    const retryable = err instanceof ApiError && err.status === 502;
    this.lastFailed = retryable ? action : null;
    this.view.setBanner(renderBanner("error", this.describe(err), retryable));
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) {
      return err.status === 0 ? "Server unreachable." : `Request failed (${err.status}): ${err.message}`;
    }
    if (err instanceof SchemaError) return `Unexpected response from server: ${err.message}`;
    return "Unexpected error.";
  }
}
