/** Browser entry point: binds the controller to the real DOM and fetch.
 *
 * Served from the same origin as the API, so relative /v1 paths work out of
 * the box; set window.MEDBRIDGE_API_BASE before loading this module to point
 * at a server elsewhere.
 */

import { ApiClient } from "./api.js";
import { ConsoleController, ConsoleView } from "./controller.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

const API_BASE: string = (window as unknown as { MEDBRIDGE_API_BASE?: string }).MEDBRIDGE_API_BASE ?? "";

let pageBusy = false;

const connectionEl = el<HTMLElement>("connection");
const bannerEl = el<HTMLElement>("banner");
const caseSelect = el<HTMLSelectElement>("case-select");
const kInput = el<HTMLInputElement>("k-input");
const styleSelect = el<HTMLSelectElement>("style-select");
const generateBtn = el<HTMLButtonElement>("generate-btn");
const reportEl = el<HTMLElement>("report");
const chatLogEl = el<HTMLElement>("chat-log");
const chatForm = el<HTMLFormElement>("chat-form");
const chatInput = el<HTMLInputElement>("chat-input");
const chatSend = el<HTMLButtonElement>("chat-send");
const traceDrawer = el<HTMLElement>("trace-drawer");
const traceBody = el<HTMLElement>("trace-body");
const traceClose = el<HTMLButtonElement>("trace-close");

const view: ConsoleView = {
  setConnection(html) {
    connectionEl.innerHTML = html;
  },
  setBanner(html) {
    bannerEl.innerHTML = html;
  },
  setCases(html) {
    caseSelect.innerHTML = html;
  },
  setReport(html) {
    reportEl.innerHTML = html;
  },
  setChatLog(html) {
    chatLogEl.innerHTML = html;
    chatLogEl.scrollTop = chatLogEl.scrollHeight;
  },
  setTrace(html) {
    traceBody.innerHTML = html;
    traceDrawer.classList.add("open");
  },
  setBusy(busy) {
    pageBusy = busy;
    caseSelect.disabled = busy;
    kInput.disabled = busy;
    styleSelect.disabled = busy;
    generateBtn.disabled = busy;
    chatInput.disabled = busy;
    chatSend.disabled = busy;
  },
  setChatPending(pending) {
    chatInput.disabled = pending || pageBusy;
    chatSend.disabled = pending || pageBusy;
  },
};

const api = new ApiClient(API_BASE, (url, init) => fetch(url, init));
const controller = new ConsoleController(api, view);

generateBtn.addEventListener("click", () => {
  const k = Number.parseInt(kInput.value, 10);
  void controller.generate(caseSelect.value, Number.isNaN(k) ? 3 : k, styleSelect.value);
});

chatForm.addEventListener("submit", (event) => {
  event.preventDefault();
  void controller.send(chatInput.value).then((sent) => {
    if (sent) chatInput.value = "";
    chatInput.focus();
  });
});

// trace links are rendered into report panels and chat turns; delegate
document.addEventListener("click", (event) => {
  const target = event.target as HTMLElement | null;
  if (target === null) return;
  const traceId = target.dataset.trace;
  if (traceId !== undefined) {
    void controller.openTrace(traceId);
    return;
  }
  if (target.dataset.action === "retry") {
    void controller.retry();
  }
});

traceClose.addEventListener("click", () => {
  traceDrawer.classList.remove("open");
});

void controller.init();
