/** Wire payloads used across the test files.
 *
 * Shapes match what the service emits, including list-encoded tuples for
 * retrieved exemplars and presented options.  Several payloads carry extra
 * fields the console does not know about; parsers must ignore them.
 */

export const HEALTH_PAYLOAD = { status: "ok", cases: 6 };

export const CASES_PAYLOAD = {
  cases: [
    { image_id: "img1", domain: "chest", modality: "xray" },
    { image_id: "img2", domain: "chest" },
    { image_id: "img3", domain: "dental" },
    { image_id: "img4", domain: "dental" },
    { image_id: "img5", domain: "knee" },
    { image_id: "img6", domain: "knee" },
  ],
};

export const PRELIMINARY =
  "The cardiac silhouette is enlarged, consistent with cardiomegaly. Mild edema.";
export const ENHANCED =
  "Enlarged heart with cardiomegaly and mild edema; no pleural effusion.";

export const GEN_TRACE_DOC = {
  format: "generation-trace@1",
  image_ref: "img1",
  domain_id: "chest",
  style: "p3",
  preliminary_report: PRELIMINARY,
  enhanced_report: ENHANCED,
  visual_description: [
    "Definitely have cardiomegaly",
    "Small possibility of edema",
    "No sign of pleural effusion",
  ],
  retrieved: [
    ["r08", "Stable cardiomegaly. Interval resolution of the previously seen edema.", 1.57e-16],
    ["r04", "Diffuse pulmonary edema in the setting of known cardiomegaly. Small bilateral effusion.", 0.3643207701057764],
    ["r01", "Moderate cardiomegaly with mild interstitial edema. No pleural effusion or pneumothorax.", 0.8888985093748054],
  ],
  k_requested: 3,
  k_used: 3,
  degraded: false,
  llm_calls: [
    { tag: "preliminary", prompt: "Findings:\n...", completion: PRELIMINARY },
    { tag: "refine", prompt: "Draft report:\n...", completion: ENHANCED },
  ],
  timings: { cad: 1.4e-5, retrieve: 1.6e-4, enhance: 2.1e-5 },
  schema_note: "field unknown to the console",
};

/** k=0 run: no exemplars blended, enhanced text equals the draft. */
export const GEN_TRACE_DOC_K0 = {
  ...GEN_TRACE_DOC,
  enhanced_report: PRELIMINARY,
  retrieved: [],
  k_requested: 0,
  k_used: 0,
  llm_calls: [GEN_TRACE_DOC.llm_calls[0]],
};

export const ANSWER = "Grounded answer derived from the cited section.";
export const EXCERPT =
  "Many small effusions cause no symptoms. Larger effusions cause shortness of breath, " +
  "chest pain that worsens with deep breathing, and a dry cough.";

export const CHAT_PAYLOAD = {
  session_id: "s-000001",
  answer: ANSWER,
  citation: {
    path: ["Pleural Effusion", "Symptoms and Signs"],
    excerpt: EXCERPT,
  },
  trace_id: "tr-000002",
  grounded: true,
  low_confidence: false,
  latency_ms: 412,
};

export const RET_TRACE_DOC = {
  format: "retrieval-trace@1",
  query: "What causes pleural effusion?",
  candidates: ["Pleural Effusion", "Meniscus Tear", "Periodontitis"],
  steps: [
    {
      path: ["Pleural Effusion"],
      presented: [
        [1, "Symptoms and Signs"],
        [2, "Diagnosis"],
        [3, "Treatment"],
        [4, "Prognosis"],
      ],
      action: { kind: "select", index: 0 },
      raw_reply: "1",
      converted: false,
    },
    {
      path: ["Pleural Effusion", "Symptoms and Signs"],
      presented: [],
      action: { kind: "found", index: null },
      raw_reply: "FOUND",
      converted: false,
    },
  ],
  steps_used: 2,
  outcome: "found",
  found_path: ["Pleural Effusion", "Symptoms and Signs"],
  knowledge: EXCERPT,
  low_confidence: false,
  error: null,
};

/** A search that wandered and got downgraded replies before giving up. */
export const RET_TRACE_DOC_BUDGET = {
  format: "retrieval-trace@1",
  query: "treatment options",
  candidates: ["Pleural Effusion"],
  steps: [
    {
      path: ["Pleural Effusion"],
      presented: [
        [1, "Symptoms and Signs"],
        [2, "Diagnosis"],
      ],
      action: { kind: "select", index: 1 },
      raw_reply: "2",
      converted: false,
    },
    {
      path: ["Pleural Effusion", "Diagnosis"],
      presented: [],
      action: { kind: "back", index: null },
      raw_reply: "???",
      converted: true,
    },
  ],
  steps_used: 2,
  outcome: "budget_stop",
  found_path: null,
  knowledge: "Abstract text for the deepest visited path.",
  low_confidence: true,
  error: null,
};

export function traceEnvelope(id: string, kind: string, doc: unknown): Record<string, unknown> {
  return { id, kind, doc };
}

export function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}
