// Wire types mirroring the service's canonical JSON schemas. The console never
// invents numbers or re-parses raw model text: everything displayed comes from
// these payloads.

export interface HazardEntry {
  index: number;
  name: string;
  severity: number;
  explanation: string;
  suggestion: string;
}

export interface HazardReport {
  summary: string;
  hazards: HazardEntry[];
  raw_text: string;
}

export type ReviewStatus = "draft" | "approved";

export const FAILURE_LABELS = [
  "false_hazard",
  "context_misclassification",
  "hallucination",
] as const;
export type FailureLabel = (typeof FAILURE_LABELS)[number];

export interface DatasetRecord {
  record_id: string;
  image_ref: string;
  ground_truth: HazardReport | null;
  review_status: ReviewStatus;
  failure_labels: FailureLabel[];
}

export interface Guideline {
  id: number;
  hazard: string;
  conditions: string;
}

export interface GuidelineDocument {
  source_label: string;
  guidelines: Guideline[];
}

export interface EngineeredPrompt {
  prompt_id: string;
  text: string;
  guideline_fingerprint: string;
  template_fingerprint: string;
  provenance: "meta_prompted" | "deterministic";
}

export interface ParseIssue {
  kind: string;
  location: number;
  message: string;
}

export interface AssessResult {
  report: HazardReport;
  latency: number;
  parse_issues: ParseIssue[];
  media_ref: string;
}

export interface ModelInfo {
  model_id: string;
  kind: string;
}

export interface ScoreRow {
  model_id: string;
  track: "hazard_detection" | "overall";
  cosine: number;
  bert_precision: number;
  bert_recall: number;
  bert_f1: number;
  judge_normalized: number | null;
  n: number;
}

export interface LatencyRow {
  model_id: string;
  mean_s: number;
  p50_s: number;
  p95_s: number;
  n: number;
}

export interface EvalTable {
  run_fingerprint: string;
  rows: ScoreRow[];
  latency: LatencyRow[];
}

export interface RunStarted {
  run_id: string;
  status: string;
  cached: boolean;
}

export interface SeverityScale {
  low: number;
  high: number;
}

export const SEVERITY_SCALE: SeverityScale = { low: 1, high: 10 };
