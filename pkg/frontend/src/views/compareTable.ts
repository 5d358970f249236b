import type { ApiClient } from "../api.js";
import { clear, el, errorStrip } from "../dom.js";
import type { EvalTable, ScoreRow } from "../types.js";

const TRACK_TITLES: Record<ScoreRow["track"], string> = {
  hazard_detection: "Hazard Detection Accuracy",
  overall: "Overall Response Accuracy and Completeness",
};

// Display formatting only; every value shown is exactly what the service sent.
const score = (value: number): string => value.toFixed(3);
const seconds = (value: number): string => value.toFixed(2);

/** Model-comparison view: two score-column groups plus the latency table. */
export class CompareTable {
  readonly root = el("section", { class: "view compare-table" });
  private table: EvalTable | null = null;

  constructor(private readonly api: ApiClient) {
    this.renderIdle();
  }

  private renderIdle(): void {
    clear(this.root);
    this.root.append(
      el("h2", {}, "Compare models"),
      el("p", {}, "Run every configured model over the dataset and compare the score tables."),
      el("button", { class: "primary", "data-action": "start-run", onClick: () => void this.startRun() }, "Start run"),
    );
  }

  async startRun(): Promise<void> {
    clear(this.root);
    this.root.append(el("h2", {}, "Compare models"), el("p", { class: "busy" }, "Running…"));
    try {
      const started = await this.api.startRun({});
      const table = await this.api.getRun(started.run_id);
      this.renderTable(table);
    } catch (error) {
      clear(this.root);
      this.root.append(
        el("h2", {}, "Compare models"),
        errorStrip(`Run failed: ${(error as Error).message}`, () => void this.startRun()),
      );
    }
  }

  /** Render a score table received from the service (also used directly in tests). */
  renderTable(table: EvalTable): void {
    this.table = table;
    clear(this.root);
    this.root.append(el("h2", {}, "Compare models"));
    this.root.append(el("p", { class: "fingerprint" }, `Run fingerprint: ${table.run_fingerprint}`));

    for (const track of ["hazard_detection", "overall"] as const) {
      const rows = table.rows.filter((row) => row.track === track);
      if (rows.length === 0) continue;
      const withJudge = track === "overall";
      const header = el(
        "tr",
        {},
        el("th", {}, "Model"),
        el("th", {}, "Cosine Similarity"),
        el("th", {}, "BERTScore F1"),
        withJudge ? el("th", {}, "LLM as Judge") : null,
        el("th", {}, "n"),
      );
      const body = rows.map((row) =>
        el(
          "tr",
          { "data-model": row.model_id },
          el("td", {}, row.model_id),
          el("td", { class: "num" }, score(row.cosine)),
          el("td", { class: "num" }, score(row.bert_f1)),
          withJudge
            ? el("td", { class: "num" }, row.judge_normalized === null ? "–" : score(row.judge_normalized))
            : null,
          el("td", { class: "num" }, String(row.n)),
        ),
      );
      this.root.append(
        el("h3", {}, TRACK_TITLES[track]),
        el("table", { class: "scores", "data-track": track }, el("thead", {}, header), el("tbody", {}, ...body)),
      );
    }

    if (table.latency.length > 0) {
      const header = el(
        "tr",
        {},
        el("th", {}, "Model"),
        el("th", {}, "Mean (s)"),
        el("th", {}, "p50 (s)"),
        el("th", {}, "p95 (s)"),
        el("th", {}, "n"),
      );
      const body = table.latency.map((row) =>
        el(
          "tr",
          { "data-model": row.model_id },
          el("td", {}, row.model_id),
          el("td", { class: "num" }, seconds(row.mean_s)),
          el("td", { class: "num" }, seconds(row.p50_s)),
          el("td", { class: "num" }, seconds(row.p95_s)),
          el("td", { class: "num" }, String(row.n)),
        ),
      );
      this.root.append(
        el("h3", {}, "Inference Latency"),
        el("table", { class: "latency" }, el("thead", {}, header), el("tbody", {}, ...body)),
      );
    }

    this.root.append(el("button", { onClick: () => void this.startRun() }, "Run again"));
  }

  currentTable(): EvalTable | null {
    return this.table;
  }
}
