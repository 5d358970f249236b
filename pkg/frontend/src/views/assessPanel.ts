import type { ApiClient } from "../api.js";
import { clear, el, errorStrip } from "../dom.js";
import type { AssessResult, HazardReport, ModelInfo } from "../types.js";

/** Upload an image, pick a model, and render the structured assessment. */
export class AssessPanel {
  readonly root = el("section", { class: "view assess-panel" });
  private models: ModelInfo[] = [];
  private file: File | Blob | null = null;
  private lastResult: AssessResult | null = null;

  constructor(private readonly api: ApiClient) {}

  async load(): Promise<void> {
    clear(this.root);
    this.root.append(el("p", { class: "busy" }, "Loading models…"));
    try {
      this.models = await this.api.listModels();
      this.render();
    } catch (error) {
      clear(this.root);
      this.root.append(errorStrip(`Could not load models: ${(error as Error).message}`, () => void this.load()));
    }
  }

  private render(result?: AssessResult, problem?: string): void {
    clear(this.root);
    const modelSelect = el(
      "select",
      { class: "model-select" },
      ...this.models.map((m) => el("option", { value: m.model_id }, `${m.model_id} (${m.kind})`)),
    );
    const fileInput = el("input", {
      type: "file",
      accept: "image/png,image/jpeg",
      onChange: (event: Event) => {
        const input = event.target as HTMLInputElement;
        this.file = input.files?.[0] ?? null;
      },
    });
    this.root.append(
      el("h2", {}, "Assess an image"),
      el("form", { class: "assess-form" }, el("label", {}, "Image ", fileInput), el("label", {}, "Model ", modelSelect)),
      el(
        "button",
        {
          class: "primary assess",
          onClick: () => void this.assess(modelSelect.value),
        },
        "Assess",
      ),
    );
    if (problem) {
      this.root.append(errorStrip(problem, () => void this.assess(modelSelect.value)));
    }
    if (result) {
      this.root.append(this.renderReport(result));
    }
  }

  async assess(modelId: string): Promise<void> {
    if (!this.file) {
      this.render(this.lastResult ?? undefined, "Choose an image first.");
      return;
    }
    try {
      const result = await this.api.assess(this.file, modelId);
      this.lastResult = result;
      this.render(result);
    } catch (error) {
      this.render(undefined, `Assessment failed: ${(error as Error).message}`);
    }
  }

  /** Structured rendering from canonical JSON; raw model text is never shown. */
  renderReport(result: AssessResult): HTMLElement {
    const report: HazardReport = result.report;
    const hazards = report.hazards.map((hazard) =>
      el(
        "article",
        { class: "hazard-card", "data-hazard-index": String(hazard.index) },
        el(
          "header",
          {},
          el("span", { class: "hazard-name" }, `${hazard.index}. ${hazard.name}`),
          el("span", { class: `severity-badge level-${hazard.severity}` }, `Severity ${hazard.severity}`),
        ),
        el("p", { class: "explanation" }, hazard.explanation),
        el("p", { class: "suggestion" }, hazard.suggestion),
      ),
    );
    return el(
      "div",
      { class: "assessment" },
      el("h3", {}, "Assessment"),
      el("p", { class: "summary" }, report.summary),
      el("div", { class: "hazard-list" }, ...hazards),
      el("p", { class: "latency" }, `Latency: ${result.latency.toFixed(2)} s`),
      result.parse_issues.length > 0
        ? el(
            "ul",
            { class: "parse-issues" },
            ...result.parse_issues.map((issue) => el("li", {}, `${issue.kind}: ${issue.message}`)),
          )
        : null,
    );
  }
}
