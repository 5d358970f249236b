import type { ApiClient } from "../api.js";
import { clear, el, errorStrip } from "../dom.js";
import type { EngineeredPrompt, Guideline } from "../types.js";

/** Edit taxonomy rows (id, hazard, conditions) and compile them into a prompt. */
export class GuidelineEditor {
  readonly root = el("section", { class: "view guideline-editor" });
  private rows: Guideline[] = [];
  private prompt: EngineeredPrompt | null = null;

  constructor(private readonly api: ApiClient) {}

  async load(): Promise<void> {
    clear(this.root);
    this.root.append(el("p", { class: "busy" }, "Loading guidelines…"));
    try {
      const document = await this.api.getGuidelines();
      this.rows = structuredClone(document.guidelines);
      this.render();
    } catch (error) {
      clear(this.root);
      this.root.append(
        errorStrip(`Could not load guidelines: ${(error as Error).message}`, () => void this.load()),
      );
    }
  }

  setRows(rows: Guideline[]): void {
    this.rows = structuredClone(rows);
    this.render();
  }

  private rowEditor(row: Guideline): HTMLElement {
    return el(
      "tr",
      { "data-guideline-id": String(row.id) },
      el("td", {}, String(row.id)),
      el(
        "td",
        {},
        el("input", {
          value: row.hazard,
          "data-field": "hazard",
          onInput: (event: Event) => {
            row.hazard = (event.target as HTMLInputElement).value;
          },
        }),
      ),
      el(
        "td",
        {},
        el("input", {
          class: "conditions",
          value: row.conditions,
          "data-field": "conditions",
          onInput: (event: Event) => {
            row.conditions = (event.target as HTMLInputElement).value;
          },
        }),
      ),
      el(
        "td",
        {},
        el(
          "button",
          {
            class: "remove-row",
            onClick: () => {
              this.rows = this.rows.filter((r) => r !== row);
              this.render();
            },
          },
          "Remove",
        ),
      ),
    );
  }

  render(problem?: string): void {
    clear(this.root);
    this.root.append(
      el("h2", {}, "Safety guidelines"),
      el(
        "table",
        { class: "guidelines" },
        el(
          "thead",
          {},
          el("tr", {}, el("th", {}, "Id"), el("th", {}, "Hazard"), el("th", {}, "Conditions to look for"), el("th", {})),
        ),
        el("tbody", {}, ...this.rows.map((row) => this.rowEditor(row))),
      ),
      el(
        "button",
        {
          class: "add-row",
          onClick: () => {
            const nextId = Math.max(0, ...this.rows.map((r) => r.id)) + 1;
            this.rows.push({ id: nextId, hazard: "", conditions: "" });
            this.render();
          },
        },
        "Add row",
      ),
      el(
        "button",
        { class: "primary engineer", onClick: () => void this.engineer() },
        "Engineer prompt",
      ),
    );
    if (problem) {
      this.root.append(errorStrip(problem, () => void this.engineer()));
    }
    if (this.prompt) {
      this.root.append(
        el(
          "div",
          { class: "prompt-result" },
          el("h3", {}, `Engineered prompt (${this.prompt.provenance})`),
          el("p", { class: "fingerprint" }, `prompt ${this.prompt.prompt_id} · guidelines ${this.prompt.guideline_fingerprint.slice(0, 12)}…`),
          el("pre", { class: "prompt-text" }, this.prompt.text),
        ),
      );
    }
  }

  async engineer(): Promise<void> {
    try {
      this.prompt = await this.api.engineerPrompt(this.rows);
      this.render();
    } catch (error) {
      this.render(`Prompt engineering failed: ${(error as Error).message}`);
    }
  }

  currentRows(): Guideline[] {
    return this.rows;
  }

  currentPrompt(): EngineeredPrompt | null {
    return this.prompt;
  }
}
