import type { ApiClient } from "../api.js";
import { clear, el, errorStrip } from "../dom.js";
import {
  FAILURE_LABELS,
  type DatasetRecord,
  type FailureLabel,
  type HazardEntry,
  type HazardReport,
} from "../types.js";
import { approvalErrors, reportErrors } from "../validate.js";

function cloneReport(report: HazardReport | null): HazardReport {
  return report
    ? structuredClone(report)
    : { summary: "", hazards: [], raw_text: "" };
}

function reindex(hazards: HazardEntry[]): void {
  hazards.forEach((hazard, i) => {
    hazard.index = i + 1;
  });
}

/** Steps a reviewer through draft records: edit fields, tag failure modes,
 * approve. Unsaved edits are flagged; invalid edits never reach the server. */
export class ReviewQueue {
  readonly root = el("section", { class: "view review-queue" });
  private queue: DatasetRecord[] = [];
  private position = 0;
  private draft: HazardReport = cloneReport(null);
  private labels = new Set<FailureLabel>();
  private dirty = false;
  private problems: string[] = [];
  private notice = "";

  constructor(private readonly api: ApiClient) {}

  async load(): Promise<void> {
    clear(this.root);
    this.root.append(el("p", { class: "busy" }, "Loading records…"));
    try {
      const records = await this.api.listRecords();
      this.queue = records.filter((record) => record.review_status === "draft");
      this.position = 0;
      this.takeCurrent();
      this.render();
    } catch (error) {
      clear(this.root);
      this.root.append(errorStrip(`Could not load records: ${(error as Error).message}`, () => void this.load()));
    }
  }

  private get current(): DatasetRecord | null {
    return this.queue[this.position] ?? null;
  }

  private takeCurrent(): void {
    const record = this.current;
    this.draft = cloneReport(record?.ground_truth ?? null);
    this.labels = new Set(record?.failure_labels ?? []);
    this.dirty = false;
    this.problems = [];
    this.notice = "";
  }

  private markDirty(): void {
    this.dirty = true;
    this.render();
  }

  private move(step: number): void {
    const next = this.position + step;
    if (next < 0 || next >= this.queue.length) return;
    this.position = next;
    this.takeCurrent();
    this.render();
  }

  private async save(approve: boolean): Promise<void> {
    const record = this.current;
    if (!record) return;
    this.problems = approve ? approvalErrors(this.draft) : reportErrors(this.draft);
    if (this.problems.length > 0) {
      this.render();
      return;
    }
    const update = {
      ground_truth: this.draft,
      review_status: approve ? ("approved" as const) : ("draft" as const),
      failure_labels: [...this.labels].sort() as FailureLabel[],
    };
    try {
      const saved = await this.api.updateRecord(record.record_id, update);
      if (approve) {
        this.queue.splice(this.position, 1);
        if (this.position >= this.queue.length) this.position = Math.max(0, this.queue.length - 1);
        this.takeCurrent();
        this.notice = `${saved.record_id} approved`;
      } else {
        this.queue[this.position] = saved;
        this.takeCurrent();
        this.notice = `${saved.record_id} saved (still draft)`;
      }
      this.render();
    } catch (error) {
      this.problems = [`Save failed: ${(error as Error).message}`];
      this.render();
    }
  }

  private hazardEditor(hazard: HazardEntry): HTMLElement {
    const bind = (field: "name" | "explanation" | "suggestion") => (event: Event) => {
      hazard[field] = (event.target as HTMLInputElement | HTMLTextAreaElement).value;
      this.dirty = true;
    };
    const severityInput = el("input", {
      class: "severity",
      type: "number",
      value: String(hazard.severity),
      "data-field": "severity",
      onInput: (event: Event) => {
        hazard.severity = Number((event.target as HTMLInputElement).value);
        this.dirty = true;
      },
    });
    return el(
      "fieldset",
      { class: "hazard", "data-hazard-index": String(hazard.index) },
      el("legend", {}, `Hazard ${hazard.index}`),
      el("label", {}, "Name ", el("input", { value: hazard.name, "data-field": "name", onInput: bind("name") })),
      el("label", {}, "Severity ", severityInput),
      el(
        "label",
        {},
        "Explanation ",
        el("textarea", { "data-field": "explanation", onInput: bind("explanation") }, hazard.explanation),
      ),
      el(
        "label",
        {},
        "Suggestion ",
        el("textarea", { "data-field": "suggestion", onInput: bind("suggestion") }, hazard.suggestion),
      ),
      el(
        "button",
        {
          class: "remove-hazard",
          onClick: () => {
            this.draft.hazards = this.draft.hazards.filter((h) => h !== hazard);
            reindex(this.draft.hazards);
            this.markDirty();
          },
        },
        "Remove hazard",
      ),
    );
  }

  render(): void {
    clear(this.root);
    this.root.append(el("h2", {}, "Review queue"));
    if (this.notice) {
      this.root.append(el("p", { class: "notice" }, this.notice));
    }
    if (this.queue.length === 0) {
      this.root.append(el("p", { class: "empty" }, "No draft records; everything is reviewed."));
      return;
    }

    const record = this.current!;
    this.root.append(
      el(
        "p",
        { class: "queue-position" },
        `Record ${this.position + 1} of ${this.queue.length} awaiting review`,
        this.dirty ? el("span", { class: "dirty-flag" }, " • unsaved edits") : null,
      ),
      el(
        "ul",
        { class: "queue-list" },
        ...this.queue.map((item, i) =>
          el(
            "li",
            { class: i === this.position ? "current" : "", "data-record": item.record_id },
            item.record_id,
          ),
        ),
      ),
    );

    const image = el("img", {
      class: "preview",
      src: this.api.recordImageUrl(record.record_id),
      alt: `site image for ${record.record_id}`,
    });

    const summary = el(
      "label",
      {},
      "Summary ",
      el("textarea", {
        "data-field": "summary",
        onInput: (event: Event) => {
          this.draft.summary = (event.target as HTMLTextAreaElement).value;
          this.dirty = true;
        },
      }, this.draft.summary),
    );

    const labelBoxes = FAILURE_LABELS.map((label) =>
      el(
        "label",
        { class: "failure-label" },
        el("input", {
          type: "checkbox",
          value: label,
          checked: this.labels.has(label),
          onChange: (event: Event) => {
            const box = event.target as HTMLInputElement;
            if (box.checked) this.labels.add(label);
            else this.labels.delete(label);
            this.dirty = true;
          },
        }),
        label,
      ),
    );

    const problems =
      this.problems.length > 0
        ? el("ul", { class: "problems", role: "alert" }, ...this.problems.map((p) => el("li", {}, p)))
        : null;

    this.root.append(
      el(
        "div",
        { class: "record-editor", "data-record": record.record_id },
        el("h3", {}, record.record_id),
        image,
        summary,
        el("div", { class: "hazards" }, ...this.draft.hazards.map((h) => this.hazardEditor(h))),
        el(
          "button",
          {
            class: "add-hazard",
            onClick: () => {
              this.draft.hazards.push({
                index: this.draft.hazards.length + 1,
                name: "",
                severity: 5,
                explanation: "",
                suggestion: "",
              });
              this.markDirty();
            },
          },
          "Add hazard",
        ),
        el("div", { class: "labels" }, "Failure labels: ", ...labelBoxes),
        problems,
        el(
          "div",
          { class: "actions" },
          el("button", { class: "save", onClick: () => void this.save(false) }, "Save draft"),
          el("button", { class: "approve primary", onClick: () => void this.save(true) }, "Approve"),
          el("button", { class: "prev", onClick: () => this.move(-1) }, "Previous"),
          el("button", { class: "next", onClick: () => this.move(1) }, "Next"),
        ),
      ),
    );
  }

  draftIds(): string[] {
    return this.queue.map((record) => record.record_id);
  }

  currentDraft(): HazardReport {
    return this.draft;
  }
}
