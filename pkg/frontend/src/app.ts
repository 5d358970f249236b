import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { AssessPanel } from "./views/assessPanel.js";
import { CompareTable } from "./views/compareTable.js";
import { GuidelineEditor } from "./views/guidelineEditor.js";
import { ReviewQueue } from "./views/reviewQueue.js";

type TabName = "guidelines" | "assess" | "review" | "compare";

export class App {
  readonly root = el("div", { class: "app" });
  readonly guidelines: GuidelineEditor;
  readonly assess: AssessPanel;
  readonly review: ReviewQueue;
  readonly compare: CompareTable;
  private active: TabName = "review";
  private readonly viewHost = el("main", {});

  constructor(readonly api: ApiClient = new ApiClient()) {
    this.guidelines = new GuidelineEditor(api);
    this.assess = new AssessPanel(api);
    this.review = new ReviewQueue(api);
    this.compare = new CompareTable(api);
  }

  async start(): Promise<void> {
    this.renderShell();
    await this.show("review");
  }

  private renderShell(): void {
    clear(this.root);
    const tab = (name: TabName, label: string) =>
      el(
        "button",
        {
          class: `tab${name === this.active ? " active" : ""}`,
          "data-tab": name,
          onClick: () => void this.show(name),
        },
        label,
      );
    this.root.append(
      el(
        "header",
        { class: "topbar" },
        el("h1", {}, "hazardeval console"),
        el(
          "nav",
          {},
          tab("guidelines", "Guidelines"),
          tab("assess", "Assess"),
          tab("review", "Review queue"),
          tab("compare", "Compare"),
        ),
      ),
      this.viewHost,
    );
  }

  async show(name: TabName): Promise<void> {
    this.active = name;
    this.renderShell();
    clear(this.viewHost);
    switch (name) {
      case "guidelines":
        this.viewHost.append(this.guidelines.root);
        await this.guidelines.load();
        break;
      case "assess":
        this.viewHost.append(this.assess.root);
        await this.assess.load();
        break;
      case "review":
        this.viewHost.append(this.review.root);
        await this.review.load();
        break;
      case "compare":
        this.viewHost.append(this.compare.root);
        break;
    }
  }
}
