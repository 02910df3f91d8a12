// Application shell: phase tabs, view dispatch, one in-flight mutation at a
// time. A full page reload rebuilds every view from API reads alone; the
// only client-side memory is the project id in the location hash.

import { ApiError, api } from "./api.js";
import type { ArtifactView, ProjectView, TraceLinkView } from "./api.js";
import type { SlotKind } from "./colors.js";
import type { PhaseView, ViewState } from "./state.js";
import { initialViewState } from "./state.js";
import { renderDevelopmentView } from "./views/development.js";
import { renderExtractionView } from "./views/extraction.js";
import { renderTranslationView } from "./views/translation.js";
import { el, errorBanner } from "./views/shared.js";

const PHASES: PhaseView[] = ["Extraction", "Translation", "Development"];

export class App {
  state: ViewState = initialViewState();
  project: ProjectView | null = null;
  root: HTMLElement;
  banner: HTMLElement;
  tabs: HTMLElement;
  view: HTMLElement;
  tracePanel: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.banner = el("div", { class: "banner-area" });
    this.tabs = el("nav", { class: "tabs" });
    this.view = el("main", { class: "view" });
    this.tracePanel = el("aside", { class: "trace-panel" });
    root.replaceChildren(
      el("header", { class: "top" }, el("h1", {}, "pedforge"), this.tabs),
      this.banner,
      this.view,
      this.tracePanel,
    );
  }

  async start(projectId: string | null): Promise<void> {
    if (projectId) {
      this.project = await api.getProject(projectId);
    } else {
      this.project = await api.createProject();
      window.location.hash = this.project.id;
    }
    this.state.projectId = this.project.id;
    this.state.phaseView = this.project.phase;
    this.render();
  }

  async refresh(): Promise<void> {
    if (!this.state.projectId) return;
    this.project = await api.getProject(this.state.projectId);
    this.render();
  }

  private async mutate(operation: () => Promise<unknown>): Promise<void> {
    if (this.state.pending) return;
    this.state.pending = true;
    this.render();
    try {
      await operation();
      this.banner.replaceChildren();
    } catch (error) {
      if (error instanceof ApiError) {
        this.showError(error.message, error.code, error.detail);
      } else {
        this.showError(String(error));
      }
    } finally {
      this.state.pending = false;
      await this.refresh();
    }
  }

  showError(message: string, code?: string, detail?: Record<string, unknown>): void {
    this.banner.replaceChildren(errorBanner(message, code));
    if (code === "NOT_ALIGNED" && detail) {
      const kinds = [
        ...((detail.stale as string[]) ?? []),
        ...((detail.missing as string[]) ?? []),
      ];
      for (const kind of kinds) {
        for (const span of this.view.querySelectorAll(
          `.slot-group[data-kind="${kind}"]`,
        )) {
          span.classList.add("alignment-problem");
        }
      }
    }
  }

  async showTrace(ref: string): Promise<void> {
    if (!this.state.projectId) return;
    const chain = await api.trace(this.state.projectId, ref);
    this.renderTrace(ref, chain.links);
  }

  renderTrace(ref: string, links: TraceLinkView[]): void {
    this.tracePanel.replaceChildren(
      el("h3", {}, `Trace of ${ref}`),
      el("ol", { class: "trace-chain" },
        ...links.map((link) =>
          el("li", { "data-ref": link.ref },
            el("code", {}, link.ref),
            ` — ${link.event.action} (#${link.event.sequence})`))),
    );
  }

  downloadArtifact(artifact: ArtifactView): void {
    const blob = new Blob([artifact.content], { type: "text/plain" });
    const url = URL.createObjectURL(blob);
    const anchor = el("a", {
      href: url,
      download: `${artifact.source_candidate}-${artifact.level.toLowerCase()}-v${artifact.version}.txt`,
    });
    anchor.click();
    URL.revokeObjectURL(url);
  }

  render(): void {
    if (!this.project) return;
    this.renderTabs();
    this.renderView();
    this.root.classList.toggle("pending", this.state.pending);
  }

  private renderTabs(): void {
    this.tabs.replaceChildren(
      ...PHASES.map((phase) => {
        const tab = el("button", {
          type: "button",
          class: "tab" + (this.state.phaseView === phase ? " active" : ""),
          "data-phase": phase,
        }, phase);
        tab.addEventListener("click", () => {
          this.state.phaseView = phase;
          this.render();
        });
        return tab;
      }),
      el("span", { class: "server-phase" }, `server: ${this.project!.phase}`),
    );
  }

  private renderView(): void {
    const project = this.project!;
    if (this.state.phaseView === "Extraction") {
      renderExtractionView(this.view, project, {
        submitAnswer: (field, text) =>
          this.mutate(() => api.postAnswer(project.id, field, text)),
        fetchOptions: (field) =>
          this.mutate(() => api.getOptions(project.id, field)),
        composePedagogy: () =>
          this.mutate(async () => {
            await api.composePedagogy(project.id);
            this.state.phaseView = "Translation";
          }),
      });
    } else if (this.state.phaseView === "Translation") {
      renderTranslationView(this.view, project, {
        generateCandidates: (n) =>
          this.mutate(() => api.generateCandidates(project.id, n)),
        regenerateSlot: (candidateId, kind) =>
          this.mutate(() => api.regenerateSlot(project.id, candidateId, kind)),
        editSlot: (candidateId, kind) => {
          const text = window.prompt(`New ${kind} text:`);
          if (!text) return;
          const rationale = window.prompt(
            `Rationale linking the new ${kind} to the pedagogy ${kind} ` +
            "(leave empty to fill in later):",
          );
          this.mutate(() =>
            api.editSlot(project.id, candidateId, kind, text, rationale || undefined),
          );
        },
        acceptCandidate: (candidateId) =>
          this.mutate(async () => {
            await api.acceptCandidate(project.id, candidateId);
            this.state.phaseView = "Development";
          }),
        authorCandidate: (sentence, rationales) =>
          this.mutate(() => api.authorCandidate(project.id, sentence, rationales)),
        showTrace: (ref) => void this.showTrace(ref),
      });
    } else {
      renderDevelopmentView(this.view, project, {
        refine: (instruction) =>
          this.mutate(() => api.refine(project.id, instruction)),
        editSlotInPlace: (kind: SlotKind, text: string) =>
          this.mutate(() =>
            api.refine(project.id, `set ${kind.toLowerCase()} to "${text}"`),
          ),
        zoom: (artifactId) =>
          this.mutate(() => api.zoom(project.id, artifactId)),
        showTrace: (ref) => void this.showTrace(ref),
        downloadArtifact: (artifact) => this.downloadArtifact(artifact),
      });
    }
  }
}

export async function boot(root: HTMLElement): Promise<App> {
  const app = new App(root);
  const fromHash = window.location.hash.replace(/^#/, "") || null;
  await app.start(fromHash);
  return app;
}
