// Development screen: the current game sentence with in-place slot editing
// (sent through the refine endpoint as instructions), a context-aware chat
// box, and the zoom ladder with download and trace affordances.

import type { ArtifactView, ProjectView } from "../api.js";
import type { SlotKind } from "../colors.js";
import { el, gateButton, sentenceSpans } from "./shared.js";

export interface DevelopmentActions {
  refine(instruction: string): void;
  editSlotInPlace(kind: SlotKind, text: string): void;
  zoom(artifactId: string): void;
  showTrace(ref: string): void;
  downloadArtifact(artifact: ArtifactView): void;
}

function currentArtifact(
  project: ProjectView,
  level: ArtifactView["level"],
): ArtifactView | null {
  if (project.accepted_candidate === null) return null;
  for (let index = project.artifacts.length - 1; index >= 0; index -= 1) {
    const artifact = project.artifacts[index];
    if (
      artifact.level === level &&
      artifact.source_candidate === project.accepted_candidate &&
      !artifact.outdated
    ) {
      return artifact;
    }
  }
  return null;
}

function outdatedArtifacts(project: ProjectView): ArtifactView[] {
  return project.artifacts.filter((artifact) => artifact.outdated);
}

function sentencePanel(
  project: ProjectView,
  actions: DevelopmentActions,
): HTMLElement {
  const panel = el("section", { class: "panel sentence-panel", "data-level": "Sentence" },
    el("h3", {}, "Game sentence"));
  const artifact = currentArtifact(project, "Sentence");
  if (!artifact) {
    panel.append(el("p", { class: "empty" }, "Accept a candidate first."));
    return panel;
  }
  const accepted = project.candidates.find(
    (candidate) => candidate.id === project.accepted_candidate,
  );
  if (accepted) {
    // The server's candidate display matches the accepted sentence only at
    // acceptance time; render the artifact's canonical text instead.
    panel.append(el("p", { class: "game-sentence", "data-artifact": artifact.id },
      artifact.content));
  }
  const editor = el("div", { class: "inplace-editor" });
  for (const kind of ["Adverb", "Verb", "Noun", "Adjective"] as SlotKind[]) {
    const input = el("input", {
      type: "text", class: "inplace-slot", "data-kind": kind,
      placeholder: `new ${kind.toLowerCase()} text`,
    });
    const apply = el("button", { type: "button", class: "inplace-apply" }, `Set ${kind}`);
    apply.addEventListener("click", () => {
      if (input.value.trim()) actions.editSlotInPlace(kind, input.value.trim());
    });
    editor.append(el("span", { class: "inplace-group", "data-kind": kind }, input, apply));
  }
  panel.append(editor);
  const zoom = el("button", { type: "button", class: "zoom", "data-artifact": artifact.id },
    "Zoom In");
  zoom.addEventListener("click", () => actions.zoom(artifact.id));
  const trace = el("button", { type: "button", class: "trace" }, "Trace");
  trace.addEventListener("click", () => actions.showTrace(`artifact:${artifact.id}`));
  panel.append(el("div", { class: "panel-actions" }, zoom, trace));
  return panel;
}

function expansionPanel(
  project: ProjectView,
  level: "Paragraph" | "Pseudocode",
  actions: DevelopmentActions,
): HTMLElement {
  const panel = el("section", {
    class: `panel ${level.toLowerCase()}-panel`,
    "data-level": level,
  }, el("h3", {}, level === "Paragraph" ? "Descriptive paragraph" : "Pseudocode"));
  const artifact = currentArtifact(project, level);
  if (!artifact) {
    panel.append(el("p", { class: "empty" },
      level === "Paragraph"
        ? "Zoom In on the sentence to generate a paragraph."
        : "Zoom In on the paragraph to generate pseudocode."));
    return panel;
  }
  panel.append(el("pre", { class: "artifact-content", "data-artifact": artifact.id },
    artifact.content));
  const traceButton = el("button", { type: "button", class: "trace" }, "Trace");
  traceButton.addEventListener("click", () => actions.showTrace(`artifact:${artifact.id}`));
  const panelActions = el("div", { class: "panel-actions" }, traceButton);
  if (level === "Paragraph") {
    const zoom = el("button", {
      type: "button", class: "zoom", "data-artifact": artifact.id,
    }, "Zoom In");
    zoom.addEventListener("click", () => actions.zoom(artifact.id));
    panelActions.prepend(zoom);
  } else {
    // Top of the ladder: no zoom control, only download.
    const download = el("button", { type: "button", class: "download" }, "Download");
    download.addEventListener("click", () => actions.downloadArtifact(artifact));
    panelActions.prepend(download);
  }
  panel.append(panelActions);
  return panel;
}

function chatPanel(project: ProjectView, actions: DevelopmentActions): HTMLElement {
  const panel = el("section", { class: "panel chat-panel" },
    el("h3", {}, "Refine with the assistant"));
  const log = el("ul", { class: "chat-log" });
  for (const turn of project.chat) {
    log.append(
      el("li", {},
        el("span", { class: "chat-instruction" }, turn.instruction),
        el("span", { class: "chat-result" }, turn.sentence)),
    );
  }
  const box = el("input", {
    type: "text", class: "chat-box",
    placeholder: 'e.g. set verb to "stack and compare"',
  });
  const send = gateButton("Send", project.gates.refine, () => {
    if (box.value.trim()) actions.refine(box.value.trim());
  });
  panel.append(log, el("div", { class: "controls" }, box, send));
  return panel;
}

export function renderDevelopmentView(
  root: HTMLElement,
  project: ProjectView,
  actions: DevelopmentActions,
): void {
  const container = el("div", { class: "ladder", "data-view": "development" });
  container.append(
    sentencePanel(project, actions),
    chatPanel(project, actions),
    expansionPanel(project, "Paragraph", actions),
    expansionPanel(project, "Pseudocode", actions),
  );
  const outdated = outdatedArtifacts(project);
  if (outdated.length > 0) {
    container.append(
      el("section", { class: "panel outdated-panel" },
        el("h3", {}, "Outdated versions"),
        el("ul", { class: "outdated-list" },
          ...outdated.map((artifact) =>
            el("li", { class: "outdated", "data-artifact": artifact.id },
              `${artifact.id} (${artifact.level} v${artifact.version})`)))),
    );
  }
  root.replaceChildren(container);
}
