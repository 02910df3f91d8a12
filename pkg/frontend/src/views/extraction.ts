// Extraction screen: the co-authored requirement document on the left, the
// current question with an answer box and suggested options on the right.

import type { ProjectView } from "../api.js";
import { el, gateButton } from "./shared.js";

export interface ExtractionActions {
  submitAnswer(field: string, text: string): void;
  fetchOptions(field: string): void;
  composePedagogy(): void;
}

const FIELD_ORDER = [
  "ConceptScope",
  "Materials",
  "ObservableAction",
  "PerformanceTarget",
  "Context",
];

function documentPane(project: ProjectView): HTMLElement {
  const pane = el("section", { class: "pane document-pane" },
    el("h2", {}, "Requirement document"));
  const list = el("dl", { class: "document" });
  for (const field of FIELD_ORDER) {
    const entry = project.document[field];
    const term = el("dt", { "data-field": field }, field);
    let detail: HTMLElement;
    if (entry === null || entry === undefined) {
      term.classList.add("unanswered");
      detail = el("dd", { class: "unanswered", "data-field": field }, "(unanswered)");
    } else if (entry.specificity.passed) {
      term.classList.add("passed");
      detail = el("dd", { class: "passed", "data-field": field }, entry.text);
    } else {
      term.classList.add("failed");
      detail = el(
        "dd",
        { class: "failed", "data-field": field },
        entry.text,
        el("ul", { class: "reasons" },
          ...entry.specificity.reasons.map((reason) => el("li", {}, reason))),
      );
    }
    list.append(term, detail);
  }
  pane.append(list);
  return pane;
}

function questionPane(project: ProjectView, actions: ExtractionActions): HTMLElement {
  const pane = el("section", { class: "pane question-pane" },
    el("h2", {}, "Assistant"));
  if (project.question === null) {
    pane.append(
      el("p", { class: "complete-note" },
        "All five items pass. Compose the pedagogy sentence to continue."),
    );
  } else {
    const { field, prompt } = project.question;
    pane.append(el("p", { class: "question", "data-field": field }, prompt));
    const answerBox = el("textarea", {
      class: "answer-box",
      rows: "3",
      placeholder: "Your answer",
    });
    const submit = el("button", { type: "button", class: "submit-answer" }, "Answer");
    submit.addEventListener("click", () => {
      if (answerBox.value.trim()) {
        actions.submitAnswer(field, answerBox.value);
      }
    });
    const suggest = el("button", { type: "button", class: "fetch-options" },
      "Suggest options");
    suggest.addEventListener("click", () => actions.fetchOptions(field));
    const options = el("ul", { class: "options" });
    for (const option of project.options[field] ?? []) {
      const pick = el("button", { type: "button", class: "option" }, option);
      pick.addEventListener("click", () => {
        answerBox.value = option;
      });
      options.append(el("li", {}, pick));
    }
    pane.append(answerBox, el("div", { class: "controls" }, submit, suggest), options);
  }
  pane.append(
    gateButton("Compose pedagogy sentence", project.gates.compose_pedagogy, () =>
      actions.composePedagogy(),
    ),
  );
  return pane;
}

export function renderExtractionView(
  root: HTMLElement,
  project: ProjectView,
  actions: ExtractionActions,
): void {
  root.replaceChildren(
    el("div", { class: "two-pane", "data-view": "extraction" },
      documentPane(project),
      questionPane(project, actions)),
  );
}
