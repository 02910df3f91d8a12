// Translation screen: pedagogy sentence on the left, candidate cards on the
// right. Hovering a game slot highlights the same-kind pedagogy slot in the
// slot's fixed color and shows the rationale linking the two.

import type { CandidateView, ProjectView } from "../api.js";
import type { SlotKind } from "../colors.js";
import { SLOT_KINDS, highlightClass } from "../colors.js";
import { el, gateButton, sentenceSpans } from "./shared.js";

export interface TranslationActions {
  generateCandidates(n: number): void;
  regenerateSlot(candidateId: string, kind: SlotKind): void;
  editSlot(candidateId: string, kind: SlotKind): void;
  acceptCandidate(candidateId: string): void;
  authorCandidate(sentence: Record<string, string>, rationales: Record<string, string>): void;
  showTrace(ref: string): void;
}

function pedagogySlot(root: HTMLElement, kind: SlotKind): HTMLElement | null {
  return root.querySelector(`.slot[data-kind="${kind}"][data-role="pedagogy"]`);
}

function linkHighlighting(
  root: HTMLElement,
  kind: SlotKind,
  candidate: CandidateView,
  span: HTMLElement,
  on: boolean,
): void {
  const target = pedagogySlot(root, kind);
  if (target) {
    target.classList.toggle(highlightClass(kind), on);
    if (on) {
      target.setAttribute("data-highlight", "true");
    } else {
      target.removeAttribute("data-highlight");
    }
  }
  let popover = span.querySelector(".rationale-popover");
  if (on && !popover) {
    const rationale = candidate.rationales.find((r) => r.kind === kind);
    span.append(
      el("span", { class: "rationale-popover", role: "tooltip" },
        rationale ? rationale.explanation : "(no rationale)"),
    );
  } else if (!on && popover) {
    popover.remove();
  }
}

function alignmentBadge(candidate: CandidateView, kind: SlotKind): HTMLElement | null {
  const entry = candidate.alignment[kind];
  if (!entry || entry.status === "Aligned") return null;
  return el("span", { class: "misaligned", "data-kind": kind }, entry.status);
}

function candidateCard(
  root: HTMLElement,
  project: ProjectView,
  candidate: CandidateView,
  actions: TranslationActions,
): HTMLElement {
  const card = el("article", {
    class: "candidate-card" + (project.accepted_candidate === candidate.id ? " accepted" : ""),
    "data-candidate": candidate.id,
  });
  card.append(el("header", {},
    el("strong", {}, candidate.id),
    el("span", { class: "origin" }, candidate.origin),
    project.accepted_candidate === candidate.id
      ? el("span", { class: "accepted-mark" }, "accepted")
      : null as unknown as Node,
  ));
  card.append(
    sentenceSpans(candidate.display, "candidate", {
      onEnter: (kind, span) => linkHighlighting(root, kind, candidate, span, true),
      onLeave: (kind, span) => linkHighlighting(root, kind, candidate, span, false),
    }),
  );
  const controls = el("div", { class: "slot-controls" });
  for (const kind of SLOT_KINDS) {
    const group = el("span", { class: "slot-group", "data-kind": kind });
    const edit = el("button", { type: "button", class: "edit-slot" }, `Edit ${kind}`);
    edit.addEventListener("click", () => actions.editSlot(candidate.id, kind));
    const regen = el("button", { type: "button", class: "regen-slot" }, `Regenerate ${kind}`);
    regen.addEventListener("click", () => actions.regenerateSlot(candidate.id, kind));
    group.append(edit, regen);
    const badge = alignmentBadge(candidate, kind);
    if (badge) group.append(badge);
    controls.append(group);
  }
  card.append(controls);
  const accept = el("button", { type: "button", class: "accept" }, "Accept");
  if (!candidate.fully_aligned) {
    accept.disabled = true;
    accept.title = "supply a current rationale for every slot first";
  } else {
    accept.addEventListener("click", () => actions.acceptCandidate(candidate.id));
  }
  const trace = el("button", { type: "button", class: "trace" }, "Trace");
  trace.addEventListener("click", () => actions.showTrace(`candidate:${candidate.id}`));
  card.append(el("div", { class: "card-actions" }, accept, trace));
  return card;
}

function authorForm(actions: TranslationActions): HTMLElement {
  const form = el("details", { class: "author-form" },
    el("summary", {}, "Write my own"));
  const slotInputs: Record<string, HTMLInputElement> = {};
  const rationaleInputs: Record<string, HTMLInputElement> = {};
  for (const kind of SLOT_KINDS) {
    const slot = el("input", {
      type: "text", class: "author-slot", "data-kind": kind,
      placeholder: `${kind} text`,
    });
    const why = el("input", {
      type: "text", class: "author-rationale", "data-kind": kind,
      placeholder: `${kind} rationale`,
    });
    slotInputs[kind] = slot;
    rationaleInputs[kind] = why;
    form.append(el("label", {}, kind, slot, why));
  }
  const submit = el("button", { type: "button", class: "author-submit" },
    "Add candidate");
  submit.addEventListener("click", () => {
    actions.authorCandidate(
      {
        adverb: slotInputs.Adverb.value,
        verb: slotInputs.Verb.value,
        noun: slotInputs.Noun.value,
        adjective: slotInputs.Adjective.value,
      },
      Object.fromEntries(
        SLOT_KINDS.map((kind) => [kind, rationaleInputs[kind].value]),
      ),
    );
  });
  form.append(submit);
  return form;
}

export function renderTranslationView(
  root: HTMLElement,
  project: ProjectView,
  actions: TranslationActions,
): void {
  const container = el("div", { class: "two-pane", "data-view": "translation" });

  const left = el("section", { class: "pane pedagogy-pane" },
    el("h2", {}, "Pedagogy sentence"));
  if (project.pedagogy) {
    left.append(
      el("p", { class: "pedagogy-version" }, project.pedagogy.version),
      sentenceSpans(project.pedagogy.display, "pedagogy"),
    );
  } else {
    left.append(el("p", { class: "empty" }, "No pedagogy sentence yet."));
  }

  const right = el("section", { class: "pane candidates-pane" },
    el("h2", {}, "Game-language candidates"));
  right.append(
    gateButton("Generate 3 candidates", project.gates.generate_candidates, () =>
      actions.generateCandidates(3),
    ),
  );
  const cards = el("div", { class: "candidate-list" });
  container.append(left, right);
  for (const candidate of project.candidates) {
    cards.append(candidateCard(container, project, candidate, actions));
  }
  right.append(cards, authorForm(actions));

  root.replaceChildren(container);
}
