// Small DOM helpers shared by the three screens.

import type { DisplayView } from "../api.js";
import type { SlotKind } from "../colors.js";
import { slotClass } from "../colors.js";

type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    if (name === "class") {
      node.className = value;
    } else {
      node.setAttribute(name, value);
    }
  }
  for (const child of children) {
    if (child == null) continue;
    node.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return node;
}

export interface SlotSpanHooks {
  onEnter?: (kind: SlotKind, span: HTMLElement) => void;
  onLeave?: (kind: SlotKind, span: HTMLElement) => void;
}

/** Render display text as plain text with one colored span per slot. */
export function sentenceSpans(
  display: DisplayView,
  role: string,
  hooks: SlotSpanHooks = {},
): HTMLElement {
  const container = el("span", { class: "sentence", "data-role": role });
  let cursor = 0;
  for (const range of display.ranges) {
    if (range.start > cursor) {
      container.append(document.createTextNode(display.text.slice(cursor, range.start)));
    }
    const text = display.text.slice(range.start, range.start + range.length);
    const span = el(
      "span",
      {
        class: `slot ${slotClass(range.kind)}`,
        "data-kind": range.kind,
        "data-color": range.color,
        "data-role": role,
      },
      text,
    );
    if (hooks.onEnter) {
      span.addEventListener("mouseenter", () => hooks.onEnter!(range.kind, span));
    }
    if (hooks.onLeave) {
      span.addEventListener("mouseleave", () => hooks.onLeave!(range.kind, span));
    }
    container.append(span);
    cursor = range.start + range.length;
  }
  if (cursor < display.text.length) {
    container.append(document.createTextNode(display.text.slice(cursor)));
  }
  return container;
}

export function gateButton(
  label: string,
  gate: { open: boolean; reason: string | null },
  onClick: () => void,
): HTMLButtonElement {
  const button = el("button", { type: "button" }, label);
  if (!gate.open) {
    button.disabled = true;
    button.title = gate.reason ?? "unavailable";
  } else {
    button.addEventListener("click", onClick);
  }
  return button;
}

export function errorBanner(message: string, code?: string): HTMLElement {
  return el(
    "div",
    { class: "banner error", role: "alert" },
    code ? `${code}: ${message}` : message,
  );
}
