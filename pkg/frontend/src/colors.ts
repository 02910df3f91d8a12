// Fixed slot colors; must stay consistent with the server's display ranges.

export type SlotKind = "Adverb" | "Verb" | "Noun" | "Adjective";

export const SLOT_KINDS: SlotKind[] = ["Adverb", "Verb", "Noun", "Adjective"];

export const SLOT_COLORS: Record<SlotKind, string> = {
  Adverb: "red",
  Verb: "yellow",
  Noun: "green",
  Adjective: "blue",
};

export function slotClass(kind: SlotKind): string {
  return `slot-${SLOT_COLORS[kind]}`;
}

export function highlightClass(kind: SlotKind): string {
  return `hl-${SLOT_COLORS[kind]}`;
}
