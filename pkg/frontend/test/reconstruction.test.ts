// After a completed session, a full page reload must rebuild all three
// views from API reads alone (the client keeps no authoritative state).

import { afterEach, describe, expect, it } from "vitest";
import { vi } from "vitest";

import { boot } from "../src/app.js";
import { completeProject, emptyProject, mount, stubApi } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
  window.location.hash = "";
});

describe("full reload reconstruction", () => {
  it("renders all three views of a finished session from GET responses only", async () => {
    const log = stubApi({ "demo-project": completeProject() });
    window.location.hash = "demo-project";
    const root = mount();
    const app = await boot(root);

    // Only reads were issued to rebuild the app.
    expect(log.every((entry) => entry.method === "GET")).toBe(true);

    // The server phase is Development; the app opens there.
    expect(app.state.phaseView).toBe("Development");
    const gameSentence = root.querySelector(".game-sentence");
    expect(gameSentence?.textContent).toContain("stack and compare");
    expect(root.querySelector(".paragraph-panel .artifact-content")?.textContent)
      .toContain("For example");
    const pseudocode = root.querySelector(".pseudocode-panel .artifact-content");
    expect(pseudocode?.textContent).toContain("GAME:");
    expect(pseudocode?.textContent).toContain("WIN_CONDITION:");
    // Outdated rungs are flagged.
    expect(root.querySelectorAll(".outdated-list .outdated").length).toBeGreaterThan(0);
    // Pseudocode panel offers download but no further zoom (top of ladder).
    expect(root.querySelector(".pseudocode-panel .download")).not.toBeNull();
    expect(root.querySelector(".pseudocode-panel .zoom")).toBeNull();

    // Translation view: pedagogy sentence plus three candidate cards, each
    // with four colored slots.
    (root.querySelector('.tab[data-phase="Translation"]') as HTMLElement).click();
    const cards = root.querySelectorAll(".candidate-card");
    expect(cards.length).toBe(3);
    for (const card of cards) {
      expect(card.querySelectorAll('.slot[data-role="candidate"]').length).toBe(4);
    }
    expect(
      root.querySelectorAll('.slot[data-role="pedagogy"]').length,
    ).toBe(4);
    const acceptedCard = root.querySelector(".candidate-card.accepted");
    expect(acceptedCard?.getAttribute("data-candidate")).toBe("c2");

    // Extraction view: all five items answered and passing.
    (root.querySelector('.tab[data-phase="Extraction"]') as HTMLElement).click();
    expect(root.querySelectorAll(".document dt.passed").length).toBe(5);
    expect(root.textContent).toContain("All five items pass");
  });

  it("renders a fresh project with the first question and closed gates", async () => {
    stubApi({ "fresh-project": emptyProject() });
    window.location.hash = "fresh-project";
    const root = mount();
    const app = await boot(root);

    expect(app.state.phaseView).toBe("Extraction");
    expect(root.querySelectorAll(".document dd.unanswered").length).toBe(5);
    const question = root.querySelector(".question");
    expect(question?.getAttribute("data-field")).toBe("ConceptScope");

    // Gate closed: compose button disabled with the server's reason.
    const compose = [...root.querySelectorAll("button")].find((button) =>
      button.textContent?.includes("Compose pedagogy sentence"),
    ) as HTMLButtonElement;
    expect(compose.disabled).toBe(true);
    expect(compose.title).toContain("not complete");

    // Development view shows gates closed as well.
    (root.querySelector('.tab[data-phase="Development"]') as HTMLElement).click();
    const send = [...root.querySelectorAll("button")].find(
      (button) => button.textContent === "Send",
    ) as HTMLButtonElement;
    expect(send.disabled).toBe(true);
  });

  it("renders the trace chain through the trace affordance", async () => {
    stubApi({ "demo-project": completeProject() });
    window.location.hash = "demo-project";
    const root = mount();
    const app = await boot(root);
    await app.showTrace("artifact:a4");
    const items = root.querySelectorAll(".trace-chain li");
    expect(items.length).toBeGreaterThanOrEqual(6);
    const text = root.querySelector(".trace-panel")?.textContent ?? "";
    expect(text).toContain("artifact:a4");
    expect(text).toContain("pedagogy:p1");
    expect(text).toContain("AnswerIngested");
  });
});
