// Shared test setup: a fetch stub that serves the captured API fixtures,
// exactly as the live service would.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { vi } from "vitest";

import type { ProjectView } from "../src/api.js";

function fixture<T>(name: string): T {
  const path = join(__dirname, "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export const completeProject = (): ProjectView =>
  fixture<ProjectView>("project_complete.json");
export const emptyProject = (): ProjectView =>
  fixture<ProjectView>("project_empty.json");
export const mappingTable = (): unknown => fixture("mapping_table.json");
export const tracePseudocode = (): unknown => fixture("trace_pseudocode.json");

export interface FetchLogEntry {
  url: string;
  method: string;
}

/** Install a fetch stub serving the given project views by id. */
export function stubApi(projects: Record<string, ProjectView>): FetchLogEntry[] {
  const log: FetchLogEntry[] = [];
  const respond = (body: unknown, status = 200) =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });

  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const method = init?.method ?? "GET";
      log.push({ url, method });
      let match = url.match(/^\/projects\/([^/]+)$/);
      if (match && method === "GET") {
        const project = projects[match[1]];
        if (project) return respond(project);
        return respond(
          { error: { code: "NOT_FOUND", message: "unknown project", detail: {} } },
          404,
        );
      }
      match = url.match(/^\/projects\/([^/]+)\/trace\/(.+)$/);
      if (match && method === "GET") {
        return respond(tracePseudocode());
      }
      if (url === "/mapping-table") {
        return respond(mappingTable());
      }
      return respond(
        { error: { code: "NOT_FOUND", message: `unstubbed: ${method} ${url}`, detail: {} } },
        404,
      );
    }),
  );
  return log;
}

export function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app") as HTMLElement;
}

export function hover(element: Element): void {
  element.dispatchEvent(new MouseEvent("mouseenter", { bubbles: false }));
}

export function unhover(element: Element): void {
  element.dispatchEvent(new MouseEvent("mouseleave", { bubbles: false }));
}
