// Typed client over the service's HTTP endpoints. The UI talks to the
// documented API only and holds no authoritative state of its own.

import type { SlotKind } from "./colors.js";

export interface SpecificityView {
  passed: boolean;
  reasons: string[];
}

export interface FieldAnswerView {
  text: string;
  specificity: SpecificityView;
  parsed: Record<string, unknown> | null;
}

export type DocumentView = Record<string, FieldAnswerView | null>;

export interface ColorRangeView {
  kind: SlotKind;
  start: number;
  length: number;
  color: string;
}

export interface DisplayView {
  text: string;
  ranges: ColorRangeView[];
}

export interface SentenceRecord {
  register: string;
  adverb: string;
  verb: string;
  noun: string;
  adjective: string;
}

export interface RationaleView {
  kind: SlotKind;
  explanation: string;
  pedagogy_slot_text: string;
  stale: boolean;
}

export interface AlignmentEntry {
  status: "Aligned" | "MissingRationale" | "StaleReference";
  rationale: RationaleView | null;
}

export interface PedagogyView {
  version: string;
  sentence: SentenceRecord;
  canonical: string;
  display: DisplayView;
}

export interface CandidateView {
  id: string;
  sentence: SentenceRecord;
  canonical: string;
  display: DisplayView;
  rationales: RationaleView[];
  origin: string;
  source_pedagogy_version: string;
  alignment: Record<SlotKind, AlignmentEntry>;
  fully_aligned: boolean;
}

export interface ArtifactView {
  id: string;
  level: "Sentence" | "Paragraph" | "Pseudocode";
  content: string;
  parent: string | null;
  source_candidate: string;
  version: number;
  outdated: boolean;
}

export interface GateView {
  open: boolean;
  reason: string | null;
}

export interface QuestionView {
  field: string;
  prompt: string;
}

export interface ProjectView {
  id: string;
  format_version: string;
  phase: "Extraction" | "Translation" | "Development";
  document: DocumentView;
  document_complete: boolean;
  question: QuestionView | null;
  options: Record<string, string[]>;
  pedagogy: PedagogyView | null;
  pedagogy_versions: PedagogyView[];
  candidates: CandidateView[];
  accepted_candidate: string | null;
  artifacts: ArtifactView[];
  chat: { instruction: string; sentence: string }[];
  gates: Record<string, GateView>;
  warnings: string[];
}

export interface MappingRowView {
  kind: SlotKind;
  element_label: string;
  teaching_meaning: string;
  arrow: string;
  game_meaning: string;
}

export interface TraceLinkView {
  ref: string;
  event: {
    sequence: number;
    timestamp: string;
    actor: string;
    action: string;
    subject: string;
    payload: Record<string, unknown>;
  };
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: Record<string, unknown>;
}

export class ApiError extends Error {
  code: string;
  detail: Record<string, unknown>;

  constructor(body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.detail = body.detail;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(body.error as ApiErrorBody);
  }
  return body as T;
}

export const api = {
  createProject(): Promise<ProjectView> {
    return request("/projects", { method: "POST" });
  },
  getProject(id: string): Promise<ProjectView> {
    return request(`/projects/${id}`);
  },
  getQuestion(id: string): Promise<{ complete: boolean; field?: string; prompt?: string }> {
    return request(`/projects/${id}/question`);
  },
  postAnswer(id: string, field: string, text: string): Promise<unknown> {
    return request(`/projects/${id}/answers`, {
      method: "POST",
      body: JSON.stringify({ field, text }),
    });
  },
  getOptions(id: string, field: string): Promise<{ field: string; options: string[] }> {
    return request(`/projects/${id}/options/${field}`);
  },
  composePedagogy(id: string): Promise<unknown> {
    return request(`/projects/${id}/pedagogy-sentence`, { method: "POST" });
  },
  generateCandidates(id: string, n: number): Promise<unknown> {
    return request(`/projects/${id}/candidates`, {
      method: "POST",
      body: JSON.stringify({ n }),
    });
  },
  authorCandidate(
    id: string,
    sentence: Partial<SentenceRecord>,
    rationales: Record<string, string>,
  ): Promise<unknown> {
    return request(`/projects/${id}/candidates`, {
      method: "POST",
      body: JSON.stringify({ sentence, rationales }),
    });
  },
  regenerateSlot(id: string, candidateId: string, kind: SlotKind): Promise<unknown> {
    return request(
      `/projects/${id}/candidates/${candidateId}/slots/${kind}/regenerate`,
      { method: "POST" },
    );
  },
  editSlot(
    id: string,
    candidateId: string,
    kind: SlotKind,
    text: string,
    rationale?: string,
  ): Promise<unknown> {
    return request(`/projects/${id}/candidates/${candidateId}/slots/${kind}`, {
      method: "PATCH",
      body: JSON.stringify({ text, rationale: rationale ?? null }),
    });
  },
  acceptCandidate(id: string, candidateId: string): Promise<unknown> {
    return request(`/projects/${id}/candidates/${candidateId}/accept`, {
      method: "POST",
    });
  },
  refine(id: string, instruction: string): Promise<ArtifactView> {
    return request(`/projects/${id}/refine`, {
      method: "POST",
      body: JSON.stringify({ instruction }),
    });
  },
  zoom(id: string, artifactId: string): Promise<ArtifactView> {
    return request(`/projects/${id}/artifacts/${artifactId}/zoom`, {
      method: "POST",
    });
  },
  trace(id: string, ref: string): Promise<{ links: TraceLinkView[] }> {
    return request(`/projects/${id}/trace/${ref}`);
  },
  mappingTable(): Promise<{ rows: MappingRowView[] }> {
    return request("/mapping-table");
  },
};
