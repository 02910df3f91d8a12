// Client view state. The server is authoritative; this only tracks which
// screen is showing, what is selected, and whether a request is in flight
// (at most one mutating request per project at a time).

export type PhaseView = "Extraction" | "Translation" | "Development";

export interface ViewState {
  projectId: string | null;
  phaseView: PhaseView;
  selectedCandidate: string | null;
  selectedArtifact: string | null;
  pending: boolean;
}

export function initialViewState(): ViewState {
  return {
    projectId: null,
    phaseView: "Extraction",
    selectedCandidate: null,
    selectedArtifact: null,
    pending: false,
  };
}
