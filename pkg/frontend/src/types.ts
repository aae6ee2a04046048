// Wire types for the play-session/1 API. The client renders exactly what
// the server sends; all game legality lives server-side.

export const SCHEMA = "play-session/1";

export type SessionStatus = "AwaitingHuman" | "Finished";

export interface MenuEntry {
  action: number;
  label: string;
  exemplars?: string[];
}

export interface Reveal {
  roles: string[];
  winner: string;
  utilities: number[];
}

export interface SessionView {
  schema: string;
  session_id: string;
  status: SessionStatus;
  human_seat: number;
  round: number;
  phase: string;
  alive: boolean[];
  transcript: string;
  public_log: string[];
  menu: MenuEntry[];
  reveal?: Reveal;
}

export interface ApiError {
  error: string;
  message: string;
}

// role marginals per player, as produced by the engine's belief module
export interface BeliefOverlay {
  players: number[];
  roles: string[];
  marginals: number[][];
}

export interface ClientSessionModel {
  view: SessionView | null;
  selectedAction: number | null;
  pendingToken: string | null;
  lastError: string | null;
}

export function emptyModel(): ClientSessionModel {
  return { view: null, selectedAction: null, pendingToken: null, lastError: null };
}
