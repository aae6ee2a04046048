// Thin transport over the session endpoints with idempotent submissions.
// A submission keeps its token across retries, so a timeout followed by a
// retry can never apply an action twice.

import { ApiError, SCHEMA, SessionView } from "./types.js";

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ status: number; json(): Promise<unknown> }>;

export class SchemaMismatchError extends Error {
  constructor(got: string | undefined) {
    super(`server speaks ${got ?? "unknown"}, client expects ${SCHEMA}`);
  }
}

export class ServerError extends Error {
  readonly code: string;
  constructor(err: ApiError) {
    super(err.message);
    this.code = err.error;
  }
}

function checkSchema(view: SessionView): SessionView {
  if (view.schema !== SCHEMA) {
    throw new SchemaMismatchError(view.schema);
  }
  return view;
}

let tokenCounter = 0;

export function freshToken(): string {
  tokenCounter += 1;
  return `ui-${Date.now().toString(36)}-${tokenCounter.toString(36)}-${Math.random()
    .toString(36)
    .slice(2, 10)}`;
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike,
    private readonly retries = 2,
  ) {}

  private async request(path: string, init?: Parameters<FetchLike>[1]):
      Promise<SessionView> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    const body = (await response.json()) as SessionView & ApiError;
    if (response.status >= 400) {
      throw new ServerError(body);
    }
    return checkSchema(body);
  }

  async createSession(humanSeat?: number, seed?: number): Promise<SessionView> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ human_seat: humanSeat ?? null, seed: seed ?? null }),
    });
  }

  async getView(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }

  /** Submit an action; network failures retry with the same token. */
  async submitAction(sessionId: string, action: number,
                     token: string = freshToken()): Promise<SessionView> {
    let lastFailure: unknown = null;
    for (let attempt = 0; attempt <= this.retries; attempt += 1) {
      try {
        return await this.request(`/sessions/${sessionId}/actions`, {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify({ action, token }),
        });
      } catch (failure) {
        if (failure instanceof ServerError || failure instanceof SchemaMismatchError) {
          throw failure; // the server answered; retrying cannot help
        }
        lastFailure = failure;
      }
    }
    throw lastFailure;
  }
}

/** Poll the view until the session leaves `status`, with a step budget. */
export async function pollUntilChanged(
  client: ApiClient,
  sessionId: string,
  status: string,
  maxPolls = 120,
  waitMs = 500,
  sleeper: (ms: number) => Promise<void> = (ms) =>
    new Promise((resolve) => setTimeout(resolve, ms)),
): Promise<SessionView> {
  let view = await client.getView(sessionId);
  let polls = 0;
  while (view.status === status && polls < maxPolls) {
    await sleeper(waitMs);
    view = await client.getView(sessionId);
    polls += 1;
  }
  return view;
}
