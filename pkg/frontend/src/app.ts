// Browser bootstrap: wires the renderer and client to the DOM. One active
// session per tab; submissions are serialized by the pending token.

import { ApiClient, SchemaMismatchError, ServerError, freshToken } from "./api.js";
import { renderView } from "./render.js";
import { ClientSessionModel, emptyModel } from "./types.js";

export class App {
  private model: ClientSessionModel = emptyModel();

  constructor(
    private readonly client: ApiClient,
    private readonly root: { innerHTML: string },
    private readonly onRender: (html: string) => void = () => {},
  ) {}

  private paint(): void {
    if (!this.model.view) {
      this.root.innerHTML = '<div class="menu waiting">no session</div>';
      return;
    }
    const html = renderView(
      this.model.view,
      this.model.selectedAction,
      this.model.pendingToken !== null,
      this.model.lastError,
    );
    this.root.innerHTML = html;
    this.onRender(html);
  }

  async start(seat?: number, seed?: number): Promise<void> {
    this.model = emptyModel();
    try {
      this.model.view = await this.client.createSession(seat, seed);
    } catch (failure) {
      this.model.lastError = failure instanceof Error ? failure.message : String(failure);
    }
    this.paint();
  }

  /** Click handler: optimistic lock until the server view returns. */
  async choose(action: number): Promise<void> {
    const view = this.model.view;
    if (!view || view.status !== "AwaitingHuman" || this.model.pendingToken) {
      return;
    }
    this.model.selectedAction = action;
    this.model.pendingToken = freshToken();
    this.model.lastError = null;
    this.paint();
    try {
      this.model.view = await this.client.submitAction(
        view.session_id, action, this.model.pendingToken);
    } catch (failure) {
      if (failure instanceof ServerError) {
        this.model.lastError = `${failure.code}: ${failure.message}`;
      } else if (failure instanceof SchemaMismatchError) {
        this.model.lastError = failure.message;
      } else {
        this.model.lastError = "network failure; please retry";
      }
    } finally {
      this.model.pendingToken = null;
      this.model.selectedAction = null;
    }
    this.paint();
  }

  snapshot(): ClientSessionModel {
    return this.model;
  }
}

declare const document: {
  getElementById(id: string): {
    innerHTML: string;
    addEventListener(type: string, handler: (event: {
      target: { closest(sel: string): { dataset: { action?: string } } | null };
    }) => void): void;
  } | null;
} | undefined;

export function mount(base = ""): App | null {
  if (typeof document === "undefined" || !document) {
    return null;
  }
  const root = document.getElementById("app");
  if (!root) {
    return null;
  }
  const fetchImpl = (globalThis as { fetch?: unknown }).fetch as never;
  const app = new App(new ApiClient(base, fetchImpl), root);
  root.addEventListener("click", (event) => {
    const button = event.target.closest("button.menu-action");
    if (button && button.dataset.action !== undefined) {
      void app.choose(Number(button.dataset.action));
    }
  });
  void app.start();
  return app;
}
