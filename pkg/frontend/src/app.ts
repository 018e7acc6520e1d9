/** Chat application wiring: one in-flight request, recoverable errors. */

import { ApiError, ChatClient } from "./api.js";
import { renderErrorTurn, renderTurn } from "./render.js";

export interface AppElements {
  form: HTMLFormElement;
  input: HTMLInputElement;
  send: HTMLButtonElement;
  turns: HTMLElement;
  status: HTMLElement;
}

export class ChatApp {
  private inFlight = false;

  constructor(
    private readonly doc: Document,
    private readonly els: AppElements,
    private readonly client: ChatClient,
  ) {
    els.form.addEventListener("submit", (e) => {
      e.preventDefault();
      void this.send();
    });
    els.input.addEventListener("input", () => this.syncSendState());
    this.syncSendState();
  }

  get busy(): boolean {
    return this.inFlight;
  }

  syncSendState(): void {
    this.els.send.disabled = this.inFlight || this.els.input.value.trim() === "";
  }

  async send(messageOverride?: string): Promise<void> {
    const message = (messageOverride ?? this.els.input.value).trim();
    if (message === "" || this.inFlight) return;
    this.inFlight = true;
    this.syncSendState();
    this.els.status.textContent = "thinking…";
    try {
      const payload = await this.client.respond(message);
      const turn = { userMessage: message, payload, timestamp: new Date() };
      this.els.turns.appendChild(renderTurn(this.doc, turn));
      if (messageOverride === undefined) this.els.input.value = "";
      this.els.status.textContent = `responded in ${payload.latency_ms.toFixed(0)} ms`;
    } catch (err) {
      const detail = err instanceof ApiError ? err.message : String(err);
      const errorTurn = renderErrorTurn(this.doc, detail, () => {
        errorTurn.remove();
        void this.send(message);
      });
      this.els.turns.appendChild(errorTurn);
      this.els.status.textContent = "error";
    } finally {
      this.inFlight = false;
      this.syncSendState();
    }
  }
}

/** Service URL: ?service=... query parameter, else same origin. */
export function serviceUrl(loc: Location): string {
  const fromQuery = new URLSearchParams(loc.search).get("service");
  return (fromQuery ?? loc.origin).replace(/\/$/, "");
}

export function mount(doc: Document, loc: Location): ChatApp {
  const els: AppElements = {
    form: doc.querySelector("#chat-form") as HTMLFormElement,
    input: doc.querySelector("#chat-input") as HTMLInputElement,
    send: doc.querySelector("#chat-send") as HTMLButtonElement,
    turns: doc.querySelector("#turns") as HTMLElement,
    status: doc.querySelector("#status") as HTMLElement,
  };
  return new ChatApp(doc, els, new ChatClient(serviceUrl(loc)));
}
