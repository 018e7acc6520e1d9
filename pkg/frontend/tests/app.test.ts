// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import { ChatApp, serviceUrl, type AppElements } from "../src/app.js";
import { ChatClient } from "../src/api.js";

const GOOD = {
  response: "nice indeed",
  tokens: ["nice", "indeed"],
  affect_norms: [2.5, 0],
  affect_score: 1.25,
  truncated: false,
  latency_ms: 3.2,
  attention: [
    [0.9, 0.1],
    [0.4, 0.6],
  ],
};

function setup(): { app: ChatApp; els: AppElements; client: ChatClient } {
  document.body.innerHTML = `
    <div id="turns"></div>
    <form id="chat-form">
      <input id="chat-input" type="text">
      <button id="chat-send" type="submit"></button>
    </form>
    <p id="status"></p>`;
  const els: AppElements = {
    form: document.querySelector("#chat-form")!,
    input: document.querySelector("#chat-input")!,
    send: document.querySelector("#chat-send")!,
    turns: document.querySelector("#turns")!,
    status: document.querySelector("#status")!,
  };
  const client = new ChatClient("http://svc");
  return { app: new ChatApp(document, els, client), els, client };
}

beforeEach(() => vi.restoreAllMocks());

describe("send button state", () => {
  it("is disabled for empty or whitespace input", () => {
    const { app, els } = setup();
    expect(els.send.disabled).toBe(true);
    els.input.value = "   ";
    app.syncSendState();
    expect(els.send.disabled).toBe(true);
    els.input.value = "hello";
    app.syncSendState();
    expect(els.send.disabled).toBe(false);
  });

  it("is disabled while a request is in flight", async () => {
    const { app, els, client } = setup();
    let release!: () => void;
    vi.spyOn(client, "respond").mockImplementation(
      () => new Promise((res) => (release = () => res(GOOD))),
    );
    els.input.value = "hello";
    app.syncSendState();
    const pending = app.send();
    expect(app.busy).toBe(true);
    expect(els.send.disabled).toBe(true);
    release();
    await pending;
    expect(app.busy).toBe(false);
  });
});

describe("round trip", () => {
  it("renders a turn with highlights and heatmap and clears the input", async () => {
    const { app, els, client } = setup();
    vi.spyOn(client, "respond").mockResolvedValue(GOOD);
    els.input.value = "how nice";
    await app.send();
    const turn = els.turns.querySelector(".turn")!;
    expect(turn.querySelector(".user-message")!.textContent).toBe("how nice");
    expect(turn.querySelectorAll(".affect-highlight")).toHaveLength(1);
    expect(turn.querySelectorAll("td.heatmap-cell")).toHaveLength(4);
    expect(els.input.value).toBe("");
  });
});

describe("error state", () => {
  it("shows a visible error turn and recovers via retry", async () => {
    const { app, els, client } = setup();
    const spy = vi
      .spyOn(client, "respond")
      .mockRejectedValueOnce(new Error("service unreachable"))
      .mockResolvedValueOnce(GOOD);
    els.input.value = "hello";
    await app.send();
    const errorTurn = els.turns.querySelector(".turn-error")!;
    expect(errorTurn).not.toBeNull();
    expect(errorTurn.querySelector(".error-message")!.textContent).toContain(
      "unreachable",
    );
    expect(els.send.disabled).toBe(false); // input kept, app still usable

    const retry = errorTurn.querySelector("button.retry-button") as HTMLButtonElement;
    retry.click();
    await vi.waitFor(() => {
      expect(els.turns.querySelector(".turn:not(.turn-error)")).not.toBeNull();
    });
    expect(els.turns.querySelector(".turn-error")).toBeNull();
    expect(spy).toHaveBeenCalledTimes(2);
  });
});

describe("serviceUrl", () => {
  it("prefers the ?service= query parameter, else the page origin", () => {
    const loc = (search: string, origin: string) =>
      ({ search, origin } as unknown as Location);
    expect(serviceUrl(loc("?service=http://api:9000/", "http://page"))).toBe(
      "http://api:9000",
    );
    expect(serviceUrl(loc("", "http://page:8080"))).toBe("http://page:8080");
  });
});
