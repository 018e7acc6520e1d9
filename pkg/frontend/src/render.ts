/** Pure DOM rendering for chat turns: highlights and attention heatmap. */

import type { RespondPayload } from "./api.js";

export interface TurnView {
  userMessage: string;
  payload: RespondPayload;
  timestamp: Date;
}

/**
 * Highlight intensity in [0, 1]: monotone in the token's affect norm,
 * exactly 0 for norm 0 so neutral tokens are unhighlighted.
 */
export function highlightIntensity(norm: number, maxNorm: number): number {
  if (norm <= 0 || maxNorm <= 0) return 0;
  return Math.min(1, norm / maxNorm);
}

/** Row-normalized cell shades: per row, darkest cell = row maximum. */
export function rowShades(matrix: number[][]): number[][] {
  return matrix.map((row) => {
    const max = Math.max(...row);
    if (!(max > 0)) return row.map(() => 0);
    return row.map((v) => Math.max(0, v) / max);
  });
}

function clampByte(x: number): number {
  return Math.round(Math.max(0, Math.min(1, x)) * 255);
}

/** Darker = larger: interpolate white (0) -> dark blue (1). */
export function shadeColor(shade: number): string {
  const t = Math.max(0, Math.min(1, shade));
  const r = clampByte(1 - 0.85 * t);
  const g = clampByte(1 - 0.75 * t);
  const b = clampByte(1 - 0.45 * t);
  return `rgb(${r}, ${g}, ${b})`;
}

export function renderResponseTokens(doc: Document, payload: RespondPayload): HTMLElement {
  const p = doc.createElement("p");
  p.className = "response-tokens";
  const maxNorm = Math.max(...payload.affect_norms, 0);
  payload.tokens.forEach((tok, i) => {
    const span = doc.createElement("span");
    span.textContent = tok;
    span.className = "token";
    const intensity = highlightIntensity(payload.affect_norms[i], maxNorm);
    if (intensity > 0) {
      span.classList.add("affect-highlight");
      span.style.backgroundColor = `rgba(255, 170, 60, ${(0.15 + 0.85 * intensity).toFixed(3)})`;
      span.title = `affect norm ${payload.affect_norms[i].toFixed(2)}`;
    }
    p.appendChild(span);
    if (i < payload.tokens.length - 1) p.appendChild(doc.createTextNode(" "));
  });
  return p;
}

/**
 * Column labels for the heatmap. The service consumes a preprocessed form
 * of the message, so the user's words are used only when the count matches
 * the matrix width; otherwise positional labels keep the axes honest.
 */
export function columnLabels(userMessage: string, width: number): string[] {
  const words = userMessage.trim().split(/\s+/).filter((w) => w.length > 0);
  if (words.length === width) return words;
  return Array.from({ length: width }, (_, i) => `in ${i + 1}`);
}

export function renderHeatmap(doc: Document, turn: TurnView): HTMLElement | null {
  const matrix = turn.payload.attention;
  if (!matrix || matrix.length === 0) return null;
  const rows = matrix.slice(0, turn.payload.tokens.length);
  const shades = rowShades(rows);
  const cols = columnLabels(turn.userMessage, rows[0]?.length ?? 0);

  const table = doc.createElement("table");
  table.className = "heatmap";
  const head = doc.createElement("tr");
  head.appendChild(doc.createElement("th")); // corner
  for (const label of cols) {
    const th = doc.createElement("th");
    th.textContent = label;
    th.scope = "col";
    head.appendChild(th);
  }
  table.appendChild(head);

  rows.forEach((row, r) => {
    const tr = doc.createElement("tr");
    const th = doc.createElement("th");
    th.textContent = turn.payload.tokens[r];
    th.scope = "row";
    tr.appendChild(th);
    row.forEach((value, c) => {
      const td = doc.createElement("td");
      td.className = "heatmap-cell";
      td.style.backgroundColor = shadeColor(shades[r][c]);
      td.title = value.toFixed(3);
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });
  return table;
}

export function renderTurn(doc: Document, turn: TurnView): HTMLElement {
  const div = doc.createElement("div");
  div.className = "turn";

  const user = doc.createElement("p");
  user.className = "user-message";
  user.textContent = turn.userMessage;
  div.appendChild(user);

  div.appendChild(renderResponseTokens(doc, turn.payload));

  const meta = doc.createElement("p");
  meta.className = "turn-meta";
  const bits = [`affect score ${turn.payload.affect_score.toFixed(2)}`];
  if (turn.payload.truncated) bits.push("input truncated");
  meta.textContent = bits.join(" · ");
  div.appendChild(meta);

  const heatmap = renderHeatmap(doc, turn);
  if (heatmap) div.appendChild(heatmap);
  return div;
}

export function renderErrorTurn(doc: Document, message: string, onRetry: () => void): HTMLElement {
  const div = doc.createElement("div");
  div.className = "turn turn-error";
  const p = doc.createElement("p");
  p.className = "error-message";
  p.textContent = message;
  div.appendChild(p);
  const btn = doc.createElement("button");
  btn.className = "retry-button";
  btn.textContent = "Retry";
  btn.addEventListener("click", onRetry);
  div.appendChild(btn);
  return div;
}
