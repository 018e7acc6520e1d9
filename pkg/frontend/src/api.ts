/** Client for the chat service JSON API. */

export interface RespondPayload {
  response: string;
  tokens: string[];
  affect_norms: number[];
  affect_score: number;
  truncated: boolean;
  latency_ms: number;
  attention?: number[][];
}

export interface HealthPayload {
  status: string;
  checkpoint: string;
}

export class ApiError extends Error {
  constructor(message: string, public readonly status?: number) {
    super(message);
    this.name = "ApiError";
  }
}

function assertPayload(body: unknown): RespondPayload {
  const b = body as Partial<RespondPayload> | null;
  if (
    !b ||
    typeof b.response !== "string" ||
    !Array.isArray(b.tokens) ||
    !Array.isArray(b.affect_norms) ||
    b.tokens.length !== b.affect_norms.length
  ) {
    throw new ApiError("malformed response payload");
  }
  if (b.attention !== undefined) {
    if (!Array.isArray(b.attention) || b.attention.length < b.tokens.length) {
      throw new ApiError("malformed attention matrix");
    }
  }
  return b as RespondPayload;
}

export class ChatClient {
  constructor(public readonly baseUrl: string) {}

  async health(): Promise<HealthPayload> {
    const res = await fetch(`${this.baseUrl}/api/health`);
    if (!res.ok) throw new ApiError(`health check failed (${res.status})`, res.status);
    return (await res.json()) as HealthPayload;
  }

  async respond(message: string, includeAttention = true): Promise<RespondPayload> {
    let res: Response;
    try {
      res = await fetch(`${this.baseUrl}/api/respond`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ message, include_attention: includeAttention }),
      });
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!res.ok) {
      let detail = `request failed (${res.status})`;
      try {
        const body = (await res.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(detail, res.status);
    }
    return assertPayload(await res.json());
  }
}
