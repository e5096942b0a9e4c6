/** Typed client for the karekurucu HTTP API. */
import {
  ApiErrorSchema,
  ClueInput,
  GenOverrides,
  PuzzleDocument,
  PuzzleDocumentSchema,
  Session,
  SessionSchema,
} from "./types";

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
    public details: unknown = null
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function throwFromResponse(response: Response): Promise<never> {
  let payload: unknown = null;
  try {
    payload = await response.json();
  } catch {
    // non-JSON error body; fall through to the generic error
  }
  const parsed = ApiErrorSchema.safeParse(payload);
  if (parsed.success) {
    throw new ApiError(
      parsed.data.code,
      parsed.data.message,
      response.status,
      parsed.data.details
    );
  }
  throw new ApiError("HttpError", `unexpected ${response.status}`, response.status);
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      await throwFromResponse(response);
    }
    return response.json();
  }

  async health(): Promise<boolean> {
    try {
      const body = (await this.request("/health")) as { status?: string };
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  async createSession(inputs: ClueInput[]): Promise<Session> {
    const body = await this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ inputs }),
    });
    return SessionSchema.parse(body);
  }

  async getSession(id: string): Promise<Session> {
    return SessionSchema.parse(await this.request(`/sessions/${id}`));
  }

  async requestClues(id: string): Promise<Session> {
    const body = await this.request(`/sessions/${id}/clues`, { method: "POST" });
    return SessionSchema.parse(body);
  }

  async startGeneration(
    id: string,
    selections: Record<string, string>,
    options: { config?: GenOverrides; expectedVersion?: number } = {}
  ): Promise<Session> {
    const body = await this.request(`/sessions/${id}/puzzle`, {
      method: "POST",
      body: JSON.stringify({
        selections,
        config: options.config ?? {},
        expected_version: options.expectedVersion ?? null,
      }),
    });
    return SessionSchema.parse(body);
  }

  async fetchPuzzle(id: string): Promise<PuzzleDocument> {
    return PuzzleDocumentSchema.parse(
      await this.request(`/sessions/${id}/puzzle.json`)
    );
  }
}
