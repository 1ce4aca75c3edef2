import type {
  CorrelationDoc,
  EventsDoc,
  LoginResponse,
  SummaryDoc,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchFn = typeof fetch;

// Thin typed wrapper over the review-service routes. Every call after
// login carries the bearer token; a 401 fires onAuthExpired so the app
// can fall back to the login view without losing the selection.
export class ApiClient {
  private token: string | null = null;
  onAuthExpired: (() => void) | null = null;

  constructor(
    private base: string,
    private fetchFn: FetchFn = fetch,
  ) {}

  get authenticated(): boolean {
    return this.token !== null;
  }

  clearToken(): void {
    this.token = null;
  }

  async login(user: string, password: string): Promise<LoginResponse> {
    const body = await this.request<LoginResponse>("POST", "/api/login", {
      json: { user, password },
      skipAuth: true,
    });
    this.token = body.token;
    return body;
  }

  summary(group: string, from?: string, to?: string): Promise<SummaryDoc> {
    return this.request("GET", "/api/summary", {
      query: { group, from, to },
    });
  }

  events(date: string, hour: number, group: string): Promise<EventsDoc> {
    return this.request("GET", "/api/events", {
      query: { date, hour: String(hour), group },
    });
  }

  submitVerdict(eventId: string, verdict: Verdict, note: string) {
    return this.request<Record<string, unknown>>(
      "POST",
      `/api/events/${encodeURIComponent(eventId)}/verdict`,
      { json: { verdict, note } },
    );
  }

  correlation(): Promise<CorrelationDoc> {
    return this.request("GET", "/api/correlation", {});
  }

  async clipBlob(eventId: string): Promise<Blob> {
    const response = await this.raw(
      "GET",
      `/api/clips/${encodeURIComponent(eventId)}`,
      {},
    );
    return response.blob();
  }

  private async raw(
    method: string,
    path: string,
    opts: {
      query?: Record<string, string | undefined>;
      json?: unknown;
      skipAuth?: boolean;
    },
  ): Promise<Response> {
    const url = new URL(path, this.base);
    for (const [key, value] of Object.entries(opts.query ?? {})) {
      if (value !== undefined) url.searchParams.set(key, value);
    }
    const headers: Record<string, string> = {};
    if (!opts.skipAuth && this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    if (opts.json !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchFn(url.toString(), {
      method,
      headers,
      body: opts.json !== undefined ? JSON.stringify(opts.json) : undefined,
    });
    if (!response.ok) {
      let code = "unknown";
      let message = `HTTP ${response.status}`;
      try {
        const doc = await response.json();
        code = doc.code ?? code;
        message = doc.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (response.status === 401 && !opts.skipAuth) {
        this.token = null;
        this.onAuthExpired?.();
      }
      throw new ApiError(response.status, code, message);
    }
    return response;
  }

  private async request<T>(
    method: string,
    path: string,
    opts: {
      query?: Record<string, string | undefined>;
      json?: unknown;
      skipAuth?: boolean;
    },
  ): Promise<T> {
    const response = await this.raw(method, path, opts);
    return (await response.json()) as T;
  }
}
