// Typed client for the svglab serve HTTP API. No credentials live here:
// all LLM traffic goes through the server.

export interface ChatRequest {
  session_id: string;
  message: string;
  svg?: string;
}

export interface ChatResponse {
  reply: string;
  svg?: string;
  elements_changed?: string[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async checked(response: Response): Promise<Response> {
    if (!response.ok) {
      let detail: unknown;
      try {
        detail = (await response.json()).detail;
      } catch {
        detail = await response.text().catch(() => "");
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async health(): Promise<boolean> {
    try {
      const res = await this.fetchImpl(this.url("/api/health"));
      return res.ok;
    } catch {
      return false;
    }
  }

  /** Upload a raster image; returns canonical SVG text. */
  async convert(file: Blob, filename = "upload.png"): Promise<string> {
    const form = new FormData();
    form.append("file", file, filename);
    const res = await this.checked(
      await this.fetchImpl(this.url("/api/convert"), { method: "POST", body: form }),
    );
    return res.text();
  }

  /** Server-side raster of an SVG document (PNG bytes). */
  async render(svg: string, width = 224, height = 224): Promise<ArrayBuffer> {
    const res = await this.checked(
      await this.fetchImpl(this.url("/api/render"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ svg, width, height }),
      }),
    );
    return res.arrayBuffer();
  }

  /** Referring selection: instruction text to matching element ids. */
  async select(svg: string, instruction: string): Promise<string[]> {
    const res = await this.checked(
      await this.fetchImpl(this.url("/api/select"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ svg, instruction }),
      }),
    );
    const body = (await res.json()) as { ids: string[] };
    return body.ids;
  }

  async chat(request: ChatRequest): Promise<ChatResponse> {
    const res = await this.checked(
      await this.fetchImpl(this.url("/api/chat"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
      }),
    );
    return (await res.json()) as ChatResponse;
  }
}
