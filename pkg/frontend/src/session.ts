// Session state machine for the playground. The current SVG text is the
// single source of truth: the render pane and source view always show it.
// Replies carrying SVG become *candidates*; nothing changes until the user
// applies, and every apply pushes the previous document onto the undo stack.

import { ApiClient, ApiError, ChatResponse } from "./api.js";

export const MAX_UPLOAD_BYTES = 5 * 1024 * 1024;

export interface Message {
  role: "user" | "assistant" | "error";
  text: string;
}

export interface Candidate {
  svg: string;
  changedIds: string[];
  reply: string;
}

export class PlaygroundSession {
  readonly sessionId: string;
  svg: string | null = null;
  history: Message[] = [];
  undoStack: string[] = [];
  candidate: Candidate | null = null;
  pending = false;

  constructor(
    private readonly api: ApiClient,
    sessionId?: string,
  ) {
    this.sessionId = sessionId ?? `session-${Math.random().toString(36).slice(2)}`;
  }

  /** Send a chat message; a reply with SVG is staged as a candidate. */
  async sendMessage(text: string): Promise<ChatResponse> {
    if (this.pending) {
      throw new Error("a chat request is already in flight for this session");
    }
    this.pending = true;
    try {
      const response = await this.api.chat({
        session_id: this.sessionId,
        message: text,
        // client is authoritative for the applied document
        svg: this.svg ?? undefined,
      });
      this.history.push({ role: "user", text });
      this.history.push({ role: "assistant", text: response.reply });
      if (response.svg !== undefined) {
        this.candidate = {
          svg: response.svg,
          changedIds: response.elements_changed ?? [],
          reply: response.reply,
        };
      }
      return response;
    } catch (err) {
      // network or server failure: surface it, leave history and svg intact
      this.history.push({ role: "error", text: describeError(err) });
      throw err;
    } finally {
      this.pending = false;
    }
  }

  /** Accept the staged candidate; the previous document becomes undoable. */
  applyCandidate(): void {
    if (!this.candidate) {
      throw new Error("no candidate to apply");
    }
    if (this.svg !== null) {
      this.undoStack.push(this.svg);
    }
    this.svg = this.candidate.svg;
    this.candidate = null;
  }

  rejectCandidate(): void {
    this.candidate = null;
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  /** Restore the previous applied document, byte-identical. */
  undo(): void {
    const previous = this.undoStack.pop();
    if (previous === undefined) {
      throw new Error("nothing to undo");
    }
    this.svg = previous;
    this.candidate = null;
  }

  /** Upload a raster; the converted SVG is loaded as the current document. */
  async uploadRaster(file: Blob, filename = "upload.png"): Promise<string> {
    if (file.size > MAX_UPLOAD_BYTES) {
      throw new Error(
        `file is ${file.size} bytes; the limit is ${MAX_UPLOAD_BYTES}`,
      );
    }
    const svg = await this.api.convert(file, filename);
    if (this.svg !== null) {
      this.undoStack.push(this.svg);
    }
    this.svg = svg;
    this.candidate = null;
    return svg;
  }

  /** Set the document from the editable source view. */
  loadSvgText(svg: string): void {
    if (this.svg !== null && this.svg !== svg) {
      this.undoStack.push(this.svg);
    }
    this.svg = svg;
    this.candidate = null;
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `server rejected the request (HTTP ${err.status}): ${JSON.stringify(err.detail)}`;
  }
  if (err instanceof Error) {
    return err.message;
  }
  return String(err);
}
