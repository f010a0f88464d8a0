// End-to-end smoke test against a real `svglab serve` process running the
// scripted mock responder. Headless: exercises the same client/session code
// the browser uses, without a DOM.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { PlaygroundSession } from "../src/session";

const HERE = fileURLToPath(new URL(".", import.meta.url));
const PORT = 18000 + Math.floor(Math.random() * 10_000);
const BASE = `http://127.0.0.1:${PORT}`;

const CANDIDATE_SVG =
  '<svg xmlns="http://www.w3.org/2000/svg" width="28" height="28" viewBox="0 0 28 28">\n' +
  '<rect id="backdrop" x="0" y="0" width="28" height="28" fill="#FFFFFF"/>\n' +
  '<rect id="mark" x="8" y="4" width="12" height="20" fill="#FF0000"/>\n' +
  "</svg>\n";

let server: ChildProcess;

async function waitForHealth(api: ApiClient, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await api.health()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`server did not become healthy on ${BASE}`);
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "svglab-smoke-"));
  const fixture = join(dir, "replies.jsonl");
  writeFileSync(
    fixture,
    JSON.stringify({ response: `Recolored the mark for you.\n${CANDIDATE_SVG}` }) + "\n",
  );
  server = spawn(
    "svglab",
    ["serve", "--port", String(PORT), "--responder", "scripted",
     "--fixture", fixture],
    { stdio: "ignore" },
  );
  await waitForHealth(new ApiClient(BASE));
}, 40_000);

afterAll(() => {
  server?.kill();
});

describe("playground against serve (scripted responder)", () => {
  it("upload digit PNG -> SVG renders; edit -> candidate diff; apply/undo round-trips", async () => {
    const api = new ApiClient(BASE);
    const session = new PlaygroundSession(api, "smoke");

    // upload a digit PNG and get a rendering of the converted document
    const png = readFileSync(join(HERE, "fixtures", "digit.png"));
    const svg = await session.uploadRaster(new Blob([png], { type: "image/png" }), "digit.png");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(session.svg).toBe(svg);
    const rendered = await api.render(session.svg!, 112, 112);
    const magic = new Uint8Array(rendered.slice(0, 8));
    expect(Array.from(magic)).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

    // send an edit instruction; the scripted reply stages a candidate diff
    const uploaded = session.svg!;
    await session.sendMessage("make the mark red");
    expect(session.candidate).not.toBeNull();
    expect(session.candidate!.changedIds.length).toBeGreaterThan(0);
    expect(session.svg).toBe(uploaded); // not applied yet

    // apply, then undo restores the byte-identical document
    session.applyCandidate();
    expect(session.svg).toContain('id="mark"');
    session.undo();
    expect(session.svg).toBe(uploaded);
  }, 30_000);

  it("referring selection helper answers over the API", async () => {
    const api = new ApiClient(BASE);
    const ids = await api.select(CANDIDATE_SVG, "select the red rect");
    expect(ids).toEqual(["mark"]);
  });

  it("invalid SVG yields 422 with diagnostics", async () => {
    const api = new ApiClient(BASE);
    await expect(api.render("<svg", 10, 10)).rejects.toMatchObject({ status: 422 });
  });
});
