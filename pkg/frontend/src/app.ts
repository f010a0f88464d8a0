// DOM wiring. All state lives in PlaygroundSession; this layer only reflects
// it into the page and forwards user actions.

import { ApiClient } from "./api.js";
import { PlaygroundSession, MAX_UPLOAD_BYTES } from "./session.js";

const api = new ApiClient(window.location.origin);
const session = new PlaygroundSession(api);

const el = {
  chatLog: document.getElementById("chat-log") as HTMLDivElement,
  chatInput: document.getElementById("chat-input") as HTMLInputElement,
  sendButton: document.getElementById("send") as HTMLButtonElement,
  renderPane: document.getElementById("render-pane") as HTMLDivElement,
  crossCheck: document.getElementById("cross-check") as HTMLInputElement,
  crossCheckImg: document.getElementById("cross-check-img") as HTMLImageElement,
  source: document.getElementById("source") as HTMLTextAreaElement,
  applySource: document.getElementById("apply-source") as HTMLButtonElement,
  upload: document.getElementById("upload") as HTMLInputElement,
  undoButton: document.getElementById("undo") as HTMLButtonElement,
  candidateBox: document.getElementById("candidate") as HTMLDivElement,
  candidateSummary: document.getElementById("candidate-summary") as HTMLSpanElement,
  applyCandidate: document.getElementById("apply-candidate") as HTMLButtonElement,
  rejectCandidate: document.getElementById("reject-candidate") as HTMLButtonElement,
  banner: document.getElementById("banner") as HTMLDivElement,
};

function showBanner(text: string): void {
  el.banner.textContent = text;
  el.banner.hidden = text === "";
}

async function refresh(): Promise<void> {
  // render pane always shows exactly the session SVG
  el.renderPane.innerHTML = session.svg ?? "<p>No document loaded.</p>";
  el.source.value = session.svg ?? "";
  el.undoButton.disabled = !session.canUndo;
  el.sendButton.disabled = session.pending;

  el.chatLog.replaceChildren(
    ...session.history.map((message) => {
      const row = document.createElement("div");
      row.className = `message ${message.role}`;
      row.textContent = message.text;
      return row;
    }),
  );
  el.chatLog.scrollTop = el.chatLog.scrollHeight;

  if (session.candidate) {
    el.candidateBox.hidden = false;
    const ids = session.candidate.changedIds;
    el.candidateSummary.textContent = ids.length
      ? `candidate changes elements: ${ids.join(", ")}`
      : "candidate replaces the document";
  } else {
    el.candidateBox.hidden = true;
  }

  if (el.crossCheck.checked && session.svg) {
    try {
      const png = await api.render(session.svg, 224, 224);
      const blob = new Blob([png], { type: "image/png" });
      el.crossCheckImg.src = URL.createObjectURL(blob);
      el.crossCheckImg.hidden = false;
    } catch {
      el.crossCheckImg.hidden = true;
    }
  } else {
    el.crossCheckImg.hidden = true;
  }
}

el.sendButton.addEventListener("click", async () => {
  const text = el.chatInput.value.trim();
  if (!text || session.pending) {
    return;
  }
  el.chatInput.value = "";
  showBanner("");
  void refresh();
  try {
    await session.sendMessage(text);
  } catch {
    showBanner("The server could not be reached; your document is unchanged.");
  }
  void refresh();
});

el.chatInput.addEventListener("keydown", (event) => {
  if (event.key === "Enter") {
    el.sendButton.click();
  }
});

el.applyCandidate.addEventListener("click", () => {
  session.applyCandidate();
  void refresh();
});

el.rejectCandidate.addEventListener("click", () => {
  session.rejectCandidate();
  void refresh();
});

el.undoButton.addEventListener("click", () => {
  session.undo();
  void refresh();
});

el.applySource.addEventListener("click", () => {
  session.loadSvgText(el.source.value);
  void refresh();
});

el.upload.addEventListener("change", async () => {
  const file = el.upload.files?.[0];
  if (!file) {
    return;
  }
  showBanner("");
  if (file.size > MAX_UPLOAD_BYTES) {
    showBanner(`File is too large (limit ${MAX_UPLOAD_BYTES / 1024 / 1024} MB).`);
    el.upload.value = "";
    return;
  }
  try {
    await session.uploadRaster(file, file.name);
  } catch (err) {
    showBanner(`Conversion failed: ${err instanceof Error ? err.message : err}`);
  }
  el.upload.value = "";
  void refresh();
});

el.crossCheck.addEventListener("change", () => void refresh());

void refresh();
