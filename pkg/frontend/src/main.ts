/**
 * DOM wiring for the annotator page. All annotation logic lives in
 * session.ts/keyboard.ts; this file only renders state and forwards events.
 * The page is fully static: tests are opened from disk and returns are
 * downloaded as files, no network anywhere.
 */

import { handleKey } from "./keyboard.js";
import type { AnnotationSession, GapMark } from "./session.js";
import {
  LoadError,
  MARK_CHARS,
  exportAnnotation,
  gapCount,
  loadTest,
  markedCount,
  moveCursor,
  setMark,
} from "./session.js";
import { clearSavedSession, loadSavedSession, saveSession } from "./storage.js";

let session: AnnotationSession | null = null;

const el = {
  fileInput: document.getElementById("test-file") as HTMLInputElement,
  status: document.getElementById("status") as HTMLElement,
  text: document.getElementById("text") as HTMLElement,
  progress: document.getElementById("progress") as HTMLElement,
  exportButton: document.getElementById("export") as HTMLButtonElement,
  completed: document.getElementById("completed") as HTMLInputElement,
  discard: document.getElementById("discard") as HTMLButtonElement,
  toolbar: document.getElementById("toolbar") as HTMLElement,
};

function setStatus(message: string, isError = false): void {
  el.status.textContent = message;
  el.status.classList.toggle("error", isError);
}

function persist(): void {
  if (session) {
    saveSession(window.localStorage, session);
  }
}

function render(): void {
  el.text.replaceChildren();
  if (!session) {
    el.progress.textContent = "";
    el.exportButton.disabled = true;
    el.completed.disabled = true;
    el.discard.disabled = true;
    return;
  }
  const current = session;
  current.words.forEach((word, i) => {
    const wordSpan = document.createElement("span");
    wordSpan.className = "word";
    wordSpan.textContent = word;
    el.text.append(wordSpan);

    const gap = document.createElement("button");
    gap.type = "button";
    gap.className = "gap";
    const mark = current.marks[i] ?? "none";
    gap.dataset.mark = mark;
    gap.textContent = MARK_CHARS[mark] || " ";
    if (i === current.cursor) {
      gap.classList.add("cursor");
    }
    gap.addEventListener("click", () => {
      moveCursor(current, i);
      refresh();
    });
    el.text.append(gap);
    el.text.append(document.createTextNode(" "));
  });
  el.progress.textContent =
    `${markedCount(current)} marks over ${gapCount(current)} words` +
    (current.completed ? " — marked complete" : "");
  el.exportButton.disabled = false;
  el.completed.disabled = false;
  el.completed.checked = current.completed;
  el.discard.disabled = false;
}

function refresh(): void {
  persist();
  render();
  const cursorEl = el.text.querySelector(".cursor");
  cursorEl?.scrollIntoView({ block: "nearest" });
}

function testIdFromFileName(name: string): string {
  return name.replace(/\.[^.]*$/, "");
}

el.fileInput.addEventListener("change", async () => {
  const file = el.fileInput.files?.[0];
  if (!file) {
    return;
  }
  const testId = testIdFromFileName(file.name);
  try {
    const text = await file.text();
    const fresh = loadTest(testId, text);
    const saved = loadSavedSession(window.localStorage, testId);
    if (saved && saved.words.join(" ") === fresh.words.join(" ")) {
      session = saved;
      setStatus(`Resumed autosaved progress for ${testId}.`);
    } else {
      session = fresh;
      setStatus(`Loaded ${testId}: ${gapCount(fresh)} words.`);
    }
  } catch (error) {
    session = null;
    setStatus(error instanceof LoadError ? `Cannot load test: ${error.message}` : String(error), true);
  }
  render();
});

document.addEventListener("keydown", (event) => {
  if (!session || event.target === el.fileInput || event.ctrlKey || event.metaKey) {
    return;
  }
  if (handleKey(session, event.key)) {
    event.preventDefault();
    refresh();
  }
});

el.toolbar.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const mark = target.dataset?.markButton as GapMark | undefined;
  if (!session || !mark) {
    return;
  }
  setMark(session, session.cursor, mark);
  if (mark !== "none") {
    moveCursor(session, session.cursor + 1);
  }
  refresh();
});

el.completed.addEventListener("change", () => {
  if (session) {
    session.completed = el.completed.checked;
    refresh();
  }
});

el.discard.addEventListener("click", () => {
  if (session) {
    clearSavedSession(window.localStorage, session.testId);
    session = loadTest(session.testId, session.words.join(" "));
    setStatus("Progress discarded; starting over.");
    refresh();
  }
});

el.exportButton.addEventListener("click", () => {
  if (!session) {
    return;
  }
  const blob = new Blob([exportAnnotation(session) + "\n"], { type: "text/plain;charset=utf-8" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = `${session.testId}.annotated.txt`;
  link.click();
  URL.revokeObjectURL(link.href);
  setStatus(`Exported ${session.testId}.annotated.txt.`);
});

render();
setStatus("Open a test file to begin.");
