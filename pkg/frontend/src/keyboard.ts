/**
 * Keyboard handling, factored out of the DOM layer so the whole interaction
 * surface is scriptable in tests. The cursor lives between words:
 * '.', ',' and '?' set the mark on the current gap and advance, Backspace
 * clears, arrows/Home/End/Space move.
 */

import type { AnnotationSession, GapMark } from "./session.js";
import { clearMark, gapCount, moveCursor, setMark } from "./session.js";

const KEY_TO_MARK: Record<string, GapMark> = {
  ".": "period",
  ",": "comma",
  "?": "question",
};

/**
 * Apply one key press to the session. Returns true when the key was
 * recognized and the session may have changed.
 */
export function handleKey(session: AnnotationSession, key: string): boolean {
  const mark = KEY_TO_MARK[key];
  if (mark !== undefined) {
    setMark(session, session.cursor, mark);
    moveCursor(session, session.cursor + 1);
    return true;
  }
  switch (key) {
    case "Backspace": {
      // Undo like a text editor: clear here, or step back onto the previous
      // gap and clear that one.
      if (session.marks[session.cursor] === "none" && session.cursor > 0) {
        moveCursor(session, session.cursor - 1);
      }
      clearMark(session, session.cursor);
      return true;
    }
    case "ArrowLeft":
      moveCursor(session, session.cursor - 1);
      return true;
    case "ArrowRight":
    case " ":
      moveCursor(session, session.cursor + 1);
      return true;
    case "Home":
      moveCursor(session, 0);
      return true;
    case "End":
      moveCursor(session, gapCount(session) - 1);
      return true;
    default:
      return false;
  }
}

/** Run a whole scripted key sequence (test helper and macro support). */
export function handleKeys(session: AnnotationSession, keys: readonly string[]): void {
  for (const key of keys) {
    handleKey(session, key);
  }
}
