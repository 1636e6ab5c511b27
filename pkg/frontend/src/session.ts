/**
 * Annotation session model.
 *
 * A session wraps one test file: a fixed list of words and one mark slot
 * ("gap") after each word. Words are never editable and marks are restricted
 * to the three legal characters, so every export is guaranteed to pass the
 * scorer's word-alignment check.
 */

export type GapMark = "none" | "period" | "comma" | "question";

export const MARK_CHARS: Record<GapMark, string> = {
  none: "",
  period: ".",
  comma: ",",
  question: "?",
};

const ILLEGAL_IN_WORDS = /[.,?]/;

export interface AnnotationSession {
  testId: string;
  /** The test's words, in order; immutable for the life of the session. */
  readonly words: readonly string[];
  /** One mark per word: the gap following that word. */
  marks: GapMark[];
  /** Gap index the keyboard cursor sits on. */
  cursor: number;
  /** Participant has declared the annotation finished. */
  completed: boolean;
}

/** Raised when a test file cannot be turned into a session. */
export class LoadError extends Error {}

/**
 * Parse a test file (words separated by whitespace, no punctuation) into a
 * fresh session with every gap unmarked.
 */
export function loadTest(testId: string, fileText: string): AnnotationSession {
  const trimmed = fileText.trim();
  if (trimmed.length === 0) {
    throw new LoadError("test file is empty");
  }
  const words = trimmed.split(/\s+/);
  const bad = words.find((w) => ILLEGAL_IN_WORDS.test(w));
  if (bad !== undefined) {
    throw new LoadError(`test file already contains punctuation: "${bad}"`);
  }
  return {
    testId,
    words,
    marks: words.map(() => "none"),
    cursor: 0,
    completed: false,
  };
}

export function gapCount(session: AnnotationSession): number {
  return session.words.length;
}

export function setMark(session: AnnotationSession, gap: number, mark: GapMark): void {
  if (gap < 0 || gap >= gapCount(session)) {
    throw new RangeError(`gap ${gap} out of range`);
  }
  session.marks[gap] = mark;
}

export function clearMark(session: AnnotationSession, gap: number): void {
  setMark(session, gap, "none");
}

export function moveCursor(session: AnnotationSession, gap: number): void {
  const last = gapCount(session) - 1;
  session.cursor = Math.min(Math.max(gap, 0), last);
}

export function markedCount(session: AnnotationSession): number {
  return session.marks.filter((m) => m !== "none").length;
}

/**
 * Render the annotated return: words joined by single spaces, each gap's mark
 * attached to the word before it. Stripping '.', ',' and '?' from the output
 * reproduces the word list exactly.
 */
export function exportAnnotation(session: AnnotationSession): string {
  return session.words.map((w, i) => w + MARK_CHARS[session.marks[i] ?? "none"]).join(" ");
}

interface SavedSession {
  testId: string;
  words: string[];
  marks: GapMark[];
  cursor: number;
  completed: boolean;
}

export function serializeSession(session: AnnotationSession): string {
  const saved: SavedSession = {
    testId: session.testId,
    words: [...session.words],
    marks: [...session.marks],
    cursor: session.cursor,
    completed: session.completed,
  };
  return JSON.stringify(saved);
}

const MARK_VALUES: readonly string[] = Object.keys(MARK_CHARS);

/** Rebuild a session from an autosave; throws LoadError on anything fishy. */
export function restoreSession(json: string): AnnotationSession {
  let saved: SavedSession;
  try {
    saved = JSON.parse(json) as SavedSession;
  } catch {
    throw new LoadError("saved session is not valid JSON");
  }
  if (
    typeof saved.testId !== "string" ||
    !Array.isArray(saved.words) ||
    !Array.isArray(saved.marks) ||
    saved.marks.length !== saved.words.length ||
    !saved.marks.every((m) => MARK_VALUES.includes(m))
  ) {
    throw new LoadError("saved session is malformed");
  }
  return {
    testId: saved.testId,
    words: saved.words,
    marks: [...saved.marks],
    cursor: Math.min(Math.max(saved.cursor ?? 0, 0), saved.words.length - 1),
    completed: Boolean(saved.completed),
  };
}
