/**
 * Autosave: every change is written under a per-test key so a 10-15 minute
 * session survives reloads and accidental tab closes. The storage backend is
 * injected so tests can use a plain object instead of window.localStorage.
 */

import type { AnnotationSession } from "./session.js";
import { LoadError, restoreSession, serializeSession } from "./session.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const KEY_PREFIX = "repunct-annotator/";

function keyFor(testId: string): string {
  return KEY_PREFIX + testId;
}

export function saveSession(storage: StorageLike, session: AnnotationSession): void {
  storage.setItem(keyFor(session.testId), serializeSession(session));
}

/**
 * Restore the autosave for a test, or null when there is none or it is
 * unusable (corrupt saves are discarded rather than blocking a fresh start).
 */
export function loadSavedSession(storage: StorageLike, testId: string): AnnotationSession | null {
  const raw = storage.getItem(keyFor(testId));
  if (raw === null) {
    return null;
  }
  try {
    return restoreSession(raw);
  } catch (error) {
    if (error instanceof LoadError) {
      storage.removeItem(keyFor(testId));
      return null;
    }
    throw error;
  }
}

export function clearSavedSession(storage: StorageLike, testId: string): void {
  storage.removeItem(keyFor(testId));
}
