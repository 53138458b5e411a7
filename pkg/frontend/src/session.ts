/** Practice session state.
 *
 * Attempts are append-only; the difficulty temperature is a per-session
 * value that rides on each score request as an override and never
 * touches service-side state. The session survives page reloads via
 * localStorage and is cleared only by an explicit action.
 */

import type { EffectiveConfig, Verdict } from './types'

export const T_MIN = 0
export const T_MAX = 100
export const DEFAULT_T = 10

export interface Attempt {
  timestamp: number
  config: EffectiveConfig
  verdicts: Verdict[]
}

export interface PracticeSession {
  phraseId: string | null
  currentT: number
  attempts: Attempt[]
}

export interface StorageLike {
  getItem(key: string): string | null
  setItem(key: string, value: string): void
  removeItem(key: string): void
}

const STORAGE_KEY = 'pronscore:session'

export function newSession(phraseId: string | null = null): PracticeSession {
  return { phraseId, currentT: DEFAULT_T, attempts: [] }
}

function clampT(value: number): number {
  if (Number.isNaN(value)) return DEFAULT_T
  return Math.min(T_MAX, Math.max(T_MIN, value))
}

/** Shift the difficulty temperature; prior attempts are untouched. */
export function adjustDifficulty(session: PracticeSession, delta: number): PracticeSession {
  return { ...session, currentT: clampT(session.currentT + delta) }
}

export function setDifficulty(session: PracticeSession, value: number): PracticeSession {
  return { ...session, currentT: clampT(value) }
}

export function selectPhrase(session: PracticeSession, phraseId: string): PracticeSession {
  return { ...session, phraseId }
}

export function recordAttempt(session: PracticeSession, attempt: Attempt): PracticeSession {
  return { ...session, attempts: [...session.attempts, attempt] }
}

function defaultStorage(): StorageLike | null {
  try {
    return typeof localStorage === 'undefined' ? null : localStorage
  } catch {
    return null
  }
}

export function saveSession(session: PracticeSession, storage: StorageLike | null = defaultStorage()): void {
  try {
    storage?.setItem(STORAGE_KEY, JSON.stringify(session))
  } catch {
    // persistence is best-effort (private browsing, quota)
  }
}

export function loadSession(storage: StorageLike | null = defaultStorage()): PracticeSession {
  try {
    const raw = storage?.getItem(STORAGE_KEY)
    if (!raw) return newSession()
    const parsed = JSON.parse(raw) as Partial<PracticeSession>
    if (typeof parsed !== 'object' || parsed === null || !Array.isArray(parsed.attempts)) {
      return newSession()
    }
    return {
      phraseId: typeof parsed.phraseId === 'string' ? parsed.phraseId : null,
      currentT: clampT(typeof parsed.currentT === 'number' ? parsed.currentT : DEFAULT_T),
      attempts: parsed.attempts as Attempt[],
    }
  } catch {
    return newSession()
  }
}

export function clearSession(storage: StorageLike | null = defaultStorage()): void {
  try {
    storage?.removeItem(STORAGE_KEY)
  } catch {
    // nothing to clear
  }
}
