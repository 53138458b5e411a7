/** Word-chip feedback model.
 *
 * Words only: character scores exist in the response but stay hidden by
 * default, since character-level feedback is unreliable without a
 * grapheme-phoneme mapping. "Partial" is surfaced to learners as
 * "almost" with the numeric score on hover.
 */

import { parseScoreResponse, type Verdict } from './types'

export interface Chip {
  text: string
  verdict: Verdict
  score: number
  /** hover text: "almost" needs the score to mean anything */
  tooltip: string
}

export type Feedback =
  | { kind: 'chips'; chips: Chip[]; effectiveT: number }
  | { kind: 'empty' }
  | { kind: 'error'; message: string }

export const VERDICT_LABEL: Record<Verdict, string> = {
  correct: 'correct',
  partial: 'almost',
  mispronounced: 'try again',
}

export function buildFeedback(data: unknown): Feedback {
  let response
  try {
    response = parseScoreResponse(data)
  } catch (err) {
    return { kind: 'error', message: err instanceof Error ? err.message : String(err) }
  }
  if (response.words.length === 0) {
    return { kind: 'empty' }
  }
  const chips = response.words.map((w) => ({
    text: w.text,
    verdict: w.verdict,
    score: w.score,
    tooltip: `${VERDICT_LABEL[w.verdict]} - score ${w.score.toFixed(2)}`,
  }))
  return { kind: 'chips', chips, effectiveT: response.config.T }
}

export function countMispronounced(feedback: Feedback): number {
  if (feedback.kind !== 'chips') return 0
  return feedback.chips.filter((c) => c.verdict === 'mispronounced').length
}
