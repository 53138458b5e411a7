/** Wire types of the scoring service. */

export type Verdict = 'correct' | 'partial' | 'mispronounced'

export interface WordResult {
  text: string
  score: number
  verdict: Verdict
}

export interface TokenResult {
  ch: string
  score: number
  verdict: Verdict
  frame: number
}

export interface EffectiveConfig {
  T: number
  k: number
  theta: number
  partial: [number, number] | null
}

export interface ScoreResponse {
  target: string
  tokens: TokenResult[]
  words: WordResult[]
  config: EffectiveConfig
}

export interface Phrase {
  id: string
  text: string
}

export interface ScoreRequest {
  target: string
  logits_id?: string
  logits_inline?: string
  audio?: string
  overrides?: { T?: number; k?: number; theta?: number }
}

const VERDICTS: ReadonlySet<string> = new Set(['correct', 'partial', 'mispronounced'])

/** Validate a service response; throws on anything malformed so the UI
 * can show an error banner instead of rendering garbage. */
export function parseScoreResponse(data: unknown): ScoreResponse {
  if (typeof data !== 'object' || data === null) {
    throw new Error('response is not an object')
  }
  const body = data as Record<string, unknown>
  if (typeof body.target !== 'string' || !Array.isArray(body.words)) {
    throw new Error('response missing target or words')
  }
  for (const word of body.words) {
    const w = word as Record<string, unknown>
    if (typeof w.text !== 'string' || typeof w.score !== 'number' || !VERDICTS.has(String(w.verdict))) {
      throw new Error('malformed word entry')
    }
  }
  const config = body.config as Record<string, unknown> | undefined
  if (!config || typeof config.T !== 'number') {
    throw new Error('response missing effective config')
  }
  return data as ScoreResponse
}
