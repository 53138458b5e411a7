/** Thin client for the scoring service. The UI never computes verdicts
 * itself; everything shown comes from these two endpoints. */

import { parseScoreResponse, type Phrase, type ScoreRequest, type ScoreResponse } from './types'

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail)
  }
}

export class ScoringClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async phrases(): Promise<Phrase[]> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/phrases`)
    if (!resp.ok) throw new ServiceError(resp.status, `phrase list failed (${resp.status})`)
    return (await resp.json()) as Phrase[]
  }

  async score(request: ScoreRequest): Promise<ScoreResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/score`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(request),
    })
    if (!resp.ok) {
      let detail = `scoring failed (${resp.status})`
      try {
        const body = (await resp.json()) as { detail?: string }
        if (body.detail) detail = body.detail
      } catch {
        // keep the generic message
      }
      throw new ServiceError(resp.status, detail)
    }
    return parseScoreResponse(await resp.json())
  }

  async healthy(): Promise<boolean> {
    try {
      const resp = await this.fetchImpl(`${this.baseUrl}/v1/health`)
      return resp.ok
    } catch {
      return false
    }
  }
}
