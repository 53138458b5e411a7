import { describe, expect, it } from 'vitest'

import { ScoringClient, ServiceError } from '../src/api'
import { attemptToRequest } from '../src/audio'

const okJson = (body: unknown) =>
  new Response(JSON.stringify(body), { status: 200, headers: { 'content-type': 'application/json' } })

describe('ScoringClient', () => {
  it('fetches phrases from the service base url', async () => {
    const calls: string[] = []
    const client = new ScoringClient('http://svc:1', async (input) => {
      calls.push(input)
      return okJson([{ id: 'dyr', text: 'dyr' }])
    })
    const phrases = await client.phrases()
    expect(calls).toEqual(['http://svc:1/v1/phrases'])
    expect(phrases).toEqual([{ id: 'dyr', text: 'dyr' }])
  })

  it('posts score requests as JSON and validates the response', async () => {
    let seenBody = ''
    const client = new ScoringClient('http://svc:1', async (input, init) => {
      seenBody = String(init?.body)
      return okJson({
        target: 'dyr',
        tokens: [],
        words: [{ text: 'dyr', score: 1, verdict: 'correct' }],
        config: { T: 0, k: 3, theta: 0.5, partial: null },
      })
    })
    const resp = await client.score(attemptToRequest('dyr', { kind: 'fixture', logitsId: 'dyr_correct' }, 0))
    expect(JSON.parse(seenBody)).toEqual({
      target: 'dyr',
      logits_id: 'dyr_correct',
      overrides: { T: 0 },
    })
    expect(resp.words[0]!.verdict).toBe('correct')
  })

  it('surfaces service error details', async () => {
    const client = new ScoringClient('http://svc:1', async () =>
      new Response(JSON.stringify({ detail: 'unknown logits_id' }), { status: 404 }),
    )
    await expect(client.score({ target: 'dyr', logits_id: 'nope' })).rejects.toThrowError(ServiceError)
    await expect(client.score({ target: 'dyr', logits_id: 'nope' })).rejects.toThrow('unknown logits_id')
  })

  it('rejects malformed score payloads', async () => {
    const client = new ScoringClient('http://svc:1', async () => okJson({ nonsense: true }))
    await expect(client.score({ target: 'dyr', logits_id: 'x' })).rejects.toThrow(/missing/)
  })

  it('health check never throws', async () => {
    const down = new ScoringClient('http://svc:1', async () => {
      throw new Error('refused')
    })
    expect(await down.healthy()).toBe(false)
  })
})

describe('attemptToRequest', () => {
  it('maps audio attempts to the audio field', () => {
    const req = attemptToRequest('dyr', { kind: 'audio', base64: 'QUJD' }, 25)
    expect(req).toEqual({ target: 'dyr', audio: 'QUJD', overrides: { T: 25 } })
  })
})
