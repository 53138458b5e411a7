/** Attempt capture: demo fixtures, file upload, or the microphone.
 *
 * In demo deployments the service runs a file backend over bundled logit
 * containers, so an "attempt" is a fixture id. Against a remote acoustic
 * backend the UI records or uploads audio and forwards the bytes
 * verbatim as base64; decoding is the backend's job.
 */

import type { ScoreRequest } from './types'

export interface DemoFixture {
  id: string
  phraseId: string
  label: string
}

/** Bundled containers shipped with the scoring service package. */
export const DEMO_FIXTURES: DemoFixture[] = [
  { id: 'dyr_correct', phraseId: 'dyr', label: 'dyr - clean reading' },
  { id: 'dyr_yswap', phraseId: 'dyr', label: 'dyr - y sounds like i' },
  { id: 'banan_correct', phraseId: 'banan', label: 'banan - clean reading' },
  { id: 'banan_bswap', phraseId: 'banan', label: 'banan - b sounds like p' },
  { id: 'kanske_correct', phraseId: 'kanske', label: 'kanske - clean reading' },
]

export function fixturesForPhrase(phraseId: string): DemoFixture[] {
  return DEMO_FIXTURES.filter((f) => f.phraseId === phraseId)
}

export type CapturedAttempt =
  | { kind: 'fixture'; logitsId: string }
  | { kind: 'audio'; base64: string }

export function attemptToRequest(
  target: string,
  attempt: CapturedAttempt,
  overrideT: number,
): ScoreRequest {
  const base: ScoreRequest = { target, overrides: { T: overrideT } }
  if (attempt.kind === 'fixture') {
    return { ...base, logits_id: attempt.logitsId }
  }
  return { ...base, audio: attempt.base64 }
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = ''
  for (const b of bytes) binary += String.fromCharCode(b)
  return btoa(binary)
}

export async function captureFromFile(file: Blob): Promise<CapturedAttempt> {
  const buffer = await file.arrayBuffer()
  return { kind: 'audio', base64: bytesToBase64(new Uint8Array(buffer)) }
}

export class MicError extends Error {}

/** Record one attempt from the microphone; rejects with MicError when
 * permission is denied or recording is unsupported. */
export async function captureFromMic(durationMs = 4000): Promise<CapturedAttempt> {
  if (typeof navigator === 'undefined' || !navigator.mediaDevices?.getUserMedia) {
    throw new MicError('microphone recording is not supported in this browser')
  }
  let stream: MediaStream
  try {
    stream = await navigator.mediaDevices.getUserMedia({ audio: true })
  } catch {
    throw new MicError('microphone permission denied')
  }
  try {
    const recorder = new MediaRecorder(stream)
    const blobs: Blob[] = []
    const done = new Promise<void>((resolve) => {
      recorder.ondataavailable = (e) => blobs.push(e.data)
      recorder.onstop = () => resolve()
    })
    recorder.start()
    await new Promise((resolve) => setTimeout(resolve, durationMs))
    recorder.stop()
    await done
    return captureFromFile(new Blob(blobs))
  } finally {
    stream.getTracks().forEach((t) => t.stop())
  }
}
