/** DOM wiring. All state changes go through the pure helpers in
 * session.ts / feedback.ts; this file only moves data between them and
 * the page. At most one score request is in flight: submit stays
 * disabled until the previous response lands. */

import { ScoringClient, ServiceError } from './api'
import {
  attemptToRequest,
  captureFromFile,
  captureFromMic,
  fixturesForPhrase,
  MicError,
  type CapturedAttempt,
} from './audio'
import { buildFeedback, VERDICT_LABEL, type Feedback } from './feedback'
import {
  clearSession,
  loadSession,
  recordAttempt,
  saveSession,
  selectPhrase,
  setDifficulty,
  T_MAX,
  T_MIN,
  type PracticeSession,
} from './session'
import type { Phrase } from './types'

interface AppConfig {
  serviceUrl: string
  demoMode: boolean
}

function readConfig(): AppConfig {
  const params = new URLSearchParams(location.search)
  return {
    serviceUrl: params.get('service') ?? 'http://127.0.0.1:8570',
    demoMode: params.get('demo') !== 'off',
  }
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

function renderFeedback(feedback: Feedback, container: HTMLElement): void {
  container.replaceChildren()
  if (feedback.kind === 'error') {
    const banner = document.createElement('div')
    banner.className = 'banner error'
    banner.textContent = `could not read the scoring response: ${feedback.message}`
    container.appendChild(banner)
    return
  }
  if (feedback.kind === 'empty') {
    const notice = document.createElement('div')
    notice.className = 'banner'
    notice.textContent = 'nothing to score'
    container.appendChild(notice)
    return
  }
  for (const chip of feedback.chips) {
    const span = document.createElement('span')
    span.className = `chip ${chip.verdict}`
    span.textContent = chip.text
    span.title = chip.tooltip
    container.appendChild(span)
  }
  const note = document.createElement('div')
  note.className = 'meta'
  note.textContent = `difficulty T=${feedback.effectiveT}`
  container.appendChild(note)
}

function renderHistory(session: PracticeSession, container: HTMLElement): void {
  container.replaceChildren()
  for (const attempt of [...session.attempts].reverse()) {
    const row = document.createElement('li')
    const when = new Date(attempt.timestamp).toLocaleTimeString()
    const verdicts = attempt.verdicts.map((v) => VERDICT_LABEL[v]).join(', ')
    row.textContent = `${when} (T=${attempt.config.T}): ${verdicts}`
    container.appendChild(row)
  }
}

export async function startApp(): Promise<void> {
  const config = readConfig()
  const client = new ScoringClient(config.serviceUrl)
  let session = loadSession()
  let pending = false

  const phraseSelect = el<HTMLSelectElement>('phrase')
  const fixtureSelect = el<HTMLSelectElement>('fixture')
  const fileInput = el<HTMLInputElement>('file')
  const micButton = el<HTMLButtonElement>('mic')
  const submitButton = el<HTMLButtonElement>('submit')
  const slider = el<HTMLInputElement>('difficulty')
  const sliderValue = el<HTMLSpanElement>('difficulty-value')
  const feedbackBox = el<HTMLDivElement>('feedback')
  const historyList = el<HTMLUListElement>('history')
  const statusBox = el<HTMLDivElement>('status')
  const clearButton = el<HTMLButtonElement>('clear')

  slider.min = String(T_MIN)
  slider.max = String(T_MAX)

  let phrases: Phrase[] = []
  try {
    phrases = await client.phrases()
  } catch {
    statusBox.textContent = `scoring service unreachable at ${config.serviceUrl}`
    statusBox.className = 'banner error'
    return
  }

  let capturedAudio: CapturedAttempt | null = null

  const syncControls = () => {
    slider.value = String(session.currentT)
    sliderValue.textContent = String(session.currentT)
    phraseSelect.replaceChildren(
      ...phrases.map((p) => new Option(p.text, p.id, false, p.id === session.phraseId)),
    )
    const phraseId = session.phraseId ?? phrases[0]?.id ?? ''
    fixtureSelect.replaceChildren(
      ...fixturesForPhrase(phraseId).map((f) => new Option(f.label, f.id)),
    )
    fixtureSelect.parentElement!.hidden = !config.demoMode || fixtureSelect.length === 0
    renderHistory(session, historyList)
  }

  if (!session.phraseId && phrases.length > 0) {
    session = selectPhrase(session, phrases[0]!.id)
  }
  syncControls()

  phraseSelect.addEventListener('change', () => {
    session = selectPhrase(session, phraseSelect.value)
    saveSession(session)
    syncControls()
  })

  slider.addEventListener('input', () => {
    session = setDifficulty(session, Number(slider.value))
    saveSession(session)
    sliderValue.textContent = String(session.currentT)
  })

  fileInput.addEventListener('change', async () => {
    const file = fileInput.files?.[0]
    if (file) {
      capturedAudio = await captureFromFile(file)
      statusBox.textContent = `attempt loaded from ${file.name}`
      statusBox.className = 'banner'
    }
  })

  micButton.addEventListener('click', async () => {
    statusBox.textContent = 'recording 4 seconds...'
    statusBox.className = 'banner'
    try {
      capturedAudio = await captureFromMic()
      statusBox.textContent = 'recording captured'
    } catch (err) {
      capturedAudio = null
      statusBox.textContent = err instanceof MicError ? err.message : String(err)
      statusBox.className = 'banner error'
    }
  })

  clearButton.addEventListener('click', () => {
    clearSession()
    session = loadSession()
    if (phrases.length > 0) session = selectPhrase(session, phrases[0]!.id)
    feedbackBox.replaceChildren()
    syncControls()
  })

  submitButton.addEventListener('click', async () => {
    if (pending) return
    const phrase = phrases.find((p) => p.id === session.phraseId)
    if (!phrase) return
    const attempt: CapturedAttempt | null =
      config.demoMode && fixtureSelect.value
        ? { kind: 'fixture', logitsId: fixtureSelect.value }
        : capturedAudio
    if (!attempt) {
      statusBox.textContent = 'record, upload, or pick a demo attempt first'
      statusBox.className = 'banner error'
      return
    }
    pending = true
    submitButton.disabled = true
    try {
      const response = await client.score(
        attemptToRequest(phrase.text, attempt, session.currentT),
      )
      const feedback = buildFeedback(response)
      renderFeedback(feedback, feedbackBox)
      if (feedback.kind === 'chips') {
        session = recordAttempt(session, {
          timestamp: Date.now(),
          config: response.config,
          verdicts: response.words.map((w) => w.verdict),
        })
        saveSession(session)
        renderHistory(session, historyList)
      }
      statusBox.textContent = ''
      statusBox.className = ''
    } catch (err) {
      const message = err instanceof ServiceError ? err.message : 'scoring request failed'
      renderFeedback({ kind: 'error', message }, feedbackBox)
    } finally {
      pending = false
      submitButton.disabled = false
    }
  })
}

if (typeof document !== 'undefined' && document.getElementById('phrase')) {
  startApp().catch((err) => console.error(err))
}
