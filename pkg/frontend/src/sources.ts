/**
 * Where ASR events come from.
 *
 * Live mode wraps the browser's speech recognizer when one exists. Replay
 * mode feeds a previously captured event log, which is what deterministic
 * demos and the scripted tests use. Both paths hand the app identical
 * event objects, so the rest of the client cannot tell them apart.
 */

import type { AsrEventJson, TokenJson } from './protocol.js';
import type { SessionClock } from './clock.js';

export interface AsrSource {
  start(onEvent: (event: AsrEventJson) => void): void;
  stop(): void;
}

/** Plays back a recorded event log, either instantly or on its own timeline. */
export class ReplaySource implements AsrSource {
  private timers: ReturnType<typeof setTimeout>[] = [];

  constructor(
    private readonly events: AsrEventJson[],
    private readonly mode: 'immediate' | 'timed' = 'immediate',
  ) {}

  start(onEvent: (event: AsrEventJson) => void): void {
    if (this.mode === 'immediate') {
      for (const event of this.events) onEvent(event);
      return;
    }
    for (const event of this.events) {
      const tokens = event.tokens;
      const at = tokens.length ? tokens[tokens.length - 1].end_ms : 0;
      this.timers.push(setTimeout(() => onEvent(event), at));
    }
  }

  stop(): void {
    for (const timer of this.timers) clearTimeout(timer);
    this.timers = [];
  }
}

/** The subset of the webkit speech API this client touches. */
interface BrowserRecognition {
  continuous: boolean;
  interimResults: boolean;
  onresult: ((ev: BrowserRecognitionEvent) => void) | null;
  onend: (() => void) | null;
  start(): void;
  stop(): void;
}

interface BrowserRecognitionEvent {
  resultIndex: number;
  results: ArrayLike<{ isFinal: boolean; 0: { transcript: string } }>;
}

type RecognitionCtor = new () => BrowserRecognition;

export function recognitionAvailable(scope: object): boolean {
  const w = scope as Record<string, unknown>;
  return Boolean(w.SpeechRecognition ?? w.webkitSpeechRecognition);
}

/**
 * Live microphone source. The browser API reports no word timings, so each
 * result's words are spread evenly across the time since that utterance
 * began; key presses are measured on the same clock, which is what the
 * segmenter actually needs from these numbers.
 */
export class LiveSource implements AsrSource {
  private recognition: BrowserRecognition | null = null;
  private utteranceStart = 0;
  private lastIndex = -1;
  private nextUtteranceId = 1;
  private stopping = false;

  constructor(
    private readonly scope: object,
    private readonly clock: SessionClock,
  ) {}

  start(onEvent: (event: AsrEventJson) => void): void {
    const w = this.scope as Record<string, unknown>;
    const Ctor = (w.SpeechRecognition ?? w.webkitSpeechRecognition) as RecognitionCtor;
    const recognition = new Ctor();
    recognition.continuous = true;
    recognition.interimResults = true;
    recognition.onresult = (ev) => {
      for (let i = ev.resultIndex; i < ev.results.length; i++) {
        const result = ev.results[i];
        if (i !== this.lastIndex) {
          // a new utterance began; its words started after the last one ended
          this.lastIndex = i;
          this.utteranceStart = this.clock.now();
          this.nextUtteranceId += 1;
        }
        const text = result[0].transcript.trim();
        if (!text) continue;
        onEvent({
          kind: result.isFinal ? 'final' : 'partial',
          utterance_id: this.nextUtteranceId,
          text,
          tokens: spreadTokens(text, this.utteranceStart, this.clock.now()),
        });
      }
    };
    recognition.onend = () => {
      // the engine times out on silence; keep listening until told to stop
      if (!this.stopping) recognition.start();
    };
    this.recognition = recognition;
    this.stopping = false;
    recognition.start();
  }

  stop(): void {
    this.stopping = true;
    this.recognition?.stop();
  }
}

function spreadTokens(text: string, startMs: number, endMs: number): TokenJson[] {
  const words = text.split(/\s+/).filter(Boolean);
  if (!words.length) return [];
  const span = Math.max(endMs - startMs, words.length); // >= 1ms per word
  const step = span / words.length;
  return words.map((word, i) => ({
    text: word,
    start_ms: Math.round(startMs + i * step),
    end_ms: Math.round(startMs + (i + 1) * step),
  }));
}
